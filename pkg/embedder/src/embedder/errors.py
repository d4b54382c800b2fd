class EmbedderError(Exception):
    """Base class for exporter failures."""


class EmptyMatrix(EmbedderError):
    """Pooling requires at least one token row."""


class ModelLoadFailure(EmbedderError):
    def __init__(self, model_id: str, reason: str):
        super().__init__(f"cannot load model {model_id!r}: {reason}")
        self.model_id = model_id


class EncodeFailure(EmbedderError):
    def __init__(self, question_id: str, reason: str):
        super().__init__(f"cannot encode {question_id!r}: {reason}")
        self.question_id = question_id
