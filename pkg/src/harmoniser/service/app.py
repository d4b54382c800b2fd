"""HTTP facade over the corpus, persisted runs, and the annotation log.

The service never builds indexes or runs model inference; it serves
precomputed artefacts, so every response is a pure projection of the
files on disk and restarting changes nothing.
"""

from __future__ import annotations

from pathlib import Path

from fastapi import FastAPI, Query, Request
from fastapi.responses import JSONResponse

from ..annotations import AnnotationStore, make_annotation
from ..corpus import Corpus, Question, parse_corpus
from ..errors import (
    DuplicateAnnotation,
    HarmoniserError,
    InvalidLabel,
    NoAnnotations,
    SampleTooLarge,
    UnknownQuestion,
    UnknownRun,
)
from ..evaluation import (
    LABELS,
    format_metrics_table,
    label_distribution,
    metrics_to_record,
    sample_for_review,
    topic_match_metrics,
)
from ..pipeline import RankingRun, load_run
from . import schemas

_STATUS_BY_ERROR = [
    (UnknownQuestion, 404),
    (UnknownRun, 404),
    (DuplicateAnnotation, 409),
    (InvalidLabel, 422),
    (SampleTooLarge, 400),
    (NoAnnotations, 404),
]


class RunRepository:
    """Lazy view of the run files in a directory, keyed by run id."""

    def __init__(self, runs_dir: Path):
        self.runs_dir = runs_dir
        self._cache: dict[str, RankingRun] = {}

    def refresh(self) -> None:
        for path in sorted(self.runs_dir.glob("*.jsonl")):
            run_id = path.stem
            if run_id not in self._cache:
                self._cache[run_id] = load_run(path)

    def get(self, run_id: str) -> RankingRun:
        if run_id not in self._cache:
            path = self.runs_dir / f"{run_id}.jsonl"
            if not path.exists():
                raise UnknownRun(run_id)
            self._cache[run_id] = load_run(path)
        return self._cache[run_id]

    def list(self) -> list[RankingRun]:
        self.refresh()
        return [self._cache[r] for r in sorted(self._cache)]


def _question_out(q: Question) -> schemas.QuestionOut:
    return schemas.QuestionOut(
        id=q.id, questionnaire=q.questionnaire, study=q.study, year=q.year,
        text=q.text,
        options=[schemas.ResponseOptionOut(code=o.code, label=o.label)
                 for o in q.options],
        typology=q.typology, topic_top=q.topic.top_level,
        topic_sub=q.topic.sub_topic, is_code_list=q.is_code_list,
    )


def create_app(data_dir: str | Path, corpus: Corpus | None = None) -> FastAPI:
    """Build the service over a data directory.

    Layout: corpus.jsonl, runs/<run_id>.jsonl, annotations.jsonl.
    """
    data_dir = Path(data_dir)
    if corpus is None:
        with open(data_dir / "corpus.jsonl", encoding="utf-8") as f:
            corpus = parse_corpus(f)
    runs = RunRepository(data_dir / "runs")
    annotations = AnnotationStore(data_dir / "annotations.jsonl")

    app = FastAPI(title="harmoniser", version="0.1.0")
    app.state.corpus = corpus
    app.state.runs = runs
    app.state.annotations = annotations

    @app.exception_handler(HarmoniserError)
    async def harmoniser_error(request: Request, exc: HarmoniserError):
        status = 400
        for err_type, code in _STATUS_BY_ERROR:
            if isinstance(exc, err_type):
                status = code
                break
        body = schemas.ErrorBody(code=type(exc).__name__, message=str(exc))
        return JSONResponse(status_code=status, content=body.model_dump())

    def get_question(qid: str) -> Question:
        q = corpus.get(qid)
        if q is None:
            raise UnknownQuestion(qid)
        return q

    @app.get("/api/questions", response_model=schemas.QuestionPage)
    def list_questions(offset: int = Query(0, ge=0),
                       limit: int = Query(50, ge=1, le=500)):
        ids = corpus.ids()
        page = ids[offset:offset + limit]
        return schemas.QuestionPage(
            total=len(ids), offset=offset, limit=limit,
            questions=[_question_out(corpus[qid]) for qid in page],
        )

    @app.get("/api/questions/{question_id}", response_model=schemas.QuestionOut)
    def question_detail(question_id: str):
        return _question_out(get_question(question_id))

    @app.get("/api/runs", response_model=list[schemas.RunInfo])
    def list_runs():
        return [
            schemas.RunInfo(run_id=r.run_id, model=r.model, mode=r.mode,
                            k=r.k, n_queries=len(r.per_query))
            for r in runs.list()
        ]

    @app.get("/api/runs/{run_id}/candidates/{query_id}",
             response_model=schemas.CandidateList)
    def candidates(run_id: str, query_id: str, k: int = Query(10, ge=1)):
        run = runs.get(run_id)
        if query_id not in run.per_query:
            raise UnknownQuestion(query_id)
        ranked = run.per_query[query_id][:k]
        return schemas.CandidateList(
            run_id=run.run_id,
            query=_question_out(get_question(query_id)),
            candidates=[
                schemas.CandidateOut(rank=i, score=score,
                                     question=_question_out(get_question(cid)))
                for i, (cid, score) in enumerate(ranked, start=1)
            ],
        )

    @app.get("/api/sample", response_model=schemas.SampleOut)
    def sample(run_id: str, n: int = Query(203, ge=0), seed: int = 0):
        run = runs.get(run_id)
        pairs = sample_for_review(run, n, seed)
        return schemas.SampleOut(
            run_id=run_id, n=n, seed=seed,
            pairs=[schemas.SamplePair(query_id=q, candidate_id=c)
                   for q, c in pairs],
        )

    @app.post("/api/annotations", response_model=schemas.AnnotationOut,
              status_code=201)
    def submit_annotation(body: schemas.AnnotationIn):
        get_question(body.query_id)
        get_question(body.candidate_id)
        annotation = make_annotation(
            query_id=body.query_id, candidate_id=body.candidate_id,
            label=body.label, annotator=body.annotator, run_id=body.run_id,
        )
        annotations.submit(annotation)
        return schemas.AnnotationOut(
            query_id=annotation.query_id, candidate_id=annotation.candidate_id,
            label=annotation.label, annotator=annotation.annotator,
            run_id=annotation.run_id, timestamp=annotation.timestamp,
        )

    @app.get("/api/annotations/stats", response_model=schemas.LabelStats)
    def annotation_stats(run_id: str | None = None):
        labels = annotations.labels(run_id)
        if labels:
            distribution = label_distribution(labels)
        else:
            distribution = {label: 0.0 for label in LABELS}
        return schemas.LabelStats(run_id=run_id, total=len(labels),
                                  distribution=distribution)

    @app.get("/api/eval/{run_id}", response_model=schemas.EvalOut)
    def evaluate(run_id: str, averaging: str = "macro"):
        run = runs.get(run_id)
        metrics = topic_match_metrics(run, corpus, averaging=averaging)
        record = metrics_to_record(metrics)
        return schemas.EvalOut(
            run_id=run_id, averaging=metrics.averaging,
            n_queries=metrics.n_queries,
            precision=record["precision"], recall=record["recall"],
            f1=record["f1"], accuracy=record["accuracy"],
            per_class={cls: schemas.ClassMetricsOut(**vals)
                       for cls, vals in record["per_class"].items()},
            table=format_metrics_table(metrics, title=f"run {run_id}"),
        )

    return app
