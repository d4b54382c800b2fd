from .export import export_corpus
from .pooling import PoolingSpec, mean_pool, sst_pool

__all__ = ["PoolingSpec", "mean_pool", "sst_pool", "export_corpus"]
