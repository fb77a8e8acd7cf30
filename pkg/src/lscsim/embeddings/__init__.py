"""Reference change-detection models: count/PPMI/SVD/SGNS spaces, alignments and measures."""

from .alignment import align_ci, align_op, procrustes_rotation, word_injection
from .grid import ModelGridSpec, plan_jobs, read_predictions, run_grid, write_predictions
from .measures import cosine_distance, lnd
from .sgns import SGNSConfig, train_sgns
from .spaces import CooccurrenceMatrix, EmbeddingSpace, build_count_matrix, ppmi, svd_reduce

__all__ = [
    "CooccurrenceMatrix",
    "EmbeddingSpace",
    "ModelGridSpec",
    "SGNSConfig",
    "align_ci",
    "align_op",
    "build_count_matrix",
    "cosine_distance",
    "lnd",
    "plan_jobs",
    "ppmi",
    "procrustes_rotation",
    "read_predictions",
    "run_grid",
    "svd_reduce",
    "train_sgns",
    "word_injection",
    "write_predictions",
]
