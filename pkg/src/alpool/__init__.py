"""Pool-based active learning: query strategies, benchmark loop, and a
human-in-the-loop labeling service."""

from .classifier import Model, TrainConfig, evaluate, fit, predict_proba
from .corpus import (
    Dataset,
    DatasetError,
    Instance,
    LabelSchema,
    Pool,
    init_seed_set,
    load_dataset,
    split_dataset,
)
from .features import (
    SparseVector,
    Vectorizer,
    VectorizerConfig,
    cosine_similarity,
    fit_vectorizer,
    knn,
    vectorize,
)
from .loop import ExperimentConfig, ExperimentResult, IterationRecord, run_experiment, run_suite
from .metrics import LearningCurve, aggregate, auc, mean_rank, render_report
from .oracle import Session, create_session, simulated_label, submit_labels
from .strategies import (
    CAConfig,
    QueryContext,
    contrastive_scores,
    entropy_score,
    kl_divergence,
    least_confidence_score,
    margin_score,
    random_batch,
    select_batch,
)
from .synthetic import make_synthetic_dataset

__version__ = "0.1.0"

__all__ = [
    "CAConfig",
    "Dataset",
    "DatasetError",
    "ExperimentConfig",
    "ExperimentResult",
    "Instance",
    "IterationRecord",
    "LabelSchema",
    "LearningCurve",
    "Model",
    "Pool",
    "QueryContext",
    "Session",
    "SparseVector",
    "TrainConfig",
    "Vectorizer",
    "VectorizerConfig",
    "aggregate",
    "auc",
    "contrastive_scores",
    "cosine_similarity",
    "create_session",
    "entropy_score",
    "evaluate",
    "fit",
    "fit_vectorizer",
    "init_seed_set",
    "kl_divergence",
    "knn",
    "least_confidence_score",
    "load_dataset",
    "make_synthetic_dataset",
    "margin_score",
    "mean_rank",
    "predict_proba",
    "random_batch",
    "render_report",
    "run_experiment",
    "run_suite",
    "select_batch",
    "simulated_label",
    "split_dataset",
    "submit_labels",
    "vectorize",
]
