"""Quality evaluation: automatic metrics, LLM-based QE, and rating analytics."""

from .gemba import (
    SEVERITY_WEIGHTS,
    ErrorSpan,
    QeAnnotation,
    QeError,
    aggregate_qe,
    build_qe_messages,
    gemba_mqm,
    load_exemplars,
    parse_error_reply,
)
from .metrics import (
    MetricError,
    MetricReport,
    bleu,
    chrf,
    meteor_lite,
    render_metric_table,
    score_corpus,
    tokenize,
)
from .sqm import (
    DIMENSIONS,
    KappaReport,
    RatingError,
    SqmBatchPlan,
    SqmRating,
    SummaryRow,
    UndefinedKappaError,
    build_sqm_batches,
    load_ratings_csv,
    rating_summary,
    ratings_from_csv,
    ratings_to_csv,
    weighted_kappa,
)
from .stem import porter_stem

__all__ = [
    "SEVERITY_WEIGHTS", "ErrorSpan", "QeAnnotation", "QeError", "aggregate_qe",
    "build_qe_messages", "gemba_mqm", "load_exemplars", "parse_error_reply",
    "MetricError", "MetricReport", "bleu", "chrf", "meteor_lite",
    "render_metric_table", "score_corpus", "tokenize",
    "DIMENSIONS", "KappaReport", "RatingError", "SqmBatchPlan", "SqmRating",
    "SummaryRow", "UndefinedKappaError", "build_sqm_batches", "load_ratings_csv",
    "rating_summary", "ratings_from_csv", "ratings_to_csv", "weighted_kappa",
    "porter_stem",
]
