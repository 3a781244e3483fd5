"""Toolkit for adapting pointwise relevance scorers into binary relevance
judges, measuring judge quality (Cohen's kappa, Kendall's tau over system
orderings), and quantifying evaluation bias over curated run sets."""

__version__ = "0.1.0"

from .adapt import (
    SweepObjective,
    SweepResult,
    ThresholdGrid,
    TokenMap,
    TransferPlan,
    apply_transfer,
    judge_direct,
    judge_threshold,
    sweep,
)
from .agreement import (
    ConfusionTable,
    OrderingPair,
    cohen_kappa,
    confusion,
    kendall_tau_a,
    kendall_tau_b,
    system_ordering,
)
from .bias import (
    BiasMatrix,
    BiasReport,
    SystemCatalog,
    baseline_overestimation,
    bias_report,
    cross_evaluate,
    rank_systems,
    scatter_data,
    self_preference,
)
from .errors import JudgekitError
from .metrics import (
    MetricSpec,
    RunEvaluation,
    average_precision,
    canonical_sort,
    evaluate_run,
    judged_at_k,
    ndcg,
    precision_at_k,
    recall_at_k,
    reciprocal_rank,
)
from .trec_io import (
    BinaryQrels,
    GradedQrels,
    Run,
    ScoreRecord,
    ScoreTable,
    binarize,
    load_qrels,
    load_run,
    load_scores,
    parse_qrels,
    parse_run,
    parse_scores,
    write_qrels,
)

__all__ = [
    "__version__",
    "JudgekitError",
    # trec_io
    "GradedQrels", "BinaryQrels", "Run", "ScoreRecord", "ScoreTable",
    "parse_qrels", "parse_run", "parse_scores", "binarize", "write_qrels",
    "load_qrels", "load_run", "load_scores",
    # metrics
    "MetricSpec", "RunEvaluation", "canonical_sort", "average_precision",
    "reciprocal_rank", "ndcg", "precision_at_k", "recall_at_k", "judged_at_k",
    "evaluate_run",
    # agreement
    "ConfusionTable", "OrderingPair", "confusion", "cohen_kappa",
    "kendall_tau_a", "kendall_tau_b", "system_ordering",
    # adapt
    "TokenMap", "ThresholdGrid", "SweepObjective", "SweepResult",
    "TransferPlan", "judge_direct", "judge_threshold", "sweep", "apply_transfer",
    # bias
    "SystemCatalog", "BiasMatrix", "BiasReport", "cross_evaluate",
    "rank_systems", "self_preference", "baseline_overestimation",
    "scatter_data", "bias_report",
]
