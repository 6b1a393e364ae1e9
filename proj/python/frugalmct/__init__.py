"""Budget-aware selection of multi-label prediction APIs."""

from ._core import (
    FormatError,
    InfeasibleError,
    apply_threshold,
    brute_force_ilp,
    combine_scores,
    ensemble_cost,
    estimate_p_hat,
    f1_score,
    featurize_bounded,
    multilabel_accuracy,
    offline_strategy,
    precision_score,
    run_cli,
    run_online,
    select_sp,
    solve_dual_price,
    synthetic_accuracies,
    write_synthetic_fixture,
)

__all__ = [
    "FormatError",
    "InfeasibleError",
    "apply_threshold",
    "brute_force_ilp",
    "combine_scores",
    "ensemble_cost",
    "estimate_p_hat",
    "f1_score",
    "featurize_bounded",
    "multilabel_accuracy",
    "offline_strategy",
    "precision_score",
    "run_cli",
    "run_online",
    "select_sp",
    "solve_dual_price",
    "synthetic_accuracies",
    "write_synthetic_fixture",
]
