"""Fair policies for sequential selection under the Equal Selection criterion."""

__version__ = "0.1.0"

from .binary import PostProcessPolicy, evaluate_policy, solve_es_policy
from .distributions import BinaryJointPMF, CounterfactualModel, ScoreModel
from .dp import DPConfig, DPPolicy, evaluate_dp_policy, feasibility_bound, solve_dp_policy
from .outcome import SelectionOutcome
from .simulator import SimConfig, closed_form_outcome, simulate
from .thresholds import (
    ABOVE_MAX,
    SearchConfig,
    ThresholdPair,
    TimeConstraint,
    evaluate_thresholds,
    search_dp_thresholds,
    search_thresholds,
)

__all__ = [
    "ABOVE_MAX",
    "BinaryJointPMF",
    "CounterfactualModel",
    "DPConfig",
    "DPPolicy",
    "PostProcessPolicy",
    "ScoreModel",
    "SearchConfig",
    "SelectionOutcome",
    "SimConfig",
    "ThresholdPair",
    "TimeConstraint",
    "closed_form_outcome",
    "evaluate_dp_policy",
    "evaluate_policy",
    "evaluate_thresholds",
    "feasibility_bound",
    "search_dp_thresholds",
    "search_thresholds",
    "simulate",
    "solve_dp_policy",
    "solve_es_policy",
]
