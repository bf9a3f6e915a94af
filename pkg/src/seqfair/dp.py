"""Post-processing when only a randomized-response copy of A is available.

Each applicant reports Ã, equal to A with probability e^ε/(1+e^ε). The
decision maker sees Ã and the classifier output r(X, Ã) and accepts with
probability ``beta[ã, k]``. Every selection probability is then linear in
beta with randomized-response mixture weights, so the fair-accuracy problem
reduces to a small LP just like the non-private case.

Residuals are reported in probability units, i.e. as
|Pr{Z=1,A=0,Y=1} - Pr{Z=1,A=1,Y=1}|. The printed form of the constraint
carries an extra positive factor (1+e^ε), which only rescales the residual.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Literal

import numpy as np
from scipy.special import expit

from .binary import KEYS, solve_es_policy
from .distributions import BinaryJointPMF, CounterfactualModel
from .errors import PreconditionError, ValidationError
from .lp import LPProblem, solve
from .outcome import SelectionOutcome

EPSILON_CAP = 700.0
DPTarget = Literal["es", "eo", "none"]


@dataclass(frozen=True)
class DPConfig:
    """Privacy level ε (natural-log scale). Values above 700 use the
    noiseless limit Ã = A, which is numerically indistinguishable anyway."""

    epsilon: float

    def __post_init__(self):
        e = float(self.epsilon)
        if not math.isfinite(e) or e < 0:
            raise ValidationError(f"epsilon must be finite and >= 0, got {self.epsilon!r}")
        object.__setattr__(self, "epsilon", e)

    @property
    def keep_probability(self) -> float:
        """Pr{Ã = A}."""
        return 1.0 if self.epsilon > EPSILON_CAP else float(expit(self.epsilon))

    @property
    def flip_probability(self) -> float:
        return 0.0 if self.epsilon > EPSILON_CAP else float(expit(-self.epsilon))

    def channel(self) -> np.ndarray:
        """``w[at, a]`` = Pr{Ã=at | A=a}."""
        k, f = self.keep_probability, self.flip_probability
        return np.array([[k, f], [f, k]])


@dataclass(frozen=True)
class DPPolicy:
    """``beta[ã, yhat]`` = Pr{Z=1 | Ã=ã, r(X,Ã)=yhat}."""

    beta: np.ndarray

    def __post_init__(self):
        beta = np.array(self.beta, dtype=float).reshape(2, 2)
        if not np.all(np.isfinite(beta)) or np.any(beta < 0) or np.any(beta > 1):
            raise ValidationError(f"beta must lie in [0,1], got {beta.ravel().tolist()}")
        beta.setflags(write=False)
        object.__setattr__(self, "beta", beta)

    @property
    def is_zero(self) -> bool:
        return not np.any(self.beta)

    def to_dict(self) -> dict:
        return {"beta": dict(zip(KEYS, map(float, self.beta.ravel())))}

    @classmethod
    def from_dict(cls, d: dict) -> DPPolicy:
        b = d["beta"]
        return cls([b[k] for k in KEYS])


def randomize_response(a, config: DPConfig, rng: np.random.Generator):
    """Privatize one attribute (or an integer array of them).

    The attribute is kept with probability e^ε/(1+e^ε) and flipped otherwise.
    """
    arr = np.asarray(a)
    if not np.all((arr == 0) | (arr == 1)):
        raise ValidationError("randomize_response needs binary attributes")
    flip = rng.random(arr.shape) < config.flip_probability
    out = np.where(flip, 1 - arr, arr)
    return int(out) if out.ndim == 0 else out.astype(np.int8)


# ---------------------------------------------------------------------------
# linear forms in beta (shape (2, n); n = 2 for a binary classifier)


def selection_coefficients(model: CounterfactualModel, config: DPConfig) -> np.ndarray:
    """``C[a, y, at, k]`` = Pr{A=a, Y=y, Ã=at, r(X,at)=support[k]}.

    Pr{Z=1, A=a, Y=y} is then ``(C[a, y] * beta).sum()``.
    """
    w = config.channel()  # [at, a]
    # table[at, a, y, k] weighted by Pr{Ã=at | A=a}
    weighted = model.table * w[:, :, None, None]
    return np.transpose(weighted, (1, 2, 0, 3))


def joint_selection(model: CounterfactualModel, beta, config: DPConfig):
    """(Pr{Z=1, A=a, Y=1}, Pr{Z=1, A=a}) for a = 0, 1."""
    beta = np.asarray(beta, dtype=float)
    C = selection_coefficients(model, config)
    z_ay = (C * beta[None, None]).sum(axis=(2, 3))
    return z_ay[:, 1], z_ay.sum(axis=1)


def es_constraint_row(model: CounterfactualModel, config: DPConfig) -> np.ndarray:
    """Coefficients of Pr{Z=1,A=0,Y=1} - Pr{Z=1,A=1,Y=1} in beta."""
    C = selection_coefficients(model, config)
    return C[0, 1] - C[1, 1]


def eo_constraint_coefficients(model: CounterfactualModel, config: DPConfig) -> np.ndarray:
    """Coefficients of Pr{Z=1|Y=1,A=0} - Pr{Z=1|Y=1,A=1} in beta."""
    p = model.p_ay[:, 1]
    if np.any(p <= 0):
        raise PreconditionError(
            "equal-opportunity row is undefined: a group has no qualified mass "
            f"(Pr{{A=a,Y=1}} = {p.tolist()})"
        )
    C = selection_coefficients(model, config)
    return C[0, 1] / p[0] - C[1, 1] / p[1]


def normalization_coefficients(model: CounterfactualModel, config: DPConfig) -> np.ndarray:
    """Pr{Ã=ã, r(X,Ã)=k} indexed ``[ã, k]``; Pr{Z=1} is its beta-weighted sum."""
    return selection_coefficients(model, config).sum(axis=(0, 1))


def accuracy_coefficients(model: CounterfactualModel, config: DPConfig) -> np.ndarray:
    """Pr{Ã=ã, r(X,Ã)=k, Y=1}: Pr{Z=1, Y=1} is its beta-weighted sum."""
    return selection_coefficients(model, config)[:, 1].sum(axis=0)


def es_constraint_residual(model: CounterfactualModel, policy, config: DPConfig) -> float:
    beta = policy.beta if isinstance(policy, DPPolicy) else np.asarray(policy, float)
    return float(abs((es_constraint_row(model, config) * beta).sum()))


def eo_constraint_residual(model: CounterfactualModel, policy, config: DPConfig) -> float:
    beta = policy.beta if isinstance(policy, DPPolicy) else np.asarray(policy, float)
    return float(abs((eo_constraint_coefficients(model, config) * beta).sum()))


def evaluate_dp_policy(model: CounterfactualModel, policy, config: DPConfig) -> SelectionOutcome:
    beta = policy.beta if isinstance(policy, DPPolicy) else np.asarray(policy, float)
    z_a_y1, z_a = joint_selection(model, beta, config)
    return SelectionOutcome.from_joint(z_a_y1, z_a, label="DP policy")


@dataclass(frozen=True)
class FeasibilityBound:
    epsilon: float
    defined: bool


def feasibility_bound(pmf: BinaryJointPMF) -> FeasibilityBound:
    """ε beyond which a nonzero fair DP policy is guaranteed to exist.

    Equal to max_a -ln Pr{R=1, A=a, Y=1}; infinite (``defined=False``) when
    either cell is empty. It is a sufficient level, not the exact frontier.
    """
    cells = pmf.p[:, 1, 1]
    if np.any(cells <= 0):
        return FeasibilityBound(math.inf, False)
    return FeasibilityBound(float(np.max(-np.log(cells))), True)


@dataclass(frozen=True)
class DPSolution:
    policy: DPPolicy
    outcome: SelectionOutcome
    zero_policy: bool
    target: str
    residual: float


def solve_dp_policy(
    model: CounterfactualModel, config: DPConfig, target: DPTarget = "es"
) -> DPSolution:
    """Most accurate fair policy on (Ã, r(X, Ã)).

    The fairness row is homogeneous, so any nonzero feasible beta can be
    rescaled onto the normalization Pr{Z=1} = min_{ã,k} Pr{Ã=ã, r=k}. An
    infeasible LP therefore means beta = 0 is the only fair policy; it is
    returned with ``zero_policy=True`` and an all-zero outcome.
    """
    if not model.is_binary:
        raise ValidationError("solve_dp_policy needs a binary classifier output")
    norm = normalization_coefficients(model, config)
    floor = float(norm.min())
    if floor <= 0:
        raise PreconditionError(
            "the DP LP reduction needs every Pr{Ã=ã, r(X,Ã)=yhat} > 0; "
            f"smallest is {floor!r}"
        )
    rows, rhs = [norm.ravel()], [floor]
    if target == "es":
        rows.insert(0, es_constraint_row(model, config).ravel())
        rhs.insert(0, 0.0)
    elif target == "eo":
        rows.insert(0, eo_constraint_coefficients(model, config).ravel())
        rhs.insert(0, 0.0)
    elif target != "none":
        raise ValidationError(f"unknown DP fairness target {target!r}")
    lp = LPProblem(c=accuracy_coefficients(model, config).ravel(), A_eq=np.array(rows), b_eq=np.array(rhs))
    sol = solve(lp)
    if not sol.optimal:
        policy = DPPolicy(np.zeros((2, 2)))
        return DPSolution(policy, SelectionOutcome.never(), True, target, 0.0)
    policy = DPPolicy(sol.x.reshape(2, 2))
    outcome = evaluate_dp_policy(model, policy, config)
    res = {
        "es": es_constraint_residual,
        "eo": eo_constraint_residual,
        "none": lambda *_: 0.0,
    }[target](model, policy, config)
    return DPSolution(policy, outcome, False, target, res)


def nonprivate_optimum(model: CounterfactualModel) -> float:
    """Accuracy of the best ES policy when the true attribute is observed."""
    return solve_es_policy(model.induced_pmf()).outcome.accuracy
