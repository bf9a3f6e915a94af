"""Equal-Selection post-processing of a pre-trained binary classifier.

A randomized predictor Z accepts an arrival with probability
``alpha[a, yhat]`` given its group ``a`` and classifier output ``yhat``.
The accuracy Pr{Y=1 | Z=1} is a ratio of linear forms in alpha, so the
fair-accuracy problem is fractional; pinning the denominator to the
smallest P_{A,R} cell turns it into a linear program without loss.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Literal

import numpy as np

from .distributions import BinaryJointPMF
from .errors import InfeasibleError, PreconditionError, ValidationError
from .lp import LPProblem, solve
from .outcome import SelectionOutcome

BinaryTarget = Literal["es", "es_demographic", "none"]
KEYS = ("a0_r0", "a0_r1", "a1_r0", "a1_r1")


@dataclass(frozen=True)
class PostProcessPolicy:
    """Acceptance probabilities ``alpha[a, yhat]`` = Pr{Z=1 | A=a, R=yhat}."""

    alpha: np.ndarray

    def __post_init__(self):
        alpha = np.array(self.alpha, dtype=float).reshape(2, 2)
        if not np.all(np.isfinite(alpha)) or np.any(alpha < 0) or np.any(alpha > 1):
            raise ValidationError(f"alpha must lie in [0,1], got {alpha.ravel().tolist()}")
        alpha.setflags(write=False)
        object.__setattr__(self, "alpha", alpha)

    @classmethod
    def identity(cls) -> PostProcessPolicy:
        """Z = R: accept exactly the applicants the classifier predicts qualified."""
        return cls([[0.0, 1.0], [0.0, 1.0]])

    def to_dict(self) -> dict:
        return {"alpha": dict(zip(KEYS, map(float, self.alpha.ravel())))}

    @classmethod
    def from_dict(cls, d: dict) -> PostProcessPolicy:
        a = d["alpha"]
        return cls([a[k] for k in KEYS])


@dataclass(frozen=True)
class ESCheck:
    residual: float
    fair: bool
    degenerate: bool


def check_es_condition(pmf: BinaryJointPMF, tol: float = 1e-9) -> ESCheck:
    """Selecting with R itself is ES-fair iff Pr{R=1,A=0,Y=1} = Pr{R=1,A=1,Y=1}.

    ``degenerate`` flags Pr{R=1} = 0, where the condition holds vacuously.
    """
    residual = abs(pmf.p[0, 1, 1] - pmf.p[1, 1, 1])
    degenerate = pmf.p[:, 1, :].sum() == 0
    return ESCheck(float(residual), bool(residual <= tol), bool(degenerate))


@dataclass(frozen=True)
class EqualOpportunityDiagnostic:
    eo_residual: float | None
    base_rate_residual: float
    eo_holds: bool | None
    es_holds: bool | None
    undefined_groups: tuple[int, ...]


def check_corollary1(pmf: BinaryJointPMF, tol: float = 1e-9) -> EqualOpportunityDiagnostic:
    """Equal opportunity for R vs. Equal Selection.

    Under EO, selecting with R is ES-fair iff the qualified base rates
    Pr{A=a, Y=1} coincide. Groups without qualified mass make the EO residual
    undefined, and the verdicts become ``None``.
    """
    p_ay1 = pmf.p_ay[:, 1]
    undefined = tuple(a for a in (0, 1) if p_ay1[a] <= 0)
    base = float(abs(p_ay1[0] - p_ay1[1]))
    if undefined:
        return EqualOpportunityDiagnostic(None, base, None, None, undefined)
    tpr = pmf.p[:, 1, 1] / p_ay1
    eo = float(abs(tpr[0] - tpr[1]))
    eo_holds = eo <= tol
    # ES <=> equal base rates holds only when R is EO-fair
    es = check_es_condition(pmf, tol).fair
    return EqualOpportunityDiagnostic(eo, base, eo_holds, es, ())


def _joint_z(pmf: BinaryJointPMF, alpha: np.ndarray) -> tuple[np.ndarray, np.ndarray]:
    z_a_y1 = (alpha * pmf.p[:, :, 1]).sum(axis=1)
    z_a = (alpha * pmf.p_ar).sum(axis=1)
    return z_a_y1, z_a


def evaluate_policy(pmf: BinaryJointPMF, policy: PostProcessPolicy) -> SelectionOutcome:
    """Closed-form outcome of selecting with the post-processed predictor."""
    z_a_y1, z_a = _joint_z(pmf, policy.alpha)
    return SelectionOutcome.from_joint(z_a_y1, z_a, label="post-processing policy")


def fractional_objective(pmf: BinaryJointPMF, alpha) -> float:
    """Pr{Y=1 | Z=1} for a raw alpha array (nan when Pr{Z=1} = 0)."""
    alpha = np.asarray(alpha, dtype=float).reshape(2, 2)
    num = float((alpha * pmf.p[:, :, 1]).sum())
    den = float((alpha * pmf.p_ar).sum())
    return num / den if den > 0 else float("nan")


def es_row(pmf: BinaryJointPMF, target: BinaryTarget = "es") -> np.ndarray:
    """Coefficients c with c @ alpha.ravel() = 0 encoding the fairness target.

    ``es`` equates Pr{Z=1, A=a, Y=1} across groups; ``es_demographic``
    equates Pr{Z=1, A=a}, i.e. Pr{E_0} = Pr{E_1}.
    """
    w = pmf.p[:, :, 1] if target == "es" else pmf.p_ar
    return np.concatenate([w[0], -w[1]])


def build_lp(pmf: BinaryJointPMF, target: BinaryTarget = "es") -> LPProblem:
    floor = float(pmf.p_ar.min())
    if floor <= 0:
        raise PreconditionError(
            "the LP reduction needs every P_{A,R}(a, yhat) > 0; "
            f"smallest cell is {floor!r} (consider --smoothing)"
        )
    rows = [pmf.p_ar.ravel()]
    rhs = [floor]
    if target != "none":
        rows.insert(0, es_row(pmf, target))
        rhs.insert(0, 0.0)
    return LPProblem(c=pmf.p[:, :, 1].ravel(), A_eq=np.array(rows), b_eq=np.array(rhs))


@dataclass(frozen=True)
class BinarySolution:
    policy: PostProcessPolicy
    outcome: SelectionOutcome
    target: str


def solve_es_policy(pmf: BinaryJointPMF, target: BinaryTarget = "es") -> BinarySolution:
    """Most accurate fair predictor derived from (A, R).

    The LP maximizes Pr{Z=1, Y=1} subject to the fairness row and
    Pr{Z=1} = min P_{A,R}; the accuracy ratio is scale-free in alpha, so the
    normalization loses nothing.
    """
    if target not in ("es", "es_demographic", "none"):
        raise ValidationError(f"unknown fairness target {target!r}")
    sol = solve(build_lp(pmf, target))
    if not sol.optimal:
        raise InfeasibleError(f"no {target}-fair policy exists for this PMF", binding=target)
    policy = PostProcessPolicy(sol.x.reshape(2, 2))
    return BinarySolution(policy, evaluate_policy(pmf, policy), target)


@dataclass(frozen=True)
class IndependenceDiagnostic:
    independence_residual: float | None
    model_accuracy: float | None
    holds: bool | None


def check_theorem3_condition(pmf: BinaryJointPMF, tol: float = 1e-9) -> IndependenceDiagnostic:
    """Checkable half of the near-optimality condition.

    Reports max_a |Pr{A=a | Y=1, R=1} - Pr{A=a | R=1}| and the classifier's
    own accuracy Pr{Y=1 | R=1}. The other hypothesis involves the unknown
    globally optimal fair predictor and is not evaluated.
    """
    r1 = pmf.p[:, 1, :].sum()
    r1y1 = pmf.p[:, 1, 1].sum()
    if r1 <= 0 or r1y1 <= 0:
        return IndependenceDiagnostic(None, None, None)
    given_r1 = pmf.p[:, 1, :].sum(axis=1) / r1
    given_r1y1 = pmf.p[:, 1, 1] / r1y1
    res = float(np.abs(given_r1y1 - given_r1).max())
    return IndependenceDiagnostic(res, float(r1y1 / r1), res <= tol)
