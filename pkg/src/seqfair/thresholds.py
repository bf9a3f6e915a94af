"""Group-dependent score thresholds: evaluation and exhaustive search.

An applicant from group a is accepted iff R >= tau_a. Since the objective is
piecewise constant between support points, thresholds range over the
support plus ``ABOVE_MAX`` (reject the whole group). The search scans all
(n+1)^2 pairs at once using tail sums of the joint table.

Reporting convention
--------------------
``ThresholdPair.strict(support)`` rewrites a pair in the equivalent
"R > t" form, where t is the largest rejected support score. Published
score tables often use that form, so it is reported alongside.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Literal

import numpy as np

from .distributions import CounterfactualModel, ScoreModel
from .dp import DPConfig, selection_coefficients
from .errors import InfeasibleError, PreconditionError, ValidationError
from .outcome import SelectionOutcome

ABOVE_MAX = math.inf
Fairness = Literal["es", "es_demographic", "eo", "sp", "none"]
FAIRNESS = ("es", "es_demographic", "eo", "sp", "none")
TIE_TOL = 1e-12
GAMMA_TOL = 1e-12


@dataclass(frozen=True)
class ThresholdPair:
    tau0: float
    tau1: float

    def __iter__(self):
        return iter((self.tau0, self.tau1))

    def indices(self, support: np.ndarray) -> tuple[int, int]:
        """Position of each threshold in ``support``; ``len(support)`` for ABOVE_MAX."""
        out = []
        for tau in self:
            if tau == ABOVE_MAX:
                out.append(len(support))
                continue
            k = int(np.searchsorted(support, tau))
            if k >= len(support) or support[k] != tau:
                raise ValidationError(f"threshold {tau!r} is not a support value")
            out.append(k)
        return out[0], out[1]

    @classmethod
    def from_indices(cls, support: np.ndarray, i0: int, i1: int) -> ThresholdPair:
        n = len(support)
        lab = lambda i: ABOVE_MAX if i >= n else float(support[i])  # noqa: E731
        return cls(lab(i0), lab(i1))

    def strict(self, support: np.ndarray) -> tuple[float, float]:
        """Equivalent thresholds for the rule R > t (t = -inf accepts all)."""
        out = []
        for i in self.indices(support):
            out.append(-math.inf if i == 0 else float(support[i - 1]))
        return out[0], out[1]

    def to_dict(self) -> dict:
        enc = lambda t: "above_max" if t == ABOVE_MAX else t  # noqa: E731
        return {"tau0": enc(self.tau0), "tau1": enc(self.tau1)}


@dataclass(frozen=True)
class TimeConstraint:
    """Pr{nobody accepted in ``horizon`` steps} <= ``psi``."""

    horizon: int
    psi: float

    def __post_init__(self):
        if int(self.horizon) != self.horizon or self.horizon < 1:
            raise ValidationError(f"horizon must be an integer >= 1, got {self.horizon!r}")
        if not 0 < self.psi <= 1:
            raise ValidationError(f"psi must lie in (0,1], got {self.psi!r}")

    def admits(self, acceptance):
        return (1.0 - np.asarray(acceptance)) ** self.horizon <= self.psi + GAMMA_TOL


@dataclass(frozen=True)
class SearchConfig:
    fairness: Fairness = "es"
    gamma: float = 0.0
    time_constraint: TimeConstraint | None = None

    def __post_init__(self):
        if self.fairness not in FAIRNESS:
            raise ValidationError(f"unknown fairness notion {self.fairness!r}")
        if not 0 <= self.gamma <= 1:
            raise ValidationError(f"gamma must lie in [0,1], got {self.gamma!r}")


@dataclass(frozen=True)
class ThresholdResult:
    pair: ThresholdPair
    outcome: SelectionOutcome
    fairness_gap: float
    strict: tuple[float, float]
    feasible_pairs: int


def _grids(model: ScoreModel):
    tail = model.tail_joint()  # [a, y, i]
    qual = tail[:, 1]
    acc_a = tail.sum(axis=1)
    den = acc_a[0][:, None] + acc_a[1][None, :]
    return qual, acc_a, den


def evaluate_thresholds(model: ScoreModel, pair: ThresholdPair) -> SelectionOutcome:
    i0, i1 = pair.indices(model.support)
    qual, acc_a, _ = _grids(model)
    return SelectionOutcome.from_joint(
        [qual[0, i0], qual[1, i1]], [acc_a[0, i0], acc_a[1, i1]], label="threshold pair"
    )


def fairness_gap_grid(model: ScoreModel, fairness: Fairness) -> np.ndarray:
    """Disparity of every pair, indexed ``[i0, i1]``; nan where nobody is accepted."""
    qual, acc_a, den = _grids(model)
    with np.errstate(invalid="ignore", divide="ignore"):
        if fairness == "es":
            gap = np.abs(qual[0][:, None] - qual[1][None, :]) / den
        elif fairness == "es_demographic":
            gap = np.abs(acc_a[0][:, None] - acc_a[1][None, :]) / den
        elif fairness == "eo":
            p = model.prior[:, 1]
            if np.any(p <= 0):
                raise PreconditionError("equal opportunity needs qualified mass in both groups")
            gap = np.abs(qual[0][:, None] / p[0] - qual[1][None, :] / p[1])
        elif fairness == "sp":
            p = model.p_a
            if np.any(p <= 0):
                raise PreconditionError("statistical parity needs mass in both groups")
            gap = np.abs(acc_a[0][:, None] / p[0] - acc_a[1][None, :] / p[1])
        else:
            gap = np.zeros_like(den)
    return np.where(den > 0, gap, np.nan)


def _pick(acc: np.ndarray, disparity: np.ndarray, feasible: np.ndarray) -> tuple[int, int]:
    """Best accuracy; then smaller disparity; then lexicographically smaller pair."""
    best = np.max(acc[feasible])
    cand = feasible & (acc >= best - TIE_TOL)
    rows, cols = np.nonzero(cand)
    order = np.lexsort((cols, rows, disparity[rows, cols]))
    k = order[0]
    return int(rows[k]), int(cols[k])


def _binding(fair_ok, time_ok, live) -> str:
    if not live.any():
        return "no_selection"
    if not (fair_ok & live).any():
        return "fairness"
    if not (time_ok & live).any():
        return "time_constraint"
    return "fairness+time_constraint"


def search_thresholds(model: ScoreModel, config: SearchConfig) -> ThresholdResult:
    """Exhaustive search over (support ∪ {ABOVE_MAX})^2."""
    qual, acc_a, den = _grids(model)
    live = den > 0
    with np.errstate(invalid="ignore", divide="ignore"):
        pe0 = np.where(live, qual[0][:, None] / den, 0.0)
        pe1 = np.where(live, qual[1][None, :] / den, 0.0)
    acc = pe0 + pe1
    gap = fairness_gap_grid(model, config.fairness)
    fair_ok = live & (gap <= config.gamma + GAMMA_TOL)
    tc = config.time_constraint
    time_ok = tc.admits(den) if tc is not None else np.ones_like(live)
    feasible = fair_ok & time_ok & live
    if not feasible.any():
        b = _binding(fair_ok, time_ok, live)
        raise InfeasibleError(
            f"no threshold pair satisfies the constraints (binding: {b})", binding=b
        )
    i0, i1 = _pick(acc, np.abs(pe0 - pe1), feasible)
    pair = ThresholdPair.from_indices(model.support, i0, i1)
    outcome = SelectionOutcome.from_joint(
        [qual[0, i0], qual[1, i1]], [acc_a[0, i0], acc_a[1, i1]]
    )
    return ThresholdResult(
        pair, outcome, float(gap[i0, i1]), pair.strict(model.support), int(feasible.sum())
    )


def naive_search(model: ScoreModel, config: SearchConfig) -> tuple[ThresholdPair, float]:
    """Plain double loop with scalar arithmetic; the vectorized search's oracle."""
    n = model.n
    prior = model.prior
    best = None
    for i0 in range(n + 1):
        for i1 in range(n + 1):
            q = [prior[a, 1] * model.cond[a, 1, i:].sum() for a, i in ((0, i0), (1, i1))]
            t = [q[a] + prior[a, 0] * model.cond[a, 0, i:].sum() for a, i in ((0, i0), (1, i1))]
            den = t[0] + t[1]
            if den <= 0:
                continue
            pe = (q[0] / den, q[1] / den)
            if config.fairness == "es":
                gap = abs(pe[0] - pe[1])
            elif config.fairness == "es_demographic":
                gap = abs(t[0] - t[1]) / den
            elif config.fairness == "eo":
                gap = abs(q[0] / prior[0, 1] - q[1] / prior[1, 1])
            elif config.fairness == "sp":
                gap = abs(t[0] / prior[0].sum() - t[1] / prior[1].sum())
            else:
                gap = 0.0
            if gap > config.gamma + GAMMA_TOL:
                continue
            tc = config.time_constraint
            if tc is not None and (1 - den) ** tc.horizon > tc.psi + GAMMA_TOL:
                continue
            key = (pe[0] + pe[1], -abs(pe[0] - pe[1]))
            if best is None or key[0] > best[0][0] + TIE_TOL or (
                abs(key[0] - best[0][0]) <= TIE_TOL and key[1] > best[0][1]
            ):
                best = (key, i0, i1)
    if best is None:
        raise InfeasibleError("no feasible pair")
    return ThresholdPair.from_indices(model.support, best[1], best[2]), best[0][0]


# ---------------------------------------------------------------------------
# degenerate-outcome check for EO / SP


@dataclass(frozen=True)
class DegenerateVerdict:
    hypotheses_hold: bool
    monotone: bool
    top_mass: tuple[float, float]
    rejects_group: bool | None
    optimal_value_matches: bool | None
    result: ThresholdResult | None

    @property
    def search_matches_theorem(self) -> bool | None:
        if not self.hypotheses_hold:
            return None
        return bool(self.rejects_group and self.optimal_value_matches)


def accuracy_is_monotone(model: ScoreModel, tol: float = 1e-12) -> bool:
    """Accuracy non-decreasing in each threshold while it moves over the support.

    The other threshold may sit anywhere, ABOVE_MAX included, so each group
    on its own must also be monotone. The last step of the moving threshold
    (a support value to ABOVE_MAX) is not checked: demanding it as well
    forces every tail accuracy of both groups to coincide. Pairs that accept
    nobody are skipped.
    """
    qual, _, den = _grids(model)
    with np.errstate(invalid="ignore", divide="ignore"):
        acc = np.where(den > 0, (qual[0][:, None] + qual[1][None, :]) / den, np.nan)
    n = model.n
    for grid in (acc, acc.T):
        for row in grid[:n].T:
            vals = row[~np.isnan(row)]
            if np.any(np.diff(vals) < -tol):
                return False
    return True


def top_mass(model: ScoreModel, fairness: Literal["eo", "sp"]) -> tuple[float, float]:
    if fairness == "eo":
        return float(model.cond[0, 1, -1]), float(model.cond[1, 1, -1])
    ca = model.cond_a()
    return float(ca[0, -1]), float(ca[1, -1])


def verify_degenerate_theorem(
    model: ScoreModel, fairness: Literal["eo", "sp"], gamma: float
) -> DegenerateVerdict:
    """Check whether EO/SP-optimal thresholds reject a whole group.

    Hypotheses: accuracy is monotone in both thresholds and the top-score
    mass of each group (conditional on Y=1 for EO, on A for SP) is at most
    gamma. When they hold, the search result should leave one group with
    Pr{E_a, Ỹ=1} = 0, and its accuracy should equal the best such pair.
    """
    if fairness not in ("eo", "sp"):
        raise ValidationError("the degenerate-outcome check covers eo and sp only")
    mono = accuracy_is_monotone(model)
    tm = top_mass(model, fairness)
    holds = mono and max(tm) <= gamma
    if not holds:
        return DegenerateVerdict(False, mono, tm, None, None, None)
    res = search_thresholds(model, SearchConfig(fairness, gamma))
    o = res.outcome
    rejects = min(o.p_e0, o.p_e1) == 0.0 or ABOVE_MAX in (res.pair.tau0, res.pair.tau1)
    n = model.n
    qual, acc_a, den = _grids(model)
    rejecting = []
    for i0, i1 in [(n - 1, n), (n, n - 1)]:
        if den[i0, i1] > 0:
            rejecting.append((qual[0, i0] + qual[1, i1]) / den[i0, i1])
    matches = bool(rejecting) and abs(max(rejecting) - o.accuracy) <= 1e-12
    return DegenerateVerdict(True, mono, tm, rejects, matches, res)


# ---------------------------------------------------------------------------
# thresholds on the privatized attribute


def _dp_tails(model: CounterfactualModel, config: DPConfig) -> np.ndarray:
    """``S[a, y, at, i]`` = Pr{A=a, Y=y, Ã=at, r(X,at) >= support[i]}; i = n is 0."""
    C = selection_coefficients(model, config)
    S = np.zeros(C.shape[:3] + (model.n + 1,))
    S[..., : model.n] = np.cumsum(C[..., ::-1], axis=-1)[..., ::-1]
    return S


def dp_threshold_joint(model: CounterfactualModel, config: DPConfig):
    """Grids of Pr{Z=1, A=a, Y=1} and Pr{Z=1, A=a}, indexed ``[a, i0, i1]``."""
    S = _dp_tails(model, config)
    z_y1 = S[:, 1, 0][:, :, None] + S[:, 1, 1][:, None, :]
    tot = S.sum(axis=1)
    z = tot[:, 0][:, :, None] + tot[:, 1][:, None, :]
    return z_y1, z


def evaluate_dp_thresholds(
    model: CounterfactualModel, pair: ThresholdPair, config: DPConfig
) -> SelectionOutcome:
    i0, i1 = pair.indices(model.support)
    z_y1, z = dp_threshold_joint(model, config)
    return SelectionOutcome.from_joint(z_y1[:, i0, i1], z[:, i0, i1], label="DP threshold pair")


def dp_threshold_residual(model: CounterfactualModel, pair: ThresholdPair, config: DPConfig) -> float:
    """|Pr{Z=1,A=0,Y=1} - Pr{Z=1,A=1,Y=1}| for thresholds on r(X, Ã)."""
    i0, i1 = pair.indices(model.support)
    z_y1, _ = dp_threshold_joint(model, config)
    return float(abs(z_y1[0, i0, i1] - z_y1[1, i0, i1]))


@dataclass(frozen=True)
class DPThresholdResult:
    pair: ThresholdPair
    outcome: SelectionOutcome
    residual: float
    feasible_pairs: int


def search_dp_thresholds(
    model: CounterfactualModel, config: DPConfig, gamma: float
) -> DPThresholdResult:
    """Best pair (tau~0, tau~1) under gamma-ES with privatized attributes.

    gamma bounds |Pr{E_0,Ỹ=1} - Pr{E_1,Ỹ=1}| exactly as in the non-private
    search; the unconditional residual is smaller still (it equals the
    disparity times the acceptance probability).
    """
    if not 0 <= gamma <= 1:
        raise ValidationError(f"gamma must lie in [0,1], got {gamma!r}")
    z_y1, z = dp_threshold_joint(model, config)
    den = z.sum(axis=0)
    live = den > 0
    with np.errstate(invalid="ignore", divide="ignore"):
        pe = np.where(live, z_y1 / den, 0.0)
    disparity = np.abs(pe[0] - pe[1])
    feasible = live & (disparity <= gamma + GAMMA_TOL)
    if not feasible.any():
        b = "fairness" if live.any() else "no_selection"
        raise InfeasibleError(f"no DP threshold pair is {gamma}-ES fair", binding=b)
    i0, i1 = _pick(pe[0] + pe[1], disparity, feasible)
    pair = ThresholdPair.from_indices(model.support, i0, i1)
    outcome = SelectionOutcome.from_joint(z_y1[:, i0, i1], z[:, i0, i1])
    return DPThresholdResult(
        pair, outcome, float(abs(z_y1[0, i0, i1] - z_y1[1, i0, i1])), int(feasible.sum())
    )

