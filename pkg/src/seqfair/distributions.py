"""Probability models for the applicant population and their estimators.

Three models cover the pipelines in this package:

* ``BinaryJointPMF``: joint law of (A, R, Y) for a binary classifier R.
* ``ScoreModel``: discrete score support with group priors and per-(a, y)
  conditional score laws, for threshold policies.
* ``CounterfactualModel``: for each counterfactual classifier input
  ã, the joint law of (A, Y, r(X, ã)), for privatized-attribute pipelines.

All arrays are stored read-only; the models are immutable once built.
"""

from __future__ import annotations

import math
from collections.abc import Iterable, Sequence
from dataclasses import dataclass, field

import numpy as np

from .errors import EstimationError, IngestError, ValidationError

SUM_TOL = 1e-12
MARGINAL_TOL = 1e-9


def _frozen(x) -> np.ndarray:
    arr = np.array(x, dtype=float)
    arr.setflags(write=False)
    return arr


def _check_distribution(p: np.ndarray, what: str) -> np.ndarray:
    """Validate a nonnegative table summing to one; absorb drift below SUM_TOL."""
    if not np.all(np.isfinite(p)):
        raise ValidationError(f"{what}: non-finite probability")
    if np.any(p < 0):
        raise ValidationError(f"{what}: negative probability {p.min()!r}")
    total = p.sum()
    if abs(total - 1.0) > SUM_TOL:
        raise ValidationError(f"{what}: cells sum to {total!r}, not 1")
    if total != 1.0:
        p = p / total
    return p


@dataclass(frozen=True)
class BinaryJointPMF:
    """Joint PMF of (A, R, Y) on {0,1}^3, stored as ``p[a, yhat, y]``."""

    p: np.ndarray

    def __post_init__(self):
        p = np.asarray(self.p, dtype=float)
        if p.shape != (2, 2, 2):
            raise ValidationError(f"BinaryJointPMF needs shape (2,2,2), got {p.shape}")
        object.__setattr__(self, "p", _frozen(_check_distribution(p, "BinaryJointPMF")))

    @classmethod
    def from_weights(cls, weights) -> BinaryJointPMF:
        """Normalize nonnegative weights indexed ``[a, yhat, y]``."""
        w = np.asarray(weights, dtype=float)
        total = w.sum()
        if total <= 0:
            raise ValidationError("weights must have positive total mass")
        return cls(w / total)

    @classmethod
    def from_cells(cls, cells: dict[tuple[int, int, int], float]) -> BinaryJointPMF:
        """Build from a ``{(a, yhat, y): prob}`` mapping; missing cells are 0."""
        p = np.zeros((2, 2, 2))
        for (a, r, y), v in cells.items():
            p[a, r, y] = v
        return cls(p)

    def cell(self, a: int, yhat: int, y: int) -> float:
        return float(self.p[a, yhat, y])

    @property
    def p_ar(self) -> np.ndarray:
        """P_{A,R}(a, yhat) as a (2, 2) array indexed ``[a, yhat]``."""
        return self.p.sum(axis=2)

    @property
    def p_ay(self) -> np.ndarray:
        """P_{A,Y}(a, y) as a (2, 2) array indexed ``[a, y]``."""
        return self.p.sum(axis=1)

    @property
    def p_a(self) -> np.ndarray:
        return self.p.sum(axis=(1, 2))

    def p_ray(self, yhat: int, y: int, a: int) -> float:
        """P_{R,Y,A}(yhat, y, a); same cell as ``p[a, yhat, y]``."""
        return float(self.p[a, yhat, y])

    @property
    def qualified(self) -> np.ndarray:
        """Pr{A=a, R=yhat, Y=1} indexed ``[a, yhat]``."""
        return self.p[:, :, 1]

    def to_dict(self) -> dict:
        return {
            f"a{a}_r{r}_y{y}": float(self.p[a, r, y])
            for a in (0, 1)
            for r in (0, 1)
            for y in (0, 1)
        }


@dataclass(frozen=True)
class ScoreModel:
    """Discrete score model: support, priors P_{A,Y} and conditionals.

    ``cond[a, y, j]`` is Pr{R = support[j] | A=a, Y=y}. A stratum with zero
    prior mass may carry an all-zero conditional; it is listed in ``empty``.
    """

    support: np.ndarray
    prior: np.ndarray
    cond: np.ndarray
    empty: tuple[tuple[int, int], ...] = field(default=())

    def __post_init__(self):
        support = np.asarray(self.support, dtype=float)
        prior = np.asarray(self.prior, dtype=float)
        cond = np.asarray(self.cond, dtype=float)
        if support.ndim != 1 or support.size == 0:
            raise ValidationError("support must be a non-empty 1-D list")
        if not np.all(np.isfinite(support)):
            raise ValidationError("support contains non-finite values")
        if np.any(np.diff(support) <= 0):
            raise ValidationError("support must be strictly increasing")
        if prior.shape != (2, 2):
            raise ValidationError(f"prior needs shape (2,2), got {prior.shape}")
        if cond.shape != (2, 2, support.size):
            raise ValidationError(
                f"cond needs shape (2,2,{support.size}), got {cond.shape}"
            )
        prior = _check_distribution(prior, "ScoreModel.prior")
        empty = []
        cond = cond.copy()
        for a in (0, 1):
            for y in (0, 1):
                if cond[a, y].sum() == 0 and np.all(cond[a, y] == 0):
                    if prior[a, y] > 0:
                        raise ValidationError(
                            f"conditional ({a},{y}) is empty but its prior is {prior[a, y]}"
                        )
                    empty.append((a, y))
                    continue
                cond[a, y] = _check_distribution(cond[a, y], f"ScoreModel.cond[{a},{y}]")
        object.__setattr__(self, "support", _frozen(support))
        object.__setattr__(self, "prior", _frozen(prior))
        object.__setattr__(self, "cond", _frozen(cond))
        object.__setattr__(self, "empty", tuple(empty))

    @property
    def n(self) -> int:
        return int(self.support.size)

    @property
    def p_a(self) -> np.ndarray:
        return self.prior.sum(axis=1)

    @property
    def joint(self) -> np.ndarray:
        """Pr{A=a, Y=y, R=support[j]} indexed ``[a, y, j]``."""
        return self.prior[:, :, None] * self.cond

    def cond_a(self) -> np.ndarray:
        """Pr{R = support[j] | A=a} indexed ``[a, j]``."""
        pa = self.p_a
        out = np.zeros((2, self.n))
        for a in (0, 1):
            if pa[a] > 0:
                out[a] = self.joint[a].sum(axis=0) / pa[a]
        return out

    def _index(self, tau: float) -> int:
        # number of support points <= tau
        return int(np.searchsorted(self.support, tau, side="right"))

    def cdf_ay(self, a: int, y: int, tau: float) -> float:
        """F_{R|a,y}(tau) = Pr{R <= tau | A=a, Y=y}."""
        k = self._index(tau)
        return float(min(1.0, self.cond[a, y, :k].sum()))

    def cdf_a(self, a: int, tau: float) -> float:
        k = self._index(tau)
        return float(min(1.0, self.cond_a()[a, :k].sum()))

    def cdf(self, tau: float) -> float:
        k = self._index(tau)
        return float(min(1.0, self.joint[:, :, :k].sum()))

    def tail_joint(self) -> np.ndarray:
        """Pr{R >= support[j], A=a, Y=y} indexed ``[a, y, j]`` for j in 0..n.

        Column ``n`` stands for a threshold above the maximum score and is 0.
        """
        j = self.joint
        tails = np.zeros((2, 2, self.n + 1))
        tails[:, :, : self.n] = np.cumsum(j[:, :, ::-1], axis=2)[:, :, ::-1]
        return tails

    def to_rows(self) -> list[tuple[float, ...]]:
        """Flat ``(a, y, r, prob)`` listing of the joint table."""
        joint = self.joint
        return [
            (a, y, float(self.support[k]), float(joint[a, y, k]))
            for a in (0, 1)
            for y in (0, 1)
            for k in range(self.n)
        ]


@dataclass(frozen=True)
class CounterfactualModel:
    """Per counterfactual input ã, the joint law of (A, Y, r(X, ã)).

    ``table[at, a, y, k]`` = Pr{A=a, Y=y, r(X, at) = support[k]}. For a
    binary classifier the support is (0, 1).
    """

    table: np.ndarray
    support: np.ndarray = field(default_factory=lambda: np.array([0.0, 1.0]))

    def __post_init__(self):
        support = np.asarray(self.support, dtype=float)
        table = np.asarray(self.table, dtype=float)
        if support.ndim != 1 or np.any(np.diff(support) <= 0):
            raise ValidationError("support must be strictly increasing")
        if table.shape != (2, 2, 2, support.size):
            raise ValidationError(
                f"table needs shape (2,2,2,{support.size}), got {table.shape}"
            )
        table = np.stack(
            [_check_distribution(table[t], f"CounterfactualModel.table[{t}]") for t in (0, 1)]
        )
        m0 = table[0].sum(axis=2)
        m1 = table[1].sum(axis=2)
        gap = float(np.abs(m0 - m1).max())
        if gap > MARGINAL_TOL:
            raise ValidationError(
                f"(A,Y) marginals of the two counterfactual tables differ by {gap:.3g}"
            )
        object.__setattr__(self, "table", _frozen(table))
        object.__setattr__(self, "support", _frozen(support))

    @property
    def n(self) -> int:
        return int(self.support.size)

    @property
    def is_binary(self) -> bool:
        return self.n == 2 and self.support[0] == 0.0 and self.support[1] == 1.0

    @property
    def p_ay(self) -> np.ndarray:
        """P_{A,Y}(a, y), averaged over the two tables (equal within 1e-9)."""
        return 0.5 * (self.table[0].sum(axis=2) + self.table[1].sum(axis=2))

    @property
    def p_a(self) -> np.ndarray:
        return self.p_ay.sum(axis=1)

    def output_given_ay(self, at: int) -> np.ndarray:
        """Pr{r(X, at) = support[k] | A=a, Y=y} indexed ``[a, y, k]``."""
        t = self.table[at]
        mass = t.sum(axis=2, keepdims=True)
        with np.errstate(invalid="ignore", divide="ignore"):
            out = np.where(mass > 0, t / np.where(mass > 0, mass, 1.0), 0.0)
        return out

    def output_given_a(self, at: int) -> np.ndarray:
        """P_{r(X,at)|A}(k | a) indexed ``[a, k]``."""
        t = self.table[at].sum(axis=1)
        pa = t.sum(axis=1, keepdims=True)
        return np.where(pa > 0, t / np.where(pa > 0, pa, 1.0), 0.0)

    def induced_pmf(self) -> BinaryJointPMF:
        """Law of (A, r(X, A), Y): the classifier fed the true attribute."""
        if not self.is_binary:
            raise ValidationError("induced_pmf needs a binary classifier support")
        p = np.zeros((2, 2, 2))
        for a in (0, 1):
            # table[a][a, y, r] -> p[a, r, y]
            p[a] = self.table[a, a].T
        return BinaryJointPMF(p)

    def induced_score_model(self) -> ScoreModel:
        """ScoreModel of R = r(X, A) with the true attribute."""
        joint = np.stack([self.table[a, a] for a in (0, 1)])
        prior = joint.sum(axis=2)
        cond = np.where(prior[:, :, None] > 0, joint / np.where(prior > 0, prior, 1.0)[:, :, None], 0.0)
        return ScoreModel(self.support, prior, cond)

    @classmethod
    def from_pmf(cls, pmf: BinaryJointPMF) -> CounterfactualModel:
        """Model where the classifier ignores its attribute input: r(X,0) = r(X,1)."""
        t = np.transpose(pmf.p, (0, 2, 1))  # [a, y, r]
        return cls(np.stack([t, t]))


def _check_binary(v, what: str, row: int | None = None) -> int:
    if v not in (0, 1):
        raise EstimationError(
            f"{what}={v!r} is not binary" + (f" (sample {row})" if row is not None else "")
        )
    return int(v)


def estimate_binary_pmf(
    samples: Iterable[Sequence[int]], smoothing: float = 0.0
) -> BinaryJointPMF:
    """Plug-in frequency estimate of the (A, R, Y) law from ``(a, yhat, y)`` triples.

    ``smoothing`` adds a pseudo-count to every cell before normalizing; the
    default 0 is the maximum-likelihood estimate.
    """
    if smoothing < 0 or not math.isfinite(smoothing):
        raise EstimationError("smoothing must be a finite nonnegative pseudo-count")
    counts = np.zeros((2, 2, 2))
    n = 0
    for i, s in enumerate(samples):
        a, r, y = s
        counts[_check_binary(a, "a", i), _check_binary(r, "yhat", i), _check_binary(y, "y", i)] += 1
        n += 1
    if n == 0:
        raise EstimationError("cannot estimate a PMF from an empty sample list")
    counts += smoothing
    return BinaryJointPMF(counts / counts.sum())


def estimate_score_model(
    samples: Iterable[Sequence[float]], support: Sequence[float], smoothing: float = 0.0
) -> ScoreModel:
    """Empirical score model from ``(a, y, r)`` triples on a declared support.

    Strata without samples get an empty conditional (listed in ``empty``).
    """
    support = np.asarray(support, dtype=float)
    if support.ndim != 1 or support.size == 0 or np.any(np.diff(support) <= 0):
        raise ValidationError("support must be a strictly increasing non-empty list")
    counts = np.zeros((2, 2, support.size))
    n = 0
    for i, (a, y, r) in enumerate(samples):
        a = _check_binary(a, "a", i)
        y = _check_binary(y, "y", i)
        k = int(np.searchsorted(support, r))
        if k >= support.size or support[k] != r:
            raise IngestError(f"score {r!r} is not in the declared support", row=i)
        counts[a, y, k] += 1
        n += 1
    if n == 0:
        raise EstimationError("cannot estimate a score model from an empty sample list")
    counts += smoothing
    prior = counts.sum(axis=2) / counts.sum()
    strata = counts.sum(axis=2, keepdims=True)
    cond = np.where(strata > 0, counts / np.where(strata > 0, strata, 1.0), 0.0)
    return ScoreModel(support, prior, cond)


def estimate_counterfactual_model(
    samples: Iterable[Sequence[float]],
    support: Sequence[float] = (0.0, 1.0),
    smoothing: float = 0.0,
) -> CounterfactualModel:
    """Estimate the counterfactual tables from ``(a, y, r0, r1)`` rows.

    ``r0``/``r1`` are the classifier outputs with the attribute input set to
    0 and 1 respectively.
    """
    support = np.asarray(support, dtype=float)
    counts = np.zeros((2, 2, 2, support.size))
    n = 0
    for i, (a, y, r0, r1) in enumerate(samples):
        a = _check_binary(a, "a", i)
        y = _check_binary(y, "y", i)
        for at, r in ((0, r0), (1, r1)):
            k = int(np.searchsorted(support, r))
            if k >= support.size or support[k] != r:
                raise IngestError(f"r{at}={r!r} is not in the declared support", row=i)
            counts[at, a, y, k] += 1
        n += 1
    if n == 0:
        raise EstimationError("cannot estimate a model from an empty sample list")
    counts += smoothing
    return CounterfactualModel(counts / counts.sum(axis=(1, 2, 3), keepdims=True), support)


def score_model_from_cdf_table(
    scores: Sequence[float],
    cdf: Sequence[Sequence[float]],
    nondefault: Sequence[Sequence[float]],
    group_prior: float,
) -> ScoreModel:
    """Build a ScoreModel from per-group score CDFs and per-score outcome rates.

    Args:
        scores: strictly increasing score values (one per table row).
        cdf: ``cdf[a][j]`` = Pr{R <= scores[j] | A=a}; must be monotone and end at 1.
        nondefault: ``nondefault[a][j]`` = Pr{Y=1 | R=scores[j], A=a}.
        group_prior: Pr{A=0}, in (0, 1).

    The per-score mass is the CDF difference; it is split into qualified and
    unqualified parts by the non-default rate. Table rows are treated as the
    exact discrete support (no interpolation between rows).
    """
    scores = np.asarray(scores, dtype=float)
    cdf = np.asarray(cdf, dtype=float)
    q = np.asarray(nondefault, dtype=float)
    if not 0 < group_prior < 1:
        raise ValidationError(f"group prior must lie in (0,1), got {group_prior}")
    if cdf.shape != (2, scores.size) or q.shape != (2, scores.size):
        raise ValidationError("cdf and nondefault need one column per group and one row per score")
    if not (np.all(np.isfinite(cdf)) and np.all(np.isfinite(q))):
        raise ValidationError("CDF table contains non-finite values")
    if np.any((q < 0) | (q > 1)):
        bad = np.argwhere((q < 0) | (q > 1))[0]
        raise IngestError(f"non-default rate out of [0,1] for group {bad[0]}", row=int(bad[1]))
    for a in (0, 1):
        if np.any(cdf[a] < 0):
            raise IngestError(f"negative CDF value for group {a}", row=int(np.argmax(cdf[a] < 0)))
        d = np.diff(cdf[a])
        if np.any(d < 0):
            raise IngestError(f"CDF for group {a} decreases", row=int(np.argmax(d < 0)) + 1)
        if abs(cdf[a, -1] - 1.0) > 1e-9:
            raise IngestError(f"CDF for group {a} ends at {cdf[a, -1]}, not 1", row=scores.size - 1)
    mass = np.diff(np.concatenate([np.zeros((2, 1)), cdf], axis=1), axis=1)
    mass /= mass.sum(axis=1, keepdims=True)
    pa = np.array([group_prior, 1.0 - group_prior])
    split = np.stack([mass * (1.0 - q), mass * q], axis=1)  # [a, y, j]
    prior = pa[:, None] * split.sum(axis=2)
    strata = split.sum(axis=2, keepdims=True)
    cond = np.where(strata > 0, split / np.where(strata > 0, strata, 1.0), 0.0)
    return ScoreModel(scores, prior, cond)
