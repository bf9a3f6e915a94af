"""Equal-Selection thresholds for continuous scores on [0, 1].

With strictly increasing qualified-score CDFs, the equality
p01 (1 - F01(t0)) = p11 (1 - F11(t1)) pins t1 as a function of t0, and the
search collapses to one variable. We scan t0 on a dense grid.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np
from scipy import stats

from .errors import ValidationError

GRID_STEPS = 10_000
INVERSE_TOL = 1e-9
TIE_TOL = 1e-12


@dataclass(frozen=True)
class ContinuousProblem:
    """Score laws per (a, y) as frozen ``scipy.stats`` distributions plus P_{A,Y}.

    ``dists[a][y]`` must expose ``cdf`` and ``ppf``.
    """

    dists: tuple
    prior: np.ndarray

    def __post_init__(self):
        prior = np.asarray(self.prior, dtype=float).reshape(2, 2)
        if np.any(prior < 0) or abs(prior.sum() - 1) > 1e-12:
            raise ValidationError("prior must be a distribution over (a, y)")
        if prior[0, 1] <= 0 or prior[1, 1] <= 0:
            raise ValidationError("both groups need qualified mass")
        object.__setattr__(self, "prior", prior)

    def swapped(self) -> ContinuousProblem:
        return ContinuousProblem((self.dists[1], self.dists[0]), self.prior[::-1].copy())

    def tail(self, a: int, y: int, tau):
        return 1.0 - self.dists[a][y].cdf(tau)

    def accuracy(self, tau0, tau1):
        """Pr{Y=1 | Z=1} at the given thresholds; nan when nobody is accepted."""
        p = self.prior
        q = p[0, 1] * self.tail(0, 1, tau0) + p[1, 1] * self.tail(1, 1, tau1)
        u = p[0, 0] * self.tail(0, 0, tau0) + p[1, 0] * self.tail(1, 0, tau1)
        den = q + u
        with np.errstate(invalid="ignore", divide="ignore"):
            return np.where(den > 0, q / den, np.nan)

    def es_residual(self, tau0, tau1):
        p = self.prior
        return np.abs(p[0, 1] * self.tail(0, 1, tau0) - p[1, 1] * self.tail(1, 1, tau1))


@dataclass(frozen=True)
class ContinuousResult:
    tau0: float
    tau1: float
    accuracy: float
    es_residual: float


def paired_threshold(problem: ContinuousProblem, tau0):
    """t1 making the qualified selection mass equal, assuming p01 <= p11."""
    p = problem.prior
    target = 1.0 - (p[0, 1] / p[1, 1]) * problem.tail(0, 1, tau0)
    tau1 = problem.dists[1][1].ppf(target)
    back = problem.dists[1][1].cdf(tau1)
    if not np.all(np.isfinite(tau1)) or np.max(np.abs(back - target)) > INVERSE_TOL:
        raise ValidationError("qualified CDF of group 1 is not invertible on the required range")
    return tau1


def continuous_reduction(problem: ContinuousProblem, steps: int = GRID_STEPS) -> ContinuousResult:
    """Accuracy-maximizing ES pair on the grid t0 = k/steps (first maximizer)."""
    if problem.prior[0, 1] > problem.prior[1, 1]:
        r = continuous_reduction(problem.swapped(), steps)
        return ContinuousResult(r.tau1, r.tau0, r.accuracy, r.es_residual)
    tau0 = np.arange(steps + 1) / steps
    tau1 = paired_threshold(problem, tau0)
    acc = problem.accuracy(tau0, tau1)
    if np.all(np.isnan(acc)):
        raise ValidationError("no grid point accepts anybody")
    # the optimum can be a flat ridge; take its first point, not float noise
    k = int(np.argmax(acc >= np.nanmax(acc) - TIE_TOL))
    return ContinuousResult(
        float(tau0[k]),
        float(tau1[k]),
        float(acc[k]),
        float(problem.es_residual(tau0[k], tau1[k])),
    )


def grid_search_2d(problem: ContinuousProblem, steps: int = 1000, gamma: float = 1e-3, chunk: int = 256):
    """Brute-force oracle: best accuracy over a 2-D grid whose selection
    disparity |Pr{E_0,Y~=1} - Pr{E_1,Y~=1}| is at most gamma.

    Tails are one-dimensional, so the grid is swept in row chunks and a
    1e-4 step (10^8 pairs) stays within memory.
    """
    t = np.arange(steps + 1) / steps
    p = problem.prior
    q = [p[a, 1] * problem.tail(a, 1, t) for a in (0, 1)]
    u = [p[a, 0] * problem.tail(a, 0, t) for a in (0, 1)]
    best = (-1.0, 0, 0)
    for lo in range(0, t.size, chunk):
        rows = slice(lo, lo + chunk)
        qual = q[0][rows, None] + q[1][None, :]
        den = qual + u[0][rows, None] + u[1][None, :]
        with np.errstate(invalid="ignore", divide="ignore"):
            acc = qual / den
            disparity = np.abs(q[0][rows, None] - q[1][None, :]) / den
        ok = (den > 0) & (disparity <= gamma)
        if not ok.any():
            continue
        masked = np.where(ok, acc, -1.0)
        k = np.unravel_index(np.argmax(masked), masked.shape)
        if masked[k] > best[0]:
            best = (float(masked[k]), lo + k[0], k[1])
    acc, i0, i1 = best
    return float(t[i0]), float(t[i1]), acc


def _uniform(lo: float, hi: float):
    return stats.uniform(loc=lo, scale=hi - lo)


def uniform_case1(c0, b0, c1, b1, prior) -> tuple[ContinuousProblem, tuple[float, float, float]]:
    """Unqualified scores on [0, b_a], qualified on [c_a, 1].

    Returns the problem and the closed-form optimum (t0, t1, accuracy) for the
    branch p01 (1-b0)/(1-c0) <= p11 (1-b1)/(1-c1): t0 = b0 and t1 from the
    ES equality evaluated at t0 = b0, which gives accuracy 1.
    """
    prior = np.asarray(prior, dtype=float).reshape(2, 2)
    prob = ContinuousProblem(
        ((_uniform(0, b0), _uniform(c0, 1)), (_uniform(0, b1), _uniform(c1, 1))), prior
    )
    p01, p11 = prior[0, 1], prior[1, 1]
    if not p01 * (1 - b0) / (1 - c0) <= p11 * (1 - b1) / (1 - c1):
        raise ValidationError("closed form covers the branch where group 0 binds")
    tau1 = 1 - (p01 / p11) * (1 - c1) * (1 - b0) / (1 - c0)
    return prob, (b0, tau1, 1.0)


def uniform_case2(c0, b0, c1, b1, prior) -> tuple[ContinuousProblem, tuple[float, float, float]]:
    """Unqualified scores on [b_a, 1], qualified on [c_a, 1] with b_a < c_a.

    Accuracy depends on (t0, t1) only through the ratio (1-t1)/(1-t0), which
    ES fixes; every pair on that line is optimal. Returns the representative
    t0 = c0.
    """
    prior = np.asarray(prior, dtype=float).reshape(2, 2)
    prob = ContinuousProblem(
        ((_uniform(b0, 1), _uniform(c0, 1)), (_uniform(b1, 1), _uniform(c1, 1))), prior
    )
    p00, p01, p10, p11 = prior.ravel()
    k = (p01 / p11) * (1 - c1) / (1 - c0)
    num = p01 / (1 - c0) + p11 * k / (1 - c1)
    den = p01 / (1 - c0) + p00 / (1 - b0) + p10 * k / (1 - b1) + p11 * k / (1 - c1)
    return prob, (c0, 1 - (p01 / p11) * (1 - c1), num / den)
