"""Monte Carlo simulation of the sequential selection process.

Applicants arrive one at a time, i.i.d. from the population model. The
policy accepts or rejects each arrival; the first acceptance fills the
position. With ``m > 1`` positions the process restarts for every position.

Trials are processed in fixed-size blocks. Block ``b`` of position ``j``
draws from ``SeedSequence(seed, spawn_key=(j, b))``, and all tallies are
integer counts, so results are bit-identical for any number of workers.
"""

from __future__ import annotations

import math
import warnings
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field

import numpy as np
from scipy import stats

from .binary import PostProcessPolicy, evaluate_policy
from .distributions import BinaryJointPMF, CounterfactualModel, ScoreModel
from .dp import DPConfig, DPPolicy, evaluate_dp_policy, normalization_coefficients
from .errors import ValidationError
from .outcome import SelectionOutcome
from .thresholds import ThresholdPair, evaluate_dp_thresholds, evaluate_thresholds

BLOCK = 1 << 16


@dataclass(frozen=True)
class SimConfig:
    trials: int = 100_000
    seed: int = 0
    m: int = 1
    max_steps: int = 1_000_000
    workers: int = 1

    def __post_init__(self):
        for name in ("trials", "m", "max_steps", "workers"):
            if int(getattr(self, name)) < 1:
                raise ValidationError(f"{name} must be >= 1")
        if not 0 <= int(self.seed) < 2**64:
            raise ValidationError("seed must be a 64-bit unsigned value")


def _cumulative(p: np.ndarray) -> tuple[np.ndarray, np.ndarray]:
    """Row-wise CDF tables plus the last positive index per row (for clipping)."""
    p = np.atleast_2d(np.asarray(p, dtype=float))
    cum = np.cumsum(p, axis=-1)
    last = np.array([np.nonzero(row > 0)[0][-1] if np.any(row > 0) else 0 for row in p])
    return cum, last


def _draw(cum: np.ndarray, last: np.ndarray, stratum: np.ndarray, u: np.ndarray) -> np.ndarray:
    out = np.empty(u.shape, dtype=np.int64)
    for s in np.unique(stratum):
        mask = stratum == s
        idx = np.searchsorted(cum[s], u[mask], side="right")
        out[mask] = np.minimum(idx, last[s])
    return out


class Pipeline:
    """One arrival-and-decision step; subclasses fix the policy family."""

    def sample_step(self, rng: np.random.Generator, size: int):
        """Return ``(a, y, accept)`` arrays for ``size`` fresh arrivals."""
        raise NotImplementedError

    def closed_form(self) -> SelectionOutcome:
        raise NotImplementedError

    def acceptance_probability(self) -> float:
        raise NotImplementedError


class BinaryPipeline(Pipeline):
    def __init__(self, pmf: BinaryJointPMF, policy: PostProcessPolicy):
        self.pmf, self.policy = pmf, policy
        self._cum, self._last = _cumulative(pmf.p.ravel())

    def sample_step(self, rng, size):
        u = rng.random((2, size))
        cell = _draw(self._cum, self._last, np.zeros(size, dtype=np.int64), u[0])
        a, r, y = cell // 4, (cell // 2) % 2, cell % 2
        return a, y, u[1] < self.policy.alpha[a, r]

    def closed_form(self):
        return evaluate_policy(self.pmf, self.policy)

    def acceptance_probability(self):
        return float((self.policy.alpha * self.pmf.p_ar).sum())


class ThresholdPipeline(Pipeline):
    def __init__(self, model: ScoreModel, pair: ThresholdPair):
        self.model, self.pair = model, pair
        self._idx = np.array(pair.indices(model.support))
        self._cum_ay, self._last_ay = _cumulative(model.prior.ravel())
        self._cum_r, self._last_r = _cumulative(model.cond.reshape(4, model.n))

    def sample_step(self, rng, size):
        u = rng.random((2, size))
        ay = _draw(self._cum_ay, self._last_ay, np.zeros(size, dtype=np.int64), u[0])
        k = _draw(self._cum_r, self._last_r, ay, u[1])
        a = ay // 2
        return a, ay % 2, k >= self._idx[a]

    def closed_form(self):
        return evaluate_thresholds(self.model, self.pair)

    def acceptance_probability(self):
        tails = self.model.tail_joint().sum(axis=1)
        return float(tails[0, self._idx[0]] + tails[1, self._idx[1]])


class DPPipeline(Pipeline):
    """Privatized pipeline: (A, Y) from the population, Ã by randomized
    response, r(X, Ã) from its law given (A, Y), then accept w.p. beta[Ã, r].

    ``beta`` has shape (2, n); thresholds on r(X, Ã) are the 0/1 special case.
    """

    def __init__(self, model: CounterfactualModel, beta, config: DPConfig, closed_form=None):
        self.model, self.config = model, config
        self.beta = np.asarray(beta, dtype=float).reshape(2, model.n)
        self._closed = closed_form
        self._cum_ay, self._last_ay = _cumulative(model.p_ay.ravel())
        cond = np.stack([model.output_given_ay(t) for t in (0, 1)])  # [at, a, y, k]
        self._cum_r, self._last_r = _cumulative(cond.reshape(8, model.n))

    @classmethod
    def from_thresholds(cls, model, pair: ThresholdPair, config: DPConfig) -> DPPipeline:
        i = pair.indices(model.support)
        beta = (np.arange(model.n)[None, :] >= np.array(i)[:, None]).astype(float)
        return cls(model, beta, config, lambda: evaluate_dp_thresholds(model, pair, config))

    def sample_step(self, rng, size):
        u = rng.random((4, size))
        ay = _draw(self._cum_ay, self._last_ay, np.zeros(size, dtype=np.int64), u[0])
        a, y = ay // 2, ay % 2
        at = np.where(u[1] < self.config.flip_probability, 1 - a, a)
        k = _draw(self._cum_r, self._last_r, at * 4 + ay, u[2])
        return a, y, u[3] < self.beta[at, k]

    def closed_form(self):
        if self._closed is not None:
            return self._closed()
        return evaluate_dp_policy(self.model, self.beta, self.config)

    def acceptance_probability(self):
        return float((normalization_coefficients(self.model, self.config) * self.beta).sum())


def make_pipeline(policy, model, dp: DPConfig | None = None) -> Pipeline:
    """Pair a policy with a population model of the matching family."""
    if isinstance(policy, Pipeline):
        return policy
    if isinstance(policy, PostProcessPolicy) and isinstance(model, BinaryJointPMF):
        return BinaryPipeline(model, policy)
    if isinstance(policy, ThresholdPair) and isinstance(model, ScoreModel):
        return ThresholdPipeline(model, policy)
    if isinstance(model, CounterfactualModel):
        if dp is None:
            raise ValidationError("DP pipelines need a DPConfig")
        if isinstance(policy, DPPolicy):
            return DPPipeline(model, policy.beta, dp)
        if isinstance(policy, ThresholdPair):
            return DPPipeline.from_thresholds(model, policy, dp)
    raise ValidationError(
        f"policy {type(policy).__name__} does not fit model {type(model).__name__}"
    )


def closed_form_outcome(policy, model, dp: DPConfig | None = None) -> SelectionOutcome:
    return make_pipeline(policy, model, dp).closed_form()


@dataclass
class _Tally:
    e0: int = 0
    e1: int = 0
    sel0: int = 0
    sel1: int = 0
    truncated: int = 0
    steps: dict = field(default_factory=dict)

    def add(self, other: _Tally) -> None:
        self.e0 += other.e0
        self.e1 += other.e1
        self.sel0 += other.sel0
        self.sel1 += other.sel1
        self.truncated += other.truncated
        for k, v in other.steps.items():
            self.steps[k] = self.steps.get(k, 0) + v


def _run_block(pipeline: Pipeline, seq: np.random.SeedSequence, size: int, max_steps: int) -> _Tally:
    rng = np.random.default_rng(seq)
    t = _Tally()
    active = size
    step = 0
    steps: dict[int, int] = {}
    while active and step < max_steps:
        step += 1
        a, y, acc = pipeline.sample_step(rng, active)
        n_acc = int(acc.sum())
        if n_acc:
            a, y = a[acc], y[acc]
            t.sel1 += int(a.sum())
            t.sel0 += n_acc - int(a.sum())
            t.e1 += int((a & y).sum())
            t.e0 += int(((1 - a) & y).sum())
            steps[step] = n_acc
            active -= n_acc
    t.truncated = active
    t.steps = steps
    return t


@dataclass(frozen=True)
class SimResult:
    """Empirical outcome. ``estimates`` is None when nothing was ever selected."""

    estimates: SelectionOutcome | None
    per_position: tuple
    stderr: dict
    truncated_trials: int
    steps_histogram: dict
    trials: int
    m: int

    def to_dict(self) -> dict:
        return {
            "trials": self.trials,
            "positions": self.m,
            "estimates": None if self.estimates is None else self.estimates.to_dict(),
            "per_position": [None if p is None else p.to_dict() for p in self.per_position],
            "stderr": self.stderr,
            "truncated_trials": self.truncated_trials,
            "steps_histogram": {str(k): v for k, v in sorted(self.steps_histogram.items())},
        }


def _estimate(t: _Tally, n: int) -> SelectionOutcome | None:
    filled = n - t.truncated
    if filled == 0:
        return None
    mean_steps = sum(k * v for k, v in t.steps.items()) / filled
    return SelectionOutcome(
        p_e0=t.e0 / n,
        p_e1=t.e1 / n,
        accuracy=t.e0 / n + t.e1 / n,
        p_accept_per_step=1.0 / mean_steps,
        p_select0=t.sel0 / n,
        p_select1=t.sel1 / n,
    )


def _stderr(p: float, n: int) -> float:
    return math.sqrt(max(p * (1 - p), 0.0) / n)


def simulate(policy, model, config: SimConfig, dp: DPConfig | None = None) -> SimResult:
    """Run ``config.trials`` selections for each of ``config.m`` positions."""
    pipeline = make_pipeline(policy, model, dp)
    n, m = config.trials, config.m
    if pipeline.acceptance_probability() <= 0:
        warnings.warn("policy accepts nobody; every trial is reported as truncated", stacklevel=2)
        none = (None,) * m
        return SimResult(None, none, {}, n * m, {}, n, m)

    jobs = []
    for j in range(m):
        for b, start in enumerate(range(0, n, BLOCK)):
            seq = np.random.SeedSequence(config.seed, spawn_key=(j, b))
            jobs.append((j, seq, min(BLOCK, n - start)))
    run = lambda job: _run_block(pipeline, job[1], job[2], config.max_steps)  # noqa: E731
    if config.workers > 1:
        with ThreadPoolExecutor(config.workers) as ex:
            tallies = list(ex.map(run, jobs))
    else:
        tallies = [run(job) for job in jobs]

    per_pos = [_Tally() for _ in range(m)]
    total = _Tally()
    for (j, _, _), t in zip(jobs, tallies):
        per_pos[j].add(t)
        total.add(t)
    est = _estimate(total, n * m)
    se = {}
    if est is not None:
        for name in ("p_e0", "p_e1", "accuracy", "p_select0", "p_select1"):
            se[name] = _stderr(getattr(est, name), n * m)
    return SimResult(
        est,
        tuple(_estimate(t, n) for t in per_pos),
        se,
        total.truncated,
        dict(sorted(total.steps.items())),
        n,
        m,
    )


@dataclass(frozen=True)
class GeometricFit:
    statistic: float
    pvalue: float
    dof: int


def geometric_gof(histogram: dict, p: float) -> GeometricFit:
    """Pearson chi-square of stopping times against Geometric(p) on {1, 2, ...}.

    Bins are merged from the right until every expected count is at least 5;
    the last bin absorbs the whole upper tail.
    """
    total = sum(histogram.values())
    kmax = max(histogram)
    obs, exp = [], []
    k = 1
    while True:
        e = total * p * (1 - p) ** (k - 1)
        tail = total * (1 - p) ** (k - 1)
        if tail - e < 5 or k >= kmax:
            obs.append(sum(v for s, v in histogram.items() if s >= k))
            exp.append(tail)
            break
        obs.append(histogram.get(k, 0))
        exp.append(e)
        k += 1
    while len(exp) > 1 and exp[-1] < 5:
        exp[-2] += exp.pop()
        obs[-2] += obs.pop()
    if len(obs) < 2:
        return GeometricFit(0.0, 1.0, 0)
    res = stats.chisquare(obs, exp)
    return GeometricFit(float(res.statistic), float(res.pvalue), len(obs) - 1)
