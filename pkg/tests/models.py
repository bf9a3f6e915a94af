"""Random model generators and hypothesis strategies shared by the tests."""

import numpy as np
from hypothesis import strategies as st
from hypothesis.extra import numpy as hnp

from seqfair.distributions import BinaryJointPMF, CounterfactualModel, ScoreModel


def random_pmf(rng, floor=0.0):
    w = rng.dirichlet(np.ones(8))
    return BinaryJointPMF((floor + (1 - 8 * floor) * w).reshape(2, 2, 2))


def random_counterfactual(rng, n=2, blind=False, floor=0.0):
    pay = floor + (1 - 4 * floor) * rng.dirichlet(np.ones(4))
    pay = pay.reshape(2, 2)
    t = np.empty((2, 2, 2, n))
    for a in range(2):
        for y in range(2):
            law = rng.dirichlet(np.ones(n))
            t[0, a, y] = pay[a, y] * law
            t[1, a, y] = pay[a, y] * (law if blind else rng.dirichlet(np.ones(n)))
    return CounterfactualModel(t, np.linspace(0, 1, n) if n > 2 else np.array([0.0, 1.0]))


def random_score_model(rng, n=6, support=None):
    support = np.arange(1, n + 1) / n if support is None else np.asarray(support)
    prior = rng.dirichlet(np.ones(4)).reshape(2, 2)
    cond = rng.dirichlet(np.ones(n), size=(2, 2))
    return ScoreModel(support, prior, cond)


weights8 = hnp.arrays(
    np.float64, 8, elements=st.floats(0.01, 1.0, allow_nan=False, allow_infinity=False)
)


@st.composite
def pmfs(draw, floor=0.0):
    w = draw(weights8)
    return BinaryJointPMF((w / w.sum()).reshape(2, 2, 2))


@st.composite
def score_models(draw, max_n=6):
    n = draw(st.integers(1, max_n))
    pos = st.floats(0.01, 1.0)
    prior = np.array(draw(st.lists(pos, min_size=4, max_size=4)))
    cond = np.array(draw(st.lists(pos, min_size=4 * n, max_size=4 * n))).reshape(2, 2, n)
    return ScoreModel(
        np.arange(n, dtype=float), (prior / prior.sum()).reshape(2, 2), cond / cond.sum(axis=2, keepdims=True)
    )


@st.composite
def counterfactual_models(draw, blind=False):
    pos = st.floats(0.01, 1.0)
    pay = np.array(draw(st.lists(pos, min_size=4, max_size=4)))
    pay = (pay / pay.sum()).reshape(2, 2)
    laws = np.array(draw(st.lists(pos, min_size=16, max_size=16))).reshape(2, 2, 2, 2)
    if blind:
        laws[1] = laws[0]
    laws /= laws.sum(axis=3, keepdims=True)
    return CounterfactualModel(laws * pay[None, :, :, None])


def degenerate_model(rng, n=6):
    """Model meeting the degenerate-outcome hypotheses by construction.

    In both groups every score below the top carries the same accuracy rho,
    and the top score carries more. Dropping a rho-cell can never lower a
    mixture whose accuracy is already at least rho, so accuracy rises with
    either threshold. Top masses are kept small, and both groups get the same
    qualified mass so that accepting everyone is exactly ES fair.
    """
    rho = rng.uniform(0.3, 0.6)
    prior = np.empty((2, 2))
    cond = np.empty((2, 2, n))
    for a in range(2):
        top1 = rng.uniform(0.02, 0.1)
        top0 = top1 * rng.uniform(0.0, 0.8)
        odds = (1 - rho) * (1 - top1) / (rho * (1 - top0))  # p_a0 / p_a1
        prior[a] = odds, 1.0
        lower = rng.dirichlet(np.ones(n - 1))
        cond[a, 1] = np.append((1 - top1) * lower, top1)
        cond[a, 0] = np.append((1 - top0) * lower, top0)
    return ScoreModel(np.arange(n, dtype=float), prior / prior.sum(), cond)


def degenerate_models(rng, fairness, count, n=6):
    """``count`` constructed models with gamma = the larger top mass."""
    from seqfair.thresholds import top_mass

    out = []
    for _ in range(count):
        m = degenerate_model(rng, n)
        out.append((m, max(top_mass(m, fairness))))
    return out
