"""Independent brute-force re-implementations used only as test oracles."""

import itertools
import math

import numpy as np


def alpha_grid_best(pmf, step=0.01, es_tol=1e-6):
    """Best accuracy over an alpha grid restricted to the ES segment.

    alpha00, alpha01, alpha10 range over the grid; alpha11 is solved from the
    ES equality (the projection onto the feasible segment) and kept if it
    lands in [0, 1].
    """
    p = pmf.p
    g = np.round(np.arange(0, 1 + step / 2, step), 12)
    a00, a01, a10 = np.meshgrid(g, g, g, indexing="ij", sparse=True)
    # sum_yhat alpha[0,yhat] p[0,yhat,1] = sum_yhat alpha[1,yhat] p[1,yhat,1]
    lhs = a00 * p[0, 0, 1] + a01 * p[0, 1, 1] - a10 * p[1, 0, 1]
    a11 = lhs / p[1, 1, 1]
    resid = np.abs(lhs - a11 * p[1, 1, 1])
    ok = (a11 >= 0) & (a11 <= 1) & (resid <= es_tol)
    num = a00 * p[0, 0, 1] + a01 * p[0, 1, 1] + a10 * p[1, 0, 1] + a11 * p[1, 1, 1]
    den = (
        a00 * p[0, 0].sum() + a01 * p[0, 1].sum() + a10 * p[1, 0].sum() + a11 * p[1, 1].sum()
    )
    ok &= den > 0
    with np.errstate(invalid="ignore", divide="ignore"):
        ratio = np.where(ok, num / np.where(ok, den, 1.0), -np.inf)
    return float(ratio.max())


def rr_weight(at, a, eps):
    """Pr{Ã=at | A=a} written out directly."""
    e = math.exp(eps)
    return e / (1 + e) if at == a else 1 / (1 + e)


def dp_joint_bruteforce(model, beta, eps):
    """Pr{Z=1, A=a, Y=y} by summing over every (a, ã, ŷ, y)."""
    out = np.zeros((2, 2))
    for a, at, k, y in itertools.product(range(2), range(2), range(model.n), range(2)):
        out[a, y] += model.table[at, a, y, k] * rr_weight(at, a, eps) * beta[at][k]
    return out


def dp_es_residual_bruteforce(model, beta, eps):
    z = dp_joint_bruteforce(model, beta, eps)
    return abs(z[0, 1] - z[1, 1])


def dp_eo_residual_bruteforce(model, beta, eps):
    z = dp_joint_bruteforce(model, beta, eps)
    p = model.p_ay
    return abs(z[0, 1] / p[0, 1] - z[1, 1] / p[1, 1])
