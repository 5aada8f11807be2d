"""Pure numpy versions of the compiled kernels, same signatures and semantics."""

import math

import numpy as np

from .box import OUTCOME_SIGNS


def grid_scan(eta, gamma, tol, branch):
    eta = np.ascontiguousarray(eta, dtype=float)
    gamma = np.ascontiguousarray(gamma, dtype=float)
    a0 = np.arcsin(1.0 - 2.0 * eta)[:, None]
    a1 = np.arcsin(1.0 - 2.0 * gamma)[None, :]
    limit = math.pi + tol
    ok = (np.abs(3.0 * a0 - a1) <= limit) & (np.abs(a0 + a1) <= limit)
    e = eta[:, None]
    g = gamma[None, :]
    if branch == 1:
        ok &= g > 3.0 * e
    elif branch == 2:
        ok &= g <= 3.0 * e
    n_feasible = int(ok.sum())
    if n_feasible == 0:
        return -1, -1, 0.0, 0
    val = (2.0 * g - 4.0 * g * g) - 6.0 * e + 12.0 * e * e
    val = np.where(ok, val, -np.inf)
    # argmax returns the first maximum in C order: smallest eta, then smallest gamma
    flat = int(np.argmax(val))
    i, j = divmod(flat, gamma.shape[0])
    return i, j, float(val[i, j]), n_feasible


def batch_chsh(tables):
    tables = np.asarray(tables, dtype=float)
    c = tables @ OUTCOME_SIGNS
    terms = c.sum(axis=-1, keepdims=True) - 2.0 * c[..., ::-1]
    return np.abs(terms).max(axis=-1)
