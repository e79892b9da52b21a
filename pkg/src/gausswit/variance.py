"""Variance sums of collective quadratures and the local uncertainty bound.

With ``X^(k) = sum_i alpha_i^(k) x_i^(k)``, ``P^(k) = sum_i beta_i^(k) p_i^(k)``
and weights ``t``, the collective operators are ``U = sum_k t_k X^(k)`` and
``V = sum_k t_k P^(k)``.  For a fully separable state

    Var(U) + Var(V) >= sum_k (alpha^(k) . beta^(k)) t_k^2,

and ``t^T Gamma t`` is exactly the left side minus the right side.
"""

from __future__ import annotations

import numpy as np

from gausswit.gamma import GammaKernel, ParamVector
from gausswit.state_model import DimensionError, PartyStructure


def _weights(t, ps: PartyStructure) -> np.ndarray:
    t = np.asarray(t, dtype=float)
    if t.shape != (ps.n_parties,):
        raise DimensionError(f"weights must have length {ps.n_parties}")
    return t


def variance_sum(cm: np.ndarray, ps: PartyStructure, params: ParamVector, t) -> float:
    """``Var(U) + Var(V)`` as a quadratic form in the covariance matrix."""
    params.check(ps)
    t = _weights(t, ps)
    if np.shape(cm) != (ps.dim, ps.dim):
        raise DimensionError(f"covariance matrix must be {ps.dim}x{ps.dim}")
    cm = np.asarray(cm, dtype=float)
    a, b = params.mode_arrays()
    tm = t[ps.party_of_mode()]
    # Full-length quadrature vectors of U and V in the interleaved layout.
    u = np.zeros(ps.dim)
    v = np.zeros(ps.dim)
    u[0::2] = tm * a
    v[1::2] = tm * b
    return float(u @ cm @ u + v @ cm @ v)


def lur_bound(params: ParamVector, t) -> float:
    t = np.asarray(t, dtype=float)
    if t.shape != (len(params.alpha),):
        raise DimensionError(f"weights must have length {len(params.alpha)}")
    return float(sum(tk * tk * float(a @ b) for tk, a, b in zip(t, params.alpha, params.beta)))


def check_separable_inequality(cm: np.ndarray, ps: PartyStructure, params: ParamVector,
                               t) -> float:
    """Slack ``Var(U) + Var(V) - bound``; negative slack certifies entanglement."""
    return variance_sum(cm, ps, params, t) - lur_bound(params, t)


def certificate_weights(cm: np.ndarray, ps: PartyStructure, params: ParamVector,
                        parties) -> np.ndarray:
    """Weights ``t`` (length n, zero off ``parties``) along the lowest eigenvector.

    The eigenvector belongs to Gamma restricted to ``parties`` at ``params``;
    when that block has a negative eigenvalue the returned ``t`` makes
    :func:`check_separable_inequality` negative.
    """
    params.check(ps)
    g = GammaKernel(cm, ps).gamma(*params.mode_arrays())
    idx = np.asarray(parties) - 1
    _, vecs = np.linalg.eigh(g[np.ix_(idx, idx)])
    t = np.zeros(ps.n_parties)
    t[idx] = vecs[:, 0]
    # Fix the sign so the output is reproducible.
    pivot = np.argmax(np.abs(t))
    return t if t[pivot] >= 0 else -t
