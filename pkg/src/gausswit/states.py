"""Example covariance matrices and simple test families."""

from __future__ import annotations

import math
from typing import Sequence

import numpy as np

from gausswit.state_model import DimensionError, PartyStructure, as_covariance


def symmetric_coefficients(a: float) -> tuple[float, float]:
    """Off-diagonal x-x and p-p correlations ``(c1, c2)`` of the symmetric pure state."""
    if not a >= 1:
        raise ValueError(f"the symmetric pure state needs a >= 1, got {a}")
    root = math.sqrt((a * a - 1) * (25 * a * a - 9))
    return (3 * (a * a - 1) + root) / (8 * a), (3 * (a * a - 1) - root) / (8 * a)


def symmetric_pure_cm(a: float) -> tuple[PartyStructure, np.ndarray]:
    """Five-mode pure symmetric state, one mode per party.

    Diagonal ``a``, every x-x pair ``c1``, every p-p pair ``c2``, no x-p terms.
    """
    c1, c2 = symmetric_coefficients(a)
    modes = 5
    mx = np.full((modes, modes), c1)
    mp = np.full((modes, modes), c2)
    np.fill_diagonal(mx, a)
    np.fill_diagonal(mp, a)
    cm = np.zeros((2 * modes, 2 * modes))
    cm[0::2, 0::2] = mx
    cm[1::2, 1::2] = mp
    ps = PartyStructure((1,) * modes)
    return ps, as_covariance(cm, ps)


def mixed_bipartite_cm(lam: float) -> tuple[PartyStructure, np.ndarray]:
    """The 8 x 8 two-party (2 + 2 modes) mixed-state matrix, shifted by ``lam``.

    Rows 1-4 belong to the first party, rows 5-8 to the second.
    """
    cm = np.full((8, 8), 1 / 10)
    cm[:4, :4] = 2 / 5
    cm[4:, 4:] = -1 / 8
    idx = np.arange(4)
    cm[idx, idx] = 8 / 5 + lam
    cm[idx + 4, idx + 4] = 1 / 2 + lam
    ps = PartyStructure((2, 2))
    return ps, as_covariance(cm, ps)


def separable_product_cm(blocks: Sequence) -> tuple[PartyStructure, np.ndarray]:
    """Block-diagonal CM of a product state from per-party CMs."""
    if not blocks:
        raise DimensionError("need at least one block")
    mats = [np.asarray(b, dtype=float) for b in blocks]
    sizes = []
    for i, m in enumerate(mats, start=1):
        if m.ndim != 2 or m.shape[0] != m.shape[1] or m.shape[0] % 2 or m.shape[0] == 0:
            raise DimensionError(f"block {i} must be a non-empty 2s x 2s matrix, got {m.shape}")
        if not np.allclose(m, m.T, rtol=0, atol=1e-12):
            raise DimensionError(f"block {i} is not symmetric")
        sizes.append(m.shape[0] // 2)
    ps = PartyStructure(tuple(sizes))
    cm = np.zeros((ps.dim, ps.dim))
    at = 0
    for m in mats:
        d = m.shape[0]
        cm[at:at + d, at:at + d] = m
        at += d
    return ps, as_covariance(cm, ps)


def vacuum_cm(n_parties: int, modes_per_party: int = 1) -> tuple[PartyStructure, np.ndarray]:
    ps = PartyStructure((modes_per_party,) * n_parties)
    return ps, as_covariance(np.eye(ps.dim), ps)
