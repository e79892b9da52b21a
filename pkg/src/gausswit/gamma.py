"""Assembly of the parametric n x n matrix Gamma(M, alpha, beta).

For parties ``c, d`` with parameter blocks ``(alpha^(c), beta^(c))``::

    gamma_cc = alpha^(c) . Mx[c,c] . alpha^(c) + beta^(c) . Mp[c,c] . beta^(c)
               - sum_i alpha_i^(c) beta_i^(c)
    gamma_cd = alpha^(c) . Mx[c,d] . alpha^(d) + beta^(c) . Mp[c,d] . beta^(d)

where ``Mx``/``Mp`` are the x-x and p-p sub-blocks of the covariance matrix.
Only x-x and p-p correlations enter; x-p correlations are ignored.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Sequence

import numpy as np

from gausswit.state_model import DimensionError, PartyStructure


@dataclass(frozen=True)
class ParamVector:
    """Per-party parameter blocks ``alpha^(i)`` and ``beta^(i)`` (length ``s_i`` each)."""

    alpha: tuple[np.ndarray, ...]
    beta: tuple[np.ndarray, ...]

    def __post_init__(self):
        alpha = tuple(_frozen_vector(a) for a in self.alpha)
        beta = tuple(_frozen_vector(b) for b in self.beta)
        if len(alpha) != len(beta):
            raise DimensionError("alpha and beta must have one block per party")
        for i, (a, b) in enumerate(zip(alpha, beta), start=1):
            if a.shape != b.shape:
                raise DimensionError(f"party {i}: alpha and beta blocks differ in length")
        object.__setattr__(self, "alpha", alpha)
        object.__setattr__(self, "beta", beta)

    @property
    def sizes(self) -> tuple[int, ...]:
        return tuple(len(a) for a in self.alpha)

    def check(self, ps: PartyStructure) -> None:
        if self.sizes != ps.party_sizes:
            raise DimensionError(
                f"parameter blocks {list(self.sizes)} do not match party sizes "
                f"{list(ps.party_sizes)}"
            )

    def block_norms(self) -> np.ndarray:
        return np.array([np.sqrt(a @ a + b @ b) for a, b in zip(self.alpha, self.beta)])

    def normalized(self) -> "ParamVector":
        """Scale each party block to unit Euclidean norm (zero blocks are an error)."""
        norms = self.block_norms()
        if np.any(norms == 0):
            raise ValueError("cannot normalize a zero parameter block")
        return ParamVector(
            tuple(a / r for a, r in zip(self.alpha, norms)),
            tuple(b / r for b, r in zip(self.beta, norms)),
        )

    def scaled_party(self, party: int, factor: float) -> "ParamVector":
        """Copy with the 1-based ``party`` block multiplied by ``factor``."""
        alpha, beta = list(self.alpha), list(self.beta)
        alpha[party - 1] = alpha[party - 1] * factor
        beta[party - 1] = beta[party - 1] * factor
        return ParamVector(tuple(alpha), tuple(beta))

    def mode_arrays(self) -> tuple[np.ndarray, np.ndarray]:
        """Concatenate the blocks into per-mode arrays ``(a, b)``."""
        return np.concatenate(self.alpha), np.concatenate(self.beta)

    @classmethod
    def from_mode_arrays(cls, ps: PartyStructure, a, b) -> "ParamVector":
        a, b = np.asarray(a, dtype=float), np.asarray(b, dtype=float)
        if a.shape != (ps.total_modes,) or b.shape != (ps.total_modes,):
            raise DimensionError("mode arrays must have one entry per mode")
        cuts = np.cumsum(ps.party_sizes)[:-1]
        return cls(tuple(np.split(a, cuts)), tuple(np.split(b, cuts)))

    @classmethod
    def from_blocks(cls, alpha: Sequence[Sequence[float]], beta: Sequence[Sequence[float]]):
        return cls(tuple(np.asarray(x, dtype=float) for x in alpha),
                   tuple(np.asarray(x, dtype=float) for x in beta))

    @classmethod
    def random(cls, ps: PartyStructure, rng: np.random.Generator) -> "ParamVector":
        """Independent uniform points on each party's unit sphere."""
        a, b = random_sphere_modes(ps, rng, 1)
        return cls.from_mode_arrays(ps, a[0], b[0])

    @classmethod
    def uniform(cls, ps: PartyStructure) -> "ParamVector":
        """All entries ``1/sqrt(2 s_i)``: a fixed normalized point."""
        return cls(
            tuple(np.full(s, 1 / np.sqrt(2 * s)) for s in ps.party_sizes),
            tuple(np.full(s, 1 / np.sqrt(2 * s)) for s in ps.party_sizes),
        )

    def to_dict(self) -> dict:
        return {"alpha": [a.tolist() for a in self.alpha],
                "beta": [b.tolist() for b in self.beta]}

    @classmethod
    def from_dict(cls, data: dict) -> "ParamVector":
        try:
            return cls.from_blocks(data["alpha"], data["beta"])
        except (KeyError, TypeError) as exc:
            raise DimensionError(f"malformed parameter object: {exc}") from exc

    def __eq__(self, other):
        if not isinstance(other, ParamVector):
            return NotImplemented
        return self.sizes == other.sizes and all(
            np.array_equal(x, y)
            for x, y in zip(self.alpha + self.beta, other.alpha + other.beta)
        )

    __hash__ = None


def _frozen_vector(x) -> np.ndarray:
    v = np.array(x, dtype=float).reshape(-1)
    v.flags.writeable = False
    return v


def random_sphere_modes(ps: PartyStructure, rng: np.random.Generator, count: int):
    """``count`` samples, uniform on the product of per-party unit spheres.

    Returned as mode arrays ``a, b`` of shape ``(count, S)``.
    """
    z = rng.standard_normal((count, 2 * ps.total_modes))
    a, b = z[:, 0::2], z[:, 1::2]
    return project_to_spheres(ps.party_of_mode(), ps.n_parties, a, b)


def project_to_spheres(party_of_mode: np.ndarray, n_parties: int, a, b):
    """Rescale every party block of the mode arrays to unit norm."""
    sq = a * a + b * b
    norms = np.sqrt(_party_sum(sq, party_of_mode, n_parties))
    scale = norms[..., party_of_mode]
    return a / scale, b / scale


def _party_sum(x: np.ndarray, party_of_mode: np.ndarray, n_parties: int) -> np.ndarray:
    return x @ np.eye(n_parties)[party_of_mode]


class GammaKernel:
    """Precomputed blocks for evaluating Gamma at many parameter points.

    Parameters live in mode space: ``a[m]`` / ``b[m]`` is the alpha / beta
    weight of global mode ``m``.  Leading axes of ``a``, ``b`` are batch axes.
    """

    def __init__(self, cm: np.ndarray, ps: PartyStructure):
        cm = np.asarray(cm, dtype=float)
        if cm.shape != (ps.dim, ps.dim):
            raise DimensionError(
                f"party sizes {list(ps.party_sizes)} need a {ps.dim}x{ps.dim} matrix, "
                f"got {cm.shape}"
            )
        self.ps = ps
        self.mx = np.ascontiguousarray(cm[0::2, 0::2])
        self.mp = np.ascontiguousarray(cm[1::2, 1::2])
        self.party_of_mode = ps.party_of_mode()
        self.onehot = np.eye(ps.n_parties)[self.party_of_mode]  # S x n

    def gamma(self, a, b) -> np.ndarray:
        a = np.asarray(a, dtype=float)
        b = np.asarray(b, dtype=float)
        A = a[..., :, None] * self.onehot
        B = b[..., :, None] * self.onehot
        g = np.swapaxes(A, -1, -2) @ (self.mx @ A) + np.swapaxes(B, -1, -2) @ (self.mp @ B)
        n = self.ps.n_parties
        diag = (a * b) @ self.onehot
        idx = np.arange(n)
        g[..., idx, idx] -= diag
        return mirror_upper(g)

    def determinant_and_gradient(self, a, b):
        """``det Gamma`` and its gradient with respect to ``a`` and ``b``.

        Uses ``d det G = trace(adj(G) dG)``; every entry of Gamma is
        quadratic or bilinear in the parameters, so ``dG`` is explicit.
        """
        g = self.gamma(a, b)
        det = np.linalg.det(g)
        adj = adjugate(g)
        adj = (adj + np.swapaxes(adj, -1, -2)) / 2
        pm = self.party_of_mode
        expanded = adj[..., pm[:, None], pm[None, :]]  # S x S
        own = adj[..., pm, pm]
        grad_a = 2 * np.einsum("...ij,...j->...i", self.mx * expanded, a) - own * b
        grad_b = 2 * np.einsum("...ij,...j->...i", self.mp * expanded, b) - own * a
        return det, grad_a, grad_b


def adjugate(g: np.ndarray) -> np.ndarray:
    """Adjugate of a (stack of) square matrices, well defined when singular.

    With ``G = U diag(s) V^T``: ``adj(G) = det(U) det(V) V diag(prod_{j!=i} s_j) U^T``.
    """
    g = np.asarray(g, dtype=float)
    k = g.shape[-1]
    if k == 1:
        return np.ones_like(g)
    u, s, vt = np.linalg.svd(g)
    ones = np.ones(s.shape[:-1] + (1,))
    left = np.cumprod(np.concatenate([ones, s[..., :-1]], axis=-1), axis=-1)
    right = np.cumprod(np.concatenate([ones, s[..., :0:-1]], axis=-1), axis=-1)[..., ::-1]
    sign = np.linalg.det(u) * np.linalg.det(vt)
    v_scaled = np.swapaxes(vt, -1, -2) * (left * right)[..., None, :]
    return sign[..., None, None] * (v_scaled @ np.swapaxes(u, -1, -2))


def mirror_upper(g: np.ndarray) -> np.ndarray:
    """Exactly symmetric copy built from the upper triangle."""
    upper = np.triu(g)
    return upper + np.swapaxes(np.triu(g, 1), -1, -2)


def build_gamma(cm: np.ndarray, ps: PartyStructure, params: ParamVector) -> np.ndarray:
    """The n x n matrix Gamma at the given (not necessarily normalized) parameters."""
    params.check(ps)
    return GammaKernel(cm, ps).gamma(*params.mode_arrays())


def gamma_quadratic_form(gamma: np.ndarray, t) -> float:
    t = np.asarray(t, dtype=float)
    if t.shape != (gamma.shape[0],):
        raise DimensionError(f"weight vector must have length {gamma.shape[0]}")
    return float(t @ gamma @ t)
