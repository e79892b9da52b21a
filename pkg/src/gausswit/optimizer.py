"""Multi-start minimization of a leading principal minor of Gamma.

Every minor is homogeneous of even degree in each party block, so the
parameters are restricted to the product of per-party unit spheres and the
sign of the minimum becomes the quantity of interest.  The default search is
projected gradient descent with Armijo backtracking, run on a batch of
restarts at once.  The first trial step of each line search is the
Barzilai-Borwein estimate from the previous iterate (``initial_step`` on the
first iteration or when that estimate is unusable), which avoids the slow
zigzag a fixed unit step produces near minima of curvature close to 2; a Nelder-Mead fallback works in gnomonic chart coordinates.
"""

from __future__ import annotations

import logging
from dataclasses import dataclass, field
from typing import Sequence

import numpy as np
from scipy import optimize, stats
from scipy.linalg import null_space

from gausswit.gamma import GammaKernel, ParamVector, project_to_spheres, random_sphere_modes
from gausswit.state_model import InputError, PartitionQuery, PartyStructure, restrict_state

log = logging.getLogger(__name__)

MODES = ("gradient", "derivative-free")
STARTS = ("random", "sobol")

# Line search gives up below this step; no representable decrease remains.
_MIN_STEP = 1e-20
# A restart whose accepted steps improve f by at most this many ulps of
# max(1, |f|) for _STALL_ROUNDS iterations in a row is at the precision floor.
_STALL_ULPS = 8.0
_STALL_ROUNDS = 3
# Bounds on the Barzilai-Borwein trial step.
_BB_RANGE = (1e-8, 1e8)


@dataclass(frozen=True)
class OptimizerConfig:
    restarts: int = 64
    max_iters: int = 500
    gradient_tolerance: float = 1e-10
    initial_step: float = 1.0
    shrink: float = 0.5
    sufficient_decrease: float = 1e-4
    seed: int = 0
    mode: str = "gradient"
    start: str = "random"
    decision_tolerance: float = 1e-7
    early_exit: bool = True
    batch: int = 64
    barzilai_borwein: bool = True

    def __post_init__(self):
        if self.restarts < 1 or self.max_iters < 1 or self.batch < 1:
            raise ValueError("restarts, max_iters and batch must be positive")
        for name in ("gradient_tolerance", "initial_step", "sufficient_decrease",
                     "decision_tolerance"):
            if not getattr(self, name) > 0:
                raise ValueError(f"{name} must be > 0")
        if not 0 < self.shrink < 1:
            raise ValueError("shrink must lie in (0, 1)")
        if not 0 <= self.seed < 2**64:
            raise ValueError("seed must be a non-negative 64-bit integer")
        if self.mode not in MODES:
            raise ValueError(f"mode must be one of {MODES}")
        if self.start not in STARTS:
            raise ValueError(f"start must be one of {STARTS}")


@dataclass(frozen=True)
class MinorResult:
    """Best value found for the ``k``-th leading minor of Gamma on ``parties``.

    ``witness`` covers every party of the full structure; blocks of parties
    outside ``parties[:k]`` do not influence the minor and hold a fixed
    normalized filler.
    """

    k: int
    parties: tuple[int, ...]
    min_value: float
    witness: ParamVector
    converged: bool = True
    restarts_run: int = 0
    histories: tuple = field(default=(), compare=False, repr=False)

    @property
    def l(self) -> int:  # noqa: E743
        return len(self.parties)

    @property
    def involved(self) -> tuple[int, ...]:
        return self.parties[: self.k]


def _as_parties(subset) -> tuple[int, ...]:
    if isinstance(subset, PartitionQuery):
        return subset.parties
    return tuple(int(p) for p in subset)


def _check_minor(ps: PartyStructure, parties: tuple[int, ...], k: int) -> None:
    if not parties:
        raise InputError("empty party list")
    if any(not 1 <= p <= ps.n_parties for p in parties) or len(set(parties)) != len(parties):
        raise InputError(f"invalid party list {parties} for {ps.n_parties} parties")
    if not 1 <= k <= len(parties):
        raise InputError(f"minor order {k} outside 1..{len(parties)}")


def restart_seed(seed: int, l: int, k: int, restart: int) -> np.random.SeedSequence:
    """Independent RNG stream for one (sub-list length, minor order, restart) task."""
    return np.random.SeedSequence([seed, l, k, restart])


def _starting_points(sub_ps: PartyStructure, cfg: OptimizerConfig, l: int, k: int,
                     first: int, count: int):
    if cfg.start == "sobol":
        sampler = stats.qmc.Sobol(2 * sub_ps.total_modes, scramble=True,
                                  seed=np.random.default_rng(restart_seed(cfg.seed, l, k, 0)))
        if first:
            sampler.fast_forward(first)
        u = sampler.random(count)
        z = stats.norm.ppf(np.clip(u, 1e-12, 1 - 1e-12))
        return project_to_spheres(sub_ps.party_of_mode(), sub_ps.n_parties,
                                   z[:, 0::2], z[:, 1::2])
    a = np.empty((count, sub_ps.total_modes))
    b = np.empty_like(a)
    for j in range(count):
        rng = np.random.default_rng(restart_seed(cfg.seed, l, k, first + j))
        a[j], b[j] = (x[0] for x in random_sphere_modes(sub_ps, rng, 1))
    return a, b


def _riemannian(kernel: GammaKernel, a, b, ga, gb):
    """Remove the radial component of the gradient within each party block."""
    pm = kernel.party_of_mode
    radial = (ga * a + gb * b) @ kernel.onehot
    return ga - radial[..., pm] * a, gb - radial[..., pm] * b


def _descend(kernel: GammaKernel, a, b, cfg: OptimizerConfig, trace: bool):
    """Projected gradient descent for a batch of starting points."""
    pm, n = kernel.party_of_mode, kernel.ps.n_parties
    rows = a.shape[0]
    f, ga, gb = kernel.determinant_and_gradient(a, b)
    active = np.ones(rows, dtype=bool)
    converged = np.zeros(rows, dtype=bool)
    histories = [[float(v)] for v in f] if trace else None
    prev = None
    stall = np.zeros(rows, dtype=int)
    floor = _STALL_ULPS * np.finfo(float).eps

    for _ in range(cfg.max_iters):
        ra, rb = _riemannian(kernel, a, b, ga, gb)
        gn2 = np.sum(ra * ra + rb * rb, axis=-1)
        done = active & (np.sqrt(gn2) <= cfg.gradient_tolerance)
        converged |= done
        active &= ~done
        if cfg.early_exit and np.any(f < -cfg.decision_tolerance):
            # Sign decided: only the negative restarts keep refining.
            active &= f < -cfg.decision_tolerance
        if not active.any():
            break

        step = np.full(rows, cfg.initial_step)
        if cfg.barzilai_borwein and prev is not None:
            sa, sb = a - prev[0], b - prev[1]
            ya, yb = ra - prev[2], rb - prev[3]
            ss = np.sum(sa * sa + sb * sb, axis=-1)
            sy = np.sum(sa * ya + sb * yb, axis=-1)
            good = (sy > 0) & (ss > 0)
            step[good] = np.clip(ss[good] / sy[good], *_BB_RANGE)
        prev = (a.copy(), b.copy(), ra, rb)

        before = f.copy()
        pending = active.copy()
        while pending.any():
            idx = np.flatnonzero(pending)
            ca, cb = project_to_spheres(pm, n, a[idx] - step[idx, None] * ra[idx],
                                        b[idx] - step[idx, None] * rb[idx])
            cf = np.linalg.det(kernel.gamma(ca, cb))
            ok = cf <= f[idx] - cfg.sufficient_decrease * step[idx] * gn2[idx]
            acc = idx[ok]
            a[acc], b[acc], f[acc] = ca[ok], cb[ok], cf[ok]
            pending[acc] = False
            rej = idx[~ok]
            step[rej] *= cfg.shrink
            stalled = rej[step[rej] < _MIN_STEP]
            pending[stalled] = False
            active[stalled] = False
            converged[stalled] = True
            if trace:
                for r in acc:
                    histories[r].append(float(f[r]))

        tiny = active & (before - f <= floor * np.maximum(1.0, np.abs(f)))
        stall = np.where(tiny, stall + 1, 0)
        flat = stall >= _STALL_ROUNDS
        converged |= flat
        active &= ~flat

        live = np.flatnonzero(active)
        if live.size:
            _, ga[live], gb[live] = kernel.determinant_and_gradient(a[live], b[live])
    return a, b, f, converged, histories


def _nelder_mead(kernel: GammaKernel, a0, b0, cfg: OptimizerConfig):
    """Derivative-free search in gnomonic charts centred on the current point."""
    pm, n = kernel.party_of_mode, kernel.ps.n_parties
    blocks = [np.flatnonzero(pm == c) for c in range(n)]

    def value(a, b):
        return float(np.linalg.det(kernel.gamma(a, b)))

    a, b = a0.copy(), b0.copy()
    f = value(a, b)
    for _ in range(5):
        centres = [np.concatenate([a[m], b[m]]) for m in blocks]
        bases = [null_space(w[None, :]) for w in centres]
        dims = np.cumsum([0] + [q.shape[1] for q in bases])

        def point(z):
            pa, pb = np.empty_like(a), np.empty_like(b)
            for c, m in enumerate(blocks):
                w = centres[c] + bases[c] @ z[dims[c]:dims[c + 1]]
                w = w / np.linalg.norm(w)
                pa[m], pb[m] = w[: len(m)], w[len(m):]
            return pa, pb

        res = optimize.minimize(
            lambda z: value(*point(z)), np.zeros(dims[-1]), method="Nelder-Mead",
            options={"maxiter": cfg.max_iters * max(dims[-1], 1), "xatol": 1e-10,
                     "fatol": 1e-14},
        )
        na, nb = point(res.x)
        nf = value(na, nb)
        if nf >= f:
            break
        improved = f - nf
        a, b, f = na, nb, nf
        if improved <= 1e-14 * max(1.0, abs(f)):
            break
    return a, b, f


def minimize_minor(cm: np.ndarray, ps: PartyStructure, subset, k: int,
                   cfg: OptimizerConfig = OptimizerConfig(), *, l: int | None = None,
                   trace: bool = False) -> MinorResult:
    """Minimize the ``k``-th leading principal minor of Gamma restricted to ``subset``.

    ``subset`` is an ordered party list (or :class:`PartitionQuery`); only its
    first ``k`` parties enter the minor.  ``l`` tags the RNG streams and
    defaults to ``k``.
    """
    parties = _as_parties(subset)
    _check_minor(ps, parties, k)
    l = k if l is None else l
    if not k <= l <= len(parties):
        raise InputError(f"sub-list length {l} must lie in {k}..{len(parties)}")
    involved = parties[:k]
    sub_ps, sub_cm = restrict_state(ps, cm, involved)
    kernel = GammaKernel(sub_cm, sub_ps)

    best_f, best_ab, best_conv = np.inf, None, True
    histories: list = []
    run = 0
    while run < cfg.restarts:
        count = min(cfg.batch, cfg.restarts - run)
        a, b = _starting_points(sub_ps, cfg, l, k, run, count)
        if cfg.mode == "gradient":
            a, b, f, conv, hist = _descend(kernel, a, b, cfg, trace)
            if trace:
                histories.extend(hist)
        else:
            out = [_nelder_mead(kernel, a[j], b[j], cfg) for j in range(count)]
            a = np.array([o[0] for o in out])
            b = np.array([o[1] for o in out])
            f = np.array([o[2] for o in out])
            conv = np.ones(count, dtype=bool)
        run += count
        j = int(np.argmin(f))
        if f[j] < best_f:
            best_f, best_ab, best_conv = float(f[j]), (a[j].copy(), b[j].copy()), bool(conv[j])
        if cfg.early_exit and best_f < -cfg.decision_tolerance:
            break

    log.debug("minor k=%d on %s: %.6g after %d restarts", k, involved, best_f, run)
    witness = _embed_witness(ps, involved, sub_ps, *best_ab)
    return MinorResult(k=k, parties=parties[:l],
                       min_value=best_f, witness=witness, converged=best_conv,
                       restarts_run=run, histories=tuple(histories))


def _embed_witness(ps: PartyStructure, involved: Sequence[int], sub_ps: PartyStructure,
                   a, b) -> ParamVector:
    sub = ParamVector.from_mode_arrays(sub_ps, a, b)
    filler = ParamVector.uniform(ps)
    alpha, beta = list(filler.alpha), list(filler.beta)
    for j, p in enumerate(involved):
        alpha[p - 1], beta[p - 1] = sub.alpha[j], sub.beta[j]
    return ParamVector(tuple(alpha), tuple(beta))


def minor_gradient(cm: np.ndarray, ps: PartyStructure, subset, k: int,
                   params: ParamVector) -> ParamVector:
    """Gradient of the ``k``-th leading minor with respect to every parameter.

    Blocks of parties outside the first ``k`` entries of ``subset`` are zero.
    """
    parties = _as_parties(subset)
    _check_minor(ps, parties, k)
    params.check(ps)
    involved = parties[:k]
    sub_ps, sub_cm = restrict_state(ps, cm, involved)
    a = np.concatenate([params.alpha[p - 1] for p in involved])
    b = np.concatenate([params.beta[p - 1] for p in involved])
    _, ga, gb = GammaKernel(sub_cm, sub_ps).determinant_and_gradient(a, b)
    sub = ParamVector.from_mode_arrays(sub_ps, ga, gb)
    alpha = [np.zeros(s) for s in ps.party_sizes]
    beta = [np.zeros(s) for s in ps.party_sizes]
    for j, p in enumerate(involved):
        alpha[p - 1], beta[p - 1] = sub.alpha[j], sub.beta[j]
    return ParamVector(tuple(alpha), tuple(beta))


def sample_oracle(cm: np.ndarray, ps: PartyStructure, subset, k: int, samples: int,
                  seed: int, chunk: int = 50_000) -> float:
    """Minimum of the ``k``-th leading minor over uniform random sphere points."""
    if samples < 1:
        raise ValueError("samples must be >= 1")
    parties = _as_parties(subset)
    _check_minor(ps, parties, k)
    sub_ps, sub_cm = restrict_state(ps, cm, parties[:k])
    kernel = GammaKernel(sub_cm, sub_ps)
    rng = np.random.default_rng(seed)
    best = np.inf
    left = samples
    while left:
        count = min(chunk, left)
        a, b = random_sphere_modes(sub_ps, rng, count)
        best = min(best, float(np.linalg.det(kernel.gamma(a, b)).min()))
        left -= count
    return best
