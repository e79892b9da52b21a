"""Entanglement verdicts from minimized principal minors of Gamma.

For an ordered party query ``(i_1, ..., i_m)`` the scanned quantity is

    lambda = min over l = 1..m, k = 1..l of  min_{params} det Gamma_k(i_1..i_l)

where ``Gamma_k(i_1..i_l)`` is the top-left ``k x k`` block of Gamma restricted
to ``i_1..i_l``.  ``lambda < 0`` certifies entanglement among the queried
parties.  Nothing here ever certifies separability.
"""

from __future__ import annotations

import dataclasses
import enum
import itertools
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass
from typing import Sequence

import numpy as np

from gausswit.gamma import ParamVector
from gausswit.optimizer import MinorResult, OptimizerConfig, minimize_minor
from gausswit.state_model import InputError, PartitionQuery, PartyStructure
from gausswit.variance import certificate_weights

__all__ = [
    "MinorResult",
    "Status",
    "VerdictReport",
    "check_partition_grouping",
    "evaluate_lambda",
    "leading_minors",
    "principal_minors",
    "subset_gamma",
]


class Status(str, enum.Enum):
    ENTANGLED = "entangled"
    INCONCLUSIVE = "inconclusive"


@dataclass(frozen=True)
class VerdictReport:
    partition: tuple[int, ...]
    lam: float
    minors: tuple[MinorResult, ...]
    status: Status
    config: OptimizerConfig
    party_sizes: tuple[int, ...] = ()
    weights: tuple[float, ...] | None = None
    timestamp: str | None = None

    @property
    def best(self) -> MinorResult:
        """The first minor attaining ``lam``."""
        return next(r for r in self.minors if r.min_value == self.lam)

    @property
    def witness(self) -> ParamVector:
        return self.best.witness

    def to_dict(self) -> dict:
        out = {
            "status": self.status.value,
            "partition": list(self.partition),
            "lambda": self.lam,
            "witness": self.witness.to_dict(),
            "minors": [
                {
                    "k": r.k,
                    "parties": list(r.parties),
                    "min_value": r.min_value,
                    "witness": r.witness.to_dict(),
                    "converged": r.converged,
                    "restarts_run": r.restarts_run,
                }
                for r in self.minors
            ],
            "optimizer": {
                "restarts": self.config.restarts,
                "seed": self.config.seed,
                "tolerance": self.config.decision_tolerance,
                "max_iters": self.config.max_iters,
                "gradient_tolerance": self.config.gradient_tolerance,
                "mode": self.config.mode,
                "start": self.config.start,
            },
        }
        if self.party_sizes:
            out["party_sizes"] = list(self.party_sizes)
        if self.weights is not None:
            out["weights"] = list(self.weights)
        if self.timestamp is not None:
            out["timestamp"] = self.timestamp
        return out

    @classmethod
    def from_dict(cls, data: dict) -> "VerdictReport":
        opt = data["optimizer"]
        known = {f.name for f in dataclasses.fields(OptimizerConfig)}
        cfg_args = {k: v for k, v in opt.items() if k in known}
        cfg_args["decision_tolerance"] = opt["tolerance"]
        minors = tuple(
            MinorResult(
                k=m["k"],
                parties=tuple(m["parties"]),
                min_value=m["min_value"],
                witness=ParamVector.from_dict(m.get("witness", data["witness"])),
                converged=m.get("converged", True),
                restarts_run=m.get("restarts_run", 0),
            )
            for m in data["minors"]
        )
        weights = data.get("weights")
        return cls(
            partition=tuple(data["partition"]),
            lam=data["lambda"],
            minors=minors,
            status=Status(data["status"]),
            config=OptimizerConfig(**cfg_args),
            party_sizes=tuple(data.get("party_sizes", ())),
            weights=None if weights is None else tuple(weights),
            timestamp=data.get("timestamp"),
        )


def subset_gamma(gamma: np.ndarray, subset) -> np.ndarray:
    """Rows and columns of ``gamma`` for the 1-based parties in ``subset``."""
    parties = subset.parties if isinstance(subset, PartitionQuery) else tuple(subset)
    n = gamma.shape[0]
    if not parties or any(not 1 <= p <= n for p in parties):
        raise InputError(f"invalid subset {parties} for a {n}x{n} matrix")
    if any(b <= a for a, b in zip(parties, parties[1:])):
        raise InputError(f"subset must be strictly increasing, got {parties}")
    idx = np.asarray(parties) - 1
    return gamma[np.ix_(idx, idx)]


def leading_minors(g: np.ndarray) -> list[float]:
    """``det g[:1,:1], det g[:2,:2], ...`` via LU with partial pivoting."""
    g = np.asarray(g, dtype=float)
    return [float(np.linalg.det(g[:k, :k])) for k in range(1, g.shape[0] + 1)]


def principal_minors(g: np.ndarray) -> dict[tuple[int, ...], float]:
    """Every principal minor, keyed by its 1-based index set."""
    g = np.asarray(g, dtype=float)
    n = g.shape[0]
    out = {}
    for size in range(1, n + 1):
        for idx in itertools.combinations(range(n), size):
            out[tuple(i + 1 for i in idx)] = float(np.linalg.det(g[np.ix_(idx, idx)]))
    return out


def status_for(lam: float, decision_tolerance: float) -> Status:
    return Status.ENTANGLED if lam < -decision_tolerance else Status.INCONCLUSIVE


def evaluate_lambda(cm: np.ndarray, ps: PartyStructure, subset: PartitionQuery,
                    cfg: OptimizerConfig = OptimizerConfig(), *,
                    principal: str = "leading", threads: int = 1,
                    timestamp: str | None = None) -> VerdictReport:
    """Scan the minors for ``subset`` and return the verdict.

    ``principal="leading"`` follows the nested prefix scan.  The minor of
    order ``k`` on prefix ``l`` equals the full determinant on prefix ``k``,
    so each distinct prefix is optimized once and listed under every
    ``(l, k)`` it answers.  ``principal="all"`` minimizes every principal
    minor of the queried block instead (exponential; small queries only).
    """
    if not isinstance(subset, PartitionQuery):
        subset = PartitionQuery(tuple(subset))
    subset.validate_for(ps.n_parties)
    parties = subset.parties
    m = len(parties)

    if principal == "leading":
        tasks = [(parties, k, k) for k in range(1, m + 1)]
    elif principal == "all":
        tasks = [
            (combo, len(combo), len(combo))
            for size in range(1, m + 1)
            for combo in itertools.combinations(parties, size)
        ]
    else:
        raise ValueError("principal must be 'leading' or 'all'")

    def run(task):
        plist, k, l = task
        return minimize_minor(cm, ps, plist, k, cfg, l=l)

    if threads > 1:
        with ThreadPoolExecutor(max_workers=threads) as pool:
            results = list(pool.map(run, tasks))
    else:
        results = [run(t) for t in tasks]

    if principal == "leading":
        by_k = {r.k: r for r in results}
        minors = tuple(
            dataclasses.replace(by_k[k], parties=parties[:l])
            for l in range(1, m + 1)
            for k in range(1, l + 1)
        )
    else:
        minors = tuple(results)

    lam = min(r.min_value for r in minors)
    status = status_for(lam, cfg.decision_tolerance)
    weights = None
    if status is Status.ENTANGLED:
        best = next(r for r in minors if r.min_value == lam)
        weights = tuple(float(x) for x in
                        certificate_weights(cm, ps, best.witness, best.involved))
    return VerdictReport(
        partition=parties,
        lam=lam,
        minors=minors,
        status=status,
        config=cfg,
        party_sizes=ps.party_sizes,
        weights=weights,
        timestamp=timestamp,
    )


def check_partition_grouping(ps: PartyStructure,
                             grouping: Sequence[Sequence[int]]) -> PartyStructure:
    """Regroup the (1-based) modes into coarser parties.

    ``grouping`` must list contiguous, non-overlapping mode blocks in order
    that together cover every mode.  Only the bookkeeping changes; the
    covariance matrix keeps its layout.
    """
    expected = 1
    sizes = []
    seen: set[int] = set()
    for group in grouping:
        group = [int(x) for x in group]
        if not group:
            raise InputError("empty mode group")
        if seen.intersection(group) or len(set(group)) != len(group):
            raise InputError(f"mode group {group} overlaps another group")
        if sorted(group) != list(range(group[0], group[0] + len(group))) or group != sorted(group):
            raise InputError(f"mode group {group} is not a contiguous increasing block")
        if group[0] != expected:
            raise InputError(f"mode group {group} does not start at mode {expected}")
        seen.update(group)
        sizes.append(len(group))
        expected += len(group)
    if expected - 1 != ps.total_modes:
        raise InputError(
            f"grouping covers {expected - 1} modes, the state has {ps.total_modes}"
        )
    return PartyStructure(tuple(sizes))
