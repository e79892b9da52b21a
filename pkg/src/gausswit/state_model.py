"""Party structures, covariance matrices and the JSON file formats.

Quadratures are stored x,p-interleaved per mode with parties concatenated,
so (1-based) index ``2*(o_i + m) - 1`` is ``x_m`` of party ``i`` and the
following index is ``p_m``.  No other layout is accepted.
"""

from __future__ import annotations

import json
import logging
from dataclasses import dataclass
from pathlib import Path
from typing import TYPE_CHECKING, Sequence

import numpy as np

if TYPE_CHECKING:
    from gausswit.criterion import VerdictReport

log = logging.getLogger(__name__)

# Asymmetry beyond this (absolute, per entry) is treated as corrupt input.
ASYMMETRY_TOLERANCE = 1e-9


class InputError(ValueError):
    """Input data that cannot be turned into a valid state or query."""


class StateFormatError(InputError):
    pass


class DimensionError(InputError):
    pass


class AsymmetryError(InputError):
    pass


@dataclass(frozen=True)
class PartyStructure:
    """How the modes split into parties: ``party_sizes = (s_1, ..., s_n)``."""

    party_sizes: tuple[int, ...]

    def __post_init__(self):
        sizes = tuple(self.party_sizes)
        if len(sizes) < 1:
            raise DimensionError("a party structure needs at least one party")
        for s in sizes:
            if isinstance(s, bool) or int(s) != s or s < 1:
                raise DimensionError(f"party sizes must be positive integers, got {sizes!r}")
        object.__setattr__(self, "party_sizes", tuple(int(s) for s in sizes))

    @property
    def n_parties(self) -> int:
        return len(self.party_sizes)

    @property
    def total_modes(self) -> int:
        return sum(self.party_sizes)

    @property
    def dim(self) -> int:
        return 2 * self.total_modes

    @property
    def offsets(self) -> tuple[int, ...]:
        """Mode offset ``o_i`` of each party (0-based, ``o_1 = 0``)."""
        out, acc = [], 0
        for s in self.party_sizes:
            out.append(acc)
            acc += s
        return tuple(out)

    def party_of_mode(self) -> np.ndarray:
        """0-based party label of every mode, in mode order."""
        return np.repeat(np.arange(self.n_parties), self.party_sizes)

    def quadrature_index(self, party: int, mode: int, quad: str) -> int:
        """1-based CM index of quadrature ``quad`` ('x' or 'p') of ``mode`` in ``party``.

        ``party`` and ``mode`` are 1-based, matching the usual notation.
        """
        if not 1 <= party <= self.n_parties:
            raise IndexError(f"party {party} out of range 1..{self.n_parties}")
        if not 1 <= mode <= self.party_sizes[party - 1]:
            raise IndexError(f"mode {mode} out of range for party {party}")
        if quad not in ("x", "p"):
            raise ValueError(f"quadrature must be 'x' or 'p', got {quad!r}")
        base = 2 * (self.offsets[party - 1] + mode)
        return base - 1 if quad == "x" else base

    def locate(self, index: int) -> tuple[int, int, str]:
        """Inverse of :meth:`quadrature_index`."""
        if not 1 <= index <= self.dim:
            raise IndexError(f"index {index} out of range 1..{self.dim}")
        global_mode = (index + 1) // 2  # 1-based
        quad = "x" if index % 2 == 1 else "p"
        for party, (off, s) in enumerate(zip(self.offsets, self.party_sizes), start=1):
            if off < global_mode <= off + s:
                return party, global_mode - off, quad
        raise AssertionError("unreachable")

    def mode_indices(self, parties: Sequence[int]) -> np.ndarray:
        """0-based global mode indices belonging to the given 1-based parties."""
        offs = self.offsets
        return np.concatenate(
            [np.arange(offs[i - 1], offs[i - 1] + self.party_sizes[i - 1]) for i in parties]
        )

    def quadrature_indices(self, parties: Sequence[int]) -> np.ndarray:
        """0-based CM row indices (x,p interleaved) of the given 1-based parties."""
        modes = self.mode_indices(parties)
        return np.stack([2 * modes, 2 * modes + 1], axis=1).ravel()


@dataclass(frozen=True)
class PartitionQuery:
    """Strictly increasing 1-based party labels, at least two of them."""

    parties: tuple[int, ...]

    def __post_init__(self):
        parties = tuple(int(p) for p in self.parties)
        if len(parties) < 2:
            raise InputError("a partition query needs at least two parties")
        if any(b <= a for a, b in zip(parties, parties[1:])):
            raise InputError(f"party labels must be strictly increasing, got {parties}")
        if parties[0] < 1:
            raise InputError(f"party labels are 1-based, got {parties}")
        object.__setattr__(self, "parties", parties)

    def validate_for(self, n_parties: int) -> None:
        if self.parties[-1] > n_parties:
            raise InputError(
                f"query {self.parties} refers to parties beyond 1..{n_parties}"
            )

    @classmethod
    def all_parties(cls, n_parties: int) -> "PartitionQuery":
        return cls(tuple(range(1, n_parties + 1)))

    def __len__(self) -> int:
        return len(self.parties)


def as_covariance(matrix, ps: PartyStructure) -> np.ndarray:
    """Validate ``matrix`` against ``ps`` and return a read-only symmetrized copy."""
    m = np.array(matrix, dtype=float)
    if m.ndim != 2 or m.shape[0] != m.shape[1]:
        raise DimensionError(f"covariance matrix must be square, got shape {m.shape}")
    if m.shape[0] != ps.dim:
        raise DimensionError(
            f"party sizes {list(ps.party_sizes)} need a {ps.dim}x{ps.dim} matrix, "
            f"got {m.shape[0]}x{m.shape[1]}"
        )
    if not np.all(np.isfinite(m)):
        raise StateFormatError("covariance matrix has non-finite entries")
    asym = np.max(np.abs(m - m.T)) if m.size else 0.0
    if asym > ASYMMETRY_TOLERANCE:
        raise AsymmetryError(f"covariance matrix asymmetric by {asym:.3g}")
    m = (m + m.T) / 2
    m.flags.writeable = False
    return m


def uncertainty_margin(cm: np.ndarray) -> float:
    """Smallest eigenvalue of ``cm + i*Omega`` (vacuum = identity convention).

    Negative values hint that ``cm`` is not a physical state under that
    convention.  Only used for warnings; nothing is rejected on this basis.
    """
    n = cm.shape[0] // 2
    omega = np.kron(np.eye(n), np.array([[0.0, 1.0], [-1.0, 0.0]]))
    return float(np.linalg.eigvalsh(cm + 1j * omega)[0])


def load_state(path) -> tuple[PartyStructure, np.ndarray]:
    """Read a state file ``{"party_sizes": [...], "cm": [[...], ...]}``."""
    try:
        text = Path(path).read_text()
    except OSError as exc:
        raise StateFormatError(f"cannot read state file {path}: {exc}") from exc
    try:
        data = json.loads(text)
    except json.JSONDecodeError as exc:
        raise StateFormatError(f"{path}: not valid JSON ({exc})") from exc
    return state_from_dict(data)


def state_from_dict(data) -> tuple[PartyStructure, np.ndarray]:
    if not isinstance(data, dict) or "party_sizes" not in data or "cm" not in data:
        raise StateFormatError("state must be an object with 'party_sizes' and 'cm'")
    sizes = data["party_sizes"]
    if not isinstance(sizes, list) or not all(
        isinstance(s, int) and not isinstance(s, bool) for s in sizes
    ):
        raise StateFormatError("'party_sizes' must be a list of integers")
    rows = data["cm"]
    if not isinstance(rows, list) or not all(isinstance(r, list) for r in rows):
        raise StateFormatError("'cm' must be a list of rows")
    if len({len(r) for r in rows}) > 1:
        raise DimensionError("'cm' rows have different lengths")
    try:
        matrix = np.array(rows, dtype=float)
    except (TypeError, ValueError) as exc:
        raise StateFormatError(f"'cm' has non-numeric entries ({exc})") from exc
    ps = PartyStructure(tuple(sizes))
    return ps, as_covariance(matrix, ps)


def state_to_dict(ps: PartyStructure, cm: np.ndarray) -> dict:
    return {"party_sizes": list(ps.party_sizes), "cm": np.asarray(cm, dtype=float).tolist()}


def save_state(ps: PartyStructure, cm: np.ndarray, path) -> None:
    Path(path).write_text(json.dumps(state_to_dict(ps, cm)) + "\n")


_WITNESS_SCHEMA = {
    "type": "object",
    "required": ["alpha", "beta"],
    "properties": {
        "alpha": {"type": "array", "items": {"type": "array", "items": {"type": "number"}}},
        "beta": {"type": "array", "items": {"type": "array", "items": {"type": "number"}}},
    },
}

REPORT_SCHEMA = {
    "$schema": "https://json-schema.org/draft/2020-12/schema",
    "type": "object",
    "required": ["status", "partition", "lambda", "witness", "minors", "optimizer"],
    "properties": {
        "status": {"enum": ["entangled", "inconclusive"]},
        "partition": {"type": "array", "items": {"type": "integer", "minimum": 1}, "minItems": 2},
        "lambda": {"type": "number"},
        "witness": _WITNESS_SCHEMA,
        "minors": {
            "type": "array",
            "minItems": 1,
            "items": {
                "type": "object",
                "required": ["k", "parties", "min_value"],
                "properties": {
                    "k": {"type": "integer", "minimum": 1},
                    "parties": {"type": "array", "items": {"type": "integer", "minimum": 1}},
                    "min_value": {"type": "number"},
                    "witness": _WITNESS_SCHEMA,
                    "converged": {"type": "boolean"},
                    "restarts_run": {"type": "integer", "minimum": 0},
                },
            },
        },
        "optimizer": {
            "type": "object",
            "required": ["restarts", "seed", "tolerance"],
            "properties": {
                "restarts": {"type": "integer", "minimum": 1},
                "seed": {"type": "integer"},
                "tolerance": {"type": "number", "exclusiveMinimum": 0},
            },
        },
        "party_sizes": {"type": "array", "items": {"type": "integer", "minimum": 1}},
        "weights": {"type": "array", "items": {"type": "number"}},
        "timestamp": {"type": "string"},
    },
}


def validate_report_dict(data: dict) -> None:
    import jsonschema

    jsonschema.validate(data, REPORT_SCHEMA)


def report_to_json(report: "VerdictReport") -> str:
    data = report.to_dict()
    validate_report_dict(data)
    return json.dumps(data, indent=2) + "\n"


def save_report(report: "VerdictReport", path) -> None:
    Path(path).write_text(report_to_json(report))


def load_report(path) -> "VerdictReport":
    from gausswit.criterion import VerdictReport

    data = json.loads(Path(path).read_text())
    validate_report_dict(data)
    return VerdictReport.from_dict(data)


def restrict_state(
    ps: PartyStructure, cm: np.ndarray, parties: Sequence[int]
) -> tuple[PartyStructure, np.ndarray]:
    """Sub-state on the given 1-based parties, kept in the order given."""
    for i in parties:
        if not 1 <= i <= ps.n_parties:
            raise InputError(f"party {i} out of range 1..{ps.n_parties}")
    idx = ps.quadrature_indices(parties)
    sub = np.array(cm[np.ix_(idx, idx)])
    sub.flags.writeable = False
    return PartyStructure(tuple(ps.party_sizes[i - 1] for i in parties)), sub
