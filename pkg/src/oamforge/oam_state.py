"""Sparse biphoton OAM states keyed by ``(l_A, l_B)``.

Tables are immutable; every operation returns a new table.
"""
from __future__ import annotations

import csv
import io
import json
import math
from dataclasses import dataclass, field
from types import MappingProxyType
from typing import Iterable, Mapping, Sequence, Tuple

__all__ = [
    "DegenerateStateError",
    "OamAmplitudeTable",
    "TargetState",
    "apply_phase",
    "fidelity",
    "probability",
    "shift_oam",
    "subspace_fidelity",
    "superpose",
    "table_from_csv",
    "table_from_json",
    "table_to_csv",
    "table_to_json",
]

NORM_TOL = 1e-9
DEGENERATE_REL = 1e-12

Key = Tuple[int, int]


class DegenerateStateError(ValueError):
    """A superposition cancelled (numerically) completely."""


def _freeze(entries: Mapping[Key, complex]) -> Mapping[Key, complex]:
    cleaned = {}
    for (a, b), value in entries.items():
        value = complex(value)
        if value != 0:
            cleaned[(int(a), int(b))] = value
    return MappingProxyType(dict(sorted(cleaned.items())))


@dataclass(frozen=True, eq=False)
class OamAmplitudeTable:
    entries: Mapping[Key, complex] = field(default_factory=dict)
    normalized: bool = False

    def __post_init__(self):
        object.__setattr__(self, "entries", _freeze(self.entries))
        if self.normalized and abs(self.norm_squared() - 1) > NORM_TOL:
            raise ValueError(f"table flagged normalized but sum |c|^2 = {self.norm_squared()!r}")

    def __eq__(self, other):
        if not isinstance(other, OamAmplitudeTable):
            return NotImplemented
        return dict(self.entries) == dict(other.entries) and self.normalized == other.normalized

    def __len__(self):
        return len(self.entries)

    def __iter__(self):
        return iter(self.entries)

    def __getitem__(self, key: Key) -> complex:
        return self.entries.get(key, 0j)

    def norm_squared(self) -> float:
        return math.fsum(abs(v) ** 2 for v in self.entries.values())

    def norm(self) -> float:
        return math.sqrt(self.norm_squared())

    def scaled(self, factor: complex) -> "OamAmplitudeTable":
        return OamAmplitudeTable({k: factor * v for k, v in self.entries.items()})

    def normalize(self) -> "OamAmplitudeTable":
        if self.normalized:
            return self
        n = self.norm()
        if n == 0:
            raise DegenerateStateError("cannot normalize an empty state")
        return OamAmplitudeTable({k: v / n for k, v in self.entries.items()}, normalized=True)

    def probabilities(self) -> dict:
        state = self.normalize()
        return {k: abs(v) ** 2 for k, v in state.entries.items()}


@dataclass(frozen=True)
class TargetState:
    """Pure target state; ``terms`` holds ``(l_A, l_B, weight)`` triples."""

    terms: Tuple[Tuple[int, int, complex], ...]

    def __post_init__(self):
        terms = tuple((int(a), int(b), complex(w)) for a, b, w in self.terms)
        keys = [(a, b) for a, b, _ in terms]
        if len(set(keys)) != len(keys):
            raise ValueError("target state has repeated (l_A, l_B) keys")
        total = math.fsum(abs(w) ** 2 for _, _, w in terms)
        if abs(total - 1) > NORM_TOL:
            raise ValueError(f"target weights must be normalized, got sum |w|^2 = {total!r}")
        object.__setattr__(self, "terms", terms)

    @classmethod
    def from_weights(cls, weights: Mapping[Key, complex]) -> "TargetState":
        """Build a target from arbitrary (non-zero) weights, normalizing them."""
        n = math.sqrt(math.fsum(abs(w) ** 2 for w in weights.values()))
        if n == 0:
            raise ValueError("target weights are all zero")
        return cls(tuple((a, b, w / n) for (a, b), w in weights.items()))

    @classmethod
    def uniform(cls, keys: Sequence[Key], signs: Sequence[complex] = ()) -> "TargetState":
        """Equal-magnitude superposition of ``keys`` (optionally with phase factors)."""
        signs = list(signs) or [1] * len(keys)
        return cls.from_weights(dict(zip(map(tuple, keys), signs)))

    @property
    def keys(self):
        return [(a, b) for a, b, _ in self.terms]

    def as_table(self) -> OamAmplitudeTable:
        return OamAmplitudeTable({(a, b): w for a, b, w in self.terms}, normalized=True)

    def to_json_dict(self) -> dict:
        return {"terms": [{"lA": a, "lB": b, "re": w.real, "im": w.imag} for a, b, w in self.terms]}

    @classmethod
    def from_json_dict(cls, data: Mapping) -> "TargetState":
        weights = {(int(t["lA"]), int(t["lB"])): complex(t["re"], t.get("im", 0.0))
                   for t in data["terms"]}
        if data.get("normalize", False):
            return cls.from_weights(weights)
        return cls(tuple((a, b, w) for (a, b), w in weights.items()))


def shift_oam(state: OamAmplitudeTable, delta_A: int, delta_B: int) -> OamAmplitudeTable:
    """Add ``delta_A`` / ``delta_B`` quanta of OAM to every mode (spiral phase plates)."""
    return OamAmplitudeTable({(a + delta_A, b + delta_B): v for (a, b), v in state.entries.items()},
                             normalized=state.normalized)


def apply_phase(state: OamAmplitudeTable, phi_A: float, phi_B: float = 0.0) -> OamAmplitudeTable:
    """Phase shifters in both paths; only the sum ``phi_A + phi_B`` matters."""
    factor = complex(math.cos(phi_A + phi_B), math.sin(phi_A + phi_B))
    return OamAmplitudeTable({k: factor * v for k, v in state.entries.items()},
                             normalized=state.normalized)


def superpose(components: Iterable[Tuple[OamAmplitudeTable, complex]]) -> OamAmplitudeTable:
    """Coherent, weighted sum of tables followed by renormalization."""
    components = list(components)
    if not components:
        raise ValueError("superpose needs at least one component")
    acc: dict = {}
    largest = 0.0
    for table, weight in components:
        weight = complex(weight)
        largest = max(largest, abs(weight) * table.norm())
        for key, value in table.entries.items():
            acc[key] = acc.get(key, 0j) + weight * value
    total = OamAmplitudeTable(acc)
    if largest == 0 or total.norm() < DEGENERATE_REL * largest:
        raise DegenerateStateError("superposition interferes destructively to zero")
    return total.normalize()


def probability(state: OamAmplitudeTable, ell_A: int, ell_B: int) -> float:
    return abs(state.normalize()[(ell_A, ell_B)]) ** 2


def _overlap(state: OamAmplitudeTable, target: TargetState) -> complex:
    return sum((w.conjugate() * state[(a, b)] for a, b, w in target.terms), 0j)


def fidelity(state: OamAmplitudeTable, target: TargetState) -> float:
    """|<target|state>|^2 over the full OAM space."""
    return min(1.0, abs(_overlap(state.normalize(), target)) ** 2)


def subspace_fidelity(state: OamAmplitudeTable, target: TargetState, subspace) -> float:
    """Fidelity after projecting both photons onto ``subspace`` and renormalizing."""
    subspace = {int(l) for l in subspace}
    if not subspace:
        raise ValueError("subspace must not be empty")
    if any(a not in subspace or b not in subspace for a, b, _ in target.terms):
        raise ValueError("target has support outside the subspace")
    projected = OamAmplitudeTable({(a, b): v for (a, b), v in state.entries.items()
                                   if a in subspace and b in subspace})
    if projected.norm() == 0:
        return 0.0
    return fidelity(projected, target)


# -- serialization -----------------------------------------------------------

def table_to_json(state: OamAmplitudeTable) -> str:
    data = {
        "entries": [{"lA": a, "lB": b, "re": v.real, "im": v.imag}
                    for (a, b), v in state.entries.items()],
        "normalized": state.normalized,
    }
    return json.dumps(data, indent=2)


def table_from_json(text: str) -> OamAmplitudeTable:
    data = json.loads(text)
    entries = {(int(e["lA"]), int(e["lB"])): complex(float(e["re"]), float(e["im"]))
               for e in data["entries"]}
    return OamAmplitudeTable(entries, normalized=bool(data.get("normalized", False)))


CSV_HEADER = ("lA", "lB", "re", "im", "probability")


def table_to_csv(state: OamAmplitudeTable) -> str:
    buf = io.StringIO()
    writer = csv.writer(buf, lineterminator="\n")
    writer.writerow(CSV_HEADER)
    total = state.norm_squared()
    for (a, b), v in state.entries.items():
        writer.writerow([a, b, repr(v.real), repr(v.imag), repr(abs(v) ** 2 / total)])
    return buf.getvalue()


def table_from_csv(text: str, normalized: bool | None = None) -> OamAmplitudeTable:
    reader = csv.DictReader(io.StringIO(text))
    entries = {(int(r["lA"]), int(r["lB"])): complex(float(r["re"]), float(r["im"])) for r in reader}
    table = OamAmplitudeTable(entries)
    if normalized is None:
        normalized = abs(table.norm_squared() - 1) <= NORM_TOL
    return OamAmplitudeTable(entries, normalized=normalized)
