"""Path-identity setups: declarative stage lists compiled into OAM states.

A :class:`SetupPlan` is a linear pipeline. Crystal stages emit photon pairs;
shift and phase stages act on every pair emitted upstream of them. Crystal
``j`` therefore sees the sum of all shifts and phases placed after it, and the
final state is the coherent, power-weighted sum over crystals.
"""
from __future__ import annotations

import json
import math
from dataclasses import dataclass
from typing import List, Optional, Sequence, Tuple, Union

from .oam_state import OamAmplitudeTable, apply_phase, shift_oam, superpose
from .spdc_kernel import CrystalConfig, QuadratureSettings, WaistConfig, Window, anti_diagonal

__all__ = [
    "CoherenceCondition",
    "CoherenceGeometry",
    "CoherenceReport",
    "CrystalPaths",
    "CrystalStage",
    "PhaseStage",
    "PumpSpec",
    "SetupPlan",
    "ShiftStage",
    "check_coherence",
    "compile_plan",
    "crystal_state",
    "plan_from_json",
    "plan_to_json",
    "pump_equivalent",
]


@dataclass(frozen=True)
class PumpSpec:
    """Superposition of ``LG_0^{l_p}`` pump modes with complex weights."""

    components: Tuple[Tuple[int, complex], ...]

    def __post_init__(self):
        comps = tuple((int(l), complex(a)) for l, a in self.components)
        if not comps:
            raise ValueError("pump needs at least one component")
        ells = [l for l, _ in comps]
        if len(set(ells)) != len(ells):
            raise ValueError("pump components must have distinct OAM values")
        if all(a == 0 for _, a in comps):
            raise ValueError("pump weights are all zero")
        object.__setattr__(self, "components", comps)

    @classmethod
    def single(cls, ell_pump: int, weight: complex = 1.0) -> "PumpSpec":
        return cls(((ell_pump, weight),))

    def norm(self) -> float:
        return math.sqrt(math.fsum(abs(a) ** 2 for _, a in self.components))


@dataclass(frozen=True)
class CrystalStage:
    pump: PumpSpec
    power: float = 1.0  # relative pump amplitude factor of this crystal

    def __post_init__(self):
        if not (self.power >= 0 and math.isfinite(self.power)):
            raise ValueError(f"power factor must be non-negative, got {self.power!r}")


@dataclass(frozen=True)
class ShiftStage:
    delta_A: int
    delta_B: int


@dataclass(frozen=True)
class PhaseStage:
    phi_A: float
    phi_B: float = 0.0


Stage = Union[CrystalStage, ShiftStage, PhaseStage]


@dataclass(frozen=True)
class SetupPlan:
    stages: Tuple[Stage, ...]

    def __post_init__(self):
        object.__setattr__(self, "stages", tuple(self.stages))
        if not any(isinstance(s, CrystalStage) for s in self.stages):
            raise ValueError("a setup needs at least one crystal")

    @property
    def crystals(self) -> List[CrystalStage]:
        return [s for s in self.stages if isinstance(s, CrystalStage)]

    def downstream(self) -> List[Tuple[CrystalStage, int, int, float]]:
        """Per crystal: (stage, total shift A, total shift B, total phase) applied after it."""
        out = []
        for i, stage in enumerate(self.stages):
            if not isinstance(stage, CrystalStage):
                continue
            da = db = 0
            phase = 0.0
            for later in self.stages[i + 1:]:
                if isinstance(later, ShiftStage):
                    da += later.delta_A
                    db += later.delta_B
                elif isinstance(later, PhaseStage):
                    phase += later.phi_A + later.phi_B
            out.append((stage, da, db, phase))
        return out


def crystal_state(pump: PumpSpec, crystal: CrystalConfig, waists: WaistConfig,
                  window: Window = None, quad: Optional[QuadratureSettings] = None
                  ) -> OamAmplitudeTable:
    """Normalized single-crystal state; each pump mode weights its normalized anti-diagonal."""
    parts = [(anti_diagonal(l, crystal, waists, window, quad).normalize(), a)
             for l, a in pump.components if a != 0]
    return superpose(parts)


def compile_plan(plan: SetupPlan, crystal: CrystalConfig, waists: WaistConfig,
                 window: Window = None, quad: Optional[QuadratureSettings] = None
                 ) -> OamAmplitudeTable:
    parts = []
    for stage, da, db, phase in plan.downstream():
        if stage.power == 0:
            continue
        state = crystal_state(stage.pump, crystal, waists, window, quad)
        parts.append((apply_phase(shift_oam(state, da, db), phase, 0.0), stage.power))
    if not parts:
        raise ValueError("all crystals have zero pump power")
    return superpose(parts)


def pump_equivalent(plan: SetupPlan) -> Optional[PumpSpec]:
    """Single-crystal pump reproducing a shift-free plan, or ``None``.

    Any non-zero shift stage makes the plan non-representable (conservative:
    no attempt is made to relabel shifted anti-diagonals).
    """
    if any(isinstance(s, ShiftStage) and (s.delta_A or s.delta_B) for s in plan.stages):
        return None
    weights: dict = {}
    for stage, _, _, phase in plan.downstream():
        norm = stage.pump.norm()
        factor = stage.power * complex(math.cos(phase), math.sin(phase)) / norm
        for ell, a in stage.pump.components:
            weights[ell] = weights.get(ell, 0j) + factor * a
    return PumpSpec(tuple(sorted(weights.items())))


# -- JSON ---------------------------------------------------------------------

def _stage_from_json(data) -> Stage:
    kind = data.get("type")
    if kind == "crystal":
        pump = PumpSpec(tuple((int(c["l"]), complex(float(c.get("re", 0.0)), float(c.get("im", 0.0))))
                              for c in data["pump"]))
        return CrystalStage(pump, float(data.get("power", 1.0)))
    if kind == "shift":
        return ShiftStage(int(data["dA"]), int(data["dB"]))
    if kind == "phase":
        return PhaseStage(float(data["phiA"]), float(data.get("phiB", 0.0)))
    raise ValueError(f"unknown stage type {kind!r}")


def plan_from_json(text: str) -> SetupPlan:
    data = json.loads(text)
    if not isinstance(data, dict) or not isinstance(data.get("stages"), list):
        raise ValueError("plan JSON must be an object with a 'stages' list")
    return SetupPlan(tuple(_stage_from_json(s) for s in data["stages"]))


def _stage_to_json(stage: Stage) -> dict:
    if isinstance(stage, CrystalStage):
        return {"type": "crystal", "power": stage.power,
                "pump": [{"l": l, "re": a.real, "im": a.imag} for l, a in stage.pump.components]}
    if isinstance(stage, ShiftStage):
        return {"type": "shift", "dA": stage.delta_A, "dB": stage.delta_B}
    return {"type": "phase", "phiA": stage.phi_A, "phiB": stage.phi_B}


def plan_to_json(plan: SetupPlan) -> str:
    return json.dumps({"stages": [_stage_to_json(s) for s in plan.stages]}, indent=2)


# -- temporal coherence ----------------------------------------------------------

@dataclass(frozen=True)
class CrystalPaths:
    """Optical path lengths for one crystal, meters."""

    path_A: float
    path_B: float
    pump_path: float
    dc_coherence: float

    def __post_init__(self):
        for name in ("path_A", "path_B", "pump_path", "dc_coherence"):
            if not getattr(self, name) >= 0:
                raise ValueError(f"{name} must be non-negative")


@dataclass(frozen=True)
class CoherenceGeometry:
    """Interferometric path-identity geometry.

    ``dc_paths[j]`` is the down-converted path length between crystal ``j`` and
    crystal ``j + 1``; the pump condition is checked for every such pair.
    """

    crystals: Tuple[CrystalPaths, ...]
    dc_paths: Tuple[float, ...]
    pump_coherence: float

    def __post_init__(self):
        object.__setattr__(self, "crystals", tuple(self.crystals))
        object.__setattr__(self, "dc_paths", tuple(float(x) for x in self.dc_paths))
        if len(self.dc_paths) != max(0, len(self.crystals) - 1):
            raise ValueError("need one down-conversion path per consecutive crystal pair")
        if self.pump_coherence < 0 or any(x < 0 for x in self.dc_paths):
            raise ValueError("lengths must be non-negative")
        for j, dc in enumerate(self.dc_paths):
            if dc > self.crystals[j].path_A:
                raise ValueError("down-conversion path cannot exceed the path A length of its crystal")

    @classmethod
    def from_json_dict(cls, data) -> "CoherenceGeometry":
        crystals = tuple(CrystalPaths(float(c["L_A_m"]), float(c["L_B_m"]), float(c["L_pump_m"]),
                                      float(c["L_coh_dc_m"])) for c in data["crystals"])
        dc = data["L_DC_m"]
        dc = [dc] if not isinstance(dc, list) else dc
        return cls(crystals, tuple(dc), float(data["L_coh_pump_m"]))


@dataclass(frozen=True)
class CoherenceCondition:
    name: str
    value: float  # left-hand side of the inequality
    bound: float
    strict: bool
    satisfied: bool

    @property
    def margin(self) -> float:
        """Slack of the inequality; negative when violated."""
        return self.bound - self.value


@dataclass(frozen=True)
class CoherenceReport:
    conditions: Tuple[CoherenceCondition, ...]

    @property
    def ok(self) -> bool:
        return all(c.satisfied for c in self.conditions)

    def failing(self) -> List[CoherenceCondition]:
        return [c for c in self.conditions if not c.satisfied]


def check_coherence(geometry: CoherenceGeometry) -> CoherenceReport:
    """Temporal indistinguishability conditions.

    Per crystal ``j``: ``|L_A^j - L_B^j| <= L_coh,DC^j``. Per consecutive pair:
    ``|L_p^j - L_p^{j+1} - L_DC| < L_coh,p``.
    """
    conditions = []
    for j, c in enumerate(geometry.crystals, start=1):
        diff = abs(c.path_A - c.path_B)
        conditions.append(CoherenceCondition(f"arrival[{j}]", diff, c.dc_coherence, False,
                                             diff <= c.dc_coherence))
    for j, dc in enumerate(geometry.dc_paths, start=1):
        first, second = geometry.crystals[j - 1], geometry.crystals[j]
        diff = abs(first.pump_path - second.pump_path - dc)
        conditions.append(CoherenceCondition(f"pump[{j},{j + 1}]", diff, geometry.pump_coherence,
                                             True, diff < geometry.pump_coherence))
    return CoherenceReport(tuple(conditions))
