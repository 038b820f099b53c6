"""Waist scans, fixed-ratio fidelity bounds and ququart design checks."""
from __future__ import annotations

import csv
import io
import json
import math
import os
from itertools import combinations
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass
from typing import Callable, List, Optional, Sequence, Tuple

import numpy as np
from scipy.optimize import brentq

from .oam_state import DegenerateStateError, TargetState, fidelity
from .setup_compiler import CrystalStage, SetupPlan, compile_plan, pump_equivalent
from .spdc_kernel import (CrystalConfig, QuadratureError, QuadratureSettings, WaistConfig, Window,
                          anti_diagonal, prefactor_t)

__all__ = [
    "BoundReport",
    "OptimizationResult",
    "ScanGrid",
    "ScanResult",
    "equalizing_factor",
    "equivalence_discrepancy",
    "fidelity_at",
    "fidelity_bound",
    "locked_modes",
    "optimize_waists",
    "ququart_separability_check",
    "ratio_law_deviation",
    "rmn",
    "waist_scan",
]

DEFAULT_WAIST_RANGE = (5.0, 100.0)


def rmn(ell_pump: int, ell_signal: int, ell_idler: int) -> int:
    """Relative mode number |l_p| - |l_s| - |l_i| (always 0, -2, -4, ...)."""
    if ell_pump != ell_signal + ell_idler:
        raise ValueError(f"OAM not conserved: {ell_pump} != {ell_signal} + {ell_idler}")
    return abs(ell_pump) - abs(ell_signal) - abs(ell_idler)


def locked_modes(ell_pump: int) -> List[Tuple[int, int, complex]]:
    """Modes with zero relative mode number and their fixed relative amplitudes.

    Amplitudes share one z-integral, so only the waist prefactor differs; its
    waist dependence is common to the whole set and drops out.
    """
    unit = WaistConfig.symmetric(math.sqrt(2), math.sqrt(2))
    sign = 1 if ell_pump >= 0 else -1
    out = []
    for k in range(abs(ell_pump) + 1):
        ls, li = sign * k, ell_pump - sign * k
        out.append((ls, li, prefactor_t(ell_pump, ls, li, unit)))
    return out


@dataclass(frozen=True)
class BoundReport:
    target: TargetState
    ell_pump: int
    locked_modes: Tuple[Tuple[int, int, float], ...]  # (l_s, l_i, probability relative to the largest)
    f_max: float

    def to_json_dict(self) -> dict:
        return {
            "ell_pump": self.ell_pump,
            "target": self.target.to_json_dict(),
            "locked_modes": [{"ls": a, "li": b, "relative_probability": p}
                             for a, b, p in self.locked_modes],
            "f_max": self.f_max,
        }


def fidelity_bound(ell_pump: int, target: TargetState) -> BoundReport:
    """Best fidelity reachable from a single crystal pumped with ``LG_0^{l_p}``.

    Modes with negative relative mode number are assumed fully suppressed by
    waist tuning; the zero-RMN modes keep their fixed amplitude ratios.
    """
    off = [(a, b) for a, b, _ in target.terms if a + b != ell_pump]
    if off:
        raise ValueError(f"target modes {off} are not on the l_p = {ell_pump} anti-diagonal")
    locked = locked_modes(ell_pump)
    amps = {(a, b): c for a, b, c in locked}
    norm2 = math.fsum(abs(c) ** 2 for c in amps.values())
    overlap = sum((w.conjugate() * amps.get((a, b), 0j) for a, b, w in target.terms), 0j)
    f_max = abs(overlap) ** 2 / norm2
    peak = max(abs(c) ** 2 for c in amps.values())
    rel = tuple((a, b, abs(c) ** 2 / peak) for a, b, c in locked)
    return BoundReport(target, ell_pump, rel, min(1.0, f_max))


def ququart_separability_check(delta_A1: int, delta_B1: int, delta_A2: int, delta_B2: int) -> bool:
    """True when two l_p = 1 crystals with these shifts give non-separable ququart modes."""
    return (abs(delta_A1 + delta_A2) + abs(delta_A2) >= 2
            and abs(delta_B1 + delta_B2) + abs(delta_B2) >= 2)


def _strictly_increasing(values) -> bool:
    return all(b > a for a, b in zip(values, values[1:]))


@dataclass(frozen=True)
class ScanGrid:
    w_pump: Tuple[float, ...]  # um
    w_collection: Tuple[float, ...]  # um, signal = idler

    def __post_init__(self):
        wp = tuple(float(x) for x in self.w_pump)
        wc = tuple(float(x) for x in self.w_collection)
        for name, axis in (("w_pump", wp), ("w_collection", wc)):
            if not axis or not _strictly_increasing(axis) or axis[0] <= 0:
                raise ValueError(f"{name} must be a non-empty, strictly increasing list of positive waists")
        object.__setattr__(self, "w_pump", wp)
        object.__setattr__(self, "w_collection", wc)

    @classmethod
    def linear(cls, wp_range=DEFAULT_WAIST_RANGE, wc_range=DEFAULT_WAIST_RANGE, n_pump=20,
               n_collection=None) -> "ScanGrid":
        n_collection = n_collection or n_pump
        return cls(tuple(np.linspace(*wp_range, n_pump)), tuple(np.linspace(*wc_range, n_collection)))

    @property
    def points(self):
        return [(wp, wc) for wp in self.w_pump for wc in self.w_collection]


@dataclass(frozen=True)
class ScanResult:
    rows: Tuple[Tuple[float, float, float], ...]
    failures: Tuple[Tuple[float, float, str], ...] = ()

    def best(self) -> Tuple[float, float, float]:
        return max(self.rows, key=lambda r: r[2])

    def to_csv(self) -> str:
        buf = io.StringIO()
        writer = csv.writer(buf, lineterminator="\n")
        writer.writerow(("w_p_um", "w_c_um", "fidelity"))
        for wp, wc, f in self.rows:
            writer.writerow((repr(wp), repr(wc), repr(f)))
        return buf.getvalue()

    def to_json(self) -> str:
        return json.dumps({
            "rows": [{"w_p_um": wp, "w_c_um": wc, "fidelity": f} for wp, wc, f in self.rows],
            "failures": [{"w_p_um": wp, "w_c_um": wc, "error": msg} for wp, wc, msg in self.failures],
        }, indent=2)


def fidelity_at(target: TargetState, plan: SetupPlan, crystal: CrystalConfig, w_pump: float,
                w_collection: float, window: Window = None,
                quad: Optional[QuadratureSettings] = None) -> float:
    state = compile_plan(plan, crystal, WaistConfig.symmetric(w_pump, w_collection), window, quad)
    return fidelity(state, target)


def _point_job(args):
    target, plan, crystal, wp, wc, window, quad = args
    try:
        return wp, wc, fidelity_at(target, plan, crystal, wp, wc, window, quad), None
    except (QuadratureError, DegenerateStateError) as exc:
        return wp, wc, float("nan"), str(exc)


def _workers(workers: Optional[int]) -> int:
    if workers is None:
        workers = int(os.environ.get("OAMFORGE_THREADS", "1") or 1)
    return max(1, workers)


def _evaluate(points, target, plan, crystal, window, quad, workers):
    jobs = [(target, plan, crystal, wp, wc, window, quad) for wp, wc in points]
    n = _workers(workers)
    if n == 1 or len(jobs) < 2:
        return [_point_job(j) for j in jobs]
    with ProcessPoolExecutor(max_workers=n) as pool:
        return list(pool.map(_point_job, jobs, chunksize=max(1, len(jobs) // (4 * n))))


def waist_scan(target: TargetState, plan: SetupPlan, grid: ScanGrid, crystal: CrystalConfig,
               window: Window = None, quad: Optional[QuadratureSettings] = None,
               workers: Optional[int] = None) -> ScanResult:
    """Fidelity of ``compile_plan(plan)`` on every (w_pump, w_collection) grid point.

    Points whose quadrature fails are listed in ``failures`` and omitted from rows.
    """
    results = _evaluate(sorted(grid.points), target, plan, crystal, window, quad, workers)
    rows = tuple((wp, wc, f) for wp, wc, f, err in results if err is None)
    failures = tuple((wp, wc, err) for wp, wc, _, err in results if err is not None)
    return ScanResult(rows, failures)


@dataclass(frozen=True)
class OptimizationResult:
    w_pump: float
    w_collection: float
    fidelity: float
    coarse_fidelity: float


def _axis(lo, hi, n):
    if lo > hi or lo <= 0:
        raise ValueError(f"invalid waist bounds ({lo}, {hi})")
    return [float(lo)] if lo == hi else [float(x) for x in np.linspace(lo, hi, n)]


def optimize_waists(target: TargetState, plan: SetupPlan, crystal: CrystalConfig,
                    bounds=(DEFAULT_WAIST_RANGE, DEFAULT_WAIST_RANGE), window: Window = None,
                    quad: Optional[QuadratureSettings] = None, coarse: int = 25, rounds: int = 4,
                    workers: Optional[int] = None) -> OptimizationResult:
    """Coarse grid scan followed by local refinement with successively halved steps."""
    (plo, phi), (clo, chi) = bounds
    wp_axis, wc_axis = _axis(plo, phi, coarse), _axis(clo, chi, coarse)
    scan = waist_scan(target, plan, ScanGrid(wp_axis, wc_axis), crystal, window, quad, workers)
    if not scan.rows:
        raise QuadratureError("no grid point could be evaluated")
    best = scan.best()
    coarse_best = best[2]
    step_p = (phi - plo) / (coarse - 1) if len(wp_axis) > 1 else 0.0
    step_c = (chi - clo) / (coarse - 1) if len(wc_axis) > 1 else 0.0
    seen = {(wp, wc) for wp, wc, _ in scan.rows}
    for _ in range(rounds):
        step_p, step_c = step_p / 2, step_c / 2
        candidates = []
        for dp in (-step_p, 0.0, step_p):
            for dc in (-step_c, 0.0, step_c):
                wp = min(max(best[0] + dp, plo), phi)
                wc = min(max(best[1] + dc, clo), chi)
                if (wp, wc) not in seen:
                    seen.add((wp, wc))
                    candidates.append((wp, wc))
        for wp, wc, f, err in _evaluate(sorted(candidates), target, plan, crystal, window, quad, workers):
            if err is None and f > best[2]:
                best = (wp, wc, f)
    return OptimizationResult(best[0], best[1], best[2], coarse_best)


def equalizing_factor(mismatch: Callable[[float], float], lo: float, hi: float,
                      xtol: float = 1e-12) -> float:
    """Root of ``mismatch`` on ``[lo, hi]``; used to equalize target-mode probabilities."""
    return brentq(mismatch, lo, hi, xtol=xtol, rtol=1e-14)


def ratio_law_deviation(ell_pump: int, crystal: CrystalConfig, waists_list: Sequence[WaistConfig],
                        quad: Optional[QuadratureSettings] = None) -> float:
    """Max relative deviation of locked-mode probability ratios from the factorial law."""
    worst = 0.0
    sign = 1 if ell_pump >= 0 else -1
    pairs = [(sign * k, ell_pump - sign * k) for k in range(abs(ell_pump) + 1)]
    for waists in waists_list:
        table = anti_diagonal(ell_pump, crystal, waists, (min(0, ell_pump), max(0, ell_pump)), quad)
        for (a1, b1), (a2, b2) in combinations(pairs, 2):
            measured = abs(table[(a1, b1)]) ** 2 / abs(table[(a2, b2)]) ** 2
            expected = (math.factorial(abs(a2)) * math.factorial(abs(b2))
                        / (math.factorial(abs(a1)) * math.factorial(abs(b1))))
            worst = max(worst, abs(measured / expected - 1))
    return worst


def equivalence_discrepancy(plan: SetupPlan, crystal: CrystalConfig, waists: WaistConfig,
                            window: Window = None, quad: Optional[QuadratureSettings] = None):
    """Max amplitude difference between a plan and its single-crystal pump, or None."""
    pump = pump_equivalent(plan)
    if pump is None:
        return None
    a = compile_plan(plan, crystal, waists, window, quad)
    b = compile_plan(SetupPlan((CrystalStage(pump),)), crystal, waists, window, quad)
    keys = set(a.entries) | set(b.entries)
    return pump, max(abs(a[k] - b[k]) for k in keys)
