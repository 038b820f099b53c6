"""Command-line front end.

Exit codes: 0 success, 1 invalid input, 2 quadrature failure, 3 I/O failure,
4 degenerate (fully cancelled) state, 5 a requested check did not pass.
"""
from __future__ import annotations

import argparse
import dataclasses
import json
import sys
from pathlib import Path

from . import analysis
from .config import ConfigError, RunConfig, load_run_config
from .oam_state import (DegenerateStateError, OamAmplitudeTable, TargetState, fidelity,
                        subspace_fidelity, table_to_csv, table_to_json)
from .setup_compiler import (CoherenceGeometry, PumpSpec, SetupPlan, check_coherence, compile_plan,
                             crystal_state, plan_from_json)
from .spdc_kernel import QuadratureError, WaistConfig, diagonal_report

EXIT_OK, EXIT_INPUT, EXIT_QUAD, EXIT_IO, EXIT_DEGENERATE, EXIT_CHECK = range(6)


class CheckFailed(Exception):
    pass


def _out(msg=""):
    print(msg)


def parse_pump(text: str) -> PumpSpec:
    """``"l[:re[:im]],..."``, e.g. ``"-2:0.5,0:1,2:0.5"``."""
    comps = []
    for item in filter(None, (t.strip() for t in text.split(","))):
        parts = item.split(":")
        if len(parts) > 3:
            raise ValueError(f"bad pump component {item!r}")
        ell = int(parts[0])
        re_ = float(parts[1]) if len(parts) > 1 else 1.0
        im_ = float(parts[2]) if len(parts) > 2 else 0.0
        comps.append((ell, complex(re_, im_)))
    return PumpSpec(tuple(comps))


def _pump_from_config(raw) -> PumpSpec:
    return PumpSpec(tuple((int(c["l"]), complex(float(c.get("re", 0.0)), float(c.get("im", 0.0))))
                          for c in raw))


def _parse_range(text: str):
    start, stop, num = text.split(":")
    return float(start), float(stop), int(num)


def _parse_subspace(text):
    return [int(t) for t in text.split(",") if t.strip()]


def _load_config(args) -> RunConfig:
    cfg = load_run_config(args.config)
    changes = {}
    if args.window is not None:
        changes["window"] = args.window
    if args.tol is not None:
        changes["tolerance"] = args.tol
    if args.format is not None:
        changes["format"] = args.format
    if args.out is not None:
        changes["out"] = args.out
    return dataclasses.replace(cfg, **changes) if changes else cfg


def _write(path, text):
    if path:
        Path(path).write_text(text)


def _load_target(path) -> TargetState:
    return TargetState.from_json_dict(json.loads(Path(path).read_text()))


def _load_plan(path) -> SetupPlan:
    return plan_from_json(Path(path).read_text())


def _state_text(state: OamAmplitudeTable, fmt: str) -> str:
    return table_to_csv(state) if fmt == "csv" else table_to_json(state)


def cmd_spectrum(args) -> int:
    cfg = _load_config(args)
    if args.pump is not None:
        pump = parse_pump(args.pump)
    elif "pump" in cfg.raw:
        pump = _pump_from_config(cfg.raw["pump"])
    else:
        raise ConfigError("no pump given (use --pump or a 'pump' list in the config)")
    state = crystal_state(pump, cfg.crystal, cfg.waists, cfg.window, cfg.quad)
    _out(f"pump components: {[(l, a) for l, a in pump.components]}")
    for ell, _ in pump.components:
        rep = diagonal_report(ell, cfg.crystal, cfg.waists, cfg.window, cfg.quad)
        # the two outermost modes bound what the window leaves out
        _out(f"l_p={ell:+d}: window={rep.window} tail={rep.tail_fraction:.3e} "
             f"captured>={1 - rep.tail_fraction:.9f} z-nodes={rep.nodes}")
    peak = max(state.entries.items(), key=lambda kv: abs(kv[1]))
    _out(f"modes: {len(state)}  total probability: {state.norm_squared():.12f}  "
         f"peak: {peak[0]} P={abs(peak[1]) ** 2:.6f}")
    _write(cfg.out, _state_text(state, cfg.format))
    return EXIT_OK


def cmd_compile(args) -> int:
    cfg = _load_config(args)
    plan = _load_plan(args.plan)
    state = compile_plan(plan, cfg.crystal, cfg.waists, cfg.window, cfg.quad)
    _out(f"compiled {len(plan.crystals)} crystal(s) into {len(state)} modes")
    report = {}
    if args.target:
        target = _load_target(args.target)
        report["fidelity"] = fidelity(state, target)
        _out(f"F = {report['fidelity']:.6f}")
        if args.subspace:
            sub = _parse_subspace(args.subspace)
            report["subspace"] = sub
            report["subspace_fidelity"] = subspace_fidelity(state, target, sub)
            _out(f"F_sub{sub} = {report['subspace_fidelity']:.6f}")
    _write(cfg.out, _state_text(state, cfg.format))
    if args.report:
        _write(args.report, json.dumps(report, indent=2))
    return EXIT_OK


def cmd_scan(args) -> int:
    cfg = _load_config(args)
    plan = _load_plan(args.plan)
    target = _load_target(args.target)
    wp, wc = _parse_range(args.wp), _parse_range(args.wc)
    grid = analysis.ScanGrid.linear(wp[:2], wc[:2], wp[2], wc[2])
    result = analysis.waist_scan(target, plan, grid, cfg.crystal, cfg.window, cfg.quad,
                                 workers=args.workers)
    best = result.best()
    _out(f"{len(result.rows)} points, {len(result.failures)} failures; "
         f"best F = {best[2]:.6f} at w_p = {best[0]:.3f} um, w_c = {best[1]:.3f} um")
    _write(cfg.out, result.to_csv() if cfg.format == "csv" else result.to_json())
    return EXIT_OK


def cmd_coherence(args) -> int:
    geometry = CoherenceGeometry.from_json_dict(json.loads(Path(args.geometry).read_text()))
    report = check_coherence(geometry)
    for c in report.conditions:
        op = "<" if c.strict else "<="
        status = "PASS" if c.satisfied else "FAIL"
        _out(f"{status} {c.name}: {c.value:.6e} {op} {c.bound:.6e} (margin {c.margin:+.6e} m)")
    if args.out:
        _write(args.out, json.dumps({"conditions": [
            {"name": c.name, "value_m": c.value, "bound_m": c.bound, "strict": c.strict,
             "satisfied": c.satisfied, "margin_m": c.margin} for c in report.conditions]}, indent=2))
    if not report.ok:
        raise CheckFailed("violated: " + ", ".join(c.name for c in report.failing()))
    return EXIT_OK


DEFAULT_RATIO_WAISTS = "10:10,10:30,10:100,30:10,30:30,30:100,100:10,100:30,100:100"


def cmd_verify_ratios(args) -> int:
    cfg = _load_config(args)
    waists = []
    for item in args.waists.split(","):
        wp, wc = item.split(":")
        waists.append(WaistConfig.symmetric(float(wp), float(wc)))
    dev = analysis.ratio_law_deviation(args.lp, cfg.crystal, waists, cfg.quad)
    _out(f"l_p={args.lp}: max relative deviation from factorial ratio law = {dev:.3e}")
    if args.out:
        _write(args.out, json.dumps({"ell_pump": args.lp, "max_deviation": dev}, indent=2))
    if not dev < args.threshold:
        raise CheckFailed(f"deviation {dev:.3e} exceeds {args.threshold:.1e}")
    return EXIT_OK


def cmd_equivalence(args) -> int:
    cfg = _load_config(args)
    plan = _load_plan(args.plan)
    result = analysis.equivalence_discrepancy(plan, cfg.crystal, cfg.waists, cfg.window, cfg.quad)
    if result is None:
        raise CheckFailed("plan contains OAM shifts; no single-crystal pump is equivalent")
    pump, diff = result
    _out("equivalent pump: " + ", ".join(f"l={l}: {a.real:.9g}{a.imag:+.9g}j" for l, a in pump.components))
    _out(f"max amplitude discrepancy = {diff:.3e}")
    if args.out:
        _write(args.out, json.dumps({"pump": [{"l": l, "re": a.real, "im": a.imag}
                                              for l, a in pump.components],
                                     "max_discrepancy": diff}, indent=2))
    if not diff <= args.threshold:
        raise CheckFailed(f"discrepancy {diff:.3e} exceeds {args.threshold:.1e}")
    return EXIT_OK


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="oamforge", description=__doc__.splitlines()[0])
    sub = parser.add_subparsers(dest="command", required=True)

    def common(p, config=True):
        if config:
            p.add_argument("--config", required=True)
        p.add_argument("--out")
        p.add_argument("--format", choices=("json", "csv"))
        p.add_argument("--window", type=int)
        p.add_argument("--tol", type=float)

    p = sub.add_parser("spectrum", help="OAM spectrum of a single crystal")
    common(p)
    p.add_argument("--pump", help="pump modes 'l[:re[:im]],...' (write as --pump=-2:1,0:1)")
    p.set_defaults(func=cmd_spectrum)

    p = sub.add_parser("compile", help="compile a path-identity plan")
    common(p)
    p.add_argument("--plan", required=True)
    p.add_argument("--target")
    p.add_argument("--subspace", help="comma-separated OAM values, e.g. '-2,0,2'")
    p.add_argument("--report", help="write the fidelity report as JSON here")
    p.set_defaults(func=cmd_compile)

    p = sub.add_parser("scan", help="fidelity over a waist grid")
    common(p)
    p.add_argument("--plan", required=True)
    p.add_argument("--target", required=True)
    p.add_argument("--wp", default="5:100:20", help="pump waists START:STOP:N in um")
    p.add_argument("--wc", default="5:100:20", help="collection waists START:STOP:N in um")
    p.add_argument("--workers", type=int)
    p.set_defaults(func=cmd_scan)

    p = sub.add_parser("coherence", help="temporal coherence conditions")
    p.add_argument("--geometry", required=True)
    p.add_argument("--out")
    p.set_defaults(func=cmd_coherence)

    p = sub.add_parser("verify-ratios", help="check the factorial amplitude-ratio law")
    common(p)
    p.add_argument("--lp", type=int, default=4)
    p.add_argument("--waists", default=DEFAULT_RATIO_WAISTS, help="'wp:wc,...' in um")
    p.add_argument("--threshold", type=float, default=1e-9)
    p.set_defaults(func=cmd_verify_ratios)

    p = sub.add_parser("equivalence", help="compare a shift-free plan with its single-crystal pump")
    common(p)
    p.add_argument("--plan", required=True)
    p.add_argument("--threshold", type=float, default=1e-9)
    p.set_defaults(func=cmd_equivalence)
    return parser


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    try:
        return args.func(args)
    except CheckFailed as exc:
        print(f"check failed: {exc}", file=sys.stderr)
        return EXIT_CHECK
    except DegenerateStateError as exc:
        print(f"degenerate state: {exc}", file=sys.stderr)
        return EXIT_DEGENERATE
    except QuadratureError as exc:
        print(f"quadrature failure: {exc}", file=sys.stderr)
        return EXIT_QUAD
    except OSError as exc:
        print(f"I/O error: {exc}", file=sys.stderr)
        return EXIT_IO
    except (ValueError, KeyError, TypeError) as exc:
        # includes ConfigError and json.JSONDecodeError
        print(f"invalid input: {exc}", file=sys.stderr)
        return EXIT_INPUT


if __name__ == "__main__":
    sys.exit(main())
