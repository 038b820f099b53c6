"""Recompute the headline numbers of the figure setups and write their spectra as CSV.

Usage: python3 scripts/reproduce_figures.py [--out-dir figures]
"""
import argparse
import json
from pathlib import Path

from oamforge.analysis import equalizing_factor, fidelity_bound, optimize_waists
from oamforge.oam_state import TargetState, fidelity, subspace_fidelity, table_to_csv
from oamforge.setup_compiler import CrystalStage, PumpSpec, SetupPlan, compile_plan, crystal_state, plan_from_json
from oamforge.spdc_kernel import CrystalConfig, WaistConfig

CONFIGS = Path(__file__).resolve().parents[1] / "configs"


def plan(name):
    return plan_from_json((CONFIGS / "plans" / f"{name}.json").read_text())


def target(name):
    return TargetState.from_json_dict(json.loads((CONFIGS / "targets" / f"{name}.json").read_text()))


def equalized_pump_state(crystal, waists, outer, key):
    """Weight the +-outer pump modes so the `key` mode matches |0,0>."""
    def build(a):
        return crystal_state(PumpSpec(((-outer, a), (0, 1.0), (outer, a))), crystal, waists)

    a = equalizing_factor(lambda a: abs(build(a)[key]) ** 2 - abs(build(a)[(0, 0)]) ** 2, 1e-3, 1e3)
    return a, build(a)


def three_crystal(crystal, waists, x):
    stages = (CrystalStage(PumpSpec.single(-4), x), CrystalStage(PumpSpec.single(0)),
              CrystalStage(PumpSpec.single(4), x))
    return compile_plan(SetupPlan(stages), crystal, waists)


def main():
    parser = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    parser.add_argument("--out-dir", default="figures")
    args = parser.parse_args()
    out = Path(args.out_dir)
    out.mkdir(parents=True, exist_ok=True)
    crystal = CrystalConfig.default()
    ref = WaistConfig.symmetric(15.0, 25.0)
    summary = {}

    mes_odd = TargetState.uniform([(-1, -1), (0, 0), (1, 1)])
    for label, waists in (("fig02", ref), ("fig02_w50_75", WaistConfig.symmetric(50.0, 75.0))):
        a, state = equalized_pump_state(crystal, waists, 2, (1, 1))
        summary[label] = {"weight_ratio": a, "F": fidelity(state, mes_odd),
                          "F_sub": subspace_fidelity(state, mes_odd, {-1, 0, 1})}
        (out / f"{label}.csv").write_text(table_to_csv(state))

    mes_even = target("mes3_even")

    def mismatch(x):
        s = three_crystal(crystal, ref, x)
        return abs(s[(2, 2)]) ** 2 - abs(s[(0, 0)]) ** 2

    x = equalizing_factor(mismatch, 0.1, 10.0)
    state = three_crystal(crystal, ref, x)
    summary["fig06"] = {"X": x, "F": fidelity(state, mes_even),
                        "F_sub": subspace_fidelity(state, mes_even, {-2, 0, 2})}
    (out / "fig06.csv").write_text(table_to_csv(state))

    state = compile_plan(plan("fig07"), crystal, ref)
    summary["fig07"] = {"F": fidelity(state, mes_even)}
    (out / "fig07.csv").write_text(table_to_csv(state))

    single = lambda lp: SetupPlan((CrystalStage(PumpSpec.single(lp)),))  # noqa: E731
    summary["fig08_reference"] = {
        "psi1": fidelity(compile_plan(single(0), crystal, ref), target("psi1")),
        "psi2": fidelity(compile_plan(single(1), crystal, ref), target("psi2")),
    }
    summary["bounds"] = {
        "l_p=2 |1,1>": fidelity_bound(2, TargetState.uniform([(1, 1)])).f_max,
        "l_p=3 (|1,2>+|2,1>)": fidelity_bound(3, TargetState.uniform([(1, 2), (2, 1)])).f_max,
    }

    for fig in ("10", "11"):
        best = optimize_waists(target(f"fig{fig}_plus"), plan(f"fig{fig}"), crystal)
        waists = WaistConfig.symmetric(best.w_pump, best.w_collection)
        toggled = fidelity(compile_plan(plan(f"fig{fig}_pi"), crystal, waists), target(f"fig{fig}_minus"))
        summary[f"fig{fig}"] = {"w_p_um": best.w_pump, "w_c_um": best.w_collection, "F": best.fidelity,
                                "F_toggled": toggled,
                                "F_reference_waists": fidelity(compile_plan(plan(f"fig{fig}"), crystal, ref),
                                                               target(f"fig{fig}_plus"))}
        (out / f"fig{fig}.csv").write_text(table_to_csv(compile_plan(plan(f"fig{fig}"), crystal, waists)))

    (out / "summary.json").write_text(json.dumps(summary, indent=2) + "\n")
    print(json.dumps(summary, indent=2))


if __name__ == "__main__":
    main()
