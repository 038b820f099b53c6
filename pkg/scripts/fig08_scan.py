"""Fidelity maps over (w_p, w_c) for the single-crystal Bell-type targets.

Writes one CSV per target (w_p_um, w_c_um, fidelity). Worker processes follow
OAMFORGE_THREADS unless --workers is given.

Usage: python3 scripts/fig08_scan.py [--n 20] [--out-dir figures]
"""
import argparse
import json
from pathlib import Path

from oamforge.analysis import ScanGrid, waist_scan
from oamforge.oam_state import TargetState
from oamforge.setup_compiler import CrystalStage, PumpSpec, SetupPlan
from oamforge.spdc_kernel import CrystalConfig

CONFIGS = Path(__file__).resolve().parents[1] / "configs"
CASES = (("psi1", 0), ("psi2", 1), ("psi3", -1))


def main():
    parser = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    parser.add_argument("--n", type=int, default=20)
    parser.add_argument("--out-dir", default="figures")
    parser.add_argument("--workers", type=int)
    args = parser.parse_args()
    out = Path(args.out_dir)
    out.mkdir(parents=True, exist_ok=True)
    crystal = CrystalConfig.default()
    grid = ScanGrid.linear(n_pump=args.n)
    for name, lp in CASES:
        target = TargetState.from_json_dict(json.loads((CONFIGS / "targets" / f"{name}.json").read_text()))
        result = waist_scan(target, SetupPlan((CrystalStage(PumpSpec.single(lp)),)), grid, crystal,
                            workers=args.workers)
        (out / f"fig08_{name}.csv").write_text(result.to_csv())
        wp, wc, f = result.best()
        print(f"{name} (l_p={lp:+d}): best F = {f:.6f} at w_p = {wp:.2f} um, w_c = {wc:.2f} um")


if __name__ == "__main__":
    main()
