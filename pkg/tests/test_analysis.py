import json
import math

import pytest
from hypothesis import given, settings, strategies as st

from oamforge.analysis import (ScanGrid, equalizing_factor, fidelity_at, fidelity_bound, locked_modes,
                               optimize_waists, ququart_separability_check, ratio_law_deviation, rmn,
                               waist_scan)
from oamforge.oam_state import TargetState
from oamforge.setup_compiler import CrystalStage, PumpSpec, SetupPlan
from oamforge.spdc_kernel import WaistConfig

from conftest import load_plan, load_target


def single(lp):
    return SetupPlan((CrystalStage(PumpSpec.single(lp)),))


def test_rmn_examples():
    assert rmn(2, 1, 1) == 0
    assert rmn(0, 1, -1) == -2
    assert rmn(4, 1, 3) == 0
    with pytest.raises(ValueError):
        rmn(1, 1, 1)


@settings(max_examples=100, deadline=None)
@given(ls=st.integers(-20, 20), li=st.integers(-20, 20))
def test_rmn_is_non_positive_even(ls, li):
    n = rmn(ls + li, ls, li)
    assert n <= 0 and n % 2 == 0


def test_locked_modes_follow_factorial_law():
    for lp in (-4, 2, 5):
        modes = locked_modes(lp)
        assert len(modes) == abs(lp) + 1
        assert all(rmn(lp, a, b) == 0 for a, b, _ in modes)
        for a, b, c in modes:
            expected = math.factorial(abs(lp)) / (math.factorial(abs(a)) * math.factorial(abs(b)))
            assert abs(c) ** 2 / abs(modes[0][2]) ** 2 == pytest.approx(expected, rel=1e-12)


def test_bound_examples():
    assert fidelity_bound(2, TargetState.uniform([(1, 1)])).f_max == pytest.approx(0.5, abs=1e-15)
    assert fidelity_bound(3, TargetState.uniform([(1, 2), (2, 1)])).f_max == pytest.approx(0.75, abs=1e-15)
    assert fidelity_bound(1, load_target("psi2")).f_max == pytest.approx(1.0, abs=1e-15)
    assert fidelity_bound(-1, load_target("psi3")).f_max == pytest.approx(1.0, abs=1e-15)
    assert fidelity_bound(0, load_target("psi1")).f_max == 1.0
    report = fidelity_bound(2, TargetState.uniform([(1, 1)]))
    assert [p for _, _, p in report.locked_modes] == pytest.approx([0.5, 1, 0.5])
    json.dumps(report.to_json_dict())
    with pytest.raises(ValueError):
        fidelity_bound(2, TargetState.uniform([(0, 0)]))


@pytest.mark.parametrize("lp", [2, 3, 4, -2, -3])
def test_equal_weight_targets_are_bounded(lp):
    sign = 1 if lp > 0 else -1
    for k in range(abs(lp) + 1):
        for m in range(k, abs(lp) + 1):
            keys = {(sign * k, lp - sign * k), (sign * m, lp - sign * m)}
            assert fidelity_bound(lp, TargetState.uniform(sorted(keys))).f_max < 1


def test_ququart_condition():
    assert ququart_separability_check(2, 2, 0, 0)
    assert not ququart_separability_check(0, 0, 0, 0)
    assert ququart_separability_check(1, -1, 1, -1)
    assert ququart_separability_check(-2, 2, 2, 0)


def test_scan_grid_validation():
    with pytest.raises(ValueError):
        ScanGrid((), (1.0,))
    with pytest.raises(ValueError):
        ScanGrid((2.0, 1.0), (1.0,))
    grid = ScanGrid.linear((5, 100), (5, 100), 4, 3)
    assert len(grid.points) == 12


def test_scan_rows_sorted_and_deterministic(crystal):
    grid = ScanGrid((15.0, 30.0), (20.0, 40.0))
    a = waist_scan(load_target("psi1"), single(0), grid, crystal)
    b = waist_scan(load_target("psi1"), single(0), grid, crystal, workers=2)
    assert [r[:2] for r in a.rows] == sorted(r[:2] for r in a.rows)
    assert a.to_csv() == b.to_csv()
    assert a.to_csv().splitlines()[0] == "w_p_um,w_c_um,fidelity"
    assert json.loads(a.to_json())["rows"][0]["w_p_um"] == 15.0


def test_scan_reference_point(crystal):
    f1 = fidelity_at(load_target("psi1"), single(0), crystal, 15, 25)
    f2 = fidelity_at(load_target("psi2"), single(1), crystal, 15, 25)
    assert max(f1, f2) == pytest.approx(0.985, abs=0.01)


def test_scan_respects_bounds(crystal):
    grid = ScanGrid.linear(n_pump=8)
    for lp, target in [(2, TargetState.uniform([(1, 1)])), (3, TargetState.uniform([(1, 2), (2, 1)]))]:
        best = waist_scan(target, single(lp), grid, crystal).best()[2]
        assert best <= fidelity_bound(lp, target).f_max + 0.01


def test_mirror_symmetry(crystal):
    grid = ScanGrid.linear(n_pump=5)
    plus = waist_scan(load_target("psi2"), single(1), grid, crystal)
    minus = waist_scan(load_target("psi3"), single(-1), grid, crystal)
    for a, b in zip(plus.rows, minus.rows):
        assert a[:2] == b[:2]
        assert a[2] == pytest.approx(b[2], abs=1e-12)


def test_phase_toggle(crystal):
    plus = fidelity_at(load_target("fig10_plus"), load_plan("fig10"), crystal, 15, 25)
    minus = fidelity_at(load_target("fig10_minus"), load_plan("fig10_pi"), crystal, 15, 25)
    assert abs(plus - minus) < 1e-9
    crossed = fidelity_at(load_target("fig10_minus"), load_plan("fig10"), crystal, 15, 25)
    assert crossed < 0.1


def test_optimizer(crystal):
    res = optimize_waists(load_target("psi2"), single(1), crystal, coarse=9, rounds=3)
    assert res.fidelity >= res.coarse_fidelity
    assert res.fidelity >= 0.98
    point = optimize_waists(load_target("psi2"), single(1), crystal, bounds=((20, 20), (30, 30)))
    assert (point.w_pump, point.w_collection) == (20, 30)
    assert point.fidelity == fidelity_at(load_target("psi2"), single(1), crystal, 20, 30)
    with pytest.raises(ValueError):
        optimize_waists(load_target("psi2"), single(1), crystal, bounds=((30, 20), (5, 100)))


def test_equalizing_factor():
    assert equalizing_factor(lambda x: x * x - 2, 0, 3) == pytest.approx(math.sqrt(2), abs=1e-12)


def test_ratio_law_deviation(crystal):
    waists = [WaistConfig.symmetric(a, b) for a in (10, 100) for b in (10, 100)]
    assert ratio_law_deviation(4, crystal, waists) < 1e-9
    assert ratio_law_deviation(-3, crystal, waists) < 1e-9
