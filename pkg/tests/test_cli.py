import json

import pytest

from oamforge.cli import main, parse_pump
from oamforge.config import ConfigError, load_run_config, parse_run_config
from oamforge.oam_state import table_from_csv, table_from_json

from conftest import CONFIGS

DEFAULT = str(CONFIGS / "default.json")


def plan(name):
    return str(CONFIGS / "plans" / f"{name}.json")


def target(name):
    return str(CONFIGS / "targets" / f"{name}.json")


def run(capsys, *argv):
    code = main(list(argv))
    out, err = capsys.readouterr()
    return code, out, err


def test_parse_pump():
    assert parse_pump("-2:0.5,0:1:0.25,3").components == ((-2, 0.5), (0, 1 + 0.25j), (3, 1))
    with pytest.raises(ValueError):
        parse_pump("")


def test_spectrum_single_diagonal(capsys, tmp_path):
    out = tmp_path / "s.json"
    code, text, _ = run(capsys, "spectrum", "--config", DEFAULT, "--pump=0", "--out", str(out))
    assert code == 0
    assert "peak: (0, 0)" in text and "captured" in text and "tail=" in text
    table = table_from_json(out.read_text())
    assert table.normalized and all(a + b == 0 for a, b in table.entries)


def test_spectrum_three_diagonals(capsys, tmp_path):
    out = tmp_path / "s.csv"
    code, _, _ = run(capsys, "spectrum", "--config", DEFAULT, "--pump=-2:1,0:1,2:1", "--format", "csv",
                     "--out", str(out))
    assert code == 0
    assert {a + b for a, b in table_from_csv(out.read_text()).entries} == {-2, 0, 2}


def test_spectrum_pump_from_config(capsys):
    code, text, _ = run(capsys, "spectrum", "--config", str(CONFIGS / "sellmeier.json"))
    assert code == 0 and "l_p=+2" in text


def test_empty_pump_is_invalid(capsys):
    assert run(capsys, "spectrum", "--config", DEFAULT, "--pump=")[0] == 1
    assert run(capsys, "spectrum", "--config", DEFAULT)[0] == 1


def test_compile_report(capsys, tmp_path):
    report = tmp_path / "r.json"
    code, text, _ = run(capsys, "compile", "--config", DEFAULT, "--plan", plan("fig07"),
                        "--target", target("mes3_even"), "--subspace=-2,0,2", "--report", str(report))
    assert code == 0
    f = json.loads(report.read_text())["fidelity"]
    assert f == pytest.approx(0.984, abs=0.01)
    assert "F_sub" in text


def test_compile_phase_toggle(capsys, tmp_path):
    reports = []
    for p, t in (("fig10", "fig10_plus"), ("fig10_pi", "fig10_minus")):
        path = tmp_path / f"{p}.json"
        assert run(capsys, "compile", "--config", DEFAULT, "--plan", plan(p), "--target", target(t),
                   "--report", str(path))[0] == 0
        reports.append(json.loads(path.read_text())["fidelity"])
    assert abs(reports[0] - reports[1]) < 1e-9


def test_malformed_json(capsys, tmp_path):
    bad = tmp_path / "bad.json"
    bad.write_text("{not json")
    assert run(capsys, "compile", "--config", DEFAULT, "--plan", str(bad))[0] == 1
    assert run(capsys, "compile", "--config", str(bad), "--plan", plan("fig07"))[0] == 1


def test_missing_file_is_io_error(capsys, tmp_path):
    assert run(capsys, "compile", "--config", DEFAULT, "--plan", str(tmp_path / "nope.json"))[0] == 3


def test_degenerate_state_exit(capsys, tmp_path):
    p = tmp_path / "cancel.json"
    p.write_text(json.dumps({"stages": [
        {"type": "crystal", "pump": [{"l": 0, "re": 1, "im": 0}], "power": 1},
        {"type": "phase", "phiA": 3.141592653589793, "phiB": 0},
        {"type": "crystal", "pump": [{"l": 0, "re": 1, "im": 0}], "power": 1}]}))
    assert run(capsys, "compile", "--config", DEFAULT, "--plan", str(p))[0] == 4


def test_quadrature_failure_exit(capsys, tmp_path):
    cfg = json.loads(open(DEFAULT).read())
    cfg["tolerance"] = 1e-17  # below double-precision noise, so doubling never settles
    path = tmp_path / "tight.json"
    path.write_text(json.dumps(cfg))
    code, _, err = run(capsys, "spectrum", "--config", str(path), "--pump=0")
    assert code == 2 and "did not converge" in err


def test_scan_outputs(capsys, tmp_path):
    out = tmp_path / "scan.csv"
    code, text, _ = run(capsys, "scan", "--config", DEFAULT, "--plan", plan("single_l0"),
                        "--target", target("psi1"), "--wp", "10:30:3", "--wc", "20:40:2",
                        "--format", "csv", "--out", str(out))
    assert code == 0 and "best F" in text
    lines = out.read_text().splitlines()
    assert lines[0] == "w_p_um,w_c_um,fidelity" and len(lines) == 7


def test_outputs_are_byte_identical(capsys, tmp_path):
    outs = []
    for i in range(2):
        out = tmp_path / f"{i}.json"
        run(capsys, "compile", "--config", DEFAULT, "--plan", plan("fig06"), "--out", str(out))
        outs.append(out.read_bytes())
    assert outs[0] == outs[1]


def test_coherence(capsys):
    code, text, _ = run(capsys, "coherence", "--geometry", str(CONFIGS / "geometry_ok.json"))
    assert code == 0 and "PASS pump[1,2]" in text
    code, text, err = run(capsys, "coherence", "--geometry", str(CONFIGS / "geometry_bad_pump.json"))
    assert code == 5 and "FAIL pump[1,2]" in text and "pump[1,2]" in err


def test_verify_ratios(capsys):
    code, text, _ = run(capsys, "verify-ratios", "--config", DEFAULT, "--lp", "4")
    assert code == 0 and "max relative deviation" in text


def test_equivalence(capsys):
    code, text, _ = run(capsys, "equivalence", "--config", DEFAULT, "--plan", plan("fig06"))
    assert code == 0 and "discrepancy" in text
    assert run(capsys, "equivalence", "--config", DEFAULT, "--plan", plan("fig07"))[0] == 5


def test_units_required():
    data = json.loads(open(DEFAULT).read())
    data["crystal"]["length"] = 10
    with pytest.raises(ConfigError):
        parse_run_config(data)
    data["crystal"]["length"] = {"value": 10, "unit": "furlong"}
    with pytest.raises(ConfigError):
        parse_run_config(data)


def test_units_convert():
    cfg = load_run_config(DEFAULT)
    assert cfg.crystal.length_um == 10_000 and cfg.waists.w_pump == 15
    sell = load_run_config(CONFIGS / "sellmeier.json")
    assert sell.crystal.k_pump == pytest.approx(cfg.crystal.k_pump, rel=1e-12)


@pytest.mark.parametrize("key,value", [("window", 0), ("tolerance", 1e-3), ("format", "xml")])
def test_run_config_validation(key, value):
    data = json.loads(open(DEFAULT).read())
    data[key] = value
    with pytest.raises(ConfigError):
        parse_run_config(data)
