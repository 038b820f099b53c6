import json
from pathlib import Path

import pytest

from oamforge import CrystalConfig, TargetState, WaistConfig
from oamforge.setup_compiler import plan_from_json

ROOT = Path(__file__).resolve().parents[1]
CONFIGS = ROOT / "configs"

# (criterion, passed, detail) collected by the acceptance tests
ACCEPTANCE_LINES = []


def load_plan(name):
    return plan_from_json((CONFIGS / "plans" / f"{name}.json").read_text())


def load_target(name):
    return TargetState.from_json_dict(json.loads((CONFIGS / "targets" / f"{name}.json").read_text()))


@pytest.fixture(scope="session")
def crystal():
    return CrystalConfig.default()


@pytest.fixture(scope="session")
def ref_waists():
    return WaistConfig.symmetric(15.0, 25.0)


def pytest_terminal_summary(terminalreporter):
    if not ACCEPTANCE_LINES:
        return
    terminalreporter.section("acceptance criteria")
    for number, ok, detail in sorted(ACCEPTANCE_LINES, key=lambda r: r[0]):
        terminalreporter.write_line(f"{'PASS' if ok else 'FAIL'} criterion {number:>2}: {detail}")
