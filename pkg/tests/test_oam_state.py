import cmath
import math

import pytest
from hypothesis import given, settings, strategies as st

from oamforge.oam_state import (DegenerateStateError, OamAmplitudeTable, TargetState, apply_phase,
                                fidelity, probability, shift_oam, subspace_fidelity, superpose,
                                table_from_csv, table_from_json, table_to_csv, table_to_json)

R2 = 1 / math.sqrt(2)
R3 = 1 / math.sqrt(3)

_amp = st.complex_numbers(max_magnitude=10, allow_nan=False, allow_infinity=False)
_key = st.tuples(st.integers(-8, 8), st.integers(-8, 8))
_tables = st.dictionaries(_key, _amp, min_size=1, max_size=12).map(OamAmplitudeTable).filter(
    lambda t: t.norm() > 1e-6)


def test_shift_example():
    assert shift_oam(OamAmplitudeTable({(0, 0): 1}), 4, 5) == OamAmplitudeTable({(4, 5): 1})


def test_shift_identity_and_inverse():
    t = OamAmplitudeTable({(0, 1): 0.3, (2, -1): 1j})
    assert shift_oam(t, 0, 0) == t
    assert shift_oam(shift_oam(t, 3, -2), -3, 2) == t


def test_phase_examples():
    t = OamAmplitudeTable({(0, 1): 0.6, (1, 0): 0.8j}, normalized=True)
    assert apply_phase(t, 0, 0) == t
    flipped = apply_phase(t, math.pi, 0)
    assert flipped[(0, 1)] == pytest.approx(-0.6)
    assert flipped.probabilities() == pytest.approx(t.probabilities())
    assert apply_phase(t, 0.4, 1.1).entries == apply_phase(t, 1.5, 0).entries


def test_three_dimensional_example():
    psi1 = shift_oam(OamAmplitudeTable({(0, 0): 1}), 2, 2)
    psi2 = OamAmplitudeTable({(0, 1): R2, (1, 0): R2})
    state = superpose([(psi1, 1), (psi2, math.sqrt(2))])
    for key in [(2, 2), (0, 1), (1, 0)]:
        assert state[key] == pytest.approx(R3)
        assert probability(state, *key) == pytest.approx(1 / 3)
    assert probability(state, 5, 5) == 0
    assert sum(state.probabilities().values()) == pytest.approx(1)


def test_destructive_interference_is_degenerate():
    with pytest.raises(DegenerateStateError):
        superpose([(OamAmplitudeTable({(0, 0): 1}), 1), (OamAmplitudeTable({(0, 0): -1}), 1)])


def test_single_component_normalizes():
    t = OamAmplitudeTable({(0, 0): 3, (1, -1): 4})
    s = superpose([(t, 2.0)])
    assert s.normalized and s[(0, 0)] == pytest.approx(0.6)


def test_zero_entries_are_dropped():
    assert len(OamAmplitudeTable({(0, 0): 0, (1, 1): 1})) == 1


def test_normalized_flag_checked():
    with pytest.raises(ValueError):
        OamAmplitudeTable({(0, 0): 2}, normalized=True)


def test_target_validation():
    with pytest.raises(ValueError):
        TargetState(((0, 0, 1.0), (0, 0, 0.0)))
    with pytest.raises(ValueError):
        TargetState(((0, 0, 0.5),))
    t = TargetState.from_json_dict({"terms": [{"lA": 0, "lB": 0, "re": 2}, {"lA": 1, "lB": 1, "re": 2}],
                                    "normalize": True})
    assert t.terms[0][2] == pytest.approx(R2)


def test_fidelity_examples():
    target = TargetState.uniform([(0, 1), (1, 0)])
    assert fidelity(target.as_table(), target) == pytest.approx(1)
    assert fidelity(OamAmplitudeTable({(3, 3): 1}), target) == 0


def test_subspace_fidelity_rules():
    state = OamAmplitudeTable({(0, 0): 0.9, (1, 1): 0.3, (5, 5): 0.3})
    target = TargetState.uniform([(0, 0)])
    assert subspace_fidelity(state, target, {0, 1, 5}) == pytest.approx(fidelity(state, target))
    assert subspace_fidelity(state, target, {0}) == pytest.approx(1)
    assert subspace_fidelity(OamAmplitudeTable({(5, 5): 1}), target, {0}) == 0
    with pytest.raises(ValueError):
        subspace_fidelity(state, target, set())
    with pytest.raises(ValueError):
        subspace_fidelity(state, TargetState.uniform([(7, 7)]), {0})


def test_json_round_trip_is_exact():
    t = OamAmplitudeTable({(0, 1): 0.1 + 1e-17j, (-3, 4): -2.5e-300 + 1 / 3j}).normalize()
    assert table_from_json(table_to_json(t)) == t


def test_csv_round_trip_is_exact():
    t = OamAmplitudeTable({(0, 1): math.pi, (-3, 4): -1 / 7j})
    back = table_from_csv(table_to_csv(t))
    assert back == t
    assert table_to_csv(t).splitlines()[0] == "lA,lB,re,im,probability"


@settings(max_examples=100, deadline=None)
@given(t=_tables, da=st.integers(-10, 10), db=st.integers(-10, 10), phi=st.floats(-7, 7))
def test_probabilities_invariant_under_shift_and_phase(t, da, db, phi):
    p = t.probabilities()
    shifted = shift_oam(t, da, db).probabilities()
    assert {(a - da, b - db): v for (a, b), v in shifted.items()} == pytest.approx(p)
    assert apply_phase(t, phi).probabilities() == pytest.approx(p)
    top = max(p, key=p.get)
    assert max(shifted, key=shifted.get) == (top[0] + da, top[1] + db)


@settings(max_examples=100, deadline=None)
@given(a=_tables, b=_tables, x=st.floats(0.05, 5))
def test_superposition_matches_explicit_normalization(a, b, x):
    a, b = a.normalize(), b.normalize()
    keys = set(a.entries) | set(b.entries)
    raw = {k: a[k] + x * b[k] for k in keys}
    n2 = 1 + x * x + 2 * x * sum((a[k].conjugate() * b[k]).real for k in keys)
    if n2 < 1e-10:
        return
    state = superpose([(a, 1), (b, x)])
    for k in keys:
        assert abs(state[k] - raw[k] / math.sqrt(n2)) < 1e-12


@settings(max_examples=100, deadline=None)
@given(t=_tables, phase=st.floats(-7, 7), data=st.data())
def test_fidelity_global_phase_and_subspace(t, phase, data):
    keys = data.draw(st.lists(_key, min_size=1, max_size=4, unique=True))
    target = TargetState.uniform(keys)
    f = fidelity(t, target)
    g = cmath.exp(1j * phase)
    rotated = TargetState(tuple((a, b, g * w) for a, b, w in target.terms))
    assert fidelity(apply_phase(t, phase), rotated) == pytest.approx(f, abs=1e-12)
    sub = {l for k in keys for l in k}
    assert subspace_fidelity(t, target, sub) >= f - 1e-12


@settings(max_examples=100, deadline=None)
@given(t=_tables)
def test_serialization_round_trip(t):
    assert table_from_json(table_to_json(t)) == t
    assert table_from_csv(table_to_csv(t), normalized=False) == t
