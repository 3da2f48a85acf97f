import itertools

import numpy as np
import pytest
from hypothesis import given
from hypothesis import strategies as st

from oracles import BELL, joint_outcome_probs, on_travel, transform_table
from qsdc.coding import (
    TRANSFORM_TABLE,
    CorrelationKind,
    RuleMode,
    bell_components,
    bell_index,
    compute_rates,
    corrupted_table,
    decode_message,
    expected_correlation,
    infer_operation,
    session_rates,
    transform,
)
from qsdc.errors import InvalidArgument
from qsdc.quantum import (
    MeasurementBasis,
    QuantumRegister,
    RandomSource,
    apply_pauli,
    bell_state,
    measure_qubit,
    states_equal_up_to_phase,
)

B0, B1 = MeasurementBasis.B0, MeasurementBasis.B1
PAIRS = list(itertools.product(range(4), range(4)))
CORR, ANTI = CorrelationKind.CORRELATED, CorrelationKind.ANTICORRELATED


def test_transform_examples():
    assert transform(0, 0) == 0
    assert transform(0, 2) == 3
    assert decode_message(3, 2) == 0
    assert infer_operation(0, 3) == 2


def test_table_rows():
    assert TRANSFORM_TABLE[0] == [0, 1, 2, 3]
    assert TRANSFORM_TABLE[1] == [2, 3, 0, 1]
    assert TRANSFORM_TABLE[2] == [3, 2, 1, 0]
    assert TRANSFORM_TABLE[3] == [1, 0, 3, 2]


def test_table_matches_dense_oracle():
    oracle = transform_table()
    assert [[transform(a, b) for a in range(4)] for b in range(4)] == oracle


@pytest.mark.parametrize("a,b", PAIRS)
def test_transform_matches_simulator_state(a, b):
    reg = QuantumRegister()
    reg.add(bell_state(a, 0, 1))
    apply_pauli(reg, 1, b)
    out = reg.system_of(0).as_array()
    assert states_equal_up_to_phase(out, BELL[transform(a, b)])
    assert states_equal_up_to_phase(out, on_travel(b, BELL[a]))


@pytest.mark.parametrize("a,b", PAIRS)
def test_decode_and_infer_invert_transform(a, b):
    f = transform(a, b)
    assert decode_message(f, b) == a
    assert infer_operation(a, f) == b
    assert transform(f, b) == a


@given(st.integers(0, 3))
def test_latin_square(x):
    assert sorted(transform(x, b) for b in range(4)) == [0, 1, 2, 3]
    assert sorted(transform(a, x) for a in range(4)) == [0, 1, 2, 3]


@given(st.integers(0, 3))
def test_identity_cases(a):
    assert decode_message(a, 0) == a
    assert infer_operation(a, a) == 0


def test_index_errors():
    with pytest.raises(InvalidArgument):
        transform(4, 0)
    with pytest.raises(InvalidArgument):
        transform(0, -1)
    with pytest.raises(InvalidArgument):
        bell_index(2, "+")


@given(st.integers(0, 3))
def test_bell_components_roundtrip(a):
    assert bell_index(*bell_components(a)) == a


def dense_correlation(a, basis):
    p = joint_outcome_probs(BELL[a], int(basis), int(basis))
    same = p[0, 0] + p[1, 1]
    assert same in (pytest.approx(0, abs=1e-12), pytest.approx(1, abs=1e-12))
    return CORR if same > 0.5 else ANTI


@pytest.mark.parametrize("a", range(4))
@pytest.mark.parametrize("basis", [B0, B1])
def test_physical_rule_matches_dense_oracle(a, basis):
    assert expected_correlation(a, basis, RuleMode.PHYSICAL) is dense_correlation(a, basis)


@pytest.mark.parametrize("a", range(4))
@pytest.mark.parametrize("basis", [B0, B1])
def test_physical_rule_matches_simulated_measurements(a, basis):
    rng = RandomSource(100 + 2 * a + int(basis))
    seen = set()
    for _ in range(10_000 // 8):
        reg = QuantumRegister()
        reg.add(bell_state(a, 0, 1))
        j = measure_qubit(reg, 1, basis, rng)
        k = measure_qubit(reg, 0, basis, rng)
        seen.add(CorrelationKind.of(j, k))
    assert seen == {expected_correlation(a, basis)}


def test_correlation_examples():
    assert expected_correlation(0, B0, RuleMode.PHYSICAL) is CORR
    assert expected_correlation(1, B1, RuleMode.PHYSICAL) is ANTI
    assert expected_correlation(1, B1, RuleMode.PAPER_LITERAL) is CORR
    assert expected_correlation(3, B1, RuleMode.PHYSICAL) is ANTI


def test_literal_rule_disagrees_exactly_on_two_cells():
    diff = {
        (a, basis)
        for a in range(4)
        for basis in (B0, B1)
        if expected_correlation(a, basis, RuleMode.PHYSICAL)
        is not expected_correlation(a, basis, RuleMode.PAPER_LITERAL)
    }
    assert diff == {(1, B1), (2, B1)}


def test_rates():
    assert session_rates(10) == compute_rates(20, 20, 20)
    r = compute_rates(20, 20, 20)
    assert r.rq == 1.0 and r.rtot == 0.5
    assert compute_rates(10, 0, 10).rq == 0.0
    with pytest.raises(InvalidArgument):
        compute_rates(0, 0, 0)
    with pytest.raises(InvalidArgument):
        compute_rates(4, -1, 0)


def test_corrupted_table_restores():
    before = [list(r) for r in TRANSFORM_TABLE]
    with corrupted_table():
        assert TRANSFORM_TABLE != before
        assert transform_table() != [list(r) for r in TRANSFORM_TABLE]
    assert TRANSFORM_TABLE == before
