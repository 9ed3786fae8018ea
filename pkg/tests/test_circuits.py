import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from wzsim.circuits import (
    CNOT,
    CPHASE,
    PHASE,
    X,
    Circuit,
    Gate,
    circuit_from_text,
    circuit_to_text,
    circuit_unitary,
    count_kinetic_gates,
    synthesize_diagonal,
)
from wzsim.errors import ResourceLimitError, ValidationError

angles = st.floats(min_value=-3.14, max_value=3.14, allow_nan=False)


def diag_target(phases):
    return np.diag(np.exp(1j * np.asarray(phases, float)))


def assert_diagonal_match(circuit, phases, tol=1e-12):
    u = circuit_unitary(circuit)
    target = diag_target(phases)
    off = u - np.diag(np.diag(u))
    assert np.max(np.abs(off)) == 0.0
    assert np.max(np.abs(np.diag(u) - np.diag(target))) < tol


class TestGateValidation:
    def test_kinds_and_arguments(self):
        with pytest.raises(ValidationError):
            Gate("H", 0)
        with pytest.raises(ValidationError):
            Gate(CNOT, 0)
        with pytest.raises(ValidationError):
            Gate(X, 0, control=1)
        with pytest.raises(ValidationError):
            Gate(PHASE, 0)
        with pytest.raises(ValidationError):
            Gate(X, 0, phases=(0.0, 1.0))
        with pytest.raises(ValidationError):
            Gate(CNOT, 1, control=1)

    def test_circuit_checks_qubit_range(self):
        with pytest.raises(ValidationError):
            Circuit(width=1, gates=[Gate(CNOT, 1, control=0)])

    def test_count_by_kind(self):
        c = Circuit(
            width=2,
            gates=[Gate(X, 0), Gate(CNOT, 1, control=0), Gate(PHASE, 1, phases=(0.0, 1.0))],
        )
        assert c.count(PHASE, CPHASE) == 1
        assert c.count(X) == 1


class TestCircuitUnitary:
    def test_x_gate(self):
        u = circuit_unitary(Circuit(width=1, gates=[Gate(X, 0)]))
        assert np.array_equal(u, [[0, 1], [1, 0]])

    def test_cnot_msb_control(self):
        u = circuit_unitary(Circuit(width=2, gates=[Gate(CNOT, 1, control=0)]))
        expected = np.zeros((4, 4))
        expected[0, 0] = expected[1, 1] = expected[3, 2] = expected[2, 3] = 1
        assert np.array_equal(u, expected)

    def test_cphase_applies_only_when_control_set(self):
        u = circuit_unitary(
            Circuit(width=2, gates=[Gate(CPHASE, 1, control=0, phases=(0.3, 0.7))])
        )
        assert np.allclose(np.diag(u), [1.0, 1.0, np.exp(0.3j), np.exp(0.7j)], atol=1e-15)

    def test_listed_order_acts_first(self):
        first_x = Circuit(width=1, gates=[Gate(X, 0), Gate(PHASE, 0, phases=(0.0, np.pi / 2))])
        first_p = Circuit(width=1, gates=[Gate(PHASE, 0, phases=(0.0, np.pi / 2)), Gate(X, 0)])
        assert np.allclose(circuit_unitary(first_x), [[0, 1], [1j, 0]], atol=1e-15)
        assert np.allclose(circuit_unitary(first_p), [[0, 1j], [1, 0]], atol=1e-15)

    def test_dense_width_guard(self):
        with pytest.raises(ResourceLimitError):
            circuit_unitary(Circuit(width=13, gates=[]))


class TestSynthesis:
    @given(width=st.integers(min_value=1, max_value=4), data=st.data())
    @settings(max_examples=60, deadline=None)
    def test_reconstructs_any_diagonal(self, width, data):
        phases = data.draw(
            st.lists(angles, min_size=2**width, max_size=2**width).map(np.asarray)
        )
        assert_diagonal_match(synthesize_diagonal(phases), phases)

    @given(width=st.integers(min_value=1, max_value=4), data=st.data())
    @settings(max_examples=40, deadline=None)
    def test_naive_route_matches_too(self, width, data):
        phases = data.draw(
            st.lists(angles, min_size=2**width, max_size=2**width).map(np.asarray)
        )
        circ = synthesize_diagonal(phases, strategy="naive")
        assert_diagonal_match(circ, phases)
        if np.any(phases != 0.0):
            assert circ.count(PHASE, CPHASE) == 2 ** (width - 1)

    def test_single_parity_pattern_uses_two_controlled_pairs(self):
        t1, t2, t3, t4 = 0.25, 0.85, 1.55, 2.35
        phases = np.array([t1, t2, t3, t4, t3, t4, t1, t2])
        circ = synthesize_diagonal(phases)
        assert_diagonal_match(circ, phases)
        assert circ.count(CPHASE) == 2
        assert circ.count(PHASE) == 0
        assert synthesize_diagonal(phases, strategy="naive").count(PHASE, CPHASE) == 4

    def test_pattern_gate_sequence_is_frozen(self):
        t1, t2, t3, t4 = 0.25, 0.85, 1.55, 2.35
        circ = synthesize_diagonal(np.array([t1, t2, t3, t4, t3, t4, t1, t2]))
        assert circ.gates == [
            Gate(CNOT, 1, control=0),
            Gate(CPHASE, 2, control=1, phases=(t3, t4)),
            Gate(X, 1),
            Gate(CPHASE, 2, control=1, phases=(t1, t2)),
            Gate(X, 1),
            Gate(CNOT, 1, control=0),
        ]

    def test_constant_rows_collapse_to_one_phase_gate(self):
        phases = np.array([0.3, 0.9] * 4)
        circ = synthesize_diagonal(phases)
        assert [g.kind for g in circ.gates] == [PHASE]
        assert_diagonal_match(circ, phases)

    def test_zero_vector_needs_no_gates(self):
        assert synthesize_diagonal(np.zeros(8)).gates == []

    def test_width_one(self):
        circ = synthesize_diagonal(np.array([0.1, 0.7]))
        assert [g.kind for g in circ.gates] == [PHASE]
        assert_diagonal_match(circ, [0.1, 0.7])

    def test_input_validation(self):
        with pytest.raises(ValidationError):
            synthesize_diagonal(np.zeros(3))
        with pytest.raises(ValidationError):
            synthesize_diagonal(np.array([1.0]))
        with pytest.raises(ValidationError):
            synthesize_diagonal(np.array([0.0, np.inf]))
        with pytest.raises(ValidationError):
            synthesize_diagonal(np.zeros(4), strategy="greedy")

    def test_width_guard(self):
        with pytest.raises(ResourceLimitError):
            synthesize_diagonal(np.zeros(2**13))


class TestGateCounts:
    @pytest.mark.parametrize("n_particles", [1, 2, 3])
    @pytest.mark.parametrize("n", range(1, 9))
    def test_block_product_count(self, n_particles, n):
        assert count_kinetic_gates(n_particles, n, "trotter") == 3 * n_particles * 2**n

    def test_spectral_adds_transform_cost(self):
        assert count_kinetic_gates(2, 4, "spectral") == 3 * 2 * (16 + 10)

    def test_validation(self):
        with pytest.raises(ValidationError):
            count_kinetic_gates(0, 4, "trotter")
        with pytest.raises(ValidationError):
            count_kinetic_gates(1, 0, "trotter")
        with pytest.raises(ValidationError):
            count_kinetic_gates(1, 4, "exact")


class TestSerialization:
    def test_text_format_is_frozen(self):
        circ = Circuit(
            width=3,
            gates=[
                Gate(CNOT, 1, control=0),
                Gate(X, 2),
                Gate(PHASE, 2, phases=(1 / 3, -0.5)),
                Gate(CPHASE, 2, control=1, phases=(0.25, 2.0)),
            ],
        )
        assert circuit_to_text(circ) == (
            "CNOT 1 0\n"
            "X 2\n"
            "PHASE 2 0.33333333333333331 -0.5\n"
            "CPHASE 2 1 0.25 2\n"
        )

    def test_empty_circuit_serializes_to_empty_string(self):
        assert circuit_to_text(Circuit(width=2, gates=[])) == ""

    @given(width=st.integers(min_value=2, max_value=4), data=st.data())
    @settings(max_examples=40, deadline=None)
    def test_roundtrip(self, width, data):
        phases = data.draw(
            st.lists(angles, min_size=2**width, max_size=2**width).map(np.asarray)
        )
        circ = synthesize_diagonal(phases)
        parsed = circuit_from_text(circuit_to_text(circ), width=width)
        assert parsed.gates == circ.gates
        assert parsed.width == width

    def test_width_inferred_from_gates(self):
        circ = circuit_from_text("CNOT 2 0\nX 1\n")
        assert circ.width == 3

    def test_blank_lines_skipped(self):
        circ = circuit_from_text("\nX 0\n\n")
        assert circ.gates == [Gate(X, 0)]

    def test_parse_errors(self):
        with pytest.raises(ValidationError):
            circuit_from_text("PHASE 0\n")
        with pytest.raises(ValidationError):
            circuit_from_text("HADAMARD 0\n")
        with pytest.raises(ValidationError):
            circuit_from_text("CPHASE 1 0 0.5 notafloat\n")
