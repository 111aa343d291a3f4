import math

import numpy as np
import pytest

from lccsim import qcore
from lccsim.qcore import (DimensionMismatchError, HADAMARD, ID2,
                          InvalidInputError, PAULIS, SX, SY, SZ,
                          QuantumState, apply_to_subsystems, basis_state,
                          format_matrix, format_state, haar_random_unitary,
                          kron, measure_postselect, parse_matrix, parse_state,
                          partial_trace, phase_aligned_distance,
                          state_fidelity, statevector, tensor)


def bell_state():
    st = tensor(basis_state((2,), (0,)), basis_state((2,), (0,)))
    st = apply_to_subsystems(st, HADAMARD, [0])
    cnot = np.eye(4, dtype=complex)[[0, 1, 3, 2]]
    return apply_to_subsystems(st, cnot, [0, 1])


class TestKron:
    def test_identity(self):
        assert np.array_equal(kron(ID2, ID2), np.eye(4))

    def test_xx_antidiagonal(self):
        xx = kron(SX, SX)
        assert np.allclose(xx, np.fliplr(np.eye(4)))

    def test_pauli_products(self):
        assert np.allclose(SX @ SY, 1j * SZ)
        assert np.allclose(SY @ SZ, 1j * SX)
        assert np.allclose(SZ @ SX, 1j * SY)
        assert np.allclose(SX @ SY, -(SY @ SX))

    def test_mixed_product_property(self):
        rng = np.random.default_rng(0)
        a, b = rng.normal(size=(2, 2, 2)) + 1j * rng.normal(size=(2, 2, 2))
        c, d = rng.normal(size=(2, 3, 3)) + 1j * rng.normal(size=(2, 3, 3))
        assert np.allclose(kron(a, c) @ kron(b, d), kron(a @ b, c @ d))


class TestApplyToSubsystems:
    def test_x_on_qubit1_big_endian(self):
        st = basis_state((2, 2), (0, 0))
        out = apply_to_subsystems(st, SX, [1])
        assert np.allclose(out.data, basis_state((2, 2), (0, 1)).data)

    def test_bell_preparation(self):
        want = np.array([1, 0, 0, 1]) / math.sqrt(2)
        assert np.allclose(bell_state().data, want)

    def test_unitary_roundtrip(self):
        rng = np.random.default_rng(1)
        u = haar_random_unitary(4, rng)
        st = statevector(np.array([0.5, 0.5, 0.5, 0.5]), dims=(2, 2))
        back = apply_to_subsystems(apply_to_subsystems(st, u, [0, 1]),
                                   u.conj().T, [0, 1])
        assert np.abs(back.data - st.data).max() < 1e-12

    def test_norm_preserved(self):
        rng = np.random.default_rng(2)
        st = statevector((rng.normal(size=8) + 1j * rng.normal(size=8)),
                         dims=(2, 2, 2)).normalized()
        u = haar_random_unitary(4, rng)
        out = apply_to_subsystems(st, u, [0, 2])
        assert abs(out.norm - 1.0) < 1e-12

    def test_duplicate_target_rejected(self):
        st = basis_state((2, 2), (0, 0))
        with pytest.raises((InvalidInputError, DimensionMismatchError)):
            apply_to_subsystems(st, np.eye(4), [0, 0])


class TestMeasurePostselect:
    def test_plus_state(self):
        st = statevector(np.array([1, 1]) / math.sqrt(2))
        out = measure_postselect(st, [0], (0,))
        assert abs(out.probability - 0.5) < 1e-12

    def test_orthogonal_outcome(self):
        out = measure_postselect(basis_state((2,), (0,)), [0], (1,))
        assert out.probability == 0.0
        assert out.empty

    def test_probability_is_preprojection_norm(self):
        rng = np.random.default_rng(3)
        st = statevector(rng.normal(size=4) + 1j * rng.normal(size=4),
                         dims=(2, 2)).normalized()
        total = sum(measure_postselect(st, [0], (x,)).probability
                    for x in range(2))
        assert abs(total - 1.0) < 1e-12

    def test_invalid_label(self):
        with pytest.raises(InvalidInputError):
            measure_postselect(basis_state((2,), (0,)), [0], (2,))


class TestStateFidelity:
    def test_same(self):
        z = basis_state((2,), (0,))
        assert state_fidelity(z, z) == pytest.approx(1.0)

    def test_orthogonal(self):
        assert state_fidelity(basis_state((2,), (0,)),
                              basis_state((2,), (1,))) == pytest.approx(0.0)

    def test_maximally_mixed(self):
        mixed = QuantumState("density", (2,), np.eye(2) / 2)
        assert state_fidelity(basis_state((2,), (0,)),
                              mixed) == pytest.approx(0.5)

    def test_symmetric(self):
        rng = np.random.default_rng(4)
        a = statevector(rng.normal(size=2) + 1j * rng.normal(size=2)).normalized()
        rho = QuantumState("density", (2,), np.array([[0.7, 0.1], [0.1, 0.3]],
                                                     dtype=complex))
        assert state_fidelity(a, rho) == pytest.approx(state_fidelity(rho, a))


class TestHaarRandomUnitary:
    def test_scalar(self):
        u = haar_random_unitary(1, np.random.default_rng(5))
        assert abs(abs(u[0, 0]) - 1.0) < 1e-12

    def test_unitary(self):
        for seed in (0, 1, 2):
            u = haar_random_unitary(4, np.random.default_rng(seed))
            assert np.abs(u.conj().T @ u - np.eye(4)).max() < 1e-12

    def test_deterministic_and_seed_sensitive(self):
        a = haar_random_unitary(4, np.random.default_rng(7))
        b = haar_random_unitary(4, np.random.default_rng(7))
        c = haar_random_unitary(4, np.random.default_rng(8))
        assert np.array_equal(a, b)
        assert np.linalg.norm(a - c) > 1e-6

    def test_zero_dim_rejected(self):
        with pytest.raises(InvalidInputError):
            haar_random_unitary(0, np.random.default_rng(0))


class TestPhaseAlignedDistance:
    def test_pure_phase(self):
        u = haar_random_unitary(4, np.random.default_rng(9))
        assert phase_aligned_distance(u, np.exp(1j * math.pi / 3) * u) < 1e-12

    def test_identity_vs_x(self):
        # fine phase scan oracle gives min distance 2
        grid = np.linspace(0, 2 * math.pi, 20001)
        oracle = min(np.linalg.norm(ID2 - np.exp(1j * p) * SX) for p in grid)
        assert phase_aligned_distance(ID2, SX) == pytest.approx(oracle, abs=1e-6)
        assert phase_aligned_distance(ID2, SX) == pytest.approx(2.0, abs=1e-9)

    def test_symmetric(self):
        rng = np.random.default_rng(10)
        a = haar_random_unitary(2, rng)
        b = haar_random_unitary(2, rng)
        assert phase_aligned_distance(a, b) == pytest.approx(
            phase_aligned_distance(b, a))


class TestPartialTrace:
    def test_bell_reduced(self):
        rho = partial_trace(bell_state(), keep=[0])
        assert np.abs(rho.data - np.eye(2) / 2).max() < 1e-12

    def test_keep_everything(self):
        st = bell_state()
        rho = partial_trace(st, keep=[0, 1])
        assert np.abs(rho.data - st.to_density().data).max() < 1e-12

    def test_composition(self):
        rng = np.random.default_rng(11)
        st = statevector(rng.normal(size=8) + 1j * rng.normal(size=8),
                         dims=(2, 2, 2)).normalized()
        one_shot = partial_trace(st, keep=[0])
        two_step = partial_trace(partial_trace(st, keep=[0, 1]), keep=[0])
        assert np.abs(one_shot.data - two_step.data).max() < 1e-12

    def test_trace_preserved(self):
        rng = np.random.default_rng(12)
        st = statevector(rng.normal(size=4) + 1j * rng.normal(size=4),
                         dims=(2, 2)).normalized()
        rho = partial_trace(st, keep=[1])
        assert abs(np.trace(rho.data).real - 1.0) < 1e-12


class TestStateValidation:
    def test_density_must_be_hermitian(self):
        with pytest.raises(InvalidInputError):
            QuantumState("density", (2,), np.array([[1, 1], [0, 0]],
                                                   dtype=complex))

    def test_dims_must_match(self):
        with pytest.raises((InvalidInputError, DimensionMismatchError)):
            statevector(np.ones(3), dims=(2, 2))

    def test_nonfinite_rejected(self):
        with pytest.raises(InvalidInputError):
            statevector(np.array([np.nan, 0.0]))


class TestFileFormat:
    def test_matrix_roundtrip(self):
        u = haar_random_unitary(4, np.random.default_rng(13))
        assert np.abs(parse_matrix(format_matrix(u)) - u).max() < 1e-12

    def test_state_roundtrip(self):
        st = bell_state()
        back = parse_state(format_state(st))
        assert back.dims == st.dims
        assert np.abs(back.data - st.data).max() < 1e-12

    def test_malformed_rejected(self):
        with pytest.raises((InvalidInputError, ValueError)):
            parse_matrix("1+2j nope\n")
