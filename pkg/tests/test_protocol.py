import math

import numpy as np
import pytest

from conftest import random_statevector, random_unitary_combination_spec
from lccsim import protocol
from lccsim.gates import A_GATE, B_GATE
from lccsim.lcc import LinearCombinationSpec
from lccsim.qcore import (ID2, InvalidInputError, SX, SZ,
                          basis_state, haar_random_unitary, state_fidelity,
                          statevector, tensor)

R2 = 1.0 / math.sqrt(2)


def qubit_with_epr(vec):
    return tensor(statevector(vec, dims=(2,)), protocol.epr_pair())


def pure_policy(coeffs, epsilon=1.0, tau=0.5):
    c = np.asarray(coeffs, dtype=complex)
    return protocol.SendPolicy(epsilon=epsilon, tau=tau,
                               control_rho=np.outer(c, c.conj()))


class TestTeleportPostselected:
    def test_basis_state(self):
        out = protocol.teleport_postselected(qubit_with_epr([1, 0]), 0, (1, 2))
        assert abs(out.probability - 0.25) < 1e-12
        assert np.allclose(out.remainder.data, [1, 0])

    def test_all_bell_outcomes(self):
        rng = np.random.default_rng(0)
        v = random_statevector(2, rng)
        st = qubit_with_epr(v)
        st = protocol.apply_to_subsystems(st, protocol._CNOT, [0, 1])
        st = protocol.apply_to_subsystems(st, protocol.HADAMARD, [0])
        paulis = {(0, 0): ID2, (0, 1): SX, (1, 0): SZ, (1, 1): SZ @ SX}
        for outcome, frame in paulis.items():
            branch = protocol.measure_postselect(st, [0, 1], outcome)
            assert abs(branch.probability - 0.25) < 1e-12
            fixed = frame @ branch.remainder.data
            assert abs(abs(np.vdot(fixed, v)) - 1.0) < 1e-12

    def test_lcc_then_teleport_reproduces_combination(self):
        # one-control walkthrough: EPR-conditioned A/B on the register,
        # then the client teleports (alpha, beta) with (0,0) postselection
        alpha, beta = 0.6, 0.8j
        st = protocol.cheating_server_state(A_GATE, B_GATE,
                                            basis_state((2,), (0,)),
                                            alpha, beta)
        # server completes its measurement: Hadamard + postselect 0
        st = protocol.apply_to_subsystems(st, protocol.HADAMARD, [0])
        out = protocol.measure_postselect(st, [0], (0,))
        want = (alpha * A_GATE + beta * B_GATE) @ np.array([1, 0])
        want = want / np.linalg.norm(want)
        assert abs(abs(np.vdot(out.remainder.data, want)) - 1.0) < 1e-10


class TestTeleportCorrected:
    def test_plus_state(self):
        rng = np.random.default_rng(1)
        plus = np.array([1, 1]) / math.sqrt(2)
        for _ in range(16):
            res, _ = protocol.teleport_corrected(qubit_with_epr(plus), 0,
                                                 (1, 2), rng)
            assert state_fidelity(res, statevector(plus)) > 1 - 1e-12

    def test_thousand_random_states(self):
        rng = np.random.default_rng(2)
        for _ in range(1000):
            v = random_statevector(2, rng)
            res, _ = protocol.teleport_corrected(qubit_with_epr(v), 0,
                                                 (1, 2), rng)
            assert state_fidelity(res, statevector(v)) > 1 - 1e-12

    def test_corrections_required(self):
        rng = np.random.default_rng(3)
        v = random_statevector(2, rng)
        hits = 0
        for _ in range(50):
            res, outcome = protocol.teleport_corrected(
                qubit_with_epr(v), 0, (1, 2), rng, allow_corrections=False)
            if state_fidelity(res, statevector(v)) < 1 - 1e-6:
                hits += 1
        assert hits > 0


class TestMakeDecoy:
    def test_two_dim_example(self):
        rho = np.diag([1.0, 0.0]).astype(complex)
        rho_m = protocol.make_decoy(rho, 2, 1.0)
        assert np.abs(rho_m - np.diag([0.0, 1.0])).max() < 1e-12

    def test_mixture_identity(self):
        rng = np.random.default_rng(4)
        for n in (2, 4, 8):
            for eps in (1.0 / (n - 1), 0.5 / (n - 1)):
                v = random_statevector(n, rng)
                pure = np.outer(v, v.conj())
                w = rng.random(n)
                w /= w.sum()
                q = haar_random_unitary(n, rng)
                mixed = (q * w) @ q.conj().T
                for rho in (pure, mixed):
                    assert protocol.verify_decoy_identity(rho, eps) < 1e-12
                    for tau in (0.25, 0.5, 0.75):
                        assert protocol.verify_decoy_identity(
                            rho, eps, tau) < 1e-12

    def test_pure_state_eigenvalues(self):
        rng = np.random.default_rng(5)
        v = random_statevector(4, rng)
        rho_m = protocol.make_decoy(np.outer(v, v.conj()), 4, 1.0 / 3.0)
        evals = np.sort(np.linalg.eigvalsh(rho_m))
        assert np.abs(evals - np.array([0, 1 / 3, 1 / 3, 1 / 3])).max() < 1e-12

    def test_epsilon_range(self):
        rho = np.eye(4) / 4.0
        with pytest.raises(InvalidInputError):
            protocol.make_decoy(rho, 4, 0.5)  # above 1/(n-1)
        with pytest.raises(InvalidInputError):
            protocol.make_decoy(rho, 4, 0.0)


class TestSendPolicy:
    def test_probability_split(self):
        pol = pure_policy([1, 0], epsilon=1.0, tau=0.5)
        assert abs(pol.p_control - 0.25) < 1e-12
        assert abs(pol.p_decoy - 0.25) < 1e-12
        assert abs(pol.p_basis - 0.25) < 1e-12
        total = pol.p_control + pol.p_decoy + pol.n * pol.p_basis
        assert abs(total - 1.0) < 1e-12

    def test_compute_probability_is_half_n(self):
        # tau = 1/2 and epsilon = 1/(n-1) give p_compute = 1/(2n)
        for n in (2, 4, 8):
            rng = np.random.default_rng(n)
            c = random_statevector(n, rng)
            pol = protocol.SendPolicy(epsilon=1.0 / (n - 1), tau=0.5,
                                      control_rho=np.outer(c, c.conj()))
            assert abs(pol.p_control - 1.0 / (2 * n)) < 1e-12

    def test_outcome_table_average(self):
        rng = np.random.default_rng(6)
        c = random_statevector(4, rng)
        pol = protocol.SendPolicy(epsilon=1.0 / 3.0, tau=0.5,
                                  control_rho=np.outer(c, c.conj()))
        entries, probs = pol.outcome_table()
        avg = sum(p * np.outer(v, v.conj()) for p, (_, v) in zip(probs, entries))
        assert np.abs(avg - np.eye(4) / 4.0).max() < 1e-12

    def test_empirical_average(self):
        rng = np.random.default_rng(7)
        c = random_statevector(2, rng)
        pol = protocol.SendPolicy(epsilon=1.0, tau=0.5,
                                  control_rho=np.outer(c, c.conj()))
        avg = protocol.empirical_server_average(pol, 100000, rng)
        assert np.abs(avg - np.eye(2) / 2.0).max() < 0.01


class TestRunSession:
    def spec_and_input(self):
        spec = LinearCombinationSpec((R2, 1j * R2), (A_GATE, B_GATE))
        return spec, basis_state((2,), (0,))

    def test_honest_no_detections(self):
        spec, psi = self.spec_and_input()
        pol = pure_policy(spec.coefficients)
        tr = protocol.run_session(spec, psi, pol, protocol.ServerBehavior(),
                                  100, np.random.default_rng(8))
        assert tr.detection_events == 0
        for rec in tr.rounds:
            if rec.kind == "compute" and rec.completed:
                assert rec.fidelity > 1 - 1e-10

    def test_transcript_determinism(self):
        spec, psi = self.spec_and_input()
        pol = pure_policy(spec.coefficients)
        beh = protocol.ServerBehavior(mode="intercept", intercept_fraction=0.7)
        a = protocol.run_session(spec, psi, pol, beh, 300,
                                 np.random.default_rng(9)).to_text()
        b = protocol.run_session(spec, psi, pol, beh, 300,
                                 np.random.default_rng(9)).to_text()
        assert a == b

    def test_intercept_rate_matches_analytic(self):
        spec, psi = self.spec_and_input()
        pol = pure_policy(spec.coefficients)
        beh = protocol.ServerBehavior(mode="intercept", intercept_fraction=1.0)
        rate = protocol.intercept_detection_rate(spec, psi, pol, beh)
        rounds = 60000
        tr = protocol.run_session(spec, psi, pol, beh, rounds,
                                  np.random.default_rng(10))
        emp = tr.detection_events / rounds
        sigma = math.sqrt(rate * (1 - rate) / rounds)
        assert abs(emp - rate) < 3 * sigma

    def test_computational_basis_intercept_undetected(self):
        # verify states are computational-basis states, so a Z-basis
        # intercept is invisible
        spec, psi = self.spec_and_input()
        pol = pure_policy(spec.coefficients)
        beh = protocol.ServerBehavior(mode="intercept", intercept_fraction=1.0,
                                      intercept_basis="z")
        assert protocol.intercept_detection_rate(spec, psi, pol, beh) < 1e-12

    def test_dimension_mismatch(self):
        spec, _ = self.spec_and_input()
        pol = pure_policy(spec.coefficients)
        with pytest.raises(protocol.qcore.DimensionMismatchError):
            protocol.run_session(spec, basis_state((4,), (0,)), pol,
                                 protocol.ServerBehavior(), 10,
                                 np.random.default_rng(0))


class TestCheatingServer:
    def test_bell_like_state(self):
        alpha, beta = 0.6, 0.8
        st = protocol.cheating_server_state(ID2, SX, basis_state((2,), (0,)),
                                            alpha, beta)
        want = np.array([alpha, 0, 0, beta])
        assert np.abs(st.data - want).max() < 1e-12
        assert protocol.schmidt_rank(st) == 2

    def test_alpha_one_product_state(self):
        rng = np.random.default_rng(11)
        phi = statevector(random_statevector(2, rng))
        st = protocol.cheating_server_state(A_GATE, B_GATE, phi, 1.0, 0.0)
        assert protocol.schmidt_rank(st) == 1
        assert np.abs(st.data[:2] - A_GATE @ phi.data).max() < 1e-12
        assert np.abs(st.data[2:]).max() < 1e-12

    def test_generic_schmidt_rank_two(self):
        rng = np.random.default_rng(12)
        for _ in range(10):
            a = haar_random_unitary(2, rng)
            b = haar_random_unitary(2, rng)
            phi = statevector(random_statevector(2, rng))
            c = random_statevector(2, rng)
            st = protocol.cheating_server_state(a, b, phi, c[0], c[1])
            assert protocol.schmidt_rank(st) == 2


class TestNoCloningWitness:
    def test_worked_example(self):
        w = protocol.no_cloning_witness(ID2, SX, basis_state((2,), (0,)),
                                        (1, 0), (R2, R2))
        assert abs(w.observed_overlap - R2) < 1e-12
        assert abs(w.expected_overlap - 0.5) < 1e-12
        assert w.difference > 1e-6
        assert not w.vacuous

    def test_equal_controls(self):
        w = protocol.no_cloning_witness(ID2, SX, basis_state((2,), (0,)),
                                        (R2, R2), (R2, R2))
        assert abs(w.observed_overlap - 1.0) < 1e-12
        assert abs(w.expected_overlap - 1.0) < 1e-12
        assert w.difference < 1e-12

    def test_orthogonal_flagged_vacuous(self):
        w = protocol.no_cloning_witness(ID2, SX, basis_state((2,), (0,)),
                                        (1, 0), (0, 1))
        assert w.vacuous


class TestSuccessAccounting:
    def test_analytic_values(self):
        spec2 = LinearCombinationSpec((R2, 1j * R2), (A_GATE, B_GATE))
        assert protocol.success_probability_account(spec2) == pytest.approx(1 / 8)
        assert protocol.success_probability_account(
            spec2, include_input_teleport=True) == pytest.approx(1 / 32)
        assert protocol.success_probability_account(
            spec2, include_input_teleport=True,
            include_output_teleport=True) == pytest.approx(1 / 32)

    def test_monte_carlo_agrees(self):
        rng = np.random.default_rng(13)
        trials = 100000
        for n, d in ((2, 2), (4, 2)):
            spec = random_unitary_combination_spec(n, d, rng)
            psi = statevector(random_statevector(d, rng))
            p = protocol.success_probability_account(spec)
            est = protocol.monte_carlo_success(spec, psi, trials, rng)
            sigma = math.sqrt(p * (1 - p) / trials)
            assert abs(est - p) < 3 * sigma


class TestChannelSet:
    def test_for_task(self):
        ch = protocol.ChannelSet.for_task(4, 4)
        assert ch.control_pairs == 2
        assert ch.input_pairs == 2
        assert ch.output_pairs == 2
