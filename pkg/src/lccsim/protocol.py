"""Client-server remote-control protocol: teleportation, decoys, verification.

The session model follows the measured protocol order: the server runs
the linear-combination circuit on its EPR halves until the all-zero
outcome lands, then the client teleports the k-qubit control state with
postselected Bell measurements (probability 1/4 per qubit).  A verify
round sends a basis state |i> so that only component V_i acts, and the
client audits the returned state with a single-shot projective check
(detection probability 1 - fidelity).

An intercepting server measures each control qubit in a fixed basis
before use.  Verification states are computational-basis states, so a
computational-basis intercept is invisible to the client; the default
attack basis is therefore the diagonal (Hadamard) one, the simplest
measurement that actually randomizes verify outcomes.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np

from . import qcore
from .lcc import LinearCombinationSpec
from .qcore import (HADAMARD, InvalidInputError, QuantumState,
                    apply_to_subsystems, basis_state, measure_postselect,
                    statevector, tensor)

_CNOT = np.eye(4, dtype=complex)[[0, 1, 3, 2]]


def epr_pair() -> QuantumState:
    """|Phi+> = (|00> + |11>)/sqrt(2)."""
    return statevector(np.array([1, 0, 0, 1]) / math.sqrt(2), dims=(2, 2))


@dataclass(frozen=True)
class ChannelSet:
    """EPR channel bookkeeping for one session."""

    control_pairs: int
    input_pairs: int
    output_pairs: int

    @classmethod
    def for_task(cls, n: int, d: int) -> "ChannelSet":
        k = n.bit_length() - 1
        logd = max(d - 1, 1).bit_length()
        return cls(k, logd, logd)


def teleport_postselected(state: QuantumState, source: int,
                          epr: tuple[int, int]) -> qcore.MeasurementOutcome:
    """Bell-measure (source, epr[0]) and keep only the (0,0) outcome.

    The receiver half epr[1] then carries the source qubit unchanged; the
    branch probability is 1/4 for a pair initialized to |Phi+>.
    """
    a, b = epr
    st = apply_to_subsystems(state, _CNOT, [source, a])
    st = apply_to_subsystems(st, HADAMARD, [source])
    return measure_postselect(st, [source, a], (0, 0))


def sample_measurement(state: QuantumState, target: int,
                       rng: np.random.Generator) -> tuple[int, QuantumState]:
    """Sample a computational-basis measurement of one qubit; collapse."""
    d = state.dims[target]
    probs = []
    outcomes = []
    for x in range(d):
        out = measure_postselect(state, [target], (x,))
        probs.append(out.probability)
        outcomes.append(out)
    probs = np.array(probs)
    probs = probs / probs.sum()
    x = int(rng.choice(d, p=probs))
    return x, outcomes[x].remainder


def teleport_corrected(state: QuantumState, source: int, epr: tuple[int, int],
                       rng: np.random.Generator,
                       allow_corrections: bool = True
                       ) -> tuple[QuantumState, tuple[int, int]]:
    """Deterministic teleportation: sample both Bell outcomes and apply
    the outcome-conditioned Pauli corrections on the receiver.

    Valid only where corrections commute with downstream processing (the
    computation-output leg); succeeds with probability 1.
    """
    a, b = epr
    st = apply_to_subsystems(state, _CNOT, [source, a])
    st = apply_to_subsystems(st, HADAMARD, [source])
    m1, st = sample_measurement(st, source, rng)
    # measuring `source` removed it; account for the index shift
    a_idx = a if a < source else a - 1
    m2, st = sample_measurement(st, a_idx, rng)
    b_idx = b - sum(1 for t in (source, a) if t < b)
    if allow_corrections:
        if m2:
            st = apply_to_subsystems(st, qcore.SX, [b_idx])
        if m1:
            st = apply_to_subsystems(st, qcore.SZ, [b_idx])
    return st, (m1, m2)


def make_decoy(rho: np.ndarray, n: int, epsilon: float) -> np.ndarray:
    """Decoy state rho_m = ((1+eps)/n) I - eps rho.

    Mixing the control with its decoy at odds eps : 1 yields the
    maximally mixed state, hiding the control from the server.
    """
    rho = np.asarray(rho, dtype=complex)
    if rho.shape != (n, n):
        raise InvalidInputError(f"control state must be {n}x{n}")
    if not (0.0 < epsilon <= 1.0 / (n - 1)):
        raise InvalidInputError(
            f"epsilon must lie in (0, 1/(n-1)] = (0, {1.0 / (n - 1)}]")
    rho_m = ((1.0 + epsilon) / n) * np.eye(n) - epsilon * rho
    evals = np.linalg.eigvalsh(rho_m)
    if evals.min() < -qcore.ATOL_STRUCT:
        raise InvalidInputError("decoy state is not positive semidefinite")
    return rho_m


@dataclass(frozen=True)
class SendPolicy:
    """Per-round sending distribution over control, decoy, and verify states."""

    epsilon: float
    tau: float
    control_rho: np.ndarray = field(repr=False)

    def __post_init__(self):
        rho = np.asarray(self.control_rho, dtype=complex)
        object.__setattr__(self, "control_rho", rho)
        if not 0.0 < self.tau < 1.0:
            raise InvalidInputError("tau must lie in (0,1)")
        make_decoy(rho, self.n, self.epsilon)  # validates epsilon and PSD

    @property
    def n(self) -> int:
        return self.control_rho.shape[0]

    @property
    def p_control(self) -> float:
        return self.tau * self.epsilon / (1.0 + self.epsilon)

    @property
    def p_decoy(self) -> float:
        return self.tau / (1.0 + self.epsilon)

    @property
    def p_basis(self) -> float:
        return (1.0 - self.tau) / self.n

    def decoy_spectrum(self) -> tuple[np.ndarray, np.ndarray]:
        """Eigenvalues and eigenstates of the decoy, with the phase of each
        eigenvector fixed so its first nonzero component is real positive."""
        rho_m = make_decoy(self.control_rho, self.n, self.epsilon)
        evals, evecs = np.linalg.eigh(rho_m)
        evals = np.clip(evals, 0.0, None)
        for j in range(evecs.shape[1]):
            col = evecs[:, j]
            nz = np.flatnonzero(np.abs(col) > 1e-12)[0]
            evecs[:, j] = col * np.exp(-1j * np.angle(col[nz]))
        return evals / evals.sum(), evecs

    def control_spectrum(self) -> tuple[np.ndarray, np.ndarray]:
        evals, evecs = np.linalg.eigh(self.control_rho)
        evals = np.clip(evals, 0.0, None)
        return evals / evals.sum(), evecs

    def outcome_table(self) -> tuple[list, np.ndarray]:
        """All (label, pure state) outcomes of one round with probabilities."""
        entries = []
        probs = []
        cw, cv = self.control_spectrum()
        for j, w in enumerate(cw):
            if w > 0:
                entries.append(("compute", cv[:, j]))
                probs.append(self.p_control * w)
        dw, dv = self.decoy_spectrum()
        for j, w in enumerate(dw):
            if w > 0:
                entries.append(("decoy", dv[:, j]))
                probs.append(self.p_decoy * w)
        eye = np.eye(self.n, dtype=complex)
        for i in range(self.n):
            entries.append((("verify", i), eye[:, i]))
            probs.append(self.p_basis)
        return entries, np.array(probs)


def sample_send(policy: SendPolicy, rng: np.random.Generator
                ) -> tuple[object, QuantumState]:
    """Draw one round's label and the pure state actually sent."""
    entries, probs = policy.outcome_table()
    idx = int(rng.choice(len(entries), p=probs))
    label, vec = entries[idx]
    k = policy.n.bit_length() - 1
    return label, statevector(vec, dims=(2,) * k if k else (1,))


def empirical_server_average(policy: SendPolicy, samples: int,
                             rng: np.random.Generator) -> np.ndarray:
    """Average density matrix the server sees over many sampled rounds."""
    entries, probs = policy.outcome_table()
    counts = rng.multinomial(samples, probs)
    avg = np.zeros((policy.n, policy.n), dtype=complex)
    for c, (_, vec) in zip(counts, entries):
        if c:
            avg += c * np.outer(vec, vec.conj())
    return avg / samples


@dataclass(frozen=True)
class ServerBehavior:
    """Fixed per-session server strategy.

    mode 'honest' follows the protocol; 'intercept' measures each
    incoming control register in ``intercept_basis`` ('x' by default,
    'z' for the do-nothing computational-basis variant) on a fraction
    ``intercept_fraction`` of rounds.
    """

    mode: str = "honest"
    intercept_fraction: float = 0.0
    intercept_basis: str = "x"

    def __post_init__(self):
        if self.mode not in ("honest", "intercept", "skip_measurement"):
            raise InvalidInputError(f"unknown server mode {self.mode!r}")
        if not 0.0 <= self.intercept_fraction <= 1.0:
            raise InvalidInputError("intercept fraction must lie in [0,1]")
        if self.intercept_basis not in ("x", "z"):
            raise InvalidInputError("intercept basis must be 'x' or 'z'")


def _intercept_basis_vectors(n: int, basis: str) -> np.ndarray:
    """Columns = measurement basis states on the k-qubit control register."""
    k = n.bit_length() - 1
    single = HADAMARD if basis == "x" else np.eye(2, dtype=complex)
    out = np.eye(1, dtype=complex)
    for _ in range(k):
        out = np.kron(out, single)
    return out if k else np.eye(n, dtype=complex)


@dataclass
class RoundRecord:
    index: int
    kind: str
    verify_index: int | None
    intercepted: bool
    lcc_retries: int
    completed: bool
    fidelity: float | None
    detected: bool

    def to_line(self) -> str:
        vi = "-" if self.verify_index is None else str(self.verify_index)
        fid = "-" if self.fidelity is None else f"{self.fidelity:.12f}"
        return (f"round={self.index} kind={self.kind} verify_index={vi} "
                f"intercepted={int(self.intercepted)} lcc_retries={self.lcc_retries} "
                f"completed={int(self.completed)} fidelity={fid} "
                f"detected={int(self.detected)}")


@dataclass
class ProtocolTranscript:
    """Ordered record of one session plus summary statistics."""

    rounds: list[RoundRecord] = field(default_factory=list)
    n: int = 0
    d: int = 0

    @property
    def detection_events(self) -> int:
        return sum(r.detected for r in self.rounds)

    @property
    def completed_rounds(self) -> int:
        return sum(r.completed for r in self.rounds)

    def first_detection_round(self) -> int | None:
        for r in self.rounds:
            if r.detected:
                return r.index
        return None

    def summary(self) -> dict:
        total = len(self.rounds)
        kinds = {}
        for r in self.rounds:
            kinds[r.kind] = kinds.get(r.kind, 0) + 1
        comp = [r for r in self.rounds if r.kind == "compute" and r.completed]
        return {
            "rounds": total,
            "completed": self.completed_rounds,
            "detections": self.detection_events,
            "kind_counts": dict(sorted(kinds.items())),
            "empirical_completion": (self.completed_rounds / total) if total else 0.0,
            "mean_compute_fidelity": (
                sum(r.fidelity for r in comp) / len(comp) if comp else None),
        }

    def to_text(self) -> str:
        lines = [r.to_line() for r in self.rounds]
        s = self.summary()
        lines.append("# summary")
        for key in sorted(s):
            lines.append(f"# {key}={s[key]!r}")
        return "\n".join(lines) + "\n"


def _control_outputs(spec: LinearCombinationSpec, input_state: QuantumState,
                     control: np.ndarray) -> tuple[np.ndarray | None, float]:
    """Postselected output vector and teleport-stage success probability
    for a given pure control state (server already past the LCC stage)."""
    w = np.zeros(spec.d, dtype=complex)
    for c, g in zip(control, spec.gates):
        w += c * (g @ input_state.data)
    nrm2 = float(np.vdot(w, w).real)
    p_teleport = nrm2 / (4.0 ** spec.k)
    if nrm2 <= 1e-300:
        return None, 0.0
    return w / math.sqrt(nrm2), p_teleport


def run_session(spec: LinearCombinationSpec, input_state: QuantumState,
                policy: SendPolicy, behavior: ServerBehavior, rounds: int,
                rng: np.random.Generator) -> ProtocolTranscript:
    """Simulate a session of protocol runs.

    Every run: the client samples what to send, the server's LCC stage
    retries geometrically until its all-zero outcome, an intercepting
    server measures the control, and the client's postselected control
    teleportation either completes the run or fails it.  Verify rounds
    audit the output against V_i |psi> with a single-shot check.
    """
    if policy.n != spec.n:
        raise qcore.DimensionMismatchError(
            f"policy dimension {policy.n} != spec term count {spec.n}")
    if input_state.total_dim != spec.d:
        raise qcore.DimensionMismatchError("input dimension mismatch")

    # LCC-stage success (EPR halves as control => uniform subspace mixture)
    psi = input_state.data
    p_lcc = sum(float(np.vdot(g @ psi, g @ psi).real)
                for g in spec.gates) / spec.n ** 2
    basis_vecs = _intercept_basis_vectors(spec.n, behavior.intercept_basis)
    expected = {}
    for i in range(spec.n):
        v = spec.gates[i] @ psi
        nv = np.linalg.norm(v)
        expected[i] = v / nv if nv > 1e-300 else None
    target = spec.combination() @ psi
    target = target / np.linalg.norm(target) if np.linalg.norm(target) > 1e-300 else None

    transcript = ProtocolTranscript(n=spec.n, d=spec.d)

    # precompute everything per distinct sendable state: (kind, verify
    # index, intercept-outcome CDF, and per-intercept-outcome results)
    entries, send_probs = policy.outcome_table()
    intercept_results = [_control_outputs(spec, input_state, basis_vecs[:, m])
                         for m in range(spec.n)]
    table = []
    for label, vec in entries:
        kind = label if isinstance(label, str) else label[0]
        verify_index = label[1] if kind == "verify" else None
        probs = np.abs(basis_vecs.conj().T @ vec) ** 2
        cdf = np.cumsum(probs / probs.sum())
        honest = _control_outputs(spec, input_state, vec)
        table.append((kind, verify_index, cdf, honest))

    idx_arr = rng.choice(len(entries), size=rounds, p=send_probs)
    retries_arr = (rng.geometric(p_lcc, size=rounds) if p_lcc > 0
                   else np.zeros(rounds, dtype=int))
    do_intercept = behavior.mode == "intercept"
    intercept_arr = (rng.random(rounds) < behavior.intercept_fraction
                     if do_intercept else np.zeros(rounds, dtype=bool))
    u_basis = rng.random(rounds)
    u_complete = rng.random(rounds)
    u_detect = rng.random(rounds)

    for r in range(rounds):
        kind, verify_index, cdf, honest = table[idx_arr[r]]
        intercepted = bool(intercept_arr[r])
        if intercepted:
            m = int(np.searchsorted(cdf, u_basis[r]))
            out, p_teleport = intercept_results[m]
        else:
            out, p_teleport = honest
        completed = p_lcc > 0 and out is not None and u_complete[r] < p_teleport

        fidelity = None
        detected = False
        if completed:
            if kind == "verify" and expected[verify_index] is not None:
                fidelity = float(abs(np.vdot(expected[verify_index], out)) ** 2)
                detected = u_detect[r] > fidelity
            elif kind == "compute" and target is not None:
                fidelity = float(abs(np.vdot(target, out)) ** 2)
        transcript.rounds.append(RoundRecord(
            r, kind, verify_index, intercepted, int(retries_arr[r]), completed,
            fidelity, detected))
    return transcript


def intercept_detection_rate(spec: LinearCombinationSpec,
                             input_state: QuantumState, policy: SendPolicy,
                             behavior: ServerBehavior) -> float:
    """Exact per-run detection probability under the intercept attack.

    Enumerates verify states |i>, intercept outcomes m, and the
    completion and single-shot check probabilities; compute and decoy
    rounds never trigger detection.
    """
    basis_vecs = _intercept_basis_vectors(spec.n, behavior.intercept_basis)
    psi = input_state.data
    rate = 0.0
    for i in range(spec.n):
        vi = spec.gates[i] @ psi
        vi = vi / np.linalg.norm(vi)
        for m in range(spec.n):
            p_m = float(abs(basis_vecs[i, m].conjugate()) ** 2)
            if p_m == 0.0:
                continue
            control = basis_vecs[:, m]
            out, p_teleport = _control_outputs(spec, input_state, control)
            if out is None:
                continue
            miss = 1.0 - float(abs(np.vdot(vi, out)) ** 2)
            rate += policy.p_basis * behavior.intercept_fraction * p_m * p_teleport * miss
    return rate


def cheating_server_state(a_gate: np.ndarray, b_gate: np.ndarray,
                          phi: QuantumState, alpha: complex, beta: complex
                          ) -> QuantumState:
    """State the cheating server holds when it skips its local measurement.

    Simulates the one-control circuit step by step: EPR-conditioned A/B,
    the client's control preparation, CNOT, Hadamard, then the client's
    (0,0) postselection.  Returns alpha |0> A|phi> + beta |1> B|phi> on
    the server's qubit plus register.
    """
    if abs(abs(alpha) ** 2 + abs(beta) ** 2 - 1.0) > 1e-9:
        raise InvalidInputError("control amplitudes must be normalized")
    d = phi.total_dim
    a_gate = np.asarray(a_gate, dtype=complex)
    b_gate = np.asarray(b_gate, dtype=complex)
    # qubit 1 (client local), qubits 2,3 (EPR halves), register
    st = tensor(basis_state((2,), (0,)), epr_pair(), phi)
    cond = np.kron(np.diag([1.0, 0.0]), a_gate) + np.kron(np.diag([0.0, 1.0]), b_gate)
    st = apply_to_subsystems(st, cond, [2, 3])
    prep = np.array([[alpha, -np.conj(beta)], [beta, np.conj(alpha)]])
    st = apply_to_subsystems(st, prep, [0])
    st = apply_to_subsystems(st, _CNOT, [0, 1])
    st = apply_to_subsystems(st, HADAMARD, [0])
    outcome = measure_postselect(st, [0, 1], (0, 0))
    if outcome.empty:
        raise InvalidInputError("client postselection has zero probability")
    return outcome.remainder


def schmidt_rank(state: QuantumState, cut: int = 1, tol: float = 1e-10) -> int:
    """Number of significant singular values across the bipartition after
    the first ``cut`` subsystems."""
    left = int(np.prod(state.dims[:cut]))
    right = state.total_dim // left
    svals = np.linalg.svd(state.data.reshape(left, right), compute_uv=False)
    return int(np.sum(svals > tol))


@dataclass(frozen=True)
class WitnessReport:
    """Inner-product witness against a cloning map U_s.

    A nonzero difference between the overlap of the server-held states
    and the overlap of the states the server would need to produce
    certifies that no single isometry performs the extraction.
    """

    observed_overlap: float
    expected_overlap: float
    vacuous: bool

    @property
    def difference(self) -> float:
        return abs(self.observed_overlap - self.expected_overlap)


def no_cloning_witness(a_gate: np.ndarray, b_gate: np.ndarray,
                       phi: QuantumState, control_1, control_2) -> WitnessReport:
    """Compare overlaps of held vs required states for two control choices."""
    def held(c):
        return cheating_server_state(a_gate, b_gate, phi, c[0], c[1]).data

    def required(c):
        comb = (c[0] * np.asarray(a_gate) + c[1] * np.asarray(b_gate)) @ phi.data
        comb = comb / np.linalg.norm(comb)
        return np.kron(np.array([c[0], c[1]]), comb)

    c1 = np.asarray(control_1, dtype=complex)
    c2 = np.asarray(control_2, dtype=complex)
    obs = abs(np.vdot(held(c1), held(c2)))
    exp = abs(np.vdot(required(c1), required(c2)))
    vacuous = abs(np.vdot(c1, c2)) < 1e-12
    return WitnessReport(float(obs), float(exp), vacuous)


def success_probability_account(spec: LinearCombinationSpec,
                                include_input_teleport: bool = False,
                                include_output_teleport: bool = False) -> float:
    """Analytic whole-scheme success probability for a unitary target.

    1/n for the LCC, 1/4 per postselected control-qubit teleport, 1/d^2
    for the input teleport when used, and factor 1 for the corrected
    output teleport.
    """
    p = (1.0 / spec.n) * (0.25 ** spec.k)
    if include_input_teleport:
        p /= float(spec.d) ** 2
    if include_output_teleport:
        p *= 1.0
    return p


def monte_carlo_success(spec: LinearCombinationSpec, input_state: QuantumState,
                        trials: int, rng: np.random.Generator,
                        include_input_teleport: bool = False) -> float:
    """Empirical whole-scheme success rate over independent protocol attempts.

    Each trial samples every postselection stage once: the input-qubit
    teleports, one LCC attempt, and the control-qubit teleports.  Stage
    probabilities come from the exact simulation, not from the analytic
    account being tested.
    """
    psi = input_state.data
    p_lcc = sum(float(np.vdot(g @ psi, g @ psi).real)
                for g in spec.gates) / spec.n ** 2
    _, p_teleport = _control_outputs(spec, input_state,
                                     spec.coefficients)
    ok = rng.random(trials) < p_lcc
    ok &= rng.random(trials) < p_teleport
    if include_input_teleport:
        logd = spec.d.bit_length() - 1
        for _ in range(logd):
            ok &= rng.random(trials) < 0.25
    return float(np.mean(ok))


def verify_decoy_identity(rho: np.ndarray, epsilon: float, tau: float | None = None
                          ) -> float:
    """Max deviation of the decoy (and optional verify-state) mixture from I/n."""
    n = rho.shape[0]
    rho_m = make_decoy(rho, n, epsilon)
    mix = (epsilon / (1 + epsilon)) * rho + (1 / (1 + epsilon)) * rho_m
    if tau is not None:
        mix = tau * mix + ((1 - tau) / n) * np.eye(n)
    return float(np.abs(mix - np.eye(n) / n).max())
