"""Exact complex linear algebra and quantum-state foundations.

Dense, small-register simulation: everything is a numpy complex array,
subsystem 0 is the leftmost (most significant) tensor factor, and all
basis labels are big-endian.  Structural checks use ATOL_STRUCT, round
trips ATOL_ROUNDTRIP; statistical assertions elsewhere use 3-sigma.
"""

from __future__ import annotations

import cmath
import math
from dataclasses import dataclass, field

import numpy as np

# Centralized tolerances: structural identities, decomposition round trips.
ATOL_STRUCT = 1e-12
ATOL_ROUNDTRIP = 1e-9

# Pauli matrices and common single-qubit gates.
ID2 = np.eye(2, dtype=complex)
SX = np.array([[0, 1], [1, 0]], dtype=complex)
SY = np.array([[0, -1j], [1j, 0]], dtype=complex)
SZ = np.array([[1, 0], [0, -1]], dtype=complex)
HADAMARD = np.array([[1, 1], [1, -1]], dtype=complex) / math.sqrt(2)
PAULIS = (ID2, SX, SY, SZ)


class DimensionMismatchError(ValueError):
    """Operator/state/register dimensions are incompatible."""


class InvalidInputError(ValueError):
    """Input violates a documented precondition."""


def _as_matrix(a) -> np.ndarray:
    m = np.asarray(a, dtype=complex)
    if m.ndim != 2:
        raise InvalidInputError(f"expected a matrix, got ndim={m.ndim}")
    if not np.all(np.isfinite(m)):
        raise InvalidInputError("matrix has non-finite entries")
    return m


def is_unitary(m: np.ndarray, atol: float = ATOL_STRUCT) -> bool:
    m = np.asarray(m)
    if m.shape[0] != m.shape[1]:
        return False
    return np.allclose(m.conj().T @ m, np.eye(m.shape[0]), atol=atol)


@dataclass(frozen=True)
class QuantumState:
    """A statevector or density matrix over a tensor-product register.

    ``dims`` lists the subsystem dimensions left to right;  ``data`` is a
    vector of length prod(dims) for kind ``statevector`` or a square
    matrix of that dimension for kind ``density``.
    """

    kind: str
    dims: tuple[int, ...]
    data: np.ndarray = field(repr=False)

    def __post_init__(self):
        total = int(np.prod(self.dims))
        data = np.asarray(self.data, dtype=complex)
        object.__setattr__(self, "dims", tuple(int(d) for d in self.dims))
        object.__setattr__(self, "data", data)
        if not np.all(np.isfinite(data)):
            raise InvalidInputError("state has non-finite amplitudes")
        if self.kind == "statevector":
            if data.shape != (total,):
                raise DimensionMismatchError(
                    f"statevector length {data.shape} != prod(dims)={total}")
        elif self.kind == "density":
            if data.shape != (total, total):
                raise DimensionMismatchError(
                    f"density shape {data.shape} != ({total},{total})")
            if not np.allclose(data, data.conj().T, atol=ATOL_STRUCT):
                raise InvalidInputError("density matrix is not Hermitian")
            evals = np.linalg.eigvalsh(data)
            if evals.min() < -ATOL_STRUCT:
                raise InvalidInputError(
                    f"density matrix has negative eigenvalue {evals.min()}")
        else:
            raise InvalidInputError(f"unknown state kind {self.kind!r}")

    @property
    def total_dim(self) -> int:
        return int(np.prod(self.dims))

    @property
    def norm(self) -> float:
        if self.kind == "statevector":
            return float(np.linalg.norm(self.data))
        return float(np.real(np.trace(self.data)))

    def is_normalized(self, atol: float = ATOL_STRUCT) -> bool:
        return abs(self.norm - 1.0) <= atol

    def normalized(self) -> "QuantumState":
        n = self.norm
        if n == 0.0:
            raise InvalidInputError("cannot normalize the zero state")
        return QuantumState(self.kind, self.dims, self.data / n)

    def to_density(self) -> "QuantumState":
        if self.kind == "density":
            return self
        v = self.data
        return QuantumState("density", self.dims, np.outer(v, v.conj()))


def statevector(amplitudes, dims=None) -> QuantumState:
    v = np.asarray(amplitudes, dtype=complex)
    if dims is None:
        dims = (len(v),)
    return QuantumState("statevector", tuple(dims), v)


def basis_state(dims, labels) -> QuantumState:
    """Computational basis state |labels> over subsystems of sizes dims."""
    dims = tuple(int(d) for d in dims)
    labels = tuple(int(x) for x in labels)
    if len(labels) != len(dims):
        raise DimensionMismatchError("one label per subsystem required")
    idx = 0
    for d, x in zip(dims, labels):
        if not 0 <= x < d:
            raise InvalidInputError(f"label {x} invalid for dimension {d}")
        idx = idx * d + x
    v = np.zeros(int(np.prod(dims)), dtype=complex)
    v[idx] = 1.0
    return QuantumState("statevector", dims, v)


def tensor(*states: QuantumState) -> QuantumState:
    """Tensor product of states; mixes kinds by promoting to density."""
    if any(s.kind == "density" for s in states):
        parts = [s.to_density().data for s in states]
        out = parts[0]
        for p in parts[1:]:
            out = np.kron(out, p)
        return QuantumState("density",
                            sum((s.dims for s in states), ()), out)
    out = states[0].data
    for s in states[1:]:
        out = np.kron(out, s.data)
    return QuantumState("statevector", sum((s.dims for s in states), ()), out)


@dataclass(frozen=True)
class MeasurementOutcome:
    """Result of a postselected measurement on some subsystems.

    ``probability`` is the squared norm of the projected branch before
    renormalization.  ``remainder`` is the renormalized state on the
    unmeasured subsystems, or None when the branch has zero probability
    (``empty`` is then True).
    """

    subsystems: tuple[int, ...]
    labels: tuple[int, ...]
    probability: float
    remainder: QuantumState | None

    @property
    def empty(self) -> bool:
        return self.remainder is None


def kron(a, b) -> np.ndarray:
    """Kronecker product of two matrices (dimensions multiply)."""
    return np.kron(_as_matrix(a), _as_matrix(b))


def _embed(op: np.ndarray, dims, targets) -> np.ndarray:
    """Full-register matrix acting as ``op`` on ``targets``, identity elsewhere."""
    dims = tuple(dims)
    targets = tuple(targets)
    n = len(dims)
    if len(set(targets)) != len(targets):
        raise InvalidInputError(f"duplicate target index in {targets}")
    for t in targets:
        if not 0 <= t < n:
            raise DimensionMismatchError(f"target {t} out of range for {n} subsystems")
    dt = int(np.prod([dims[t] for t in targets]))
    if op.shape != (dt, dt):
        raise DimensionMismatchError(
            f"operator shape {op.shape} != target dimension {dt}")
    rest = [i for i in range(n) if i not in targets]
    # Operator as a 2n-legged tensor in the permuted (targets, rest) order.
    full = np.kron(op, np.eye(int(np.prod([dims[r] for r in rest], dtype=int))))
    perm = list(targets) + rest
    tdims = [dims[p] for p in perm]
    full = full.reshape(tdims + tdims)
    inv = np.argsort(perm)
    full = full.transpose(list(inv) + [len(perm) + i for i in inv])
    total = int(np.prod(dims))
    return full.reshape(total, total)


def apply_to_subsystems(state: QuantumState, op, targets) -> QuantumState:
    """Apply ``op`` to the listed subsystems, identity on the rest."""
    op = _as_matrix(op)
    full = _embed(op, state.dims, targets)
    if state.kind == "statevector":
        return QuantumState("statevector", state.dims, full @ state.data)
    return QuantumState("density", state.dims,
                        full @ state.data @ full.conj().T)


def measure_postselect(state: QuantumState, targets, outcome) -> MeasurementOutcome:
    """Project ``targets`` onto computational-basis ``outcome``.

    Returns the branch probability and the renormalized remainder on the
    unmeasured subsystems.  A zero-probability branch is reported with
    probability 0 and an empty remainder, not an error.
    """
    targets = tuple(int(t) for t in targets)
    outcome = tuple(int(x) for x in outcome)
    if len(targets) != len(outcome):
        raise InvalidInputError("one outcome label per target required")
    dims = state.dims
    for t, x in zip(targets, outcome):
        if not 0 <= x < dims[t]:
            raise InvalidInputError(f"label {x} invalid for subsystem {t} (dim {dims[t]})")
    rest = [i for i in range(len(dims)) if i not in targets]
    rest_dims = tuple(dims[r] for r in rest) or (1,)
    if state.kind == "statevector":
        tens = state.data.reshape(dims)
        sel = [slice(None)] * len(dims)
        for t, x in zip(targets, outcome):
            sel[t] = x
        branch = tens[tuple(sel)].reshape(-1)
        p = float(np.vdot(branch, branch).real)
        if p <= 0.0 or math.sqrt(p) < 1e-300:
            return MeasurementOutcome(targets, outcome, max(p, 0.0), None)
        rem = QuantumState("statevector", rest_dims, branch / math.sqrt(p))
        return MeasurementOutcome(targets, outcome, p, rem)
    tens = state.data.reshape(dims + dims)
    sel = [slice(None)] * (2 * len(dims))
    for t, x in zip(targets, outcome):
        sel[t] = x
        sel[len(dims) + t] = x
    nrest = int(np.prod(rest_dims))
    block = tens[tuple(sel)].reshape(nrest, nrest)
    p = float(np.real(np.trace(block)))
    if p <= 0.0:
        return MeasurementOutcome(targets, outcome, max(p, 0.0), None)
    return MeasurementOutcome(targets, outcome, p,
                              QuantumState("density", rest_dims, block / p))


def state_fidelity(a: QuantumState, b: QuantumState) -> float:
    """Fidelity between two states; |<a|b>|^2 for pure-pure, <a|rho|a> for pure-mixed."""
    if a.dims != b.dims:
        raise DimensionMismatchError(f"dims differ: {a.dims} vs {b.dims}")
    if a.kind == "statevector" and b.kind == "statevector":
        return float(abs(np.vdot(a.data, b.data)) ** 2)
    if a.kind == "statevector":
        return float(np.real(np.vdot(a.data, b.data @ a.data)))
    if b.kind == "statevector":
        return state_fidelity(b, a)
    # mixed-mixed: Uhlmann fidelity, used only in diagnostics
    import scipy.linalg
    sa = scipy.linalg.sqrtm(a.data)
    inner = scipy.linalg.sqrtm(sa @ b.data @ sa)
    return float(np.real(np.trace(inner)) ** 2)


def haar_random_unitary(dim: int, rng: np.random.Generator) -> np.ndarray:
    """Haar-distributed unitary via QR of a complex Gaussian matrix."""
    if dim < 1:
        raise InvalidInputError("dimension must be >= 1")
    z = rng.standard_normal((dim, dim)) + 1j * rng.standard_normal((dim, dim))
    q, r = np.linalg.qr(z)
    d = np.diagonal(r)
    return q * (d / np.abs(d))


def phase_aligned_distance(a, b) -> float:
    """min over phi of ||a - e^{i phi} b||_F; zero iff equal up to global phase."""
    a = _as_matrix(a)
    b = _as_matrix(b)
    if a.shape != b.shape:
        raise DimensionMismatchError(f"shapes differ: {a.shape} vs {b.shape}")
    # the minimizing phase is -arg tr(a^+ b); evaluating the residual
    # elementwise (rather than via the norms) keeps full precision when
    # the matrices are nearly phase-equal
    overlap = np.vdot(a, b)
    phi = 0.0 if overlap == 0 else -cmath.phase(overlap)
    return float(np.linalg.norm(a - cmath.exp(1j * phi) * b))


def vector_phase_distance(a: np.ndarray, b: np.ndarray) -> float:
    """Phase-aligned Euclidean distance between two vectors."""
    return phase_aligned_distance(np.asarray(a).reshape(-1, 1),
                                  np.asarray(b).reshape(-1, 1))


def partial_trace(state: QuantumState, keep) -> QuantumState:
    """Trace out everything except the ``keep`` subsystems (density result)."""
    keep = tuple(int(k) for k in keep)
    dims = state.dims
    for k in keep:
        if not 0 <= k < len(dims):
            raise DimensionMismatchError(f"subsystem {k} out of range")
    rho = state.to_density().data
    n = len(dims)
    tens = rho.reshape(dims + dims)
    if set(keep) != set(range(n)):
        letters = "abcdefghijklmnopqrstuvwxyz"
        row = list(letters[:n])
        col = list(letters[n:2 * n])
        for i in range(n):
            if i not in keep:
                col[i] = row[i]  # repeated index: traced out
        out_idx = [row[i] for i in keep] + [col[i] for i in keep]
        tens = np.einsum("".join(row + col) + "->" + "".join(out_idx), tens)
    keep_dims = tuple(dims[k] for k in keep) or (1,)
    total = int(np.prod(keep_dims))
    return QuantumState("density", keep_dims, tens.reshape(total, total))


# -- matrix / state literal file format --------------------------------------
#
# UTF-8 text, one row per line, entries as python complex literals
# (``re+imj``) separated by whitespace.  States carry a header line
# ``# dims: d1 d2 ...`` and a single amplitude row.

def format_matrix(m: np.ndarray) -> str:
    m = np.atleast_2d(np.asarray(m, dtype=complex))
    lines = []
    for row in m:
        lines.append(" ".join(f"{z.real:+.17g}{z.imag:+.17g}j" for z in row))
    return "\n".join(lines) + "\n"


def parse_matrix(text: str) -> np.ndarray:
    rows = []
    for line in text.splitlines():
        line = line.strip()
        if not line or line.startswith("#"):
            continue
        rows.append([complex(tok) for tok in line.split()])
    if not rows:
        raise InvalidInputError("no matrix rows found")
    width = len(rows[0])
    if any(len(r) != width for r in rows):
        raise InvalidInputError("ragged matrix rows")
    return np.array(rows, dtype=complex)


def format_state(state: QuantumState) -> str:
    header = "# dims: " + " ".join(str(d) for d in state.dims) + "\n"
    if state.kind == "statevector":
        body = format_matrix(state.data.reshape(1, -1))
    else:
        body = format_matrix(state.data)
    return header + body


def parse_state(text: str) -> QuantumState:
    dims = None
    for line in text.splitlines():
        if line.strip().startswith("# dims:"):
            dims = tuple(int(t) for t in line.split(":", 1)[1].split())
            break
    m = parse_matrix(text)
    if dims is None:
        dims = (m.size,) if 1 in m.shape else (m.shape[0],)
    if 1 in m.shape and m.size == int(np.prod(dims)):
        return QuantumState("statevector", dims, m.reshape(-1))
    return QuantumState("density", dims, m)
