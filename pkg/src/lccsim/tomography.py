"""Single-qubit process tomography with a maximum-likelihood reconstruction.

A process is represented by its chi matrix in the Pauli basis
{I, X, Y, Z}: E(rho) = sum_{mn} chi_mn s_m rho s_n, normalized to unit
trace.  Measurement settings pair the four standard preparations
|0>, |1>, |+>, |+i> with the three Pauli measurement bases; each
setting's outcome probabilities are linear in chi through Hermitian
C matrices, C_{nm} = Tr(P s_m rho s_n).

The estimator parametrizes chi through a lower-triangular Cholesky
factor (chi = T T^dag / Tr(T T^dag), 16 real parameters), guaranteeing
positivity, and maximizes the multinomial log-likelihood by gradient
ascent with backtracking.  Counts are modeled as Poisson rates
proportional to Tr(C chi) and normalized over the whole dataset rather
than per setting: for a postselected (trace-decreasing) process such as
(X + iZ)/sqrt(2), the relative count rates between settings carry the
trace information, exactly as coincidence rates do in a postselected
optical experiment, so the process stays identifiable up to the overall
scale that the unit-trace convention fixes.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np

from .qcore import ID2, PAULIS, InvalidInputError

PREP_LABELS = ("0", "1", "+", "+i")
BASIS_LABELS = ("X", "Y", "Z")

_PREP_VECS = {
    "0": np.array([1.0, 0.0], dtype=complex),
    "1": np.array([0.0, 1.0], dtype=complex),
    "+": np.array([1.0, 1.0], dtype=complex) / math.sqrt(2),
    "+i": np.array([1.0, 1.0j], dtype=complex) / math.sqrt(2),
}
_BASIS_OPS = {"X": PAULIS[1], "Y": PAULIS[2], "Z": PAULIS[3]}


def prep_density(label: str) -> np.ndarray:
    try:
        v = _PREP_VECS[label]
    except KeyError:
        raise InvalidInputError(f"unknown preparation {label!r}") from None
    return np.outer(v, v.conj())


def basis_projectors(label: str) -> tuple[np.ndarray, np.ndarray]:
    """Projectors onto the +1 and -1 eigenstates of a Pauli observable."""
    try:
        op = _BASIS_OPS[label]
    except KeyError:
        raise InvalidInputError(f"unknown basis {label!r}") from None
    return (ID2 + op) / 2.0, (ID2 - op) / 2.0


def measurement_matrix(prep: str, basis: str, outcome: int) -> np.ndarray:
    """Hermitian C with Tr(chi C) = P(outcome | prep, basis)."""
    rho = prep_density(prep)
    proj = basis_projectors(basis)[outcome]
    c = np.empty((4, 4), dtype=complex)
    for m in range(4):
        for n in range(4):
            c[n, m] = np.trace(proj @ PAULIS[m] @ rho @ PAULIS[n])
    return c


def all_measurement_matrices() -> dict[tuple[str, str, int], np.ndarray]:
    return {(p, b, o): measurement_matrix(p, b, o)
            for p in PREP_LABELS for b in BASIS_LABELS for o in (0, 1)}


@dataclass(frozen=True)
class ChiMatrix:
    """Unit-trace positive process matrix in the Pauli basis."""

    data: np.ndarray

    def __post_init__(self):
        m = np.asarray(self.data, dtype=complex)
        if m.shape != (4, 4):
            raise InvalidInputError("chi matrix must be 4x4")
        if np.abs(m - m.conj().T).max() > 1e-9:
            raise InvalidInputError("chi matrix must be Hermitian")
        if np.linalg.eigvalsh(m).min() < -1e-9:
            raise InvalidInputError("chi matrix must be positive semidefinite")
        if abs(np.trace(m).real - 1.0) > 1e-9:
            raise InvalidInputError("chi matrix must have unit trace")
        object.__setattr__(self, "data", m)

    def apply(self, rho: np.ndarray) -> np.ndarray:
        out = np.zeros((2, 2), dtype=complex)
        for m in range(4):
            for n in range(4):
                out += self.data[m, n] * (PAULIS[m] @ rho @ PAULIS[n])
        return out

    def probability(self, prep: str, basis: str, outcome: int) -> float:
        c = measurement_matrix(prep, basis, outcome)
        return float(np.trace(self.data @ c).real)


def pauli_coefficients(op: np.ndarray) -> np.ndarray:
    """Expansion coefficients of a 2x2 operator over {I, X, Y, Z}."""
    op = np.asarray(op, dtype=complex)
    return np.array([np.trace(p @ op) / 2.0 for p in PAULIS])


def ideal_chi(op: np.ndarray) -> ChiMatrix:
    """Rank-one chi of the map rho -> op rho op^dag, trace-normalized."""
    c = pauli_coefficients(op)
    m = np.outer(c, c.conj())
    tr = np.trace(m).real
    if tr < 1e-12:
        raise InvalidInputError("operator is numerically zero")
    return ChiMatrix(m / tr)


def depolarize_chi(chi: ChiMatrix, p: float) -> ChiMatrix:
    """Chi for the map (1-p) E(rho) + (p/2) Tr(rho) I.

    The fully depolarizing limit is the uniform Pauli mixture, whose chi
    is I/4; mixing is linear in chi.
    """
    if not 0.0 <= p <= 1.0:
        raise InvalidInputError("depolarization strength must lie in [0,1]")
    return ChiMatrix((1.0 - p) * chi.data + (p / 4.0) * np.eye(4))


@dataclass(frozen=True)
class TomographyDataset:
    """Counts indexed by (prep, basis, outcome).

    Counts may be non-integer when produced analytically (expected
    counts); the likelihood machinery does not care.
    """

    counts: dict[tuple[str, str, int], float]

    def settings(self) -> list[tuple[str, str]]:
        seen = []
        for (p, b, _o) in self.counts:
            if (p, b) not in seen:
                seen.append((p, b))
        return seen

    def total(self) -> float:
        return float(sum(self.counts.values()))

    def to_text(self) -> str:
        lines = ["# prep basis outcome count"]
        for (p, b, o) in sorted(self.counts):
            c = self.counts[(p, b, o)]
            c_str = str(int(c)) if float(c).is_integer() else repr(float(c))
            lines.append(f"{p} {b} {o} {c_str}")
        return "\n".join(lines) + "\n"

    @classmethod
    def from_text(cls, text: str) -> "TomographyDataset":
        counts = {}
        for ln, raw in enumerate(text.splitlines(), 1):
            line = raw.strip()
            if not line or line.startswith("#"):
                continue
            parts = line.split()
            if len(parts) != 4:
                raise InvalidInputError(f"line {ln}: expected 4 fields")
            p, b, o_str, c_str = parts
            if p not in PREP_LABELS:
                raise InvalidInputError(f"line {ln}: unknown preparation {p!r}")
            if b not in BASIS_LABELS:
                raise InvalidInputError(f"line {ln}: unknown basis {b!r}")
            try:
                o = int(o_str)
                c = float(c_str)
            except ValueError as exc:
                raise InvalidInputError(f"line {ln}: {exc}") from None
            if o not in (0, 1) or c < 0:
                raise InvalidInputError(f"line {ln}: bad outcome or count")
            counts[(p, b, o)] = counts.get((p, b, o), 0.0) + c
        if not counts:
            raise InvalidInputError("dataset contains no rows")
        return cls(counts)


def setting_rates(chi: ChiMatrix, prep: str, basis: str) -> np.ndarray:
    """Unnormalized outcome rates Tr(C chi) for one setting.

    For a trace-preserving process these sum to 1; for a postselected
    one they scale with the detection probability of that preparation.
    """
    p = np.array([chi.probability(prep, basis, o) for o in (0, 1)])
    return np.clip(p, 0.0, None)


def simulate_dataset(chi: ChiMatrix, shots: int, rng: np.random.Generator | None,
                     analytic: bool = False) -> TomographyDataset:
    """Counts for the full 4x3 setting grid.

    ``shots`` sets the exposure per setting: each outcome count is
    Poisson with mean shots * Tr(C chi) (or exactly that mean in
    analytic mode), mirroring coincidence counting.
    """
    counts: dict[tuple[str, str, int], float] = {}
    for prep in PREP_LABELS:
        for basis in BASIS_LABELS:
            rates = shots * setting_rates(chi, prep, basis)
            if analytic:
                drawn = rates
            else:
                if rng is None:
                    raise InvalidInputError("sampling requires a generator")
                drawn = rng.poisson(rates).astype(float)
            for o in (0, 1):
                counts[(prep, basis, o)] = float(drawn[o])
    return TomographyDataset(counts)


def linear_inversion(dataset: TomographyDataset) -> np.ndarray:
    """Least-squares chi from observed count rates.

    Solves Tr(C_k chi) = lambda * f_k over chi and the unknown overall
    intensity lambda, where f_k is the dataset-wide count fraction of
    cell k, then fixes the scale by Tr(chi) = 1.  Returns a Hermitian
    unit-trace matrix that is not necessarily positive.
    """
    total = dataset.total()
    if total <= 0:
        raise InvalidInputError("dataset is empty")
    rows = []
    for (p, b) in dataset.settings():
        for o in (0, 1):
            c = measurement_matrix(p, b, o)
            frac = dataset.counts.get((p, b, o), 0.0) / total
            # Tr(chi C) = vec(C^T) . vec(chi); last column carries -lambda
            rows.append(np.concatenate([c.T.reshape(-1), [-frac]]))
    rows.append(np.concatenate([np.eye(4, dtype=complex).reshape(-1), [0.0]]))
    a = np.array(rows)
    y = np.zeros(len(rows), dtype=complex)
    y[-1] = 1.0  # unit trace
    big = np.concatenate([np.concatenate([a.real, -a.imag], axis=1),
                          np.concatenate([a.imag, a.real], axis=1)])
    rhs = np.concatenate([y.real, y.imag])
    sol, *_ = np.linalg.lstsq(big, rhs, rcond=None)
    chi = (sol[:16] + 1j * sol[17:33]).reshape(4, 4)
    chi = (chi + chi.conj().T) / 2.0
    return chi / np.trace(chi).real


def _project_psd_unit_trace(m: np.ndarray, floor: float = 1e-6) -> np.ndarray:
    evals, evecs = np.linalg.eigh(m)
    evals = np.clip(evals, floor, None)
    out = (evecs * evals) @ evecs.conj().T
    return out / np.trace(out).real


def _t_to_vector(t: np.ndarray) -> np.ndarray:
    x = [t[i, i].real for i in range(4)]
    for j in range(1, 4):
        for i in range(j):
            x.extend([t[j, i].real, t[j, i].imag])
    return np.array(x)


def _vector_to_t(x: np.ndarray) -> np.ndarray:
    t = np.zeros((4, 4), dtype=complex)
    for i in range(4):
        t[i, i] = x[i]
    pos = 4
    for j in range(1, 4):
        for i in range(j):
            t[j, i] = x[pos] + 1j * x[pos + 1]
            pos += 2
    return t


def _log_likelihood(chi: np.ndarray, terms) -> float:
    vals = np.einsum("kij,ji->k", terms["event_mats"], chi).real
    if vals.min() <= 1e-300:
        return -np.inf
    norm_val = np.einsum("ij,ji->", terms["norm_mat"], chi).real
    return float(terms["event_counts"] @ np.log(vals)
                 - terms["norm_count"] * math.log(norm_val))


def _gradient(t: np.ndarray, terms) -> tuple[np.ndarray, float]:
    tau = np.trace(t @ t.conj().T).real
    chi = t @ t.conj().T / tau
    vals = np.einsum("kij,ji->k", terms["event_mats"], chi).real
    d = np.einsum("k,kij->ij", terms["event_counts"] / np.clip(vals, 1e-300, None),
                  terms["event_mats"])
    d -= (terms["norm_count"]
          / np.einsum("ij,ji->", terms["norm_mat"], chi).real) * terms["norm_mat"]
    m = (t.conj().T @ d - np.trace(d @ chi).real * t.conj().T) / tau
    grad = np.zeros(16)
    for i in range(4):
        grad[i] = 2.0 * m[i, i].real
    pos = 4
    for j in range(1, 4):
        for i in range(j):
            grad[pos] = 2.0 * m[i, j].real
            grad[pos + 1] = -2.0 * m[i, j].imag
            pos += 2
    return grad, _log_likelihood(chi, terms)


def _likelihood_terms(dataset: TomographyDataset) -> dict:
    """Multinomial model over all cells: p_k = Tr(C_k chi) / Tr(S chi)."""
    mats = []
    counts = []
    s_mat = np.zeros((4, 4), dtype=complex)
    total = 0.0
    for (p, b) in dataset.settings():
        for o in (0, 1):
            count = dataset.counts.get((p, b, o), 0.0)
            c_mat = measurement_matrix(p, b, o)
            s_mat += c_mat
            total += count
            if count > 0:
                mats.append(c_mat)
                counts.append(count)
    return {"event_mats": np.array(mats), "event_counts": np.array(counts),
            "norm_mat": s_mat, "norm_count": total}


@dataclass(frozen=True)
class MleResult:
    chi: ChiMatrix
    log_likelihood: float
    iterations: int
    gradient_norm: float
    converged: bool


def reconstruct_mle(dataset: TomographyDataset, max_iter: int = 10000,
                    grad_tol: float = 1e-8,
                    initial: np.ndarray | None = None) -> MleResult:
    """Maximum-likelihood chi via gradient ascent on the Cholesky factor."""
    terms = _likelihood_terms(dataset)
    if initial is None:
        initial = _project_psd_unit_trace(linear_inversion(dataset))
    else:
        initial = _project_psd_unit_trace(np.asarray(initial, dtype=complex))
    t = np.linalg.cholesky(initial)
    x = _t_to_vector(t)
    step = 1.0
    grad, ll = _gradient(_vector_to_t(x), terms)
    it = 0
    for it in range(1, max_iter + 1):
        gnorm = float(np.abs(grad).max())
        if gnorm < grad_tol:
            break
        # backtracking line search along the gradient
        improved = False
        while step > 1e-18:
            x_new = x + step * grad
            grad_new, ll_new = _gradient(_vector_to_t(x_new), terms)
            if ll_new > ll:
                x, grad, ll = x_new, grad_new, ll_new
                step *= 2.0
                improved = True
                break
            step *= 0.5
        if not improved:
            break
    t = _vector_to_t(x)
    chi = t @ t.conj().T
    chi /= np.trace(chi).real
    gnorm = float(np.abs(grad).max())
    return MleResult(ChiMatrix(chi), ll, it, gnorm, gnorm < grad_tol)


def process_fidelity(chi_a: ChiMatrix, chi_b: ChiMatrix) -> float:
    """Overlap Tr(chi_a chi_b); equals the usual process fidelity when one
    argument is rank one (an ideal unitary process)."""
    return float(np.trace(chi_a.data @ chi_b.data).real)


def bootstrap_fidelity(dataset: TomographyDataset, reference: ChiMatrix,
                       resamples: int, rng: np.random.Generator,
                       max_iter: int = 2000) -> tuple[float, float]:
    """Poisson-bootstrap mean and standard deviation of the process
    fidelity between re-estimated chi matrices and a reference."""
    if resamples < 2:
        raise InvalidInputError("need at least two resamples")
    fids = []
    for _ in range(resamples):
        counts = {k: float(rng.poisson(max(v, 0.0)))
                  for k, v in dataset.counts.items()}
        if sum(counts.values()) <= 0:
            continue
        res = reconstruct_mle(TomographyDataset(counts), max_iter=max_iter)
        fids.append(process_fidelity(res.chi, reference))
    arr = np.array(fids)
    return float(arr.mean()), float(arr.std(ddof=1))
