"""Linear decompositions of single- and two-qubit unitaries.

A two-qubit unitary factors as (U1 x V1) UD (U2 x V2) with the nonlocal
core UD = exp(-i(k1 XX + k2 YY + k3 ZZ)).  In the magic basis the local
factors become real orthogonal matrices, so the factorization reduces to
a simultaneous singular value decomposition of the real and imaginary
parts of the basis-changed input.  Expanding UD over {II, XX, YY, ZZ}
yields the four-term linear combination driven by the lcc module.

No Weyl-chamber canonicalization is applied: the k-vector is whatever
the SVD produces, and only exact recombination is promised.
"""

from __future__ import annotations

import cmath
import math
from dataclasses import dataclass, field

import numpy as np

from . import qcore
from .lcc import LinearCombinationSpec
from .qcore import ID2, SX, SY, SZ, InvalidInputError, is_unitary

# Fixed magic-basis matrix: maps the Bell-like basis so that SU(2)xSU(2)
# conjugates into SO(4).
MAGIC = np.array([[1, 0, 0, 1j],
                  [0, 1j, 1, 0],
                  [0, 1j, -1, 0],
                  [1, 0, 0, -1j]], dtype=complex) / math.sqrt(2)
MAGIC_DAG = MAGIC.conj().T

_XX = np.kron(SX, SX)
_YY = np.kron(SY, SY)
_ZZ = np.kron(SZ, SZ)
# Diagonal sign patterns of XX, YY, ZZ in the magic basis (all three are
# diagonal there); rows of the 4x4 solve below.
_DIAG_SIGNS = np.column_stack([
    np.ones(4),
    np.real(np.diag(MAGIC_DAG @ _XX @ MAGIC)),
    np.real(np.diag(MAGIC_DAG @ _YY @ MAGIC)),
    np.real(np.diag(MAGIC_DAG @ _ZZ @ MAGIC)),
])


class DecompositionError(RuntimeError):
    """Simultaneous diagonalization failed after degeneracy handling."""


@dataclass(frozen=True)
class PauliDecomposition:
    """Single-qubit gate as alpha0 I + alpha1 X + alpha2 Y + alpha3 Z.

    For SU(2) inputs alpha0 is real, alpha1..3 purely imaginary, and
    sum |alpha_i|^2 = 1.  d1, d2, d3 are the rotation half-angles of the
    ordered product exp(-i d1 X) exp(-i d2 Y) exp(-i d3 Z).
    """

    alphas: np.ndarray
    d_angles: tuple[float, float, float]
    global_phase: float = 0.0

    def combination(self) -> np.ndarray:
        a = self.alphas
        return a[0] * ID2 + a[1] * SX + a[2] * SY + a[3] * SZ

    def reconstruct(self) -> np.ndarray:
        return cmath.exp(1j * self.global_phase) * self.combination()


@dataclass(frozen=True)
class KakDecomposition:
    """(U1 x V1) UD (U2 x V2) record with the UD expansion coefficients."""

    u1: np.ndarray
    v1: np.ndarray
    u2: np.ndarray
    v2: np.ndarray
    k_vector: tuple[float, float, float]
    alphas: np.ndarray
    global_phase: float = 0.0

    def nonlocal_core(self) -> np.ndarray:
        k1, k2, k3 = self.k_vector
        from scipy.linalg import expm
        return expm(-1j * (k1 * _XX + k2 * _YY + k3 * _ZZ))

    def core_combination(self) -> np.ndarray:
        a = self.alphas
        return (a[0] * np.eye(4) + a[1] * _XX + a[2] * _YY + a[3] * _ZZ)

    def reconstruct(self) -> np.ndarray:
        left = np.kron(self.u1, self.v1)
        right = np.kron(self.u2, self.v2)
        return cmath.exp(1j * self.global_phase) * (
            left @ self.core_combination() @ right)


@dataclass(frozen=True)
class MagicBasisWork:
    """Intermediate factors of the magic-basis simultaneous SVD."""

    u_real: np.ndarray
    u_imag: np.ndarray
    left: np.ndarray
    right: np.ndarray
    d_real: np.ndarray
    d_imag: np.ndarray


def pauli_expand(op: np.ndarray) -> np.ndarray:
    """Pauli coefficients c with op = sum_m c_m sigma_m (any 2x2 operator)."""
    op = np.asarray(op, dtype=complex)
    if op.shape != (2, 2):
        raise InvalidInputError("pauli expansion needs a 2x2 operator")
    if np.allclose(op, 0):
        raise InvalidInputError("zero operator")
    return np.array([np.trace(p @ op) / 2.0 for p in qcore.PAULIS])


def _su2_euler_angles(u: np.ndarray) -> tuple[float, float, float]:
    """Half-angles (d1,d2,d3) of u = exp(-i d1 X) exp(-i d2 Y) exp(-i d3 Z)."""
    # Map to the Bloch rotation and read off intrinsic x-y-z Tait-Bryan angles.
    paulis = (SX, SY, SZ)
    rot = np.array([[np.real(np.trace(si @ u @ sj @ u.conj().T)) / 2.0
                     for sj in paulis] for si in paulis])
    t2 = math.asin(max(-1.0, min(1.0, rot[0, 2])))
    if abs(abs(rot[0, 2]) - 1.0) < 1e-12:
        # gimbal lock: fold the z rotation into the x one
        t1 = math.atan2(rot[1, 0], rot[1, 1])
        t3 = 0.0
    else:
        t3 = math.atan2(-rot[0, 1], rot[0, 0])
        t1 = math.atan2(-rot[1, 2], rot[2, 2])
    return (t1 / 2.0, t2 / 2.0, t3 / 2.0)


def pauli_decompose(u: np.ndarray) -> PauliDecomposition:
    """Decompose a single-qubit unitary over {I, X, Y, Z}.

    A non-special determinant is factored out as a recorded global phase;
    the coefficients then come directly from alpha_i = tr(sigma_i U')/2.
    """
    u = np.asarray(u, dtype=complex)
    if u.shape != (2, 2) or not is_unitary(u, atol=1e-10):
        raise InvalidInputError("pauli_decompose requires a 2x2 unitary")
    det = np.linalg.det(u)
    phase = cmath.sqrt(det)  # principal branch
    us = u / phase
    alphas = pauli_expand(us)
    d = _su2_euler_angles(us)
    dec = PauliDecomposition(alphas, d, cmath.phase(phase))
    # the Euler product and the trace projection must agree; if the
    # rotation extraction landed on the conjugate branch, flip it
    if qcore.phase_aligned_distance(dec.reconstruct(), u) > 1e-9:
        raise DecompositionError("single-qubit decomposition failed to close")
    return dec


def _joint_diagonalize(u_real: np.ndarray, u_imag: np.ndarray,
                       group_tol: float) -> tuple[np.ndarray, np.ndarray]:
    """One attempt at orthogonal L, R with both L^T A R and L^T B R diagonal."""
    left, svals, right_h = np.linalg.svd(u_real)
    right = right_h.T
    # group (near-)equal singular values; the second matrix is symmetric
    # and block-diagonal on those groups
    groups = []
    start = 0
    for i in range(1, 5):
        if i == 4 or abs(svals[i] - svals[start]) > group_tol:
            groups.append(list(range(start, i)))
            start = i
    b = left.T @ u_imag @ right
    for g in groups:
        idx = np.ix_(g, g)
        if svals[g[0]] > group_tol:
            block = b[idx]
            block = (block + block.T) / 2.0
            _, w = np.linalg.eigh(block)
            left[:, g] = left[:, g] @ w
            right[:, g] = right[:, g] @ w
        else:
            # zero block of A: diagonalize B there with an ordinary SVD
            w1, _, w2h = np.linalg.svd(b[idx])
            left[:, g] = left[:, g] @ w1
            right[:, g] = right[:, g] @ w2h.T
    return left, right


def simultaneous_svd(u_real: np.ndarray, u_imag: np.ndarray) -> MagicBasisWork:
    """Simultaneous SVD of the real/imaginary parts of a magic-basis unitary.

    Preconditions (consequences of unitarity) are asserted: A B^T must be
    symmetric and A^T A + B^T B = I.  Degenerate singular-value subspaces
    are re-diagonalized on the second matrix; failure is reported, never
    silent.
    """
    a = np.real(np.asarray(u_real, dtype=float))
    b = np.real(np.asarray(u_imag, dtype=float))
    if a.shape != (4, 4) or b.shape != (4, 4):
        raise InvalidInputError("expected real 4x4 matrices")
    if not np.allclose(a @ b.T, (a @ b.T).T, atol=1e-9):
        raise InvalidInputError("A B^T is not symmetric: input not a unitary image")
    if not np.allclose(a.T @ a + b.T @ b, np.eye(4), atol=1e-9):
        raise InvalidInputError("A^T A + B^T B != I: input not a unitary image")
    best = None
    for tol in (1e-11, 1e-8, 1e-6, 1e-4, 1e-2):
        left, right = _joint_diagonalize(a, b, tol)
        dr = left.T @ a @ right
        di = left.T @ b @ right
        residual = max(np.abs(dr - np.diag(np.diag(dr))).max(),
                       np.abs(di - np.diag(np.diag(di))).max())
        if best is None or residual < best[0]:
            best = (residual, left, right, dr, di)
        if residual < 1e-10:
            break
    residual, left, right, dr, di = best
    if residual > 1e-8:
        raise DecompositionError(
            f"simultaneous diagonalization residual {residual:.3e}")

    # canonicalize: det L = det R = +1 via paired column flips; if the
    # parity disagrees, one single-sided flip negates a diagonal entry
    # (preferring the smallest D_R entry so D_R stays nonnegative where
    # the parity permits)
    if np.linalg.det(left) < 0:
        left[:, 3] *= -1.0
        right[:, 3] *= -1.0
    if np.linalg.det(right) < 0:
        j = int(np.argmin(np.abs(np.diag(left.T @ a @ right))))
        right[:, j] *= -1.0
    dr = left.T @ a @ right
    di = left.T @ b @ right
    return MagicBasisWork(a, b, left, right, np.diag(np.diag(dr)),
                          np.diag(np.diag(di)))


def _factor_tensor_product(p: np.ndarray) -> tuple[np.ndarray, np.ndarray]:
    """Split a 4x4 unitary known to be u (x) v into unitary 2x2 factors."""
    r = p.reshape(2, 2, 2, 2).transpose(0, 2, 1, 3).reshape(4, 4)
    uu, ss, vvh = np.linalg.svd(r)
    if ss[1] > 1e-6:
        raise DecompositionError("local factor is not a tensor product")
    u = uu[:, 0].reshape(2, 2)
    v = (ss[0] * vvh[0, :]).reshape(2, 2)
    # rank-1 factorization fixes u v only up to a scalar; rescale each to
    # unitary while keeping the product fixed
    scale = math.sqrt(2.0) / np.linalg.norm(u)
    u = u * scale
    v = v / scale
    return u, v


def kak_decompose(u: np.ndarray) -> KakDecomposition:
    """Cartan factorization of a 4x4 unitary with the four-term expansion."""
    u = np.asarray(u, dtype=complex)
    if u.shape != (4, 4) or not is_unitary(u, atol=1e-9):
        raise InvalidInputError("kak_decompose requires a 4x4 unitary")
    det = np.linalg.det(u)
    phase = cmath.exp(1j * cmath.phase(det) / 4.0)
    us = u / phase

    up = MAGIC_DAG @ us @ MAGIC
    work = simultaneous_svd(np.real(up), np.imag(up))
    d = np.diag(work.d_real) + 1j * np.diag(work.d_imag)

    # diagonal phases are -(k0 + k . signs); solve the exact 4x4 system
    theta = np.angle(d)
    k0, k1, k2, k3 = np.linalg.solve(_DIAG_SIGNS, -theta)

    left_pair = MAGIC @ work.left @ MAGIC_DAG
    right_pair = MAGIC @ work.right.T @ MAGIC_DAG
    u1, v1 = _factor_tensor_product(left_pair)
    u2, v2 = _factor_tensor_product(right_pair)

    alphas = alphas_from_k((k1, k2, k3))
    global_phase = cmath.phase(phase) - k0
    dec = KakDecomposition(u1, v1, u2, v2, (float(k1), float(k2), float(k3)),
                           alphas, float(global_phase))
    if qcore.phase_aligned_distance(dec.reconstruct(), u) > qcore.ATOL_ROUNDTRIP:
        raise DecompositionError("two-qubit decomposition failed to close")
    return dec


def alphas_from_k(k_vector) -> np.ndarray:
    """Expansion of exp(-i(k1 XX + k2 YY + k3 ZZ)) over {II, XX, YY, ZZ}."""
    c1, c2, c3 = (math.cos(k) for k in k_vector)
    s1, s2, s3 = (math.sin(k) for k in k_vector)
    return np.array([
        c1 * c2 * c3 - 1j * s1 * s2 * s3,
        c1 * s2 * s3 - 1j * s1 * c2 * c3,
        s1 * c2 * s3 - 1j * c1 * s2 * c3,
        s1 * s2 * c3 - 1j * c1 * c2 * s3,
    ])


def alphas_from_core(core: np.ndarray) -> np.ndarray:
    """Trace projection of a two-qubit core onto {II, XX, YY, ZZ}."""
    ops = (np.eye(4, dtype=complex), _XX, _YY, _ZZ)
    return np.array([np.trace(op @ core) / 4.0 for op in ops])


def lcu_spec_from_kak(dec: KakDecomposition) -> LinearCombinationSpec:
    """Four-term spec with gates (U1 s_i U2) x (V1 s_i V2), coefficients alpha_i.

    The spec's combination equals the decomposed unitary up to the
    recorded global phase.
    """
    phase = cmath.exp(1j * dec.global_phase)
    gates = tuple(
        np.kron(dec.u1 @ s @ dec.u2, dec.v1 @ s @ dec.v2) * phase
        for s in qcore.PAULIS)
    return LinearCombinationSpec(dec.alphas, gates)


def su8_two_term_combine(a_gates, b_gates, beta0: float
                         ) -> tuple[np.ndarray, LinearCombinationSpec]:
    """Three-qubit product with a single X^(x3) exponential, and its
    two-term linear-combination form.

    a_gates are four 4x4 unitaries (two-qubit side), b_gates four 2x2
    unitaries.  Returns the 8x8 product
    (A4 A3 x B4 B3) exp(i beta0 X x X x X) (A2 A1 x B2 B1) alongside the
    spec cos(beta0) * product + i sin(beta0) * X-dressed product.
    """
    a1, a2, a3, a4 = (np.asarray(g, dtype=complex) for g in a_gates)
    b1, b2, b3, b4 = (np.asarray(g, dtype=complex) for g in b_gates)
    for g in (a1, a2, a3, a4, b1, b2, b3, b4):
        if not is_unitary(g, atol=1e-10):
            raise InvalidInputError("all SU(8) factors must be unitary")
    xxx = np.kron(_XX, SX)
    core = math.cos(beta0) * np.eye(8) + 1j * math.sin(beta0) * xxx
    u = np.kron(a4 @ a3, b4 @ b3) @ core @ np.kron(a2 @ a1, b2 @ b1)
    term0 = np.kron(a4 @ a3 @ a2 @ a1, b4 @ b3 @ b2 @ b1)
    term1 = np.kron(a4 @ a3 @ _XX @ a2 @ a1, b4 @ b3 @ SX @ b2 @ b1)
    spec = LinearCombinationSpec(
        np.array([math.cos(beta0), 1j * math.sin(beta0)]), (term0, term1))
    return u, spec
