"""Dense complex linear algebra on small matrices.

Everything is built on one primitive, :func:`hermitian_eig`, a cyclic Jacobi
eigensolver for Hermitian matrices. Singular values and vectors come from the
Hermitian dilation ``[[0, M], [M^dag, 0]]`` whose eigenvalues are the
singular values of ``M`` and their negatives; this keeps small singular values
accurate to an absolute error of about ``eps * ||M||`` rather than
``sqrt(eps) * ||M||`` as squaring through ``M^dag M`` would.

Matrices are plain ``numpy`` ``complex128`` arrays. All functions are pure and
do not modify their arguments.
"""

from dataclasses import dataclass
from typing import NamedTuple

import numba
import numpy as np

from .errors import DimensionMismatch, InvalidP, NoConvergence, NotHermitian, NotPsd

_EPS = np.finfo(float).eps


@dataclass(frozen=True)
class NumericPolicy:
    """Tolerances shared by every routine in the package.

    Pass a modified copy (``dataclasses.replace(DEFAULT_POLICY, ...)``) to any
    function taking ``policy=`` to override them.
    """

    hermitian_tol: float = 1e-10
    eig_tol: float = 1e-9
    psd_tol: float = 1e-9
    fid_tol: float = 1e-9
    trace_tol: float = 1e-9
    povm_tol: float = 1e-8
    # relative cutoff below which eigenvalues count as zero in pseudo-inverses
    pinv_rtol: float = 1e-12
    size_cap: int = 256
    max_sweeps: int = 64


DEFAULT_POLICY = NumericPolicy()


class EigDecomposition(NamedTuple):
    eigenvalues: np.ndarray
    eigenvectors: np.ndarray


class PolarDecomposition(NamedTuple):
    positive_part: np.ndarray
    unitary_part: np.ndarray


class SVD(NamedTuple):
    u: np.ndarray
    s: np.ndarray
    vh: np.ndarray


@numba.njit(cache=True, nogil=True)
def _jacobi_sweeps(a, max_sweeps):
    # In-place cyclic Jacobi on a Hermitian matrix; returns (eigenvectors, sweeps)
    # with sweeps = -1 when the sweep limit was hit.
    n = a.shape[0]
    v = np.eye(n, dtype=np.complex128)
    scale = 0.0
    for i in range(n):
        for j in range(n):
            scale += abs(a[i, j]) ** 2
    scale = np.sqrt(scale)
    for sweep in range(max_sweeps):
        off = 0.0
        for p in range(n):
            for q in range(p + 1, n):
                off += abs(a[p, q]) ** 2
        if off == 0.0 or np.sqrt(2.0 * off) <= 1e-15 * scale:
            return v, sweep
        for p in range(n - 1):
            for q in range(p + 1, n):
                apq = a[p, q]
                g = abs(apq)
                if g == 0.0:
                    continue
                app = a[p, p].real
                aqq = a[q, q].real
                if g <= 1e-18 * (abs(app) + abs(aqq)):
                    a[p, q] = 0.0
                    a[q, p] = 0.0
                    continue
                # phase-rotate a[p, q] to the real axis, then a real rotation
                ph = apq / g
                theta = (aqq - app) / (2.0 * g)
                t = 1.0 / (abs(theta) + np.sqrt(theta * theta + 1.0))
                if theta < 0.0:
                    t = -t
                c = 1.0 / np.sqrt(t * t + 1.0)
                s = t * c
                upp = c + 0j
                uqp = -s * np.conj(ph)
                upq = s + 0j
                uqq = c * np.conj(ph)
                for k in range(n):
                    akp = a[k, p]
                    akq = a[k, q]
                    a[k, p] = akp * upp + akq * uqp
                    a[k, q] = akp * upq + akq * uqq
                for k in range(n):
                    apk = a[p, k]
                    aqk = a[q, k]
                    a[p, k] = np.conj(upp) * apk + np.conj(uqp) * aqk
                    a[q, k] = np.conj(upq) * apk + np.conj(uqq) * aqk
                a[p, q] = 0.0
                a[q, p] = 0.0
                a[p, p] = app - t * g
                a[q, q] = aqq + t * g
                for k in range(n):
                    vkp = v[k, p]
                    vkq = v[k, q]
                    v[k, p] = vkp * upp + vkq * uqp
                    v[k, q] = vkp * upq + vkq * uqq
    return v, -1


def as_matrix(m):
    """Return ``m`` as a 2-D ``complex128`` array (a copy only when needed)."""
    arr = np.asarray(getattr(m, "matrix", m), dtype=np.complex128)
    if arr.ndim != 2:
        raise DimensionMismatch(f"expected a 2-D matrix, got shape {arr.shape}")
    return arr


def hermitian_defect(m):
    """Largest entrywise deviation ``|m[i, j] - conj(m[j, i])|``."""
    m = as_matrix(m)
    if m.shape[0] != m.shape[1]:
        return np.inf
    return float(np.abs(m - m.conj().T).max(initial=0.0))


def check_hermitian(m, policy=DEFAULT_POLICY):
    m = as_matrix(m)
    if m.shape[0] != m.shape[1]:
        raise NotHermitian(f"matrix is not square: shape {m.shape}")
    defect = hermitian_defect(m)
    if defect > policy.hermitian_tol:
        raise NotHermitian(
            f"matrix is not Hermitian: max |M - M^dag| = {defect:.3e} "
            f"> {policy.hermitian_tol:.1e}"
        )
    return m


def hermitian_eig(m, policy=DEFAULT_POLICY):
    """Eigendecomposition of a Hermitian matrix by cyclic Jacobi rotations.

    Returns an :class:`EigDecomposition` with real eigenvalues in ascending
    order and the matching orthonormal eigenvectors as columns.

    Raises :class:`NotHermitian` if ``m`` fails the symmetry check and
    :class:`NoConvergence` if ``policy.max_sweeps`` sweeps do not suffice.
    """
    m = check_hermitian(m, policy)
    n = m.shape[0]
    if n == 0:
        return EigDecomposition(np.zeros(0), np.zeros((0, 0), dtype=np.complex128))
    a = np.ascontiguousarray(0.5 * (m + m.conj().T))
    v, sweeps = _jacobi_sweeps(a, policy.max_sweeps)
    if sweeps < 0:
        raise NoConvergence(f"Jacobi eigensolver did not converge in {policy.max_sweeps} sweeps")
    lam = a.diagonal().real.copy()
    order = np.argsort(lam, kind="stable")
    return EigDecomposition(lam[order], v[:, order])


def eigvalsh(m, policy=DEFAULT_POLICY):
    return hermitian_eig(m, policy).eigenvalues


def _dilation(m):
    r, c = m.shape
    h = np.zeros((r + c, r + c), dtype=np.complex128)
    h[:r, r:] = m
    h[r:, :r] = m.conj().T
    return h


def singular_values(m, policy=DEFAULT_POLICY):
    """Singular values of ``m`` in descending order."""
    m = as_matrix(m)
    k = min(m.shape)
    if k == 0:
        return np.zeros(0)
    lam = hermitian_eig(_dilation(m), policy).eigenvalues
    return np.maximum(lam[::-1][:k], 0.0)


def complete_orthonormal(q, dim):
    """Extend the orthonormal columns of ``q`` to a ``dim x dim`` unitary.

    New columns are Gram-Schmidt residuals of the standard basis vectors,
    taken in order and orthogonalized twice.
    """
    cols = [q[:, j] for j in range(q.shape[1])] if q.size else []
    for e in range(dim):
        if len(cols) == dim:
            break
        x = np.zeros(dim, dtype=np.complex128)
        x[e] = 1.0
        for _ in range(2):
            for c in cols:
                x = x - c * np.vdot(c, x)
        nrm = np.linalg.norm(x)
        if nrm > 1e-6:
            cols.append(x / nrm)
    return np.column_stack(cols) if cols else np.zeros((dim, 0), dtype=np.complex128)


def gram_schmidt(a):
    """Orthonormalize the columns of ``a`` (full column rank assumed)."""
    a = as_matrix(a)
    cols = []
    for j in range(a.shape[1]):
        x = a[:, j].copy()
        for _ in range(2):
            for c in cols:
                x = x - c * np.vdot(c, x)
        cols.append(x / np.linalg.norm(x))
    return np.column_stack(cols)


def svd(m, policy=DEFAULT_POLICY):
    """Full singular value decomposition ``m = u @ diag(s) @ vh``.

    ``u`` and ``vh`` are square unitaries; singular directions for singular
    values below ``pinv_rtol * s_max`` are completed arbitrarily.
    """
    m = as_matrix(m)
    r, c = m.shape
    k = min(r, c)
    eig = hermitian_eig(_dilation(m), policy)
    lam = eig.eigenvalues[::-1][:k]
    vecs = eig.eigenvectors[:, ::-1][:, :k]
    s = np.maximum(lam, 0.0)
    smax = s[0] if k else 0.0
    keep = s > max(policy.pinv_rtol * smax, 0.0) if smax > 0 else np.zeros(k, dtype=bool)
    u_part = np.sqrt(2.0) * vecs[:r, keep]
    v_part = np.sqrt(2.0) * vecs[r:, keep]
    if u_part.shape[1]:
        u_part = gram_schmidt(u_part)
        v_part = gram_schmidt(v_part)
    u = complete_orthonormal(u_part, r)
    v = complete_orthonormal(v_part, c)
    s = np.where(keep, s, 0.0) if k else s
    return SVD(u, s, v.conj().T)


def schatten_norm(m, p, policy=DEFAULT_POLICY):
    """Schatten p-norm ``(sum_i s_i**p) ** (1/p)`` over the singular values.

    ``p = 1`` is the trace norm and ``p = 2`` the Frobenius norm. Values
    ``0 < p < 1`` are accepted but give only a quasi-norm: the triangle
    inequality fails there. For those, singular values at roundoff level
    (below ``10 * max(shape) * eps * s_max``) are dropped, since ``s**p``
    would otherwise amplify noise.
    """
    if not p > 0:
        raise InvalidP(f"Schatten index must be positive, got {p}")
    s = singular_values(m, policy)
    if s.size == 0 or s[0] == 0.0:
        return 0.0
    if p < 1:
        s = s[s > 10 * max(np.shape(m)) * _EPS * s[0]]
    if np.isinf(p):
        return float(s[0])
    smax = s[0]
    return float(smax * np.sum((s / smax) ** p) ** (1.0 / p))


def trace_norm(m, policy=DEFAULT_POLICY):
    return schatten_norm(m, 1, policy)


def frobenius_norm(m):
    """Schatten 2-norm computed directly from the entries."""
    return float(np.sqrt(np.sum(np.abs(as_matrix(m)) ** 2)))


def _psd_eig(m, policy, what="matrix"):
    eig = hermitian_eig(m, policy)
    lam = eig.eigenvalues
    if lam.size and lam[0] < -policy.psd_tol:
        raise NotPsd(f"{what} has eigenvalue {lam[0]:.3e} < -{policy.psd_tol:.1e}")
    return np.maximum(lam, 0.0), eig.eigenvectors


def matrix_sqrt_psd(m, policy=DEFAULT_POLICY):
    """Principal square root of a positive semidefinite Hermitian matrix.

    Eigenvalues in ``[-psd_tol, 0)`` are treated as zero; anything more
    negative raises :class:`NotPsd`.
    """
    lam, v = _psd_eig(m, policy)
    root = (v * np.sqrt(lam)) @ v.conj().T
    return 0.5 * (root + root.conj().T)


def psd_inv_sqrt(m, policy=DEFAULT_POLICY):
    """Pseudo-inverse square root of a PSD matrix, and the support projector.

    Eigenvalues at or below ``pinv_rtol * lambda_max`` are treated as zero.
    """
    lam, v = _psd_eig(m, policy)
    cutoff = policy.pinv_rtol * (lam[-1] if lam.size else 0.0)
    keep = lam > cutoff
    inv = np.zeros_like(lam)
    inv[keep] = 1.0 / np.sqrt(lam[keep])
    root = (v * inv) @ v.conj().T
    vk = v[:, keep]
    return 0.5 * (root + root.conj().T), vk @ vk.conj().T


def polar_decompose(m, policy=DEFAULT_POLICY):
    """Left polar decomposition ``m = P @ U`` with ``P`` PSD and ``U`` unitary.

    On the null space of ``m`` the unitary factor is completed arbitrarily
    (the zero matrix gets ``U = I``); callers must not rely on that part.
    """
    m = as_matrix(m)
    if m.shape[0] != m.shape[1]:
        raise DimensionMismatch(f"polar decomposition needs a square matrix, got {m.shape}")
    u, s, vh = svd(m, policy)
    p = (u * s) @ u.conj().T
    return PolarDecomposition(0.5 * (p + p.conj().T), u @ vh)


def fidelity(rho, sigma, policy=DEFAULT_POLICY):
    """Fidelity ``||sqrt(rho) sqrt(sigma)||_1 ** 2`` of two density matrices.

    Accepts arrays or :class:`~qsdbound.ensemble.DensityMatrix` objects
    (whose cached square roots are reused).
    """
    a = _sqrt_of(rho, policy)
    b = _sqrt_of(sigma, policy)
    if a.shape != b.shape:
        raise DimensionMismatch(f"state dimensions differ: {a.shape} vs {b.shape}")
    return fidelity_from_sqrts(a, b, policy)


def fidelity_from_sqrts(sqrt_rho, sqrt_sigma, policy=DEFAULT_POLICY):
    f = trace_norm(sqrt_rho @ sqrt_sigma, policy) ** 2
    if f > 1.0 and f <= 1.0 + policy.fid_tol:
        f = 1.0
    return float(f)


def _sqrt_of(state, policy):
    root = getattr(state, "sqrt", None)
    if root is not None and policy is DEFAULT_POLICY:
        return root
    return matrix_sqrt_psd(state, policy)


def kron(a, b):
    """Kronecker product."""
    return np.kron(as_matrix(a), as_matrix(b))


def random_unitary(dim, rng):
    """Haar-random unitary: Gram-Schmidt on a complex Gaussian matrix."""
    g = rng.standard_normal((dim, dim)) + 1j * rng.standard_normal((dim, dim))
    return gram_schmidt(g)
