"""Dense and tridiagonal numerical kernels.

The eigensolver is a cyclic Jacobi method with parallel (round-robin)
ordering so each sweep is a sequence of vectorized disjoint rotations.
Above ``JACOBI_MAX_DIM`` (and ``LU_MAX_DIM`` for the factorization) the
kernels hand over to LAPACK, which is only a speed concession; results
agree to rounding.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np
import scipy.linalg

from .errors import ConvergenceError, NoSignChange, NotSPD, NotSymmetric, SingularMatrix, ValidationError

__all__ = [
    "EigenDecomposition",
    "JACOBI_MAX_DIM",
    "solve_tridiagonal",
    "LU_MAX_DIM",
    "LUFactors",
    "lu_factor",
    "lu_solve",
    "jacobi_eigen",
    "sym_eigen",
    "cholesky",
    "gen_sym_eigen",
    "matrix_pnorm",
    "cond2",
    "SpectralRadius",
    "power_spectral_radius",
    "largest_real_root",
    "start_vector",
]

JACOBI_MAX_DIM = 160
LU_MAX_DIM = 400


@dataclass(frozen=True)
class EigenDecomposition:
    """Ascending eigenvalues with matching eigenvector columns."""

    eigenvalues: np.ndarray
    eigenvectors: np.ndarray


def start_vector(n: int) -> np.ndarray:
    """Deterministic, slightly tilted start vector for power iterations."""
    v = 1.0 + 1e-3 * np.arange(n)
    return v / np.linalg.norm(v)


def solve_tridiagonal(diag, off_diag, b):
    """Solve a symmetric tridiagonal system by the Thomas algorithm.

    ``b`` may be a vector or a matrix whose columns are right-hand sides.
    """
    d = np.asarray(diag, dtype=float)
    e = np.asarray(off_diag, dtype=float)
    x = np.array(b, dtype=float, copy=True)
    n = d.size
    if e.size != max(n - 1, 0) or x.shape[0] != n:
        raise ValidationError("tridiagonal dimensions do not match")
    c = np.empty(max(n - 1, 0))
    piv = d[0]
    if piv == 0.0:
        raise SingularMatrix("zero pivot in tridiagonal solve")
    if n > 1:
        c[0] = e[0] / piv
    x[0] = x[0] / piv
    for i in range(1, n):
        piv = d[i] - e[i - 1] * c[i - 1]
        if piv == 0.0:
            raise SingularMatrix(f"zero pivot in tridiagonal solve at row {i}")
        if i < n - 1:
            c[i] = e[i] / piv
        x[i] = (x[i] - e[i - 1] * x[i - 1]) / piv
    for i in range(n - 2, -1, -1):
        x[i] = x[i] - c[i] * x[i + 1]
    return x


@dataclass(frozen=True)
class LUFactors:
    """Packed LU factors (unit lower part below the diagonal) and row order."""

    lu: np.ndarray
    perm: np.ndarray


def _check_pivots(pivots, scale):
    small = np.abs(pivots) < max(1e-300, 1e-18 * scale)
    if small.any():
        raise SingularMatrix("matrix is singular to working precision")


def lu_factor(M) -> LUFactors:
    """LU factorization with partial pivoting, PM = LU."""
    A = np.array(M, dtype=float, copy=True)
    n, m = A.shape
    if n != m:
        raise ValidationError("lu_factor needs a square matrix")
    scale = np.abs(A).max() if A.size else 0.0
    if n > LU_MAX_DIM:
        lu, piv = scipy.linalg.lu_factor(A, check_finite=False)
        perm = np.arange(n)
        for k, p in enumerate(piv):
            perm[[k, p]] = perm[[p, k]]
        _check_pivots(np.diag(lu), scale)
        return LUFactors(lu, perm)
    perm = np.arange(n)
    for k in range(n):
        p = k + int(np.argmax(np.abs(A[k:, k])))
        _check_pivots(A[p, k:k + 1], scale)
        if p != k:
            A[[k, p]] = A[[p, k]]
            perm[[k, p]] = perm[[p, k]]
        A[k + 1:, k] /= A[k, k]
        A[k + 1:, k + 1:] -= np.outer(A[k + 1:, k], A[k, k + 1:])
    return LUFactors(A, perm)


def lu_solve(M, b):
    """Solve M x = b; ``M`` may be a matrix or precomputed LUFactors."""
    f = M if isinstance(M, LUFactors) else lu_factor(M)
    y = np.array(b, dtype=float)[f.perm]
    y = scipy.linalg.solve_triangular(f.lu, y, lower=True, unit_diagonal=True, check_finite=False)
    return scipy.linalg.solve_triangular(f.lu, y, lower=False, check_finite=False)


def _check_symmetric(M):
    M = np.asarray(M, dtype=float)
    if M.ndim != 2 or M.shape[0] != M.shape[1]:
        raise ValidationError("expected a square matrix")
    scale = np.abs(M).max() if M.size else 0.0
    if np.abs(M - M.T).max(initial=0.0) > 1e-12 * scale:
        raise NotSymmetric("matrix is not symmetric")
    return M


def _round_robin(n: int):
    """Pairings of a round-robin tournament on n (even) players."""
    players = list(range(n))
    rounds = []
    for _ in range(n - 1):
        rounds.append((np.array(players[: n // 2]), np.array(players[n // 2:][::-1])))
        players = [players[0]] + [players[-1]] + players[1:-1]
    return rounds


def _off_diagonal(A) -> float:
    B = A.copy()
    np.fill_diagonal(B, 0.0)
    return float(np.linalg.norm(B))


def jacobi_eigen(M, tol: float = 1e-12, max_sweeps: int = 30) -> EigenDecomposition:
    """Cyclic Jacobi eigensolver for a symmetric matrix."""
    A = _check_symmetric(M).copy()
    n = A.shape[0]
    if n == 0:
        return EigenDecomposition(np.zeros(0), np.zeros((0, 0)))
    pad = n % 2
    if pad:
        A = np.pad(A, ((0, 1), (0, 1)))
    m = A.shape[0]
    V = np.eye(m)
    fro = np.linalg.norm(A)
    rounds = _round_robin(m)
    for _ in range(max_sweeps):
        if _off_diagonal(A) <= tol * fro or fro == 0.0:
            break
        for p, q in rounds:
            apq = A[p, q]
            active = np.abs(apq) > 1e-300
            if not active.any():
                continue
            app, aqq = A[p, p], A[q, q]
            theta = np.where(active, (aqq - app) / (2.0 * np.where(active, apq, 1.0)), 0.0)
            big = np.abs(theta) > 1e150
            th = np.where(big, 0.0, theta)
            t = np.sign(th + (th == 0)) / (np.abs(th) + np.sqrt(th * th + 1.0))
            t = np.where(big, 0.5 / np.where(big, theta, 1.0), t)
            t = np.where(active, t, 0.0)
            c = 1.0 / np.sqrt(t**2 + 1.0)
            s = t * c
            # A <- J^T A J with J acting on the column pairs (p, q)
            Ap, Aq = A[:, p].copy(), A[:, q].copy()
            A[:, p] = c * Ap - s * Aq
            A[:, q] = s * Ap + c * Aq
            Ap, Aq = A[p, :].copy(), A[q, :].copy()
            A[p, :] = c[:, None] * Ap - s[:, None] * Aq
            A[q, :] = s[:, None] * Ap + c[:, None] * Aq
            A[p, q] = 0.0
            A[q, p] = 0.0
            Vp, Vq = V[:, p].copy(), V[:, q].copy()
            V[:, p] = c * Vp - s * Vq
            V[:, q] = s * Vp + c * Vq
    else:
        if _off_diagonal(A) > tol * fro:
            raise ConvergenceError(f"Jacobi did not converge in {max_sweeps} sweeps")
    w = np.diag(A).copy()
    if pad:
        # the padded zero row stays decoupled; drop its eigenpair
        keep = np.argmax(np.abs(V[-1, :]))
        cols = np.delete(np.arange(m), keep)
        w, V = w[cols], V[:n, cols]
    order = np.argsort(w, kind="stable")
    return EigenDecomposition(w[order], V[:, order])


def sym_eigen(M) -> EigenDecomposition:
    """All eigenpairs of a symmetric matrix, eigenvalues ascending."""
    M = _check_symmetric(M)
    if M.shape[0] <= JACOBI_MAX_DIM:
        return jacobi_eigen(M)
    w, V = np.linalg.eigh(M)
    return EigenDecomposition(w, V)


def cholesky(B) -> np.ndarray:
    """Upper triangular R with B = R^T R."""
    B = _check_symmetric(B)
    n = B.shape[0]
    R = np.zeros_like(B)
    for k in range(n):
        d = B[k, k] - R[:k, k] @ R[:k, k]
        if not d > 0:
            raise NotSPD(f"Cholesky failed at pivot {k}")
        R[k, k] = np.sqrt(d)
        R[k, k + 1:] = (B[k, k + 1:] - R[:k, k] @ R[:k, k + 1:]) / R[k, k]
    return R


def gen_sym_eigen(A, B) -> EigenDecomposition:
    """Solve A v = lambda B v by the reduction B = R^T R.

    Eigenvectors are B-orthonormal in the original coordinates.
    """
    A = _check_symmetric(A)
    R = cholesky(B)
    X = scipy.linalg.solve_triangular(R, A, trans="T")
    C = scipy.linalg.solve_triangular(R, X.T, trans="T").T
    C = 0.5 * (C + C.T)
    dec = sym_eigen(C)
    V = scipy.linalg.solve_triangular(R, dec.eigenvectors)
    return EigenDecomposition(dec.eigenvalues, V)


def matrix_pnorm(M, p, tol: float = 1e-11, max_iter: int = 50000) -> float:
    """Induced matrix p-norm for p in {1, 2, inf}.

    p = 2 runs the power iteration on M^T M from the deterministic start
    vector and returns the square root of the Rayleigh quotient.
    """
    M = np.asarray(M, dtype=float)
    if M.size == 0:
        return 0.0
    if p == 1:
        return float(np.abs(M).sum(axis=0).max())
    if np.isinf(p):
        return float(np.abs(M).sum(axis=1).max())
    if p != 2:
        raise ValidationError(f"p must be 1, 2 or inf, got {p}")
    x = start_vector(M.shape[1])
    lam = 0.0
    for _ in range(max_iter):
        y = M.T @ (M @ x)
        new = float(x @ y)
        ny = np.linalg.norm(y)
        if ny == 0.0:
            return 0.0
        x = y / ny
        if abs(new - lam) <= tol * abs(new):
            return float(np.sqrt(new))
        lam = new
    raise ConvergenceError("power iteration for the 2-norm did not converge")


def cond2(M) -> float:
    """Spectral condition number, with the inverse formed by LU."""
    M = np.asarray(M, dtype=float)
    inv = lu_solve(M, np.eye(M.shape[0]))
    return matrix_pnorm(M, 2) * matrix_pnorm(inv, 2)


@dataclass(frozen=True)
class SpectralRadius:
    """Power-iteration estimate of max |lambda| with its convergence flag."""

    value: float
    converged: bool
    iterations: int

    def __float__(self) -> float:
        return self.value


def power_spectral_radius(M, max_iter: int = 20000, window: int = 100, tol: float = 1e-9) -> SpectralRadius:
    """Estimate the spectral radius by power iteration.

    The growth factor is averaged over two consecutive steps so that
    dominant eigenvalue pairs +-lambda do not make the ratio oscillate.
    """
    M = np.asarray(M, dtype=float)
    x = start_vector(M.shape[0])
    ratios = []
    stable = 0
    est = 0.0
    for it in range(1, max_iter + 1):
        y = M @ x
        ny = np.linalg.norm(y)
        if ny == 0.0 or not np.isfinite(ny):
            return SpectralRadius(0.0, False, it)
        ratios.append(ny)
        x = y / ny
        if len(ratios) >= 2:
            new = float(np.sqrt(ratios[-1] * ratios[-2]))
            stable = stable + 1 if abs(new - est) <= tol * new else 0
            est = new
            if stable >= window:
                return SpectralRadius(est, True, it)
        if ny < 1e-150:
            break
    return SpectralRadius(est, False, len(ratios))


def largest_real_root(coefficients, bracket, tol: float = 1e-13) -> float:
    """Root of a polynomial inside ``bracket`` by bisection.

    ``coefficients`` are ordered from the highest degree down.
    """
    a, b = (float(t) for t in bracket)
    fa = np.polyval(coefficients, a)
    fb = np.polyval(coefficients, b)
    if fa == 0.0:
        return a
    if fb == 0.0:
        return b
    if np.sign(fa) == np.sign(fb):
        raise NoSignChange(f"no sign change on [{a}, {b}]")
    while b - a > tol:
        mid = 0.5 * (a + b)
        fm = np.polyval(coefficients, mid)
        if fm == 0.0:
            return mid
        if np.sign(fm) == np.sign(fa):
            a, fa = mid, fm
        else:
            b = mid
    return 0.5 * (a + b)
