"""Closed-form spectra, stability constants and the critical strain."""

from __future__ import annotations

import enum
import math
from dataclasses import dataclass, field
from typing import Callable

import numpy as np
import scipy.fft

from .errors import NoSignChange, SingularMatrix, UnstableParams, ValidationError
from .linalg import cond2, gen_sym_eigen, largest_real_root, sym_eigen
from .model import ModelParams, chain_size
from .operators import assemble, difference_matrix, laplacian_matrix

__all__ = [
    "LaplacianFactors",
    "laplacian_spectral_factors",
    "qnl_u12_spectrum",
    "similarity_residual",
    "EigenbasisCond",
    "qcf_eigenbasis_cond",
    "StabilityKind",
    "StabilityReport",
    "stability_constants",
    "curvature_matrix",
    "nu_eps",
    "LambdaStar",
    "lambda_star",
    "QUINTIC",
    "interface_matrix",
    "interface_eigen_direct",
    "PotentialSpec",
    "lennard_jones",
    "critical_strain",
]

# q(z) = 4z^5 - 12z^4 + 9z^3 - 3z^2 - 4z + 2
QUINTIC = (4.0, -12.0, 9.0, -3.0, -4.0, 2.0)


@dataclass(frozen=True)
class LaplacianFactors:
    """Sine-basis diagonalization of the Dirichlet Laplacian L^1."""

    N: int
    eigenvalues: np.ndarray

    def _apply(self, v, power):
        v = np.asarray(v, dtype=float)
        shape = (-1,) + (1,) * (v.ndim - 1)
        c = scipy.fft.dst(v, type=1, norm="ortho", axis=0)
        c *= self.eigenvalues.reshape(shape) ** power
        return scipy.fft.dst(c, type=1, norm="ortho", axis=0)

    def sqrt(self, v):
        """L^{1/2} v."""
        return self._apply(v, 0.5)

    def inv_sqrt(self, v):
        """L^{-1/2} v."""
        return self._apply(v, -0.5)

    def power(self, v, s: float):
        return self._apply(v, s)


def laplacian_spectral_factors(params) -> LaplacianFactors:
    """Eigenvalues 4 eps^-2 sin^2(j pi / 4N), j = 1..2N-1, and sine-basis appliers."""
    N = chain_size(params)
    j = np.arange(1, 2 * N)
    lam = 4.0 * N * N * np.sin(j * np.pi / (4 * N)) ** 2
    return LaplacianFactors(N, lam)


def qnl_u12_spectrum(params: ModelParams) -> np.ndarray:
    """Eigenvalues of L^qnl relative to L^1, in ascending order."""
    K = params.K
    mu = np.full(params.n, params.A_F)
    j = np.arange(1, 2 * K + 2)
    mu[: 2 * K + 1] = params.A_F - 4.0 * params.phi2_2F * np.sin(j * np.pi / (4 * K + 4)) ** 2
    return np.sort(mu)


def similarity_residual(params: ModelParams) -> float:
    """Relative residual of L^1 L^qcf = L^qnl L^1 in the Frobenius norm."""
    lap = laplacian_matrix(params.N)
    qcf = assemble(params, "QCF").matrix
    qnl = assemble(params, "QNL").matrix
    right = qnl @ lap
    return float(np.linalg.norm(lap @ qcf - right) / np.linalg.norm(right))


@dataclass(frozen=True)
class EigenbasisCond:
    cond_V: float
    cond_W: float


def _unit_columns(params, V):
    return V / np.sqrt(params.eps * np.sum(V * V, axis=0))


def qcf_eigenbasis_cond(params: ModelParams) -> EigenbasisCond:
    """Condition numbers of eigenvector bases of L^qcf and L^{-1/2} L^qcf L^{-1/2}.

    Eigenvectors of L^qcf are (L^1)^-1 q for eigenvectors q of L^qnl; the
    columns are scaled to unit l^2_eps norm.  For the preconditioned
    operator the basis is (Q~^T L^1)^-1 with Q~ orthogonal eigenvectors of
    L^{-1/2} L^qnl L^{-1/2}, so cond_W = cond(Q~^T L^1).
    """
    if params.A_F == 0.0:
        raise SingularMatrix("A_F = 0: L^qcf is singular")
    lap = laplacian_matrix(params.N)
    qnl = assemble(params, "QNL").matrix
    fac = laplacian_spectral_factors(params)
    Q = sym_eigen(qnl).eigenvectors
    V = _unit_columns(params, np.linalg.solve(lap, Q))
    S = fac.inv_sqrt(fac.inv_sqrt(qnl).T)
    Qt = sym_eigen(0.5 * (S + S.T)).eigenvectors
    return EigenbasisCond(cond2(V), cond2(Qt.T @ lap))


class StabilityKind(str, enum.Enum):
    ATOM = "ATOM"
    QNL = "QNL"
    QCE = "QCE"
    QCF_SYM = "QCF_SYM"


@dataclass(frozen=True)
class StabilityReport:
    """Coercivity constants of one operator relative to the U^{1,2} seminorm.

    ``lambda_K`` is NaN unless the kind is QCE and phi2_2F < 0.
    """

    kind: str
    params: ModelParams
    inf_u12: float
    lambda_K: float
    nu_eps: float

    def as_dict(self) -> dict:
        out = {"kind": self.kind}
        out.update(self.params.as_dict())
        out.update(inf_u12=self.inf_u12, lambda_K=self.lambda_K, nu_eps=self.nu_eps)
        return out


def curvature_matrix(N: int) -> np.ndarray:
    """Extended curvature operator, (2N+1) x (2N-1), rows l = -N..N."""
    N = chain_size(N)
    n = 2 * N - 1
    D2 = np.zeros((2 * N + 1, n))
    cols = np.arange(n)
    D2[cols, cols] += 1.0
    D2[cols + 1, cols] -= 2.0
    D2[cols + 2, cols] += 1.0
    return D2 * float(N * N)


def nu_eps(params) -> float:
    """min ||u''||^2 / ||u'||^2 over interior displacements (ghost zeros included)."""
    N = chain_size(params)
    D1 = difference_matrix(N)
    D2 = curvature_matrix(N)
    return float(gen_sym_eigen(D2.T @ D2, D1.T @ D1).eigenvalues[0])


def stability_constants(params: ModelParams, kind) -> StabilityReport:
    """Smallest generalized eigenvalue of (sym(L), L^1) and derived constants."""
    try:
        kind = kind if isinstance(kind, StabilityKind) else StabilityKind(str(kind).upper())
    except ValueError as exc:
        raise ValidationError(f"unknown stability kind {kind!r}") from exc
    op = "QCF" if kind is StabilityKind.QCF_SYM else kind.value
    M = assemble(params, op).matrix
    M = 0.5 * (M + M.T)
    lam = gen_sym_eigen(M, laplacian_matrix(params.N)).eigenvalues
    inf_u12 = float(lam[0])
    lam_K = float("nan")
    if kind is StabilityKind.QCE and params.phi2_2F < 0:
        lam_K = (params.A_F - inf_u12) / (-params.phi2_2F)
    return StabilityReport(kind.value, params, inf_u12, lam_K, nu_eps(params))


@dataclass(frozen=True)
class LambdaStar:
    z_hat: float
    lambda_hat: float
    lambda_star: float
    c: float


def lambda_star() -> LambdaStar:
    """Limit of the QCE interface constant and its exponential decay rate."""
    z = largest_real_root(QUINTIC, (2.0, 3.0))
    lam_hat = z + 1.0 / z + 2.0
    return LambdaStar(z, lam_hat, lam_hat - 4.0, 2.0 * math.log(z))


def interface_matrix(K: int) -> np.ndarray:
    """The (2K+4)-square interface matrix on strains l = -K-1..K+2."""
    if K < 1:
        raise ValidationError("K must be >= 1")
    n = 2 * K + 4
    H = np.diag(np.full(n, 2.0)) + np.eye(n, k=1) + np.eye(n, k=-1)
    corner = np.array([[4.5, 0.5, 0.0], [0.5, 3.0, 0.5], [0.0, 0.5, 1.5]])
    H[:3, :3] = corner
    H[-3:, -3:] = corner[::-1, ::-1]
    return H


def interface_eigen_direct(K: int, skew_only: bool = True) -> float:
    """Largest eigenvalue of the interface matrix.

    By default the maximization runs over skew vectors psi_l = -psi_{1-l},
    the mirror-odd strain profiles that stay mean-zero and so come from an
    admissible displacement.  ``skew_only=False`` returns the unrestricted
    maximum.
    """
    H = interface_matrix(K)
    n = H.shape[0]
    if not skew_only:
        return float(sym_eigen(H).eigenvalues[-1])
    half = n // 2
    Q = np.zeros((n, half))
    i = np.arange(half)
    Q[i, i] = np.sqrt(0.5)
    Q[n - 1 - i, i] = -np.sqrt(0.5)
    return float(sym_eigen(Q.T @ H @ Q).eigenvalues[-1])


@dataclass(frozen=True)
class PotentialSpec:
    """Second derivative of a pair potential and its ground-state strain."""

    second_derivative: Callable[[float], float]
    F0: float = 1.0
    name: str = field(default="custom", compare=False)

    def A(self, F: float) -> float:
        return self.second_derivative(F) + 4.0 * self.second_derivative(2.0 * F)


def lennard_jones() -> PotentialSpec:
    """phi(r) = r^-12 - 2 r^-6, with minimum at r = 1."""
    return PotentialSpec(lambda r: 156.0 * r**-14 - 84.0 * r**-8, 1.0, "lj")


def critical_strain(potential: PotentialSpec, step: float = 1e-3, tol: float = 1e-12) -> float:
    """Smallest F > F0 with phi''(F) + 4 phi''(2F) = 0."""
    F0 = potential.F0
    if not potential.A(F0) > 0:
        raise UnstableParams(f"A_F at the ground state F0={F0} is not positive")
    a = F0
    fa = potential.A(a)
    k = 1
    while True:
        b = F0 + k * step
        if b > 10.0 * F0:
            raise NoSignChange("A_F has no root below 10 F0")
        fb = potential.A(b)
        if fb == 0.0:
            return b
        if np.sign(fb) != np.sign(fa):
            break
        a, fa = b, fb
        k += 1
    while b - a > tol:
        m = 0.5 * (a + b)
        fm = potential.A(m)
        if fm == 0.0:
            return m
        if np.sign(fm) == np.sign(fa):
            a, fa = m, fm
        else:
            b = m
    return 0.5 * (a + b)
