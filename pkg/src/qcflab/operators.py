"""Assembly of the linearized chain operators and their strain-space conjugates.

All matrices act on the 2N - 1 interior displacements.  Next-nearest
references beyond the boundary resolve to the ghost zeros u_{+-(N+1)} = 0.
"""

from __future__ import annotations

import enum
from dataclasses import dataclass

import numpy as np

from .errors import ValidationError
from .model import ModelParams, as_vector, chain_size, finite_differences

__all__ = [
    "OperatorKind",
    "Operator",
    "GhostForceVector",
    "ConjugateKind",
    "StrainOperator",
    "laplacian_matrix",
    "assemble",
    "ghost_forces",
    "difference_matrix",
    "integration_matrix",
    "mean_projector",
    "qcf_strain_map",
    "apply_inv_lap_qcf",
    "conjugate_strain_operator",
    "conjugate_displacement_map",
    "conjugate_iteration_matrix",
    "form_oracle",
]


class OperatorKind(str, enum.Enum):
    ATOM = "ATOM"
    LAPLACIAN = "LAPLACIAN"
    QCL = "QCL"
    QNL = "QNL"
    QCE = "QCE"
    QCF = "QCF"


@dataclass(frozen=True)
class Operator:
    """Dense operator on the interior displacements."""

    kind: OperatorKind
    matrix: np.ndarray
    params: ModelParams

    def __matmul__(self, other):
        return self.matrix @ other


@dataclass(frozen=True)
class GhostForceVector:
    values: np.ndarray
    phi1_2F: float


class ConjugateKind(str, enum.Enum):
    QCF_PRECONL = "QCF_PRECONL"
    QCE_OP = "QCE_OP"
    QCF_OP = "QCF_OP"
    QNL_OP = "QNL_OP"


@dataclass(frozen=True)
class StrainOperator:
    """A 2N x 2N matrix acting on strain vectors.

    ``exact_on_mean_zero`` records that the matrix reproduces the
    displacement-space operator on mean-zero strains; its action on the
    constant strain is a construction choice.
    """

    matrix: np.ndarray
    kind: str
    exact_on_mean_zero: bool = True


def _coerce_kind(kind, enum_cls):
    try:
        return kind if isinstance(kind, enum_cls) else enum_cls(str(kind).upper())
    except ValueError as exc:
        raise ValidationError(f"unknown kind {kind!r}") from exc


def laplacian_matrix(N: int) -> np.ndarray:
    """The Dirichlet three-point Laplacian eps^-2 (-1, 2, -1) on 2N-1 atoms."""
    N = chain_size(N)
    n = 2 * N - 1
    M = np.diag(np.full(n, 2.0)) - np.eye(n, k=1) - np.eye(n, k=-1)
    return M * float(N * N)


def _stencil_matrix(N: int, rows) -> np.ndarray:
    """Integer-valued matrix from {row atom: {column atom: coefficient}}.

    Columns outside the interior are dropped (boundary and ghost zeros).
    """
    n = 2 * N - 1
    B = np.zeros((n, n))
    for j, coeffs in rows.items():
        for c, v in coeffs.items():
            if -N < c < N:
                B[j + N - 1, c + N - 1] += v
    return B


def _nn2_stencil(N: int) -> np.ndarray:
    """Next-nearest second difference (-v_{j+2} + 2v_j - v_{j-2}) without the eps^-2."""
    return _stencil_matrix(N, {j: {j + 2: -1.0, j: 2.0, j - 2: -1.0} for j in range(-N + 1, N)})


def _qnl_stencil(N: int, K: int) -> np.ndarray:
    rows = {}
    for j in range(N):
        if j <= K - 1:
            c = {j + 2: -1.0, j: 2.0, j - 2: -1.0}
        elif j == K:
            c = {j + 1: -2.0, j: 3.0, j - 2: -1.0}
        elif j == K + 1:
            c = {j + 1: -4.0, j: 7.0, j - 1: -2.0, j - 2: -1.0}
        else:
            c = {j + 1: -4.0, j: 8.0, j - 1: -4.0}
        rows[j] = c
        if j > 0:
            rows[-j] = {-k: v for k, v in c.items()}
    return _stencil_matrix(N, rows)


def _qce_stencil(N: int, K: int) -> np.ndarray:
    rows = {}
    for j in range(-N + 1, N):
        if abs(j) <= K:
            rows[j] = {j + 2: -1.0, j: 2.0, j - 2: -1.0}
        else:
            rows[j] = {j + 1: -4.0, j: 8.0, j - 1: -4.0}
    B = _stencil_matrix(N, rows)
    # interface corrections on the right, mirrored onto the left; both are
    # superposed, which covers the row j = 0 shared by both sides when K = 1
    corrections = {
        K - 1: {K + 1: 0.5, K - 1: -0.5},
        K: {K + 1: -2.0, K: 1.5, K + 2: 0.5},
        K + 1: {K + 1: -1.5, K: 2.0, K - 1: -0.5},
        K + 2: {K + 2: 0.5, K: -0.5},
    }
    B += _stencil_matrix(N, corrections)
    B += _stencil_matrix(N, {-r: {-c: v for c, v in cs.items()} for r, cs in corrections.items()})
    return B


def assemble(params: ModelParams, kind) -> Operator:
    """Dense matrix of the requested linearized operator."""
    kind = _coerce_kind(kind, OperatorKind)
    N, K = params.N, params.K
    scale = float(N * N)
    lap = laplacian_matrix(N)
    if kind is OperatorKind.LAPLACIAN:
        M = lap
    elif kind is OperatorKind.QCL:
        M = params.A_F * lap
    elif kind is OperatorKind.ATOM:
        M = params.phi2_F * lap + params.phi2_2F * scale * _nn2_stencil(N)
    elif kind is OperatorKind.QNL:
        M = params.phi2_F * lap + params.phi2_2F * scale * _qnl_stencil(N, K)
    elif kind is OperatorKind.QCE:
        M = params.phi2_F * lap + params.phi2_2F * scale * _qce_stencil(N, K)
    else:
        M = assemble(params, OperatorKind.QCL).matrix.copy()
        atom = assemble(params, OperatorKind.ATOM).matrix
        rows = slice(N - 1 - K, N + K)
        M[rows] = atom[rows]
    return Operator(kind, M, params)


def ghost_forces(params: ModelParams, phi1_2F: float) -> GhostForceVector:
    """Interface forces of QCE under uniform strain, scaled by phi'(2F)."""
    N, K = params.N, params.K
    if K + 2 > N - 1:
        raise ValidationError(f"ghost forces need K + 2 <= N - 1, got K={K}, N={N}")
    g = np.zeros(params.n)
    a = phi1_2F * N / 2.0
    for j, s in ((K - 1, -1.0), (K, 1.0), (K + 1, 1.0), (K + 2, -1.0)):
        g[j + N - 1] += s * a
        g[-j + N - 1] -= s * a
    return GhostForceVector(g, float(phi1_2F))


def difference_matrix(N: int) -> np.ndarray:
    """D with D u = strain of u; shape 2N x (2N-1)."""
    N = chain_size(N)
    n = 2 * N - 1
    D = np.zeros((2 * N, n))
    D[np.arange(n), np.arange(n)] = N
    D[np.arange(1, 2 * N), np.arange(n)] = -N
    return D


def integration_matrix(N: int) -> np.ndarray:
    """C with C w = u for every mean-zero strain w = u'; shape (2N-1) x 2N."""
    N = chain_size(N)
    return np.tril(np.ones((2 * N - 1, 2 * N))) / N


def mean_projector(N: int) -> np.ndarray:
    """Orthogonal projector onto mean-zero strain vectors."""
    m = 2 * chain_size(N)
    return np.eye(m) - np.full((m, m), 1.0 / m)


def _strain_slot(N: int, l: int) -> int:
    return l + N - 1


def qcf_strain_map(params: ModelParams, W: np.ndarray) -> np.ndarray:
    """Strain of (L^1)^-1 L^qcf applied to the displacement with strain W.

    ``W`` has leading dimension 2N; extra trailing dimensions are batched.
    On mean-zero input this is exact; on other input it is the natural
    extension of the same formulas.
    """
    N, K = params.N, params.K
    eps = params.eps
    p1, p2, AF = params.phi2_F, params.phi2_2F, params.A_F
    W = np.asarray(W, dtype=float)
    s = lambda l: _strain_slot(N, l)
    lo, hi = s(-K + 1), s(K) + 1
    Z = AF * W
    Z[lo:hi] = p1 * W[lo:hi] + p2 * (W[lo - 1:hi - 1] + 2.0 * W[lo:hi] + W[lo + 1:hi + 1])
    mean = 0.5 * eps * p2 * (W[s(K + 1)] - W[s(K)] - W[s(-K + 1)] + W[s(-K)])
    Z -= mean
    alpha_m = W[s(-K + 1)] - 2.0 * W[s(-K)] + W[s(-K - 1)]
    alpha_p = W[s(K + 2)] - 2.0 * W[s(K + 1)] + W[s(K)]
    ell = np.arange(-N + 1, N + 1)
    h_m = np.where(ell <= -K, 0.5 * (1.0 + eps * K), 0.5 * (-1.0 + eps * K))
    h_p = np.where(ell <= K, 0.5 * (1.0 - eps * K), 0.5 * (-1.0 - eps * K))
    shape = (-1,) + (1,) * (W.ndim - 1)
    Z += p2 * (h_m.reshape(shape) * alpha_m - h_p.reshape(shape) * alpha_p)
    return Z


def apply_inv_lap_qcf(params: ModelParams, u):
    """(L^1)^-1 L^qcf u in O(N) operations, without assembling matrices."""
    w = finite_differences(params, u)[0]
    z = qcf_strain_map(params, w)
    return np.cumsum(z)[:-1] * params.eps


def conjugate_displacement_map(params_or_N, G: np.ndarray) -> np.ndarray:
    """D G C P: the strain-space image of a displacement map, killing constants."""
    N = chain_size(params_or_N)
    G = np.asarray(G, dtype=float)
    DGC = difference_matrix(N) @ G @ integration_matrix(N)
    return DGC - DGC.mean(axis=1, keepdims=True)


def conjugate_iteration_matrix(params_or_N, G: np.ndarray, p: float = np.inf) -> np.ndarray:
    """Strain-space conjugate of a displacement map, tuned for the l^p matrix norm.

    Every extension of D G C from the mean-zero strains to all strains has
    the form D G C P + c 1^T.  For p = inf the rows decouple and subtracting
    each row's median gives the smallest max-row-sum among all extensions.
    For p = 1 the median shift is kept only when it lowers the column-sum
    norm below that of D G C P.
    """
    G0 = conjugate_displacement_map(params_or_N, G)
    shifted = G0 - np.median(G0, axis=1, keepdims=True)
    if np.isinf(p):
        return shifted
    if np.abs(shifted).sum(axis=0).max() < np.abs(G0).sum(axis=0).max():
        return shifted
    return G0


def conjugate_strain_operator(params: ModelParams, kind) -> StrainOperator:
    """Strain-space representation of (L^1)^-1 H for H in the catalogue.

    QCF_PRECONL evaluates the O(N) representation on the unit strains.  The
    force operators are built column by column from D (L^1)^-1 H C on the
    mean-zero subspace, with the constant strain sent to A_F times itself
    (the uniform-strain response of the consistent operators).
    """
    kind = _coerce_kind(kind, ConjugateKind)
    N = params.N
    if kind is ConjugateKind.QCF_PRECONL:
        return StrainOperator(qcf_strain_map(params, np.eye(2 * N)), kind.value)
    op = {
        ConjugateKind.QCE_OP: OperatorKind.QCE,
        ConjugateKind.QCF_OP: OperatorKind.QCF,
        ConjugateKind.QNL_OP: OperatorKind.QNL,
    }[kind]
    from .linalg import solve_tridiagonal

    H = assemble(params, op).matrix
    lap = laplacian_matrix(N)
    Z = solve_tridiagonal(np.diag(lap), np.diag(lap, 1), H)
    M = conjugate_displacement_map(N, Z) + params.A_F / (2 * N)
    return StrainOperator(M, kind.value)


def form_oracle(params: ModelParams, kind, u) -> float:
    """<L u, u> evaluated from the strain/curvature decomposition, not the matrix."""
    kind = _coerce_kind(kind, OperatorKind)
    N, K = params.N, params.K
    eps, AF, p2 = params.eps, params.A_F, params.phi2_2F
    w, _, c = finite_differences(params, u)
    if kind is OperatorKind.ATOM:
        return float(eps * AF * (w @ w) - eps**3 * p2 * (c @ c))
    if kind is not OperatorKind.QCE:
        raise ValidationError(f"no decomposition oracle for {kind.value}")
    W = lambda l: w[l + N - 1]
    C = lambda l: c[l + N]
    sq = lambda a, b: sum(W(l) ** 2 for l in range(a, b + 1))
    total = AF * (sq(-N + 1, -K - 2) + sq(K + 3, N) + sq(-K + 2, K - 1))
    total -= eps**2 * p2 * sum(C(l) ** 2 for l in range(-K + 1, K))
    total += (AF - p2) * (W(-K + 1) ** 2 + W(K) ** 2)
    total += AF * (W(-K) ** 2 + W(K + 1) ** 2)
    total += (AF + p2) * (W(-K - 1) ** 2 + W(K + 2) ** 2)
    total -= 0.5 * eps**2 * p2 * (C(-K) ** 2 + C(-K - 1) ** 2 + C(K) ** 2 + C(K + 1) ** 2)
    return float(eps * total)
