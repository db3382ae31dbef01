"""Iteration matrices and their operator norms in the discrete Sobolev spaces."""

from __future__ import annotations

import enum
import math
from dataclasses import dataclass, field
from typing import Callable, Sequence

import numpy as np

from .errors import QCError, SingularMatrix, UnstableParams, ValidationError
from .iteration import PreconditionerKind, step_size
from .linalg import gen_sym_eigen, lu_factor, lu_solve, matrix_pnorm, solve_tridiagonal
from .model import ModelParams, NormKind, make_params
from .operators import (
    assemble,
    conjugate_iteration_matrix,
    conjugate_strain_operator,
    laplacian_matrix,
)
from .spectral import laplacian_spectral_factors

__all__ = [
    "NormMethod",
    "OpNormResult",
    "iteration_matrix",
    "iteration_conjugate",
    "iteration_similar",
    "opnorm",
    "u12_norm_similarity",
    "qcf_dual_opnorm",
    "inv_qcf_02inf_to_2inf",
    "SweepSpec",
    "SweepResult",
    "scaling_sweep",
    "SWEEP_COLUMNS",
    "sqrt_k_rule",
]


class NormMethod(str, enum.Enum):
    MATRIX_PNORM = "MATRIX_PNORM"
    CONJUGATE_BRACKET = "CONJUGATE_BRACKET"
    GEN_EIG = "GEN_EIG"
    SIMILARITY_TRANSFORM = "SIMILARITY_TRANSFORM"


@dataclass(frozen=True)
class OpNormResult:
    """An operator norm with a two-sided bracket (equal ends when exact)."""

    value: float
    bracket_low: float
    bracket_high: float
    method: NormMethod
    kind: NormKind

    @property
    def exact(self) -> bool:
        return self.method is not NormMethod.CONJUGATE_BRACKET


def _lap_solve(N: int, B):
    lap = laplacian_matrix(N)
    return solve_tridiagonal(np.diag(lap), np.diag(lap, 1), B)


def iteration_matrix(params: ModelParams, precond, alpha: float) -> np.ndarray:
    """G = I - alpha P^-1 L^qcf as a dense matrix."""
    precond = PreconditionerKind.parse(precond)
    L = assemble(params, "QCF").matrix
    if precond is PreconditionerKind.IDENTITY:
        Z = L
    elif precond is PreconditionerKind.QCL:
        if params.A_F == 0.0:
            raise SingularMatrix("A_F = 0: the QCL preconditioner is singular")
        Z = _lap_solve(params.N, L) / params.A_F
    else:
        try:
            Z = lu_solve(lu_factor(assemble(params, "QCE").matrix), L)
        except SingularMatrix as exc:
            raise SingularMatrix(f"QCE preconditioner is singular: {exc}") from exc
    return np.eye(params.n) - alpha * Z


def iteration_conjugate(params: ModelParams, precond, alpha: float) -> np.ndarray | None:
    """Strain-space conjugate built from the O(N) representation, where one exists.

    For the QCL preconditioner G^ = I - (alpha / A_F) H^ with H^ the strain
    representation of (L^1)^-1 L^qcf; other preconditioners return None
    and ``opnorm`` falls back to the generic construction.
    """
    precond = PreconditionerKind.parse(precond)
    if precond is not PreconditionerKind.QCL:
        return None
    H = conjugate_strain_operator(params, "QCF_PRECONL").matrix
    return np.eye(2 * params.N) - (alpha / params.A_F) * H


def iteration_similar(params: ModelParams, precond, alpha: float) -> np.ndarray:
    """L^1 G (L^1)^-1 assembled as I - alpha (L^1 P^-1)(L^qcf (L^1)^-1).

    Multiplying a computed G by L^1 amplifies its rounding by cond(L^1),
    about N^2; this factored form keeps (2,p) norms accurate at large N.
    """
    precond = PreconditionerKind.parse(precond)
    N = params.N
    right = _lap_solve(N, assemble(params, "QCF").matrix.T).T
    if precond is PreconditionerKind.IDENTITY:
        Z = laplacian_matrix(N) @ right
    elif precond is PreconditionerKind.QCL:
        if params.A_F == 0.0:
            raise SingularMatrix("A_F = 0: the QCL preconditioner is singular")
        Z = right / params.A_F
    else:
        try:
            left = lu_solve(lu_factor(assemble(params, "QCE").matrix), laplacian_matrix(N)).T
        except SingularMatrix as exc:
            raise SingularMatrix(f"QCE preconditioner is singular: {exc}") from exc
        Z = left @ right
    return np.eye(params.n) - alpha * Z


def _similar_k2(params: ModelParams, G) -> np.ndarray:
    """L^1 G (L^1)^-1 using solves only."""
    X = laplacian_matrix(params.N) @ G
    return _lap_solve(params.N, X.T).T


def opnorm(params: ModelParams, G, kind: NormKind, conjugate=None, similar=None) -> OpNormResult:
    """||G|| as an operator on U^{k,p}.

    (0,p) and (2,p) are exact matrix norms, (1,2) is an exact generalized
    eigenvalue, and (1,1), (1,inf) come as the l^p norm m of a strain-space
    conjugate with the bracket [m/2, m].  ``conjugate`` and ``similar``
    override the generic strain-space conjugate and L^1 G (L^1)^-1.
    """
    G = np.asarray(G, dtype=float)
    if G.shape != (params.n, params.n):
        raise ValidationError(f"G must be {params.n}x{params.n}, got {G.shape}")
    if kind.k == 0:
        v = matrix_pnorm(G, kind.p)
        return OpNormResult(v, v, v, NormMethod.MATRIX_PNORM, kind)
    if kind.k == 2:
        S = _similar_k2(params, G) if similar is None else np.asarray(similar, dtype=float)
        v = matrix_pnorm(S, kind.p)
        return OpNormResult(v, v, v, NormMethod.SIMILARITY_TRANSFORM, kind)
    if kind.p == 2:
        lap = laplacian_matrix(params.N)
        A = G.T @ lap @ G
        lam = gen_sym_eigen(0.5 * (A + A.T), lap).eigenvalues[-1]
        v = math.sqrt(max(lam, 0.0))
        return OpNormResult(v, v, v, NormMethod.GEN_EIG, kind)
    Gh = conjugate if conjugate is not None else conjugate_iteration_matrix(params, G, kind.p)
    m = matrix_pnorm(np.asarray(Gh, dtype=float), kind.p)
    return OpNormResult(m, 0.5 * m, m, NormMethod.CONJUGATE_BRACKET, kind)


def u12_norm_similarity(params: ModelParams, G) -> float:
    """||G||_{U^{1,2}} as the 2-norm of L^{1/2} G L^{-1/2} (second route)."""
    fac = laplacian_spectral_factors(params)
    M = fac.sqrt(G)
    M = fac.inv_sqrt(M.T).T
    return matrix_pnorm(M, 2)


def qcf_dual_opnorm(params: ModelParams, p) -> OpNormResult:
    """Norm of L^qcf from U^{1,p} to its dual U^{-1,p}, via (L^1)^-1 L^qcf."""
    kind = NormKind(1, p)
    if kind.p == 2:
        fac = laplacian_spectral_factors(params)
        L = assemble(params, "QCF").matrix
        M = fac.inv_sqrt(fac.inv_sqrt(L).T).T
        v = matrix_pnorm(M, 2)
        return OpNormResult(v, v, v, NormMethod.SIMILARITY_TRANSFORM, kind)
    H = conjugate_strain_operator(params, "QCF_PRECONL").matrix
    m = matrix_pnorm(H, kind.p)
    return OpNormResult(m, 0.5 * m, m, NormMethod.CONJUGATE_BRACKET, kind)


def inv_qcf_02inf_to_2inf(params: ModelParams) -> float:
    """||(L^qcf)^-1|| from U^{0,inf} to U^{2,inf}, i.e. ||L^1 (L^qcf)^-1||_inf."""
    if params.A_F <= 0:
        raise UnstableParams(f"A_F = {params.A_F:.6g} <= 0")
    L = assemble(params, "QCF").matrix
    inv = lu_solve(lu_factor(L), np.eye(params.n))
    return matrix_pnorm(laplacian_matrix(params.N) @ inv, np.inf)


def sqrt_k_rule(N: int) -> int:
    """K = ceil(sqrt(N)) - 1."""
    return int(math.ceil(math.sqrt(N))) - 1


SWEEP_COLUMNS = ["N", "K", "k", "p", "value", "bracket_low", "bracket_high", "method"]


@dataclass
class SweepSpec:
    """A grid of chain sizes and the norms to evaluate at each.

    ``af_ratio`` fixes A_F / phi2_F; ``alpha`` is a number or a step rule.
    """

    kinds: Sequence[NormKind]
    Ns: Sequence[int]
    k_rule: Callable[[int], int] = sqrt_k_rule
    phi2_F: float = 1.0
    af_ratio: float = 0.8
    precond: str = "QCE"
    alpha: object = 1.0


@dataclass
class SweepResult:
    rows: list = field(default_factory=list)
    slopes: dict = field(default_factory=dict)


def _fit_slope(Ns, values) -> float:
    pts = [(n, v) for n, v in zip(Ns, values) if v is not None and v > 0 and np.isfinite(v)]
    if len(pts) < 3:
        pts = pts if len(pts) >= 2 else []
    else:
        smallest = min(n for n, _ in pts)
        pts = [(n, v) for n, v in pts if n != smallest]
    if len(pts) < 2:
        return float("nan")
    x = np.log([n for n, _ in pts])
    y = np.log([v for _, v in pts])
    return float(np.polyfit(x, y, 1)[0])


def scaling_sweep(spec: SweepSpec) -> SweepResult:
    """Evaluate the requested norms over N and fit log-log slopes.

    Slopes exclude the smallest N.  A failing cell is recorded with method
    FAILED and the sweep carries on.
    """
    result = SweepResult()
    per_kind = {str(k): [] for k in spec.kinds}
    phi2_2F = (spec.af_ratio - 1.0) * spec.phi2_F / 4.0
    for N in spec.Ns:
        K = spec.k_rule(N)
        try:
            params = make_params(N, K, spec.phi2_F, phi2_2F)
            alpha = step_size(params, spec.alpha)
            G = iteration_matrix(params, spec.precond, alpha)
            conj = iteration_conjugate(params, spec.precond, alpha)
            sim = iteration_similar(params, spec.precond, alpha) if any(k.k == 2 for k in spec.kinds) else None
        except QCError as exc:
            G, err = None, exc
        for kind in spec.kinds:
            row = {"N": N, "K": K, "k": kind.k, "p": _p_label(kind.p)}
            try:
                if G is None:
                    raise err
                res = opnorm(params, G, kind, conjugate=conj if kind.k == 1 and kind.p != 2 else None, similar=sim)
                row.update(value=res.value, bracket_low=res.bracket_low,
                           bracket_high=res.bracket_high, method=res.method.value)
                per_kind[str(kind)].append((N, res.value))
            except QCError:
                row.update(value=float("nan"), bracket_low=float("nan"),
                           bracket_high=float("nan"), method="FAILED")
            result.rows.append(row)
    for kind in spec.kinds:
        pts = per_kind[str(kind)]
        result.slopes[str(kind)] = _fit_slope([n for n, _ in pts], [v for _, v in pts])
    return result


def _p_label(p: float) -> str:
    return "inf" if np.isinf(p) else str(int(p))
