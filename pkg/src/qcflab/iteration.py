"""Stationary iterations P (u_{n+1} - u_n) = alpha (f - L^qcf u_n) and their rates."""

from __future__ import annotations

import enum
import math
from dataclasses import dataclass, field

import numpy as np

from .errors import SingularMatrix, UnstableParams, ValidationError
from .linalg import lu_factor, lu_solve, solve_tridiagonal, sym_eigen
from .model import ModelParams, NormKind, as_vector, vector_norm
from .operators import assemble, laplacian_matrix
from .spectral import qnl_u12_spectrum

__all__ = [
    "PreconditionerKind",
    "StepRule",
    "step_size",
    "predicted_rate",
    "IterationTrace",
    "run_iteration",
    "MeasuredRate",
    "measured_rate",
    "DEFAULT_KINDS",
    "DIVERGENCE_FACTOR",
]

DIVERGENCE_FACTOR = 1e12
DEFAULT_KINDS = (NormKind(0, 2), NormKind(1, 2), NormKind(1, np.inf), NormKind(2, np.inf))


class PreconditionerKind(str, enum.Enum):
    IDENTITY = "IDENTITY"
    QCL = "QCL"
    QCE = "QCE"

    @classmethod
    def parse(cls, value) -> "PreconditionerKind":
        if isinstance(value, cls):
            return value
        aliases = {"ID": "IDENTITY", "I": "IDENTITY", "GFC": "QCE"}
        key = str(value).upper()
        try:
            return cls(aliases.get(key, key))
        except ValueError as exc:
            raise ValidationError(f"unknown preconditioner {value!r}") from exc


class StepRule(str, enum.Enum):
    RICH_MAX = "RICH_MAX"
    RICH_OPT = "RICH_OPT"
    QCL_OPT_2INF = "QCL_OPT_2INF"
    QCL_MAX_2INF = "QCL_MAX_2INF"
    QCL_OPT_1INF = "QCL_OPT_1INF"
    QCL_MAX_1INF = "QCL_MAX_1INF"
    QCL_OPT_12 = "QCL_OPT_12"
    QCL_MAX_12 = "QCL_MAX_12"
    GFC_UNIT = "GFC_UNIT"

    @classmethod
    def parse(cls, value) -> "StepRule":
        if isinstance(value, cls):
            return value
        try:
            return cls(str(value).upper().replace("-", "_"))
        except ValueError as exc:
            raise ValidationError(f"unknown step rule {value!r}") from exc


def _qnl_extremes(params: ModelParams):
    lam = sym_eigen(assemble(params, "QNL").matrix).eigenvalues
    return float(lam[0]), float(lam[-1])


def step_size(params: ModelParams, rule) -> float:
    """Step size alpha prescribed by ``rule``; a plain number is returned as is."""
    if isinstance(rule, (int, float)) and not isinstance(rule, bool):
        return float(rule)
    rule = StepRule.parse(rule)
    if rule is StepRule.GFC_UNIT:
        return 1.0
    AF, p1, p2 = params.A_F, params.phi2_F, params.phi2_2F
    if AF <= 0:
        raise UnstableParams(f"A_F = {AF:.6g} <= 0: no stable step size")
    eps, K = params.eps, params.K
    a = abs(p2)
    if rule is StepRule.RICH_MAX:
        return 2.0 / _qnl_extremes(params)[1]
    if rule is StepRule.RICH_OPT:
        lo, hi = _qnl_extremes(params)
        return 2.0 / (lo + hi)
    if rule is StepRule.QCL_OPT_2INF:
        return 2.0 * AF / (p1 + AF)
    if rule is StepRule.QCL_MAX_2INF:
        return 2.0 * AF / p1
    if rule is StepRule.QCL_OPT_1INF:
        return 1.0 / (1.0 + (2.0 + eps - 2.0 * eps * K) * a / AF)
    if rule is StepRule.QCL_MAX_1INF:
        return 2.0 * AF / (AF + (8.0 + 2.0 * eps - 4.0 * eps * K) * a)
    mu = qnl_u12_spectrum(params)
    if rule is StepRule.QCL_OPT_12:
        return 2.0 * AF / (mu[0] + mu[-1])
    return 2.0 * AF / mu[-1]


def predicted_rate(params: ModelParams, precond, alpha: float, kind: NormKind, corrected: bool = False):
    """Closed-form contraction factor, or None where no formula exists.

    For QCL in U^{1,inf} the default is the printed two-branch formula;
    ``corrected=True`` uses max(C-branch, A-branch) with the A-branch
    coefficient 6 - 2 eps - 4 eps K, which matches direct computation.
    """
    precond = PreconditionerKind.parse(precond)
    alpha = float(alpha)
    AF, p1, p2 = params.A_F, params.phi2_F, params.phi2_2F
    if precond is PreconditionerKind.IDENTITY and (kind.k, kind.p) == (0, 2.0):
        lam = sym_eigen(assemble(params, "QNL").matrix).eigenvalues
        return float(np.max(np.abs(1.0 - alpha * lam)))
    if precond is not PreconditionerKind.QCL:
        return None
    if alpha == 0.0:
        return 1.0
    if AF == 0.0:
        return None
    a = abs(p2 / AF)
    if (kind.k, kind.p) == (2, math.inf):
        return abs(1.0 - alpha * (1.0 - 2.0 * p2 / AF)) + alpha * abs(2.0 * p2 / AF)
    if (kind.k, kind.p) == (1, math.inf):
        eps, K = params.eps, params.K
        branch_c = abs(1.0 - alpha) + 4.0 * alpha * a
        if corrected:
            branch_a = abs(1.0 - alpha * (1.0 + 2.0 * a)) + alpha * (6.0 - 2.0 * eps - 4.0 * eps * K) * a
            return max(branch_c, branch_a)
        if alpha <= 1.0 / (1.0 + (2.0 + eps - 2.0 * eps * K) * a):
            return branch_c
        return abs(1.0 - alpha * (1.0 - 2.0 * p2 / AF)) + alpha * (6.0 + 2.0 * eps - 4.0 * eps * K) * a
    if (kind.k, kind.p) == (1, 2.0):
        mu = qnl_u12_spectrum(params)
        return float(np.max(np.abs(1.0 - alpha / AF * mu)))
    return None


@dataclass
class IterationTrace:
    """Per-step residual and error norms of one stationary iteration."""

    params: ModelParams
    precond: PreconditionerKind
    alpha: float
    kinds: tuple
    steps: list = field(default_factory=list)
    residuals: dict = field(default_factory=dict)
    errors: dict = field(default_factory=dict)
    verdict: str = "MAXITER"
    solution: np.ndarray | None = None

    def residual(self, kind: NormKind) -> np.ndarray:
        return np.asarray(self.residuals[kind.label])

    def error(self, kind: NormKind) -> np.ndarray:
        return np.asarray(self.errors[kind.label])

    @property
    def columns(self):
        cols = ["n"]
        cols += [f"res_{k.label}" for k in self.kinds]
        cols += [f"err_{k.label}" for k in self.kinds]
        return cols

    def rows(self):
        for i, n in enumerate(self.steps):
            row = {"n": n}
            for k in self.kinds:
                row[f"res_{k.label}"] = float(self.residuals[k.label][i])
                row[f"err_{k.label}"] = float(self.errors[k.label][i])
            yield row


class _Preconditioner:
    def __init__(self, params: ModelParams, kind: PreconditionerKind):
        self.kind = kind
        if kind is PreconditionerKind.QCL:
            if params.A_F <= 0:
                raise UnstableParams(f"A_F = {params.A_F:.6g} <= 0: QCL preconditioner is not positive")
            lap = laplacian_matrix(params.N) * params.A_F
            self._diag, self._off = np.diag(lap).copy(), np.diag(lap, 1).copy()
        elif kind is PreconditionerKind.QCE:
            try:
                self._lu = lu_factor(assemble(params, "QCE").matrix)
            except SingularMatrix as exc:
                raise SingularMatrix(f"QCE preconditioner is singular: {exc}") from exc

    def solve(self, r):
        if self.kind is PreconditionerKind.IDENTITY:
            return r
        if self.kind is PreconditionerKind.QCL:
            return solve_tridiagonal(self._diag, self._off, r)
        return lu_solve(self._lu, r)


def _unique_kinds(kinds):
    out = []
    for k in list(kinds) + list(DEFAULT_KINDS):
        if k not in out:
            out.append(k)
    return tuple(out)


def run_iteration(
    params: ModelParams,
    precond,
    alpha: float,
    f,
    u0=None,
    max_iter: int = 1000,
    tol: float = 1e-10,
    kinds=(),
) -> IterationTrace:
    """Run the preconditioned stationary iteration and record its trace.

    The first requested kind (or (0,2) by default) drives the stopping
    tests: CONVERGED when the residual drops below tol * ||f||, DIVERGED
    when the error grows beyond 1e12 times its initial value.
    """
    precond = PreconditionerKind.parse(precond)
    if not alpha > 0:
        raise ValidationError(f"alpha must be positive, got {alpha}")
    if params.A_F == 0.0:
        raise UnstableParams("A_F = 0: the QCF system is singular")
    f = np.array(as_vector(params, f), dtype=float)
    u = np.zeros(params.n) if u0 is None else np.array(as_vector(params, u0), dtype=float)
    L = assemble(params, "QCF").matrix
    try:
        u_ref = lu_solve(L, f)
    except SingularMatrix as exc:
        raise UnstableParams(f"L^qcf is singular: {exc}") from exc
    P = _Preconditioner(params, precond)
    kinds = _unique_kinds(kinds)
    lead = kinds[0]
    trace = IterationTrace(params, precond, float(alpha), kinds)
    for k in kinds:
        trace.residuals[k.label] = []
        trace.errors[k.label] = []
    f_norm = vector_norm(params, f, lead)
    e0 = None
    for n in range(max_iter + 1):
        r = f - L @ u
        e = u - u_ref
        trace.steps.append(n)
        for k in kinds:
            trace.residuals[k.label].append(vector_norm(params, r, k))
            trace.errors[k.label].append(vector_norm(params, e, k))
        res, err = trace.residuals[lead.label][-1], trace.errors[lead.label][-1]
        if e0 is None:
            e0 = err
        if res <= tol * f_norm:
            trace.verdict = "CONVERGED"
            break
        if not np.isfinite(err) or (e0 > 0 and err > DIVERGENCE_FACTOR * e0):
            trace.verdict = "DIVERGED"
            break
        if n == max_iter:
            break
        u = u + alpha * P.solve(r)
    trace.solution = u
    for k in kinds:
        trace.residuals[k.label] = np.asarray(trace.residuals[k.label])
        trace.errors[k.label] = np.asarray(trace.errors[k.label])
    return trace


@dataclass(frozen=True)
class MeasuredRate:
    value: float
    nonmonotone: bool

    def __float__(self) -> float:
        return self.value


def measured_rate(trace, kind: NormKind | None = None, window: int = 10, end: int | None = None) -> MeasuredRate:
    """Geometric mean of the last ``window`` error ratios.

    ``trace`` may be an IterationTrace or a plain sequence of error norms.
    ``end`` truncates the sequence (exclusive) before the window is taken.
    """
    if isinstance(trace, IterationTrace):
        seq = trace.error(kind if kind is not None else trace.kinds[0])
    else:
        seq = np.asarray(trace, dtype=float)
    if end is not None:
        seq = seq[:end]
    if seq.size < 20:
        raise ValidationError(f"need at least 20 recorded steps, got {seq.size}")
    tail = seq[-(window + 1):]
    if np.any(tail[:-1] == 0.0):
        return MeasuredRate(0.0, False)
    ratios = tail[1:] / tail[:-1]
    return MeasuredRate(float(np.exp(np.mean(np.log(ratios)))), bool(np.any(ratios > 1.0)))
