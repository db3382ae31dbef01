"""Presets reproducing the four numerical experiments as tables."""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

from .iteration import measured_rate, predicted_rate, run_iteration, step_size
from .model import NORM_KINDS, ModelParams, NormKind, make_params
from .opnorms import SweepSpec, iteration_matrix, iteration_similar, opnorm, scaling_sweep, sqrt_k_rule
from .spectral import stability_constants

__all__ = [
    "rhs_vector",
    "FigureResult",
    "figure",
    "figure1",
    "figure2",
    "figure3",
    "figure4",
    "FIG4_GRID",
]

FIG4_GRID = tuple(round(0.05 + 0.0125 * i, 10) for i in range(61))


def rhs_vector(params: ModelParams) -> np.ndarray:
    """f_j = h(x_j) cos(3 pi x_j) with x_j = j eps and h = sign, h(0) = 1."""
    x = np.arange(-params.N + 1, params.N) * params.eps
    h = np.where(x >= 0, 1.0, -1.0)
    return h * np.cos(3.0 * np.pi * x)


@dataclass
class FigureResult:
    """Named tables (column list plus dict rows) and a flat summary."""

    number: int
    tables: dict = field(default_factory=dict)
    summary: dict = field(default_factory=dict)


def _coefficients(af_ratio: float, phi2_F: float = 1.0):
    return phi2_F, (af_ratio - 1.0) * phi2_F / 4.0


def figure1(steps: int = 500, N: int = 200, Ks=(8, 32), af_ratio: float = 0.5) -> FigureResult:
    """Richardson iteration with the optimal step: normalized (0,2) errors."""
    out = FigureResult(1)
    kind = NormKind(0, 2)
    rows = {}
    for K in Ks:
        params = make_params(N, K, *_coefficients(af_ratio))
        alpha = step_size(params, "RICH_OPT")
        tr = run_iteration(params, "IDENTITY", alpha, rhs_vector(params), max_iter=steps, tol=0.0, kinds=(kind,))
        err = tr.error(kind)
        rows[K] = err / err[0]
        late = measured_rate(err, window=50).value
        out.summary[f"K{K}_alpha"] = alpha
        out.summary[f"K{K}_predicted_rate"] = predicted_rate(params, "IDENTITY", alpha, kind)
        out.summary[f"K{K}_late_rate"] = late
        out.summary[f"K{K}_initial_rate"] = float(err[1] / err[0])
        out.summary[f"K{K}_verdict"] = tr.verdict
    cols = ["n"] + [f"err_0_2_K{K}" for K in Ks]
    table = []
    for n in range(len(next(iter(rows.values())))):
        table.append({"n": n, **{f"err_0_2_K{K}": float(rows[K][n]) for K in Ks}})
    out.tables["errors"] = (cols, table)
    return out


def figure2(steps: int = 40, N: int = 800, K: int = 32, af_ratio: float = 0.2) -> FigureResult:
    """QCL-preconditioned iteration with the optimal U^{2,inf} step."""
    out = FigureResult(2)
    params = make_params(N, K, *_coefficients(af_ratio))
    alpha = step_size(params, "QCL_OPT_2INF")
    kinds = (NormKind(1, 2), NormKind(1, np.inf), NormKind(2, np.inf))
    tr = run_iteration(params, "QCL", alpha, rhs_vector(params), max_iter=steps, tol=0.0, kinds=kinds)
    cols = ["n"] + [f"err_{k.label}" for k in kinds]
    table = [{"n": n, **{f"err_{k.label}": float(tr.error(k)[n]) for k in kinds}} for n in tr.steps]
    out.tables["errors"] = (cols, table)
    out.summary["alpha"] = alpha
    out.summary["predicted_rate_2_inf"] = predicted_rate(params, "QCL", alpha, NormKind(2, np.inf))
    for k in kinds:
        out.summary[f"rate_{k.label}"] = measured_rate(tr, k).value
    return out


def figure3(Ns=(64, 128, 256, 512, 1024), af_ratio: float = 0.8) -> FigureResult:
    """GFC iteration-matrix norms in all nine spaces versus N."""
    out = FigureResult(3)
    res = scaling_sweep(SweepSpec(NORM_KINDS, Ns, sqrt_k_rule, 1.0, af_ratio, "QCE", "GFC_UNIT"))
    out.tables["sweep"] = (["N", "K", "k", "p", "value", "bracket_low", "bracket_high", "method"], res.rows)
    out.summary.update({f"slope_{k.replace(',', '_')}": v for k, v in res.slopes.items()})
    return out


def _largest_above_one(grid, values):
    above = [a for a, v in zip(grid, values) if v > 1.0]
    return max(above) if above else float("nan")


def figure4(N: int = 256, K: int = 15, grid=FIG4_GRID, witness_gaps=(1e-2, 1e-3, 1e-4)) -> FigureResult:
    """GFC norms in U^{1,inf} and U^{2,1} versus A_F at fixed N and K.

    Alongside the grid, ``witness`` rows sit at A_F + lambda_K phi2_2F equal
    to each entry of ``witness_gaps``, approaching the QCE stability limit.
    """
    out = FigureResult(4)
    kinds = (NormKind(1, np.inf), NormKind(2, 1))
    rows = []
    series = {str(k): [] for k in kinds}
    lows = []
    for af in grid:
        params = make_params(N, K, *_coefficients(af))
        G = iteration_matrix(params, "QCE", 1.0)
        sim = iteration_similar(params, "QCE", 1.0)
        for kind in kinds:
            r = opnorm(params, G, kind, similar=sim)
            rows.append(_fig4_row(af, params, kind, r, "grid"))
            series[str(kind)].append(r.value)
            if kind.k == 1:
                lows.append(r.bracket_low)
    lam_K = stability_constants(make_params(N, K, *_coefficients(0.5)), "QCE").lambda_K
    for gap in witness_gaps:
        # A_F + lambda_K (A_F - 1) / 4 = gap
        af = (gap + lam_K / 4.0) / (1.0 + lam_K / 4.0)
        params = make_params(N, K, *_coefficients(af))
        G = iteration_matrix(params, "QCE", 1.0)
        r = opnorm(params, G, kinds[0])
        rows.append(_fig4_row(af, params, kinds[0], r, f"witness_gap_{gap:g}"))
        out.summary[f"witness_bracket_low_gap_{gap:g}"] = r.bracket_low
    out.tables["norms"] = (["A_F", "phi2_2F", "k", "p", "value", "bracket_low", "bracket_high", "method", "role"], rows)
    out.summary["lambda_K"] = lam_K
    out.summary["A_F_qce_limit"] = lam_K / (4.0 + lam_K)
    out.summary["crossing_1_inf_bracket_low"] = _largest_above_one(grid, lows)
    out.summary["crossing_1_inf_value"] = _largest_above_one(grid, series[str(kinds[0])])
    out.summary["crossing_2_1"] = _largest_above_one(grid, series[str(kinds[1])])
    return out


def _fig4_row(af, params, kind, r, role):
    return {
        "A_F": float(af),
        "phi2_2F": params.phi2_2F,
        "k": kind.k,
        "p": "inf" if np.isinf(kind.p) else str(int(kind.p)),
        "value": r.value,
        "bracket_low": r.bracket_low,
        "bracket_high": r.bracket_high,
        "method": r.method.value,
        "role": role,
    }


def figure(n: int, **kwargs) -> FigureResult:
    """Dispatch to one of the four presets."""
    presets = {1: figure1, 2: figure2, 3: figure3, 4: figure4}
    if n not in presets:
        from .errors import ValidationError

        raise ValidationError(f"figure must be 1, 2, 3 or 4, got {n}")
    return presets[n](**kwargs)
