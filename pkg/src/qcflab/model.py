"""Chain parameters, displacements and the discrete Sobolev norms.

The chain has interior degrees of freedom u_j, j = -N+1..N-1, stored at
array index j + N - 1.  The boundary values u_{+-N} and the ghost values
u_{+-(N+1)} are zero.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .errors import DimensionMismatch, NotSPD, ValidationError

__all__ = [
    "ModelParams",
    "Displacement",
    "NormKind",
    "NORM_KINDS",
    "make_params",
    "index",
    "chain_size",
    "as_vector",
    "finite_differences",
    "strain",
    "lp_eps",
    "vector_norm",
    "inner_product",
    "weighted_norm",
]


@dataclass(frozen=True)
class ModelParams:
    """Discretization and linearized material coefficients.

    Attributes
    ----------
    N : int
        Half chain size; there are 2N - 1 interior atoms.
    K : int
        Half-width of the atomistic region {-K, ..., K}.
    phi2_F, phi2_2F : float
        Second derivatives of the pair potential at the nearest and
        next-nearest neighbour distances.
    """

    N: int
    K: int
    phi2_F: float
    phi2_2F: float

    def __post_init__(self):
        if int(self.N) != self.N or int(self.K) != self.K:
            raise ValidationError("N and K must be integers")
        if self.N < 4:
            raise ValidationError(f"N must be >= 4, got {self.N}")
        if self.K < 1 or self.K > self.N - 2:
            raise ValidationError(f"K must satisfy 1 <= K <= N-2, got K={self.K}, N={self.N}")
        if not np.isfinite(self.phi2_F) or self.phi2_F <= 0:
            raise ValidationError(f"phi2_F must be positive, got {self.phi2_F}")
        if not np.isfinite(self.phi2_2F) or self.phi2_2F > 0:
            raise ValidationError(f"phi2_2F must be <= 0, got {self.phi2_2F}")

    @property
    def eps(self) -> float:
        return 1.0 / self.N

    @property
    def A_F(self) -> float:
        return self.phi2_F + 4.0 * self.phi2_2F

    @property
    def n(self) -> int:
        """Number of interior degrees of freedom."""
        return 2 * self.N - 1

    def with_coefficients(self, phi2_F: float, phi2_2F: float) -> "ModelParams":
        return ModelParams(self.N, self.K, phi2_F, phi2_2F)

    def as_dict(self) -> dict:
        return {"N": self.N, "K": self.K, "phi2_F": self.phi2_F, "phi2_2F": self.phi2_2F}


def chain_size(params) -> int:
    """N of a ModelParams, or a bare integer N (used by the pure difference helpers)."""
    if isinstance(params, ModelParams):
        return params.N
    N = int(params)
    if N < 1:
        raise ValidationError(f"N must be positive, got {N}")
    return N


def make_params(N: int, K: int, phi2_F: float, phi2_2F: float) -> ModelParams:
    """Validate and bundle the chain parameters."""
    return ModelParams(int(N), int(K), float(phi2_F), float(phi2_2F))


def index(params: ModelParams, j: int) -> int:
    """Array position of atom j."""
    return j + chain_size(params) - 1


@dataclass(frozen=True)
class Displacement:
    """Interior displacement values of a constrained chain."""

    params: ModelParams
    values: np.ndarray

    def __post_init__(self):
        v = np.asarray(self.values, dtype=float)
        if v.shape != (self.params.n,):
            raise DimensionMismatch(
                f"displacement needs {self.params.n} entries, got shape {v.shape}"
            )
        v = v.copy()
        v.setflags(write=False)
        object.__setattr__(self, "values", v)

    @property
    def strain(self) -> np.ndarray:
        return finite_differences(self.params, self.values)[0]

    @property
    def curvature(self) -> np.ndarray:
        return finite_differences(self.params, self.values)[1]


@dataclass(frozen=True)
class NormKind:
    """Selects the discrete Sobolev norm U^{k,p}."""

    k: int
    p: float

    def __post_init__(self):
        if self.k not in (0, 1, 2):
            raise ValidationError(f"k must be 0, 1 or 2, got {self.k}")
        if self.p not in (1, 2, np.inf):
            raise ValidationError(f"p must be 1, 2 or inf, got {self.p}")
        object.__setattr__(self, "p", float(self.p))

    @classmethod
    def parse(cls, text: str) -> "NormKind":
        """Parse strings such as ``"1,inf"`` or ``"2,1"``."""
        try:
            k, p = (s.strip().lower() for s in str(text).split(","))
            pv = np.inf if p in ("inf", "infty", "oo") else float(p)
            return cls(int(k), pv)
        except (TypeError, ValueError) as exc:
            raise ValidationError(f"bad norm kind {text!r}, expected K,P such as 1,inf") from exc

    @property
    def label(self) -> str:
        return f"{self.k}_{'inf' if np.isinf(self.p) else int(self.p)}"

    def __str__(self) -> str:
        return f"{self.k},{'inf' if np.isinf(self.p) else int(self.p)}"


NORM_KINDS = tuple(NormKind(k, p) for k in (0, 1, 2) for p in (1, 2, np.inf))


def as_vector(params, v) -> np.ndarray:
    """Return the raw value array of a Displacement or conforming array."""
    N = chain_size(params)
    if isinstance(v, Displacement):
        if v.params.N != N:
            raise DimensionMismatch("displacement belongs to a different chain")
        return v.values
    arr = np.asarray(v, dtype=float)
    if arr.shape[:1] != (2 * N - 1,):
        raise DimensionMismatch(f"expected leading dimension {2 * N - 1}, got shape {arr.shape}")
    return arr


def finite_differences(params: ModelParams, v):
    """Strain, curvature and extended curvature of ``v``.

    Returns
    -------
    strain : ndarray, length 2N
        (v_l - v_{l-1}) / eps for l = -N+1..N.
    curvature : ndarray, length 2N-1
        Centred second differences at the interior atoms.
    extended_curvature : ndarray, length 2N+1
        Second differences at l = -N..N using the ghost zeros.
    """
    u = as_vector(params, v)
    N = chain_size(params)
    padded = np.concatenate(([0.0, 0.0], u, [0.0, 0.0]))
    w = np.diff(padded[1:-1]) * N
    ext = np.diff(padded, 2) * (N * N)
    return w, ext[1:-1], ext


def strain(params: ModelParams, v) -> np.ndarray:
    return finite_differences(params, v)[0]


def lp_eps(params, x: np.ndarray, p: float) -> float:
    """The eps-weighted l^p norm; p = inf is a plain max."""
    eps = 1.0 / chain_size(params)
    a = np.abs(np.asarray(x, dtype=float))
    if np.isinf(p):
        return float(a.max()) if a.size else 0.0
    if p == 1:
        return float(eps * a.sum())
    if p == 2:
        return float(np.sqrt(eps * np.dot(a, a)))
    return float((eps * np.sum(a**p)) ** (1.0 / p))


def vector_norm(params, v, kind: NormKind) -> float:
    """Norm of ``v`` in U^{k,p}: the l^p_eps norm of its k-th difference."""
    u = as_vector(params, v)
    if kind.k == 0:
        x = u
    else:
        w, c, _ = finite_differences(params, u)
        x = w if kind.k == 1 else c
    return lp_eps(params, x, kind.p)


def inner_product(params, v, w) -> float:
    """eps * sum_j v_j w_j over the interior atoms."""
    a = as_vector(params, v)
    b = as_vector(params, w)
    return float(np.dot(a, b) / chain_size(params))


def weighted_norm(params, v, M: np.ndarray) -> float:
    """sqrt(<M v, v>) for a symmetric positive definite M."""
    u = as_vector(params, v)
    M = np.asarray(M, dtype=float)
    if M.shape != (u.size, u.size):
        raise DimensionMismatch(f"matrix must be {u.size}x{u.size}, got {M.shape}")
    q = inner_product(params, M @ u, u)
    if not np.any(u):
        return 0.0
    if q <= 0:
        raise NotSPD(f"<Mv, v> = {q:.3e} is not positive")
    return float(np.sqrt(q))
