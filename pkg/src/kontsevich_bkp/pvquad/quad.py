"""Principal-value double integrals with the kernel (x - y)/(x + y).

Main route: rotate to u = x + y, v = x - y and fold u -> -u.  The kernel
v/u is odd in u, so

    PV int (x-y)/(x+y) f(x) g(y) rho(x) rho(y) dx dy
        = 1/2 int_{u>0} int_v (v/u) [G(u, v) - G(-u, v)] dv du

and the bracket vanishes linearly at u = 0, leaving a smooth integrand for
tensor Gauss-Legendre panels.  An unfolded epsilon-cutoff evaluator with
extrapolation in epsilon serves as an independent check.
"""
from __future__ import annotations

import math
from dataclasses import dataclass, field
from functools import lru_cache
from typing import Callable, Sequence

import numpy as np

from .basis import _check_distinct

Func = Callable[[np.ndarray], np.ndarray]


class QuadratureError(RuntimeError):
    pass


@dataclass(frozen=True)
class QuadConfig:
    """Discretisation knobs.

    ``x_max`` None means: derive from the tail bound of the weight.
    Panels per axis start at ``panels`` and are doubled up to ``depth`` times
    until two successive levels agree to ``rtol``.
    """

    x_max: float | None = None
    nodes: int = 20
    panels: int = 8
    depth: int = 4
    rtol: float = 1e-10
    fold: bool = True
    atol: float = 1e-14

    def __post_init__(self):
        if self.x_max is not None and not self.x_max > 0:
            raise ValueError("x_max must be positive")
        if not 0 < self.rtol <= 1e-2:
            raise ValueError("rtol must lie in (0, 1e-2]")
        if self.nodes < 2 or self.panels < 1 or self.depth < 1:
            raise ValueError("need nodes >= 2, panels >= 1, depth >= 1")


@dataclass(frozen=True)
class QuadResult:
    value: float
    error: float
    levels: int = 0

    def __float__(self) -> float:
        return self.value


@lru_cache(maxsize=32)
def _gl(n: int):
    return np.polynomial.legendre.leggauss(n)


def composite_nodes(a: float, b: float, panels: int, nodes: int):
    """Gauss-Legendre nodes and weights on ``panels`` equal pieces of [a, b]."""
    x0, w0 = _gl(nodes)
    edges = np.linspace(a, b, panels + 1)
    half = 0.5 * np.diff(edges)
    mid = 0.5 * (edges[1:] + edges[:-1])
    xs = (mid[:, None] + half[:, None] * x0[None, :]).ravel()
    ws = (half[:, None] * w0[None, :]).ravel()
    return xs, ws


def graded_nodes(a: float, b: float, nodes: int, panels: int):
    """Nodes on [a, b] with geometric panels refining towards ``a`` > 0."""
    if a <= 0:
        raise ValueError("graded_nodes needs a > 0")
    edges = [a]
    while edges[-1] * 2 < min(b, 1.0):
        edges.append(edges[-1] * 2)
    if edges[-1] < b:
        edges.extend(np.linspace(edges[-1], b, panels + 1)[1:])
    x0, w0 = _gl(nodes)
    edges = np.asarray(edges)
    half = 0.5 * np.diff(edges)
    mid = 0.5 * (edges[1:] + edges[:-1])
    return (mid[:, None] + half[:, None] * x0).ravel(), (half[:, None] * w0).ravel()


# -- potentials and the integration domain ----------------------------------


@dataclass(frozen=True)
class KernelSpec:
    """Numerical data of the partition function.

    ``v0`` maps degrees to coefficients of V0; ``t`` maps odd k to t_k.
    Only finitely many times may be nonzero.
    """

    N: int
    lambdas: tuple
    v0: dict = field(default_factory=dict)
    t: dict = field(default_factory=dict)

    def __post_init__(self):
        lam = tuple(float(v) for v in self.lambdas)
        if len(lam) != self.N:
            raise ValueError(f"spectrum has {len(lam)} entries, expected N={self.N}")
        _check_distinct(lam)
        object.__setattr__(self, "lambdas", lam)
        v0 = {int(d): float(c) for d, c in dict(self.v0).items() if float(c) != 0.0}
        t = {int(k): float(c) for k, c in dict(self.t).items() if float(c) != 0.0}
        if any(d < 0 for d in v0):
            raise ValueError("V0 degrees must be >= 0")
        if any(k <= 0 or k % 2 == 0 for k in t):
            raise ValueError("times are indexed by odd positive integers")
        object.__setattr__(self, "v0", v0)
        object.__setattr__(self, "t", t)
        self.check_integrable()

    @property
    def lambda_min(self) -> float:
        return min(self.lambdas)

    def vt_coefficients(self) -> dict[int, float]:
        c = dict(self.v0)
        for k, v in self.t.items():
            c[k] = c.get(k, 0.0) + v
        return {d: v for d, v in c.items() if v != 0.0}

    def vt(self, x):
        """V_t(x) = V0(x) + sum_k t_k x^k."""
        x = np.asarray(x, dtype=float)
        out = np.zeros_like(x)
        for d, c in self.vt_coefficients().items():
            out = out + c * x**d
        return out

    def log_rho(self, x):
        """Exponent of the slowest-decaying one-variable weight."""
        return -0.5 * self.lambda_min * np.asarray(x, dtype=float) ** 2 + self.vt(x)

    def check_integrable(self):
        c = self.vt_coefficients()
        c[2] = c.get(2, 0.0) - 0.5 * self.lambda_min
        top = max(d for d, v in c.items() if v != 0.0) if any(c.values()) else 0
        if top < 2 or top % 2 or c[top] >= 0:
            raise ValueError("weight exp(-lambda_min x^2/2 + V_t(x)) is not integrable")

    def x_max(self, ratio: float = 1e-18) -> float:
        """Smallest X with the weight below ``ratio`` times its peak for |x| >= X."""
        grid = np.linspace(-60, 60, 240001)
        lr = self.log_rho(grid)
        peak = lr.max()
        bad = np.abs(grid[lr > peak + math.log(ratio)])
        return float(min(bad.max() + 0.5, 60.0))

    @property
    def has_potential(self) -> bool:
        return bool(self.vt_coefficients())


# -- folded principal value -------------------------------------------------


def _folded_level(fs: Sequence[Func], gs: Sequence[Func], rho: Func, X: float, panels: int, nodes: int) -> np.ndarray:
    """PV matrix I[m, n] with f_m(x) g_n(y) at one discretisation level."""
    U, WU = composite_nodes(0.0, 2 * X, panels, nodes)
    V, WV = composite_nodes(-2 * X, 2 * X, 2 * panels, nodes)
    out = np.zeros((len(fs), len(gs)))
    # chunk over u to bound memory
    step = max(1, 200_000 // len(V))
    for s in range(0, len(U), step):
        u = U[s : s + step, None]
        wu = WU[s : s + step, None]
        x = 0.5 * (u + V[None, :])
        y = 0.5 * (u - V[None, :])
        rx, ry, rmx, rmy = rho(x), rho(y), rho(-x), rho(-y)
        Fx = [f(x) * rx for f in fs]
        Gy = [g(y) * ry for g in gs]
        # G(-u, v) has x' = -y, y' = -x
        Fmy = [f(-y) * rmy for f in fs]
        Gmx = [g(-x) * rmx for g in gs]
        kern = 0.5 * (V[None, :] / u) * wu * WV[None, :]
        for m in range(len(fs)):
            for n in range(len(gs)):
                out[m, n] += float(np.sum(kern * (Fx[m] * Gy[n] - Fmy[m] * Gmx[n])))
    return out


def pv_matrix(fs: Sequence[Func], gs: Sequence[Func], rho: Func, cfg: QuadConfig, x_max: float):
    """All PV integrals of f_m(x) g_n(y) rho rho at once; returns (values, errors)."""
    panels = cfg.panels
    prev = _folded_level(fs, gs, rho, x_max, panels, cfg.nodes)
    for level in range(1, cfg.depth + 1):
        panels *= 2
        cur = _folded_level(fs, gs, rho, x_max, panels, cfg.nodes)
        err = np.abs(cur - prev)
        if np.all(err <= cfg.rtol * np.abs(cur).max() + cfg.atol):
            return cur, err, level
        prev = cur
    raise QuadratureError(f"PV quadrature not converged: error {err.max():.3e} after {cfg.depth} doublings")


def pv_double_integral(f: Func, g: Func, rho: Func, cfg: QuadConfig | None = None, x_max: float | None = None) -> QuadResult:
    """PV int (x - y)/(x + y) f(x) g(y) rho(x) rho(y) dx dy over the plane.

    ``x_max`` bounds |x|, |y|; it defaults to ``cfg.x_max`` or 12.
    """
    cfg = cfg or QuadConfig()
    X = x_max or cfg.x_max or 12.0
    if not cfg.fold:
        val, err = pv_epsilon_extrapolation(f, g, rho, X)
        return QuadResult(val, err, 0)
    vals, errs, level = pv_matrix([f], [g], rho, cfg, X)
    return QuadResult(float(vals[0, 0]), float(errs[0, 0]), level)


# -- epsilon-cutoff oracle ---------------------------------------------------


def pv_epsilon_cutoff(f: Func, g: Func, rho: Func, eps: float, X: float, nodes: int = 24, panels: int = 24) -> float:
    """int_{|x+y| >= eps} (x-y)/(x+y) f g rho rho, unfolded, in (u, v) coordinates."""
    Ug, WUg = graded_nodes(eps, 2 * X, nodes, panels)
    V, WV = composite_nodes(-2 * X, 2 * X, 2 * panels, nodes)
    total = 0.0
    for sign in (1.0, -1.0):
        u = sign * Ug[:, None]
        x = 0.5 * (u + V[None, :])
        y = 0.5 * (u - V[None, :])
        integrand = (V[None, :] / u) * f(x) * g(y) * rho(x) * rho(y)
        total += 0.5 * float(np.sum(WUg[:, None] * WV[None, :] * integrand))
    return total


def pv_epsilon_extrapolation(
    f: Func, g: Func, rho: Func, X: float = 12.0, eps_values=(0.16, 0.08, 0.04, 0.02, 0.01)
) -> tuple[float, float]:
    """Limit eps -> 0 of the cutoff integral.

    The cutoff integral is I_0 + a_1 eps + a_3 eps^3 + ... (odd powers only),
    so fitting 1, eps, eps^3, ... exactly through the samples gives I_0.  The
    error estimate compares with the fit that drops the largest eps.
    """
    eps = np.asarray(eps_values, dtype=float)
    vals = np.array([pv_epsilon_cutoff(f, g, rho, e, X) for e in eps])

    def fit(e, v):
        powers = [0] + [2 * j + 1 for j in range(len(e) - 1)]
        A = np.vander(e, max(powers) + 1, increasing=True)[:, powers]
        return float(np.linalg.solve(A, v)[0])

    best = fit(eps, vals)
    coarse = fit(eps[1:], vals[1:])
    return best, abs(best - coarse)
