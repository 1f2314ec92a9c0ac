"""Partition-function evaluators: Pfaffian formula, direct eigenvalue integral,
de Bruijn check and Monte Carlo."""
from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Callable

import numpy as np

from .basis import basis_F
from .pfaffian import pfaffian
from .quad import KernelSpec, QuadConfig, QuadratureError, composite_nodes, pv_matrix


@dataclass(frozen=True)
class Theorem1Result:
    value: float
    pfaffian: float
    literal: float
    K: np.ndarray
    asymmetry: float
    quad_error: float
    pf2_det_rel: float


def _log_prefactor(lam: np.ndarray) -> float:
    N = len(lam)
    log_delta = float(np.sum(np.log(lam[:, None] + lam[None, :])))
    return (
        0.5 * log_delta
        - 0.5 * N * N * math.log(2)
        - 0.5 * N * math.log(2 * math.pi)
        - sum(math.lgamma(n + 1) for n in range(1, N))
    )


def _x_max(spec: KernelSpec, cfg: QuadConfig) -> float:
    return cfg.x_max or spec.x_max()


def z_theorem1(spec: KernelSpec, cfg: QuadConfig | None = None, *, asym_tol: float = 1e-8) -> Theorem1Result:
    """Z_N(t) from the Pfaffian of the PV kernel matrix K_{m,n}, for even N.

    K_{m,n} = PV int (x-y)/(x+y) F_{N;m}(x) F_{N;n}(y) e^{V_t(x) + V_t(y)} dx dy.
    All entries (both triangles) are integrated; the matrix is then made
    exactly skew and the pre-averaging asymmetry reported.

    Orientation: prod_{i<j} (x_j - x_i)/(x_j + x_i) is the Pfaffian of
    S(x_j, x_i), the transpose of the kernel used in K, which costs a factor
    (-1)^{N/2}.  ``value`` includes it; ``literal`` is prefactor * Pf(K).
    """
    cfg = cfg or QuadConfig()
    N = spec.N
    if N % 2:
        raise ValueError("the Pfaffian formula needs even N")
    lam = np.asarray(spec.lambdas)
    Fs = [lambda x, n=n: basis_F(N, n, lam, x.ravel()).reshape(x.shape) for n in range(N)]

    def rho(x):
        return np.exp(spec.vt(x))

    K, err, _ = pv_matrix(Fs, Fs, rho, cfg, _x_max(spec, cfg))
    scale = np.abs(K).max()
    asym = float(np.abs(K + K.T).max() / scale) if scale else 0.0
    if asym > asym_tol:
        raise QuadratureError(f"kernel matrix asymmetry {asym:.3e} exceeds {asym_tol:.0e}")
    Ks = 0.5 * (K - K.T)
    pf = pfaffian(Ks)
    det = float(np.linalg.det(Ks))
    pf2 = abs(pf * pf - det) / abs(det) if det else abs(pf * pf)
    literal = math.exp(_log_prefactor(lam)) * pf
    value = (-1) ** (N // 2) * literal
    return Theorem1Result(value, pf, literal, Ks, asym, float(err.max()), pf2)


def _phi(w: np.ndarray) -> np.ndarray:
    """expm1(w)/w with the removable point handled."""
    out = np.ones_like(w)
    big = np.abs(w) > 1e-8
    out[big] = np.expm1(w[big]) / w[big]
    out[~big] = 1 + w[~big] / 2
    return out


def _direct_integrand(spec: KernelSpec, x1: np.ndarray, x2: np.ndarray) -> np.ndarray:
    # (x2-x1)^2/(x2^2-x1^2) det(e^{-lambda_i x_j^2/2}) with the division done
    # analytically: det/(r - s) = e^{-(l1 r + l2 s)/2} phi(w) (l1 - l2)/2
    l1, l2 = spec.lambdas
    s, r = x1 * x1, x2 * x2
    w = 0.5 * (l1 - l2) * (r - s)
    a = -0.5 * (l1 * r + l2 * s)
    # keep the exponent bounded: e^a phi(w) = e^{a+w} phi(-w)
    pos = w > 0
    a = np.where(pos, a + w, a)
    w = np.where(pos, -w, w)
    return (x2 - x1) ** 2 * np.exp(a + spec.vt(x1) + spec.vt(x2)) * _phi(w)


def z_direct(spec: KernelSpec, cfg: QuadConfig | None = None) -> tuple[float, float]:
    """Z_2(t) from the two-eigenvalue integral; returns (value, error estimate)."""
    cfg = cfg or QuadConfig()
    if spec.N != 2:
        raise ValueError("z_direct is implemented for N = 2")
    lam = np.asarray(spec.lambdas)
    X = _x_max(spec, cfg)
    # the (l1 - l2)/2 from the cancelled determinant meets Delta(-lambda/2) = (l1 - l2)/2
    pref = math.exp(0.5 * float(np.sum(np.log(lam[:, None] + lam[None, :])))) / (4 * 2 * math.pi * 2)

    def level(panels):
        xs, ws = composite_nodes(-X, X, panels, cfg.nodes)
        f = _direct_integrand(spec, xs[:, None], xs[None, :])
        return pref * float(ws @ f @ ws)

    panels = cfg.panels
    prev = level(panels)
    for _ in range(cfg.depth):
        panels *= 2
        cur = level(panels)
        if abs(cur - prev) <= cfg.rtol * abs(cur) + cfg.atol:
            return cur, abs(cur - prev)
        prev = cur
    raise QuadratureError("direct quadrature not converged")


def _divided_difference(f, fprime, a: np.ndarray, b: np.ndarray) -> np.ndarray:
    d = a - b
    close = np.abs(d) <= 1e-6 * (1 + np.abs(a))
    out = np.empty_like(a)
    far = ~close
    out[far] = (f(a[far]) - f(b[far])) / d[far]
    if close.any():
        m = 0.5 * (a[close] + b[close])
        if fprime is not None:
            out[close] = fprime(m)
        else:
            h = 1e-5 * (1 + np.abs(m))
            out[close] = (f(m + h) - f(m - h)) / (2 * h)
    return out


@dataclass(frozen=True)
class DeBruijnResult:
    direct: float
    pfaffian_side: float
    K01: float
    rel_err: float


def debruijn_pv_check(
    f0: Callable,
    f1: Callable,
    rho: Callable,
    cfg: QuadConfig | None = None,
    *,
    x_max: float = 12.0,
    f0_prime: Callable | None = None,
    f1_prime: Callable | None = None,
) -> DeBruijnResult:
    """N = 2 singular de Bruijn identity.

    Direct side: int (x1-x2)/(x1+x2) [f0(x1^2) f1(x2^2) - f0(x2^2) f1(x1^2)] rho rho,
    made regular as (x1-x2)^2 times a divided difference.  Pfaffian side:
    2! * K01 with K01 the PV pair integral.
    """
    cfg = cfg or QuadConfig()
    X = cfg.x_max or x_max

    def level(panels):
        xs, ws = composite_nodes(-X, X, panels, cfg.nodes)
        x1, x2 = np.meshgrid(xs, xs, indexing="ij")
        s1, s2 = x1.ravel() ** 2, x2.ravel() ** 2
        # D/(s1 - s2) = f1(s1) dd(f0) - f0(s1) dd(f1)
        q = f1(s1) * _divided_difference(f0, f0_prime, s1, s2) - f0(s1) * _divided_difference(f1, f1_prime, s1, s2)
        integrand = ((x1 - x2) ** 2).ravel() * q * rho(x1.ravel()) * rho(x2.ravel())
        return float(ws @ integrand.reshape(x1.shape) @ ws)

    panels = cfg.panels
    prev = level(panels)
    for _ in range(cfg.depth):
        panels *= 2
        direct = level(panels)
        if abs(direct - prev) <= cfg.rtol * abs(direct) + cfg.atol:
            break
        prev = direct
    else:
        raise QuadratureError("direct de Bruijn quadrature not converged")

    K, _, _ = pv_matrix([lambda x: f0(x * x)], [lambda y: f1(y * y)], rho, cfg, X)
    k01 = float(K[0, 0])
    rhs = 2 * k01
    scale = max(abs(direct), abs(rhs))
    rel = abs(direct - rhs) / scale if scale else 0.0
    return DeBruijnResult(direct, rhs, k01, rel)


def sample_hermitian(lambdas, n: int, rng: np.random.Generator) -> np.ndarray:
    """n draws of H with density proportional to exp(-Tr Lambda H^2 / 2).

    H_aa ~ N(0, 1/lambda_a); Re and Im of H_ab (a < b) each have variance
    1/(lambda_a + lambda_b).
    """
    lam = np.asarray(lambdas, dtype=float)
    N = len(lam)
    var = 1.0 / (lam[:, None] + lam[None, :])
    iu = np.triu_indices(N, 1)
    H = np.zeros((n, N, N), dtype=complex)
    H[:, np.arange(N), np.arange(N)] = rng.standard_normal((n, N)) / np.sqrt(lam)
    sd = np.sqrt(var[iu])
    off = (rng.standard_normal((n, len(sd))) + 1j * rng.standard_normal((n, len(sd)))) * sd
    H[:, iu[0], iu[1]] = off
    H[:, iu[1], iu[0]] = off.conj()
    return H


def _stream(seed: int, task: int) -> np.random.Generator:
    return np.random.Generator(np.random.Philox(np.random.SeedSequence([seed, task])))


def mc_z_estimate(spec: KernelSpec, samples: int, seed: int, chunk: int = 100_000) -> tuple[float, float]:
    """Monte Carlo mean and standard error of exp(Tr V_t(H)) under the Gaussian measure.

    Chunk i draws from a Philox stream keyed by (seed, i), so results do not
    depend on how chunks are scheduled.
    """
    if not spec.has_potential:
        return 1.0, 0.0
    total = 0.0
    total_sq = 0.0
    done = 0
    task = 0
    while done < samples:
        n = min(chunk, samples - done)
        H = sample_hermitian(spec.lambdas, n, _stream(seed, task))
        ev = np.linalg.eigvalsh(H)
        vals = np.exp(spec.vt(ev).sum(axis=1))
        total += float(vals.sum())
        total_sq += float((vals * vals).sum())
        done += n
        task += 1
    mean = total / samples
    var = max(total_sq / samples - mean * mean, 0.0)
    return mean, math.sqrt(var / max(samples - 1, 1))
