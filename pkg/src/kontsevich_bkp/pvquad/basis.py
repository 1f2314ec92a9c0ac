"""Taylor remainders R_N and the functions F_{N;n} built from them."""
from __future__ import annotations

import math

import numpy as np

from ..gaussmoments import CoincidentSpectrumError

FORMS = ("exp", "remainder", "det-exp", "det-remainder", "auto")


def _neumaier(terms: np.ndarray, axis: int = 0) -> np.ndarray:
    """Compensated sum along ``axis``."""
    terms = np.moveaxis(np.asarray(terms, dtype=float), axis, 0)
    s = np.zeros(terms.shape[1:])
    c = np.zeros(terms.shape[1:])
    for t in terms:
        tmp = s + t
        big = np.abs(s) >= np.abs(t)
        c += np.where(big, (s - tmp) + t, (t - tmp) + s)
        s = tmp
    return s + c


def remainder_RN(N: int, xi):
    """N-th Taylor remainder of exp: sum_{k >= N} xi^k / k!.

    |xi| <= N: the tail series directly (terms decrease from the first one).
    Otherwise exp(xi) minus the partial sum, summed with compensation; for
    xi < -N the partial sum dominates and is well conditioned, for xi > N
    the exponential dominates.
    """
    if N < 1:
        raise ValueError("N must be >= 1")
    x = np.asarray(xi, dtype=float)
    scalar = x.ndim == 0
    x = np.atleast_1d(x)
    out = np.empty_like(x)
    tail = np.abs(x) <= N

    if tail.any():
        xt = x[tail]
        term = xt**N / math.factorial(N)
        s = term.copy()
        comp = np.zeros_like(s)
        k = N
        while True:
            k += 1
            term = term * xt / k
            tmp = s + term
            big = np.abs(s) >= np.abs(term)
            comp += np.where(big, (s - tmp) + term, (term - tmp) + s)
            s = tmp
            if np.all(np.abs(term) <= 1e-18 * np.maximum(np.abs(s), 1e-300)) or k > N + 2000:
                break
        out[tail] = s + comp

    rest = ~tail
    if rest.any():
        xr = x[rest]
        powers = [np.ones_like(xr)]
        for k in range(1, N):
            powers.append(powers[-1] * xr / k)
        terms = np.vstack([np.exp(xr)[None, :], -np.array(powers)])
        out[rest] = _neumaier(terms, axis=0)
    return float(out[0]) if scalar else out


def _check_distinct(lambdas, rel_gap: float = 1e-8) -> np.ndarray:
    lam = np.asarray(lambdas, dtype=float)
    if lam.ndim != 1 or len(lam) == 0:
        raise ValueError("need a nonempty spectrum")
    if np.any(lam <= 0):
        raise ValueError("spectrum must be positive")
    for i in range(len(lam)):
        for j in range(i + 1, len(lam)):
            if abs(lam[i] - lam[j]) <= rel_gap * max(abs(lam[i]), abs(lam[j])):
                raise CoincidentSpectrumError(f"coincident spectrum: {lam[i]} and {lam[j]}")
    return lam


def elementary_symmetric(values) -> np.ndarray:
    """e_0, ..., e_m of the given values."""
    e = np.zeros(len(values) + 1)
    e[0] = 1.0
    for v in values:
        e[1:] = e[1:] + v * e[:-1]
    return e


def inverse_vandermonde(lambdas) -> np.ndarray:
    """Inverse of V with V[i, n] = lambda_i^n, via elementary symmetric polynomials.

    (V^-1)[n, i] = (-1)^(N-1-n) e_{N-1-n}(lambda without lambda_i) / prod_{j != i} (lambda_i - lambda_j)
    """
    lam = _check_distinct(lambdas)
    N = len(lam)
    inv = np.empty((N, N))
    for i in range(N):
        others = np.delete(lam, i)
        e = elementary_symmetric(others)
        den = np.prod(lam[i] - others)
        for n in range(N):
            inv[n, i] = (-1) ** (N - 1 - n) * e[N - 1 - n] / den
    return inv


def _v(n: int) -> float:
    return (-1) ** n / (2.0**n * math.factorial(n))


def basis_F(N: int, n: int, lambdas, x, form: str = "auto"):
    """F_{N;n}(x) for the spectrum ``lambdas`` (length N).

    F_{N;n} is the unique combination of exp(-lambda_i x^2 / 2) equal to
    x^{2n} + O(x^{2N}) at small x.  Forms:

    - ``exp``: (1/v_n) sum_i (V^-1)[n, i] exp(-lambda_i x^2/2)
    - ``remainder``: x^{2n} + (1/v_n) sum_i (V^-1)[n, i] R_N(-lambda_i x^2/2)
    - ``det-exp`` / ``det-remainder``: the same two via Cramer's rule with
      numerical determinants
    - ``auto``: remainder form where max lambda x^2/2 <= N, exp form beyond
    """
    if form not in FORMS:
        raise ValueError(f"unknown form {form!r}")
    lam = _check_distinct(lambdas)
    if len(lam) != N:
        raise ValueError(f"spectrum has {len(lam)} entries, expected N={N}")
    if not 0 <= n < N:
        raise ValueError(f"need 0 <= n < N, got n={n}")
    x = np.asarray(x, dtype=float)
    scalar = x.ndim == 0
    x = np.atleast_1d(x)
    xi = -0.5 * np.outer(x**2, lam)  # shape (len(x), N)

    if form == "auto":
        small = xi.min(axis=1) >= -N if xi.size else np.zeros(0, bool)
        out = np.empty_like(x)
        if small.any():
            out[small] = basis_F(N, n, lam, x[small], "remainder")
        if (~small).any():
            out[~small] = basis_F(N, n, lam, x[~small], "exp")
    elif form in ("exp", "remainder"):
        row = inverse_vandermonde(lam)[n] / _v(n)
        if form == "exp":
            out = np.exp(xi) @ row
        else:
            out = x ** (2 * n) + remainder_RN(N, xi.ravel()).reshape(xi.shape) @ row
    else:
        V = np.vander(lam, N, increasing=True)
        det_v = np.linalg.det(V)
        rhs = np.exp(xi) if form == "det-exp" else remainder_RN(N, xi.ravel()).reshape(xi.shape)
        mats = np.broadcast_to(V, (len(x), N, N)).copy()
        mats[:, :, n] = rhs
        out = np.linalg.det(mats) / det_v / _v(n)
        if form == "det-remainder":
            out = out + x ** (2 * n)
    return float(out[0]) if scalar else out


def correction_term(N: int, n: int, lambdas, x):
    """F_{N;n}(x) - x^{2n}, computed without forming x^{2n} (accurate at small x)."""
    lam = _check_distinct(lambdas)
    x = np.atleast_1d(np.asarray(x, dtype=float))
    xi = -0.5 * np.outer(x**2, lam)
    row = inverse_vandermonde(lam)[n] / _v(n)
    return remainder_RN(N, xi.ravel()).reshape(xi.shape) @ row


def leading_correction_order(N: int, n: int, lambdas, xs=(1e-2, 1e-3)) -> float:
    """Observed exponent p in F_{N;n}(x) - x^{2n} ~ c x^p from two small x."""
    a, b = xs
    da, db = np.abs(correction_term(N, n, lambdas, [a, b]))
    return math.log(da / db) / math.log(a / b)


def basis_F_scale(N: int, n: int, lambdas, x):
    """Magnitude of the summands behind F_{N;n}(x): max(x^{2n}, sum_i |c_i| exp(-lambda_i x^2/2)).

    Rounding errors of every form are a few ulps of this quantity, so form
    comparisons are made relative to it.
    """
    lam = _check_distinct(lambdas)
    x = np.atleast_1d(np.asarray(x, dtype=float))
    row = np.abs(inverse_vandermonde(lam)[n] / _v(n))
    return np.maximum(x ** (2 * n), np.exp(-0.5 * np.outer(x**2, lam)) @ row)
