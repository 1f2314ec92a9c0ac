"""Schur Q-functions in odd-time variables.

Convention: the one-row functions are generated by
``sum_a q_a z^a = exp(sum_k 2 t_{2k+1} z^{2k+1})``, which is the normalisation
for which ``exp(2 sum (2k+1) t_{2k+1} p_{2k+1}) = sum_lambda 2^{-l} Q_lambda(t) Q_lambda(p)``
holds.  General Q_lambda are Pfaffians of the two-row functions.
"""
from __future__ import annotations

import math
from dataclasses import dataclass
from fractions import Fraction
from functools import lru_cache

from .algebra import (
    OddPolynomial,
    StrictPartition,
    double_factorial,
    pfaffian_expand,
    strict_partitions,
)
from .cache import CONVENTION_VERSION, QCache
from .gaussmoments import SpectralData, _spectral, _WickEvaluator, trace_moment

__all__ = [
    "CONVENTION_VERSION",
    "QFunction",
    "q_one_row",
    "q_two_row",
    "q_schur",
    "q_specialize_unit",
    "hook_ratio_check",
    "verify_cauchy",
    "s_times",
    "gaussian_average_q",
    "gaussian_average_of_q",
    "wick_average_q",
]


@dataclass(frozen=True)
class QFunction:
    partition: StrictPartition
    polynomial: OddPolynomial
    cutoff: int


def _as_partition(lam) -> StrictPartition:
    return lam if isinstance(lam, StrictPartition) else StrictPartition(tuple(lam))


@lru_cache(maxsize=64)
def _one_rows(max_a: int, cutoff: int, family: str) -> tuple[OddPolynomial, ...]:
    # a q_a = sum_{k odd} 2 k t_k q_{a-k}, from differentiating the generating function
    qs = [OddPolynomial.constant(1, cutoff)]
    for a in range(1, max_a + 1):
        acc = OddPolynomial.zero(cutoff)
        for k in range(1, a + 1, 2):
            if k > cutoff:
                break
            acc = acc + OddPolynomial.variable(k, cutoff, family, 2 * k) * qs[a - k]
        qs.append(acc / a)
    return tuple(qs)


def q_one_row(a: int, cutoff: int, family: str = "t") -> OddPolynomial:
    """Coefficient of z^a in exp(sum 2 t_{2k+1} z^{2k+1})."""
    if a < 0:
        raise ValueError("one-row index must be >= 0")
    return _one_rows(a, cutoff, family)[a]


def q_two_row(a: int, b: int, cutoff: int, family: str = "t") -> OddPolynomial:
    """Q_(a,b), extended antisymmetrically to a <= b."""
    if a < 0 or b < 0:
        raise ValueError("two-row indices must be >= 0")
    if a == b:
        return OddPolynomial.zero(cutoff)
    if a < b:
        return -q_two_row(b, a, cutoff, family)
    qs = _one_rows(a + b, cutoff, family)
    out = qs[a] * qs[b]
    for i in range(1, b + 1):
        term = qs[a + i] * qs[b - i]
        out = out + (2 * term if i % 2 == 0 else -2 * term)
    return out


def _padded(parts: tuple[int, ...]) -> tuple[int, ...]:
    return parts + (0,) if len(parts) % 2 else parts


def q_schur(lam, cutoff: int | None = None, family: str = "t", cache: QCache | None = None) -> QFunction:
    """Q_lambda as a polynomial in the odd times of ``family``.

    Odd-length partitions get one zero part appended, with Q_(a,0) = q_a.
    """
    lam = _as_partition(lam)
    if cutoff is None:
        cutoff = lam.weight
    if cutoff < lam.weight:
        raise ValueError(f"cutoff {cutoff} below |lambda| = {lam.weight}")
    if cache is not None and family == "t":
        hit = cache.get(lam, cutoff)
        if hit is not None:
            return QFunction(lam, hit, cutoff)
    poly = _q_schur_poly(lam.parts, cutoff, family)
    if cache is not None and family == "t":
        cache.put(lam, cutoff, poly)
    return QFunction(lam, poly, cutoff)


@lru_cache(maxsize=512)
def _q_schur_poly(parts: tuple[int, ...], cutoff: int, family: str) -> OddPolynomial:
    if not parts:
        return OddPolynomial.constant(1, cutoff)
    idx = _padded(parts)
    mat = [[q_two_row(a, b, cutoff, family) for b in idx] for a in idx]
    return pfaffian_expand(mat, OddPolynomial.zero(cutoff))


def _unit_one_row(a: int) -> Fraction:
    return Fraction(2**a, math.factorial(a))


def _unit_two_row(a: int, b: int) -> Fraction:
    if a == b:
        return Fraction(0)
    if a < b:
        return -_unit_two_row(b, a)
    out = _unit_one_row(a) * _unit_one_row(b)
    for i in range(1, b + 1):
        out += 2 * (-1) ** i * _unit_one_row(a + i) * _unit_one_row(b - i)
    return out


def q_specialize_unit(lam) -> Fraction:
    """Q_lambda at t1 = 1, t3 = t5 = ... = 0, computed on scalars."""
    lam = _as_partition(lam)
    if not lam.parts:
        return Fraction(1)
    idx = _padded(lam.parts)
    mat = [[_unit_two_row(a, b) for b in idx] for a in idx]
    return pfaffian_expand(mat)


def hook_ratio_check(lam) -> tuple[Fraction, Fraction, bool]:
    """Q_lambda(1,0,...) / Q_{2 lambda}(1,0,...) against prod (2 lambda_j - 1)!!."""
    lam = _as_partition(lam)
    if not lam.parts:
        raise ValueError("hook ratio needs a nonempty partition")
    den = q_specialize_unit(lam.doubled())
    if den == 0:
        raise ZeroDivisionError(f"Q_{lam.doubled()}(1,0,...) vanished")
    lhs = q_specialize_unit(lam) / den
    rhs = Fraction(math.prod(double_factorial(2 * p - 1) for p in lam.parts))
    return lhs, rhs, lhs == rhs


def verify_cauchy(cutoff: int) -> Fraction:
    """Largest coefficient of the difference of the two sides of the Cauchy identity.

    Both sides are expanded in the t- and p-families up to weight ``cutoff``
    in each family.
    """
    if not 0 <= cutoff <= 12:
        raise ValueError("verify_cauchy supports 0 <= cutoff <= 12")
    total_cut = 2 * cutoff
    x = OddPolynomial.zero(total_cut)
    for k in range(1, cutoff + 1, 2):
        x = x + OddPolynomial({(("p", k, 1), ("t", k, 1)): 2 * k}, total_cut)
    lhs = x.exp()
    rhs = OddPolynomial.zero(total_cut)
    for lam in strict_partitions(cutoff):
        qt = _q_schur_poly(lam.parts, cutoff, "t").with_cutoff(total_cut)
        qp = _q_schur_poly(lam.parts, cutoff, "p").with_cutoff(total_cut)
        rhs = rhs + (qt * qp) / 2**lam.length
    diff = (lhs - rhs).filter_family_weight(cutoff)
    return diff.max_abs_coefficient()


def s_times(spectral) -> dict[int, Fraction]:
    """s_k = Tr Lambda^{-k} / k for odd k <= 25."""
    spectral = _spectral(spectral)
    return {k: spectral.power_sum(k) / k for k in range(1, 26, 2)}


def gaussian_average_q(lam, spectral) -> Fraction:
    """Gaussian average of Q_{2 lambda}(Tr H^{2k+1} / (2k+1)) in closed form.

    Equals Q_lambda(s) Q_lambda(1,0,...) / Q_{2 lambda}(1,0,...).
    """
    lam = _as_partition(lam)
    spectral = _spectral(spectral)
    q_s = _q_schur_poly(lam.parts, lam.weight, "t").evaluate(s_times(spectral))
    return q_s * q_specialize_unit(lam) / q_specialize_unit(lam.doubled())


def gaussian_average_of_q(mu, spectral) -> Fraction:
    """Closed-form average of Q_mu; zero unless every part of mu is even."""
    mu = _as_partition(mu)
    if mu.has_odd_part():
        return Fraction(0)
    return gaussian_average_q(mu.halved(), spectral)


def wick_average_q(mu, spectral: SpectralData) -> Fraction:
    """Average of Q_mu(Tr H^k / k) computed term by term with Wick's theorem."""
    mu = _as_partition(mu)
    spectral = _spectral(spectral)
    poly = _q_schur_poly(mu.parts, mu.weight, "t")
    ev = _WickEvaluator(spectral)
    total = Fraction(0)
    for mono, c in poly.items():
        exps = []
        scale = c
        for _, k, e in mono:
            exps.extend([k] * e)
            scale /= Fraction(k) ** e
        total += scale * (trace_moment(spectral, exps, _evaluator=ev) if exps else 1)
    return total
