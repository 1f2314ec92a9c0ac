"""BKP bilinear calculus on truncated tau-functions.

A tau-function is handled through its Taylor polynomial in the odd times up
to a weight cutoff.  Checks are exact: Hirota operator polynomials evaluated
at the origin, the explicit degree-6 and degree-8 BKP equations in operator,
moment and cumulant form, and the residue bilinear identity

    Res_z dz/z exp(sum z^k (t_k - tt_k)) tau(t - 2[1/z]) tau(tt + 2[1/z]) = tau(t) tau(tt)

coefficient by coefficient in the joint (t, tt) weight.
"""
from __future__ import annotations

import math
from dataclasses import dataclass
from fractions import Fraction
from itertools import product
from typing import Mapping

from .algebra import LaurentInZ, OddPolynomial, as_rational, strict_partitions
from .gaussmoments import (
    PotentialSpec,
    _exponent_multisets,
    _spectral,
    _WickEvaluator,
    cumulants,
    moment_perturbative,
    trace_moment,
)
from .qschur import _q_schur_poly, q_specialize_unit, s_times


@dataclass(frozen=True)
class TauSeries:
    """Truncated tau-function.

    ``polynomial`` is in the ``t`` family; ``normalized`` means the constant
    term Z_N(0) has been divided out.
    """

    polynomial: OddPolynomial
    provenance: str = "explicit"
    normalized: bool = True

    def __post_init__(self):
        if self.polynomial.constant_term == 0:
            raise ValueError("tau-function needs a nonzero constant term")

    @property
    def cutoff(self) -> int:
        return self.polynomial.cutoff

    def scaled(self, c) -> "TauSeries":
        return TauSeries(self.polynomial.scale(c), self.provenance, c == 1 and self.normalized)

    def moment(self, exponents) -> Fraction:
        """M_{k1,...,kn} = (d/dt_k1 ... d/dt_kn tau)(0) / tau(0)."""
        counts: dict[int, int] = {}
        for k in exponents:
            counts[k] = counts.get(k, 0) + 1
        return self.polynomial.derivative_at_zero(counts) / self.polynomial.constant_term

    def is_even(self) -> bool:
        """True when every monomial has even total degree (odd moments vanish)."""
        return all(sum(e for _, _, e in m) % 2 == 0 for m in self.polynomial.terms)


class HirotaPolynomial:
    """Polynomial in the Hirota operators D_1, D_3, D_5, ...

    ``terms`` maps ``((k, exponent), ...)`` tuples to coefficients.
    """

    def __init__(self, terms: Mapping):
        clean = {}
        for mono, c in terms.items():
            mono = tuple(sorted((int(k), int(e)) for k, e in mono if e))
            if any(k <= 0 or k % 2 == 0 for k, _ in mono):
                raise ValueError("Hirota operators are indexed by odd positive integers")
            c = as_rational(c)
            if c:
                clean[mono] = clean.get(mono, 0) + c
        self.terms = {m: c for m, c in clean.items() if c}

    @property
    def weight(self) -> int:
        return max((sum(k * e for k, e in m) for m in self.terms), default=0)

    def __repr__(self) -> str:
        def mono(m):
            return "*".join(f"D{k}" + (f"^{e}" if e > 1 else "") for k, e in m) or "1"

        return "HirotaPolynomial(" + " + ".join(f"{c}*{mono(m)}" for m, c in self.terms.items()) + ")"


BKP_EQ6 = HirotaPolynomial({((1, 6),): 1, ((1, 3), (3, 1)): -5, ((3, 2),): -5, ((1, 1), (5, 1)): 9})
BKP_EQ8 = HirotaPolynomial(
    {
        ((1, 8),): 1,
        ((1, 5), (3, 1)): 7,
        ((1, 2), (3, 2)): -35,
        ((1, 3), (5, 1)): -21,
        ((3, 1), (5, 1)): -42,
        ((1, 1), (7, 1)): 90,
    }
)


def hirota_bilinear(P: HirotaPolynomial, a: TauSeries | OddPolynomial, b: TauSeries | OddPolynomial) -> Fraction:
    """P(D)(a, b) at the origin, where D_k = d/dt_k - d/dtt_k acts on a(t) b(tt)."""
    pa = a.polynomial if isinstance(a, TauSeries) else a
    pb = b.polynomial if isinstance(b, TauSeries) else b
    need = P.weight
    if pa.cutoff < need or pb.cutoff < need:
        raise ValueError(f"tau cutoff below Hirota weight {need}")
    total = Fraction(0)
    for mono, coeff in P.terms.items():
        ks = [k for k, _ in mono]
        es = [e for _, e in mono]
        for split in product(*(range(e + 1) for e in es)):
            # split[i] derivatives on a, the rest on b
            sign = 1
            binom = 1
            for j, e in zip(split, es):
                binom *= math.comb(e, j)
                if (e - j) % 2:
                    sign = -sign
            da = pa.derivative_at_zero(dict(zip(ks, split)))
            if not da:
                continue
            db = pb.derivative_at_zero({k: e - j for k, e, j in zip(ks, es, split)})
            total += coeff * sign * binom * da * db
    return total


def hirota_eval(P: HirotaPolynomial, tau: TauSeries) -> Fraction:
    return hirota_bilinear(P, tau, tau)


# -- tau builders ------------------------------------------------------------


def _odd_monomials(cutoff: int):
    """Exponent multisets of odd parts with total weight in 1..cutoff."""
    return _exponent_multisets(cutoff, list(range(1, cutoff + 1, 2))) if cutoff > 0 else []


def _tau_from_moment_fn(moment_fn, cutoff: int) -> OddPolynomial:
    terms = {(): Fraction(1)}
    for exps in _odd_monomials(cutoff):
        counts: dict[int, int] = {}
        for k in exps:
            counts[k] = counts.get(k, 0) + 1
        val = moment_fn(exps)
        if val:
            denom = math.prod(math.factorial(c) for c in counts.values())
            terms[tuple(("t", k, c) for k, c in sorted(counts.items()))] = val / denom
    return OddPolynomial(terms, cutoff)


def tau_from_moments(spectral, potential: PotentialSpec | None = None, cutoff: int = 8) -> TauSeries:
    """Z_N(t)/Z_N(0) from exact Gaussian moments: sum_a M_a t^a / a!.

    With a nonzero potential the moments are the perturbative series in the
    coupling, summed up to the potential's order (coupling set to one).
    """
    spectral = _spectral(spectral)
    if potential is None or potential.is_zero:
        ev = _WickEvaluator(spectral)
        poly = _tau_from_moment_fn(lambda e: trace_moment(spectral, e, _evaluator=ev), cutoff)
        return TauSeries(poly, "from-moments")
    poly = OddPolynomial.zero(cutoff)
    for p in tau_orders_from_moments(spectral, potential, cutoff):
        poly = poly + p
    return TauSeries(poly, "from-moments")


def tau_orders_from_moments(spectral, potential: PotentialSpec, cutoff: int) -> list[OddPolynomial]:
    """Coefficients of g^0, ..., g^P of the normalised tau for the weight e^{g Tr V0}.

    Only the g^0 entry has a constant term.
    """
    spectral = _spectral(spectral)
    cache: dict[tuple, list[Fraction]] = {}

    def series(exps):
        key = tuple(exps)
        if key not in cache:
            cache[key] = moment_perturbative(spectral, exps, potential)
        return cache[key]

    out = []
    for m in range(potential.order + 1):
        poly = _tau_from_moment_fn(lambda e, m=m: series(e)[m], cutoff)
        out.append(poly if m == 0 else poly - 1)
    return out


def tau_from_q_expansion(spectral, cutoff: int) -> TauSeries:
    """Z_N(t)/Z_N(0) for V0 = 0 as a sum over strict partitions.

    sum_lambda 2^{-l} Q_{2 lambda}(t/2) Q_lambda(s) Q_lambda(1,0,..) / Q_{2 lambda}(1,0,..)
    with s_k = Tr Lambda^{-k} / k.
    """
    if cutoff > 10:
        raise ValueError("tau_from_q_expansion supports cutoff <= 10")
    spectral = _spectral(spectral)
    s = s_times(spectral)
    poly = OddPolynomial.zero(cutoff)
    for lam in strict_partitions(cutoff // 2):
        q2 = _q_schur_poly(lam.doubled().parts, cutoff, "t").scale_times(Fraction(1, 2))
        coeff = (
            _q_schur_poly(lam.parts, lam.weight, "t").evaluate(s)
            * q_specialize_unit(lam)
            / q_specialize_unit(lam.doubled())
            / 2**lam.length
        )
        poly = poly + q2.scale(coeff)
    return TauSeries(poly, "from-q-expansion")


# -- the explicit equations --------------------------------------------------


def _moment_forms(M) -> dict[str, Fraction]:
    m = M
    eq6 = (
        m(1, 1, 1, 1, 1, 1)
        + 15 * m(1, 1, 1, 1) * m(1, 1)
        - 5 * m(3, 1, 1, 1)
        - 15 * m(3, 1) * m(1, 1)
        - 5 * m(3, 3)
        + 9 * m(5, 1)
    )
    eq8 = (
        m(1, 1, 1, 1, 1, 1, 1, 1)
        + 28 * m(1, 1, 1, 1, 1, 1) * m(1, 1)
        + 35 * m(1, 1, 1, 1) ** 2
        + 7 * m(3, 1, 1, 1, 1, 1)
        + 70 * m(3, 1, 1, 1) * m(1, 1)
        + 35 * m(3, 1) * m(1, 1, 1, 1)
        - 35 * m(3, 3, 1, 1)
        - 35 * m(3, 3) * m(1, 1)
        - 70 * m(3, 1) ** 2
        - 21 * m(5, 1, 1, 1)
        - 63 * m(5, 1) * m(1, 1)
        - 42 * m(5, 3)
        + 90 * m(7, 1)
    )
    return {"moments6": eq6, "moments8": eq8}


def _cumulant_forms(K) -> dict[str, Fraction]:
    k = K
    eq6 = (
        k(1, 1, 1, 1, 1, 1)
        + 30 * k(1, 1, 1, 1) * k(1, 1)
        + 60 * k(1, 1) ** 3
        - 5 * k(3, 1, 1, 1)
        - 5 * k(3, 3)
        - 30 * k(3, 1) * k(1, 1)
        + 9 * k(5, 1)
    )
    eq8 = (
        k(1, 1, 1, 1, 1, 1, 1, 1)
        + 56 * k(1, 1, 1, 1, 1, 1) * k(1, 1)
        + 70 * k(1, 1, 1, 1) ** 2
        + 840 * k(1, 1, 1, 1) * k(1, 1) ** 2
        + 840 * k(1, 1) ** 4
        + 7 * k(3, 1, 1, 1, 1, 1)
        + 70 * k(3, 1) * k(1, 1, 1, 1)
        + 420 * k(3, 1) * k(1, 1) ** 2
        + 140 * k(3, 1, 1, 1) * k(1, 1)
        - 35 * k(3, 3, 1, 1)
        - 70 * k(3, 3) * k(1, 1)
        - 140 * k(3, 1) ** 2
        - 21 * k(5, 1, 1, 1)
        - 126 * k(5, 1) * k(1, 1)
        - 42 * k(5, 3)
        + 90 * k(7, 1)
    )
    return {"cumulants6": eq6, "cumulants8": eq8}


def bkp_equation_residuals(tau: TauSeries) -> dict[str, Fraction]:
    """Residuals of the first two BKP equations; all vanish for a tau-function.

    Always returns the operator forms ``hirota6``/``hirota8``.  For even tau
    data (even potential) also the moment and cumulant forms.
    """
    if tau.cutoff < 8:
        raise ValueError("BKP equations up to degree 8 need tau cutoff >= 8")
    out = {"hirota6": hirota_eval(BKP_EQ6, tau), "hirota8": hirota_eval(BKP_EQ8, tau)}
    if tau.is_even():

        def M(*exps):
            return tau.moment(exps)

        out.update(_moment_forms(M))
        table = {e: tau.moment(e) for e in _odd_monomials(8)}

        def K(*exps):
            return cumulants(table, exps)

        out.update(_cumulant_forms(K))
    return out


def moment_expansion(P: HirotaPolynomial) -> dict[tuple, Fraction]:
    """P(D)(tau, tau) / (2 tau(0)^2) as a polynomial in moments, for even tau.

    Keys are sorted pairs of exponent tuples ``(A, B)`` meaning M_A M_B with
    M_() = 1; moments with an odd number of insertions are dropped.
    """
    out: dict[tuple, Fraction] = {}
    for mono, c in P.terms.items():
        ks = [k for k, _ in mono]
        es = [e for _, e in mono]
        for split in product(*(range(e + 1) for e in es)):
            val = Fraction(c)
            for j, e in zip(split, es):
                val *= math.comb(e, j) * (-1) ** (e - j)
            A = tuple(sorted((k for k, j in zip(ks, split) for _ in range(j)), reverse=True))
            B = tuple(sorted((k for k, e, j in zip(ks, es, split) for _ in range(e - j)), reverse=True))
            if len(A) % 2 or len(B) % 2:
                continue
            key = tuple(sorted((A, B)))
            out[key] = out.get(key, 0) + val / 2
    return {k: v for k, v in out.items() if v}


# -- residue identity --------------------------------------------------------


def shift_times(tau: TauSeries | OddPolynomial, sign: int, z_window: int = 64, family: str = "t") -> LaurentInZ:
    """Substitute t_k -> t_k + sign * 2 / (k z^k) in a polynomial tau.

    The result is a Laurent polynomial in z whose z^{-j} coefficient has
    weight at most cutoff - j.
    """
    if sign not in (1, -1):
        raise ValueError("sign must be +1 or -1")
    poly = tau.polynomial if isinstance(tau, TauSeries) else tau
    cut = poly.cutoff
    # Laurent expansion of each power (t_k + c/z^k)^e by the binomial theorem
    out: dict[int, OddPolynomial] = {}
    for mono, coeff in poly.terms.items():
        pieces = []  # list of {z-exponent: OddPolynomial}
        for f, k, e in mono:
            c = Fraction(2 * sign, k)
            expansion = {}
            for j in range(e + 1):
                rest = ((f, k, e - j),) if e - j else ()
                expansion[-k * j] = OddPolynomial({rest: math.comb(e, j) * c**j}, cut)
            pieces.append(expansion)
        acc = {0: OddPolynomial.constant(coeff, cut)}
        for expansion in pieces:
            nxt: dict[int, OddPolynomial] = {}
            for i, a in acc.items():
                for j, b in expansion.items():
                    p = a * b
                    if not p.is_zero():
                        nxt[i + j] = nxt[i + j] + p if i + j in nxt else p
            acc = nxt
        for i, p in acc.items():
            out[i] = out[i] + p if i in out else p
    return LaurentInZ(out, cut, z_window)


def _exp_series_in_z(cutoff: int) -> dict[int, OddPolynomial]:
    """exp(sum_k z^k (t_k - tt_k)) as {power of z: coefficient}, up to z^cutoff."""
    cut = cutoff
    x_terms = {}
    for k in range(1, cut + 1, 2):
        x_terms[k] = OddPolynomial({(("t", k, 1),): 1, (("tt", k, 1),): -1}, cut)
    # power series in z with polynomial coefficients; truncated since z^m carries weight m
    result = {0: OddPolynomial.constant(1, cut)}
    term = {0: OddPolynomial.constant(1, cut)}
    n = 1
    while term:
        nxt: dict[int, OddPolynomial] = {}
        for i, a in term.items():
            for k, b in x_terms.items():
                if i + k > cut:
                    continue
                p = (a * b) / n
                if not p.is_zero():
                    nxt[i + k] = nxt[i + k] + p if i + k in nxt else p
        term = {i: p for i, p in nxt.items() if not p.is_zero()}
        for i, p in term.items():
            result[i] = result[i] + p if i in result else p
        n += 1
    return result


def bkp_residue_defect(tau: TauSeries | OddPolynomial, cutoff: int | None = None, z_window: int = 64) -> OddPolynomial:
    """Residue side minus tau(t) tau(tt), exact up to joint (t, tt) weight ``cutoff``.

    The coefficient of joint weight W only involves tau's homogeneous parts
    of weights summing to W, so truncating tau at ``cutoff`` loses nothing.
    """
    poly = tau.polynomial if isinstance(tau, TauSeries) else tau
    if cutoff is None:
        cutoff = poly.cutoff
    if cutoff > 10:
        raise ValueError("bkp_residue_defect supports joint cutoff <= 10")
    if poly.cutoff < cutoff:
        raise ValueError(f"tau cutoff {poly.cutoff} below requested joint cutoff {cutoff}")
    poly = poly.with_cutoff(cutoff)
    left = shift_times(poly, -1, z_window)
    right = shift_times(poly.rename("t", "tt"), +1, z_window, family="tt")
    expo = _exp_series_in_z(cutoff)
    # Res dz/z picks the z^0 coefficient: sum_m E_m [z^{-m}](left * right)
    residue = OddPolynomial.zero(cutoff)
    for m, e_m in expo.items():
        lr = OddPolynomial.zero(cutoff)
        for i in left.exponents():
            j = -m - i
            if j in right.exponents():
                lr = lr + left.coefficient(i) * right.coefficient(j)
        if not lr.is_zero():
            residue = residue + e_m * lr
    return residue - poly * poly.rename("t", "tt")
