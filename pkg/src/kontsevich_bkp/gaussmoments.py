"""Exact Gaussian matrix moments with an external field.

The measure is ``e^{-Tr(Lambda H^2)/2} dH`` on Hermitian N x N matrices,
normalised to total mass one.  Its entry covariance is
``<H_ab H_cd> = delta_ad delta_bc * 2 / (lambda_a + lambda_b)``.
"""
from __future__ import annotations

import itertools
import math
from dataclasses import dataclass, field
from fractions import Fraction
from functools import reduce
from typing import Mapping, Sequence

from .algebra import as_rational, perfect_matchings, set_partitions

DEFAULT_WORK_BUDGET = 10**9


class CoincidentSpectrumError(ValueError):
    """Raised when two entries of the external field coincide."""


class BudgetExceeded(RuntimeError):
    pass


def _parse_value(x):
    if isinstance(x, float):
        return x
    return as_rational(x)


@dataclass(frozen=True)
class SpectralData:
    """Eigenvalues of the external field Lambda.

    Entries are exact rationals (ints, Fractions, or strings like ``"3/2"``)
    or floats; mixing is not allowed.
    """

    lambdas: tuple
    rel_gap: float = 1e-8

    def __post_init__(self):
        vals = tuple(_parse_value(x) for x in self.lambdas)
        object.__setattr__(self, "lambdas", vals)
        if not vals:
            raise ValueError("need at least one eigenvalue")
        kinds = {isinstance(v, float) for v in vals}
        if len(kinds) > 1:
            raise TypeError("mix of exact and floating eigenvalues")
        if any(v <= 0 for v in vals):
            raise ValueError(f"eigenvalues must be positive: {vals}")
        for a, b in itertools.combinations(vals, 2):
            if a == b or abs(a - b) <= self.rel_gap * max(abs(a), abs(b)):
                raise CoincidentSpectrumError(f"coincident spectrum: {a} and {b}")

    @property
    def N(self) -> int:
        return len(self.lambdas)

    @property
    def exact(self) -> bool:
        return not isinstance(self.lambdas[0], float)

    @property
    def lambda_min(self):
        return min(self.lambdas)

    def power_sum(self, k: int):
        """p_k = Tr Lambda^{-k}."""
        if self.exact:
            return sum((Fraction(1) / lam**k for lam in self.lambdas), Fraction(0))
        return math.fsum(lam ** (-k) for lam in self.lambdas)

    def as_floats(self) -> tuple[float, ...]:
        return tuple(float(v) for v in self.lambdas)

    def scaled(self, c) -> "SpectralData":
        return SpectralData(tuple(c * v for v in self.lambdas))

    def shifted(self, c) -> "SpectralData":
        return SpectralData(tuple(v + c for v in self.lambdas))


@dataclass(frozen=True)
class MomentRequest:
    """Multiset of positive exponents (k_1, ..., k_n), stored sorted decreasingly."""

    exponents: tuple[int, ...]

    def __post_init__(self):
        exps = tuple(sorted((int(k) for k in self.exponents), reverse=True))
        if not exps:
            raise ValueError("empty moment request")
        if any(k < 1 for k in exps):
            raise ValueError(f"exponents must be >= 1: {exps}")
        object.__setattr__(self, "exponents", exps)

    @property
    def degree(self) -> int:
        return sum(self.exponents)


@dataclass(frozen=True)
class PotentialSpec:
    """Polynomial V0 = sum_d c_d x^d treated as a series in an overall coupling g.

    ``order`` is the highest power of g kept.
    """

    coefficients: Mapping[int, Fraction] = field(default_factory=dict)
    order: int = 0

    def __post_init__(self):
        coeffs = {int(d): as_rational(c) for d, c in dict(self.coefficients).items()}
        coeffs = {d: c for d, c in coeffs.items() if c}
        if any(d < 0 for d in coeffs):
            raise ValueError("negative degree in potential")
        if self.order < 0:
            raise ValueError("expansion order must be >= 0")
        object.__setattr__(self, "coefficients", coeffs)

    @property
    def is_zero(self) -> bool:
        return not self.coefficients

    @property
    def is_even(self) -> bool:
        return all(d % 2 == 0 for d in self.coefficients)


def _request(req) -> MomentRequest:
    return req if isinstance(req, MomentRequest) else MomentRequest(tuple(req))


def _spectral(spec) -> SpectralData:
    return spec if isinstance(spec, SpectralData) else SpectralData(tuple(spec))


def covariance(a: int, b: int, spectral: SpectralData):
    """``<H_ab H_ba>`` for 1-based indices; equals 2/(lambda_a + lambda_b)."""
    spectral = _spectral(spectral)
    n = spectral.N
    if not (1 <= a <= n and 1 <= b <= n):
        raise IndexError(f"indices ({a}, {b}) out of range 1..{n}")
    la, lb = spectral.lambdas[a - 1], spectral.lambdas[b - 1]
    return 2 / (la + lb) if not spectral.exact else Fraction(2) / (la + lb)


def _successors(exponents: Sequence[int]) -> list[int]:
    # letter a of the word Tr H^k1 ... Tr H^kn is H_{i_a, i_succ(a)}
    succ = []
    start = 0
    for k in exponents:
        succ.extend(start + (j + 1) % k for j in range(k))
        start += k
    return succ


def _contraction_structure(succ: list[int], pairing) -> tuple[int, tuple]:
    parent = list(range(len(succ)))

    def find(x):
        while parent[x] != x:
            parent[x] = parent[parent[x]]
            x = parent[x]
        return x

    for a, b in pairing:
        for x, y in ((a, succ[b]), (succ[a], b)):
            rx, ry = find(x), find(y)
            if rx != ry:
                parent[rx] = ry
    label: dict[int, int] = {}
    edges = []
    for a, _ in pairing:
        ca = label.setdefault(find(a), len(label))
        cb = label.setdefault(find(succ[a]), len(label))
        edges.append((min(ca, cb), max(ca, cb)))
    for x in range(len(succ)):
        label.setdefault(find(x), len(label))
    return len(label), tuple(sorted(edges))


class _WickEvaluator:
    """Sums over face assignments with integer arithmetic, memoised by structure."""

    def __init__(self, spectral: SpectralData):
        lam = spectral.lambdas
        n = len(lam)
        weights = [[Fraction(2) / (lam[i] + lam[j]) for j in range(n)] for i in range(n)]
        den = reduce(math.lcm, (w.denominator for row in weights for w in row), 1)
        self.den = den
        self.table = [[int(w * den) for w in row] for row in weights]
        self.N = n
        self._memo: dict = {}

    def structure_sum(self, n_faces: int, edges: tuple) -> int:
        key = (n_faces, edges)
        hit = self._memo.get(key)
        if hit is not None:
            return hit
        tab = self.table
        # faces not touched by any edge contribute a free factor N each
        used = sorted({c for e in edges for c in e})
        relabel = {c: i for i, c in enumerate(used)}
        local = [(relabel[a], relabel[b]) for a, b in edges]
        total = 0
        for assign in itertools.product(range(self.N), repeat=len(used)):
            prod = 1
            for a, b in local:
                prod *= tab[assign[a]][assign[b]]
            total += prod
        total *= self.N ** (n_faces - len(used))
        self._memo[key] = total
        return total


def _budget_cost(n: int, degree: int, method: str) -> int:
    # naive: every index of every letter; contract: at most degree/2 + 1 free faces
    free = degree if method == "naive" else degree // 2 + 1
    return n**free * math.prod(range(degree - 1, 0, -2))


def trace_moment(
    spectral,
    req,
    *,
    method: str = "contract",
    budget: int = DEFAULT_WORK_BUDGET,
    _evaluator: _WickEvaluator | None = None,
) -> Fraction:
    """Exact ``< prod_i Tr H^{k_i} >`` under the Gaussian measure (V0 = 0).

    ``method="contract"`` resolves the index deltas of each Wick pairing into
    face classes before summing; ``method="naive"`` sums over every index
    assignment of every letter and is kept as a cross-check.
    """
    spectral = _spectral(spectral)
    if not spectral.exact:
        raise TypeError("trace_moment needs exact eigenvalues")
    req = _request(req)
    degree = req.degree
    if degree % 2:
        return Fraction(0)
    cost = _budget_cost(spectral.N, degree, method)
    if degree > 12 or cost > budget:
        raise BudgetExceeded(f"moment of degree {degree} at N={spectral.N} exceeds work budget")
    succ = _successors(req.exponents)
    pairings = perfect_matchings(degree)
    if method == "naive":
        return _naive_moment(spectral, succ, pairings)
    if method != "contract":
        raise ValueError(f"unknown method {method!r}")
    ev = _evaluator or _WickEvaluator(spectral)
    total = 0
    for pairing in pairings:
        nf, edges = _contraction_structure(succ, pairing)
        total += ev.structure_sum(nf, edges)
    return Fraction(total, ev.den ** (degree // 2))


def _naive_moment(spectral: SpectralData, succ: list[int], pairings) -> Fraction:
    n = spectral.N
    lam = spectral.lambdas
    cov = [[Fraction(2) / (lam[i] + lam[j]) for j in range(n)] for i in range(n)]
    total = Fraction(0)
    for idx in itertools.product(range(n), repeat=len(succ)):
        for pairing in pairings:
            term = Fraction(1)
            for a, b in pairing:
                # <H_{i_a i_sa} H_{i_b i_sb}> = delta(i_a, i_sb) delta(i_sa, i_b) cov
                if idx[a] != idx[succ[b]] or idx[succ[a]] != idx[b]:
                    term = None
                    break
                term *= cov[idx[a]][idx[succ[a]]]
            if term is not None:
                total += term
    return total


def _potential_words(potential: PotentialSpec, m: int):
    """Terms of (Tr V0)^m / m! as (extra exponents, coefficient, constant power)."""
    degs = sorted(potential.coefficients)
    for combo in itertools.combinations_with_replacement(degs, m):
        counts: dict[int, int] = {}
        for d in combo:
            counts[d] = counts.get(d, 0) + 1
        coeff = Fraction(1)
        for d, c in counts.items():
            coeff *= potential.coefficients[d] ** c / math.factorial(c)
        yield tuple(d for d in combo if d > 0), coeff, counts.get(0, 0)


def moment_perturbative(
    spectral,
    req,
    potential: PotentialSpec,
    *,
    budget: int = DEFAULT_WORK_BUDGET,
) -> list[Fraction]:
    """Normalised moment with weight ``e^{g Tr V0(H)}`` as a series in g.

    Returns the coefficients of ``g^0, ..., g^P``; the g^0 term is
    :func:`trace_moment`.
    """
    spectral = _spectral(spectral)
    if not spectral.exact:
        raise TypeError("moment_perturbative needs exact eigenvalues")
    req = _request(req) if req else None
    order = potential.order
    if order > 3:
        raise BudgetExceeded("perturbative order above 3 is not supported")
    ev = _WickEvaluator(spectral)
    n = spectral.N

    def avg(exps: tuple) -> Fraction:
        if not exps:
            return Fraction(1)
        return trace_moment(spectral, exps, budget=budget, _evaluator=ev)

    base = req.exponents if req else ()
    num, den = [], []
    for m in range(order + 1):
        s_num = Fraction(0)
        s_den = Fraction(0)
        for extra, coeff, n_const in _potential_words(potential, m):
            c = coeff * n**n_const
            s_den += c * avg(extra)
            s_num += c * avg(base + extra)
        num.append(s_num)
        den.append(s_den)
    # series division num / den with den[0] == 1
    out: list[Fraction] = []
    for m in range(order + 1):
        val = num[m] - sum((out[j] * den[m - j] for j in range(m)), Fraction(0))
        out.append(val / den[0])
    return out


def cumulants(moments: Mapping, req) -> Fraction:
    """Connected correlator from moments by the set-partition Moebius sum.

    ``moments`` maps sorted exponent tuples (any order accepted) to values.
    """
    exps = _request(req).exponents
    table = {tuple(sorted(k, reverse=True)): v for k, v in moments.items()}
    n = len(exps)
    total = Fraction(0)
    for part in set_partitions(n):
        nb = len(part)
        term = Fraction((-1) ** (nb - 1) * math.factorial(nb - 1))
        for block in part:
            key = tuple(sorted((exps[i] for i in block), reverse=True))
            if key not in table:
                raise KeyError(f"missing sub-moment M{key}")
            term *= table[key]
        total += term
    return total


def moments_up_to(spectral, max_degree: int, *, odd_only: bool = True) -> dict[tuple, Fraction]:
    """All V0 = 0 moments with odd exponents and total degree <= max_degree."""
    spectral = _spectral(spectral)
    ev = _WickEvaluator(spectral)
    out: dict[tuple, Fraction] = {}
    parts = range(1, max_degree + 1, 2) if odd_only else range(1, max_degree + 1)
    for req in _exponent_multisets(max_degree, list(parts)):
        out[req] = trace_moment(spectral, req, _evaluator=ev)
    return out


def _exponent_multisets(max_degree: int, parts: list[int]):
    def rec(remaining: int, max_part: int):
        for p in parts:
            if p > max_part or p > remaining:
                continue
            yield (p,)
            for rest in rec(remaining - p, p):
                yield (p,) + rest

    return list(rec(max_degree, max_degree))


def reference_moments(spectral) -> dict[tuple, Fraction]:
    """Closed forms of the low V0 = 0 moments in the power sums p_k."""
    spectral = _spectral(spectral)
    p1, p3 = spectral.power_sum(1), spectral.power_sum(3)
    return {
        (1, 1): p1,
        (3, 1): 3 * p1**2,
        (1, 1, 1, 1): 3 * p1**2,
        (1, 1, 1, 1, 1, 1): 15 * p1**3,
        (3, 1, 1, 1): 6 * p3 + 9 * p1**3,
        (3, 3): 3 * p3 + 12 * p1**3,
        (5, 1): 5 * p3 + 10 * p1**3,
    }
