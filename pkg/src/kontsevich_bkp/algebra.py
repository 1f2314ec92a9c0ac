"""Exact arithmetic foundation.

Rationals are :class:`fractions.Fraction`.  Polynomials live in odd "time"
variables ``t1, t3, t5, ...`` grouped in named families (``t``, ``tt`` for the
second copy of times, ``s``, ``p``), and are truncated by total weight, where
a variable of index ``2k+1`` carries weight ``2k+1``.
"""
from __future__ import annotations

import json
import math
from dataclasses import dataclass
from fractions import Fraction
from functools import lru_cache
from typing import Iterator, Mapping, Sequence

Rational = Fraction

# (family, odd index, exponent), sorted by (family, index)
Monomial = tuple

SERIAL_FORMAT = "kontsevich_bkp.oddpoly"
SERIAL_VERSION = 1


def as_rational(x) -> Fraction:
    """Convert ints, Fractions and strings like ``"3/2"`` to a Fraction.

    Floats are refused so that exact computations never get contaminated.
    """
    if isinstance(x, Fraction):
        return x
    if isinstance(x, bool):
        raise TypeError("booleans are not rationals")
    if isinstance(x, int):
        return Fraction(x)
    if isinstance(x, str):
        return Fraction(x.strip())
    raise TypeError(f"cannot use {type(x).__name__} {x!r} as an exact rational")


@lru_cache(maxsize=None)
def monomial_weight(mono: Monomial) -> int:
    return sum(k * e for _, k, e in mono)


@lru_cache(maxsize=None)
def family_weight(mono: Monomial, family: str) -> int:
    return sum(k * e for f, k, e in mono if f == family)


@lru_cache(maxsize=1 << 20)
def _merge(a: Monomial, b: Monomial) -> Monomial:
    if not a:
        return b
    if not b:
        return a
    acc: dict = {}
    for f, k, e in a:
        acc[(f, k)] = e
    for f, k, e in b:
        acc[(f, k)] = acc.get((f, k), 0) + e
    return tuple(sorted((f, k, e) for (f, k), e in acc.items()))


def _canonical_key(mono: Monomial):
    # graded lexicographic
    return (monomial_weight(mono), mono)


def _check_monomial(mono) -> Monomial:
    out: dict = {}
    for f, k, e in mono:
        if not isinstance(f, str) or not f:
            raise ValueError(f"bad variable family {f!r}")
        if k <= 0 or k % 2 == 0:
            raise ValueError(f"only odd positive indices allowed, got {f}{k}")
        if e < 0:
            raise ValueError("negative exponent")
        if e:
            out[(f, int(k))] = out.get((f, int(k)), 0) + int(e)
    return tuple(sorted((f, k, e) for (f, k), e in out.items()))


class OddPolynomial:
    """Sparse polynomial in odd times with exact coefficients.

    Instances are immutable; arithmetic returns new objects truncated at the
    shared ``cutoff`` (maximum total weight kept).
    """

    __slots__ = ("_terms", "cutoff")

    def __init__(self, terms: Mapping | None = None, cutoff: int = 8):
        if cutoff < 0:
            raise ValueError("cutoff must be non-negative")
        self.cutoff = int(cutoff)
        clean: dict = {}
        for mono, c in (terms or {}).items():
            mono = _check_monomial(mono)
            if monomial_weight(mono) > self.cutoff:
                continue
            c = as_rational(c)
            if c:
                clean[mono] = clean.get(mono, 0) + c
        self._terms = {m: c for m, c in clean.items() if c}

    @classmethod
    def _raw(cls, terms: dict, cutoff: int) -> "OddPolynomial":
        obj = cls.__new__(cls)
        obj._terms = terms
        obj.cutoff = cutoff
        return obj

    @classmethod
    def constant(cls, c, cutoff: int = 8) -> "OddPolynomial":
        return cls({(): c}, cutoff)

    @classmethod
    def variable(cls, index: int, cutoff: int = 8, family: str = "t", coeff=1) -> "OddPolynomial":
        return cls({((family, index, 1),): coeff}, cutoff)

    @classmethod
    def zero(cls, cutoff: int = 8) -> "OddPolynomial":
        return cls._raw({}, cutoff)

    # -- inspection -------------------------------------------------------

    @property
    def terms(self) -> dict:
        return dict(self._terms)

    def items(self) -> Iterator[tuple[Monomial, Fraction]]:
        """Terms in canonical (graded lexicographic) order."""
        for mono in sorted(self._terms, key=_canonical_key):
            yield mono, self._terms[mono]

    def __len__(self) -> int:
        return len(self._terms)

    def __bool__(self) -> bool:
        return bool(self._terms)

    def is_zero(self) -> bool:
        return not self._terms

    def coefficient(self, mono) -> Fraction:
        return self._terms.get(_check_monomial(mono), Fraction(0))

    @property
    def constant_term(self) -> Fraction:
        return self._terms.get((), Fraction(0))

    def families(self) -> set[str]:
        return {f for mono in self._terms for f, _, _ in mono}

    def max_weight(self) -> int:
        return max((monomial_weight(m) for m in self._terms), default=0)

    def max_abs_coefficient(self) -> Fraction:
        return max((abs(c) for c in self._terms.values()), default=Fraction(0))

    def homogeneous_part(self, weight: int) -> "OddPolynomial":
        return OddPolynomial._raw(
            {m: c for m, c in self._terms.items() if monomial_weight(m) == weight}, self.cutoff
        )

    def is_homogeneous(self, weight: int) -> bool:
        return all(monomial_weight(m) == weight for m in self._terms)

    # -- arithmetic -------------------------------------------------------

    def _coerce(self, other) -> "OddPolynomial":
        if isinstance(other, OddPolynomial):
            if other.cutoff != self.cutoff:
                raise ValueError(f"mismatched cutoffs {self.cutoff} and {other.cutoff}")
            return other
        return OddPolynomial.constant(as_rational(other), self.cutoff)

    def __add__(self, other) -> "OddPolynomial":
        try:
            other = self._coerce(other)
        except TypeError:
            return NotImplemented
        out = dict(self._terms)
        for m, c in other._terms.items():
            v = out.get(m, 0) + c
            if v:
                out[m] = v
            else:
                out.pop(m, None)
        return OddPolynomial._raw(out, self.cutoff)

    __radd__ = __add__

    def __neg__(self) -> "OddPolynomial":
        return OddPolynomial._raw({m: -c for m, c in self._terms.items()}, self.cutoff)

    def __sub__(self, other) -> "OddPolynomial":
        try:
            other = self._coerce(other)
        except TypeError:
            return NotImplemented
        return self + (-other)

    def __rsub__(self, other) -> "OddPolynomial":
        return (-self) + other

    def scale(self, c) -> "OddPolynomial":
        c = as_rational(c)
        if not c:
            return OddPolynomial.zero(self.cutoff)
        return OddPolynomial._raw({m: c * v for m, v in self._terms.items()}, self.cutoff)

    def __mul__(self, other) -> "OddPolynomial":
        if not isinstance(other, OddPolynomial):
            try:
                return self.scale(other)
            except TypeError:
                return NotImplemented
        other = self._coerce(other)
        cut = self.cutoff
        b_items = sorted(
            ((monomial_weight(m), m, c) for m, c in other._terms.items()), key=lambda x: x[0]
        )
        out: dict = {}
        for ma, ca in self._terms.items():
            room = cut - monomial_weight(ma)
            if room < 0:
                continue
            for wb, mb, cb in b_items:
                if wb > room:
                    break
                m = _merge(ma, mb)
                out[m] = out.get(m, 0) + ca * cb
        return OddPolynomial._raw({m: c for m, c in out.items() if c}, cut)

    def __rmul__(self, other) -> "OddPolynomial":
        return self.scale(other)

    def __truediv__(self, other) -> "OddPolynomial":
        return self.scale(1 / as_rational(other))

    def __pow__(self, n: int) -> "OddPolynomial":
        if n < 0:
            raise ValueError("negative power")
        result = OddPolynomial.constant(1, self.cutoff)
        base = self
        while n:
            if n & 1:
                result = result * base
            n >>= 1
            if n:
                base = base * base
        return result

    def exp(self) -> "OddPolynomial":
        """Truncated exponential of a polynomial with zero constant term."""
        if self.constant_term:
            raise ValueError("exp needs a vanishing constant term")
        result = OddPolynomial.constant(1, self.cutoff)
        term = OddPolynomial.constant(1, self.cutoff)
        n = 1
        while True:
            term = (term * self) / n
            if term.is_zero():
                return result
            result = result + term
            n += 1

    def __eq__(self, other) -> bool:
        if isinstance(other, OddPolynomial):
            return self.cutoff == other.cutoff and self._terms == other._terms
        try:
            return self._terms == OddPolynomial.constant(as_rational(other), self.cutoff)._terms
        except TypeError:
            return NotImplemented

    def __hash__(self) -> int:
        return hash((self.cutoff, frozenset(self._terms.items())))

    # -- transformations --------------------------------------------------

    def with_cutoff(self, cutoff: int) -> "OddPolynomial":
        return OddPolynomial._raw(
            {m: c for m, c in self._terms.items() if monomial_weight(m) <= cutoff}, cutoff
        )

    def rename(self, old: str, new: str) -> "OddPolynomial":
        out = {}
        for m, c in self._terms.items():
            m2 = tuple(sorted(((new if f == old else f), k, e) for f, k, e in m))
            out[m2] = c
        return OddPolynomial(out, self.cutoff)

    def scale_times(self, factor, family: str = "t") -> "OddPolynomial":
        """Substitute ``t_k -> factor * t_k`` for every variable of ``family``."""
        factor = as_rational(factor)
        out = {}
        for m, c in self._terms.items():
            deg = sum(e for f, _, e in m if f == family)
            v = c * factor**deg
            if v:
                out[m] = v
        return OddPolynomial._raw(out, self.cutoff)

    def filter_family_weight(self, max_weight: int) -> "OddPolynomial":
        """Drop monomials whose weight in any single family exceeds ``max_weight``."""
        out = {}
        for m, c in self._terms.items():
            fams = {f for f, _, _ in m}
            if all(family_weight(m, f) <= max_weight for f in fams):
                out[m] = c
        return OddPolynomial._raw(out, self.cutoff)

    def evaluate(self, values: Mapping, family: str = "t", zero=Fraction(0)):
        """Evaluate at ``values``; keys are odd indices of ``family`` or ``(family, k)`` pairs.

        Unlisted variables are set to zero.
        """
        vals = {}
        for key, v in values.items():
            vals[key if isinstance(key, tuple) else (family, key)] = v
        total = zero
        for m, c in self._terms.items():
            term = c
            for f, k, e in m:
                x = vals.get((f, k))
                if x is None:
                    term = None
                    break
                term = term * x**e
            if term is not None:
                total = total + term
        return total

    def derivative_at_zero(self, multi: Mapping[int, int], family: str = "t") -> Fraction:
        """``prod d/dt_k^{a_k}`` of the polynomial at the origin."""
        mono = tuple(sorted((family, k, e) for k, e in multi.items() if e))
        c = self._terms.get(mono, Fraction(0))
        for e in multi.values():
            c *= math.factorial(e)
        return c

    # -- display / serialization -----------------------------------------

    def __repr__(self) -> str:
        return f"OddPolynomial({self}, cutoff={self.cutoff})"

    def __str__(self) -> str:
        if not self._terms:
            return "0"
        parts = []
        for m, c in self.items():
            mono = "*".join(f"{f}{k}" + (f"^{e}" if e > 1 else "") for f, k, e in m)
            if not mono:
                parts.append(str(c))
            elif c == 1:
                parts.append(mono)
            elif c == -1:
                parts.append("-" + mono)
            else:
                parts.append(f"{c}*{mono}")
        return " + ".join(parts).replace("+ -", "- ")

    def to_dict(self) -> dict:
        return {
            "format": SERIAL_FORMAT,
            "version": SERIAL_VERSION,
            "cutoff": self.cutoff,
            "terms": [
                [[[f, k, e] for f, k, e in m], str(c.numerator), str(c.denominator)]
                for m, c in self.items()
            ],
        }

    def to_json(self) -> str:
        return json.dumps(self.to_dict(), separators=(",", ":"), sort_keys=True)

    @classmethod
    def from_dict(cls, data: Mapping) -> "OddPolynomial":
        if data.get("format") != SERIAL_FORMAT:
            raise ValueError(f"not a serialized OddPolynomial: {data.get('format')!r}")
        if data.get("version") != SERIAL_VERSION:
            raise ValueError(f"unsupported serialization version {data.get('version')!r}")
        terms = {}
        for mono, num, den in data["terms"]:
            terms[tuple((f, int(k), int(e)) for f, k, e in mono)] = Fraction(int(num), int(den))
        return cls(terms, data["cutoff"])

    @classmethod
    def from_json(cls, text: str) -> "OddPolynomial":
        return cls.from_dict(json.loads(text))


def poly_mul(a: OddPolynomial, b: OddPolynomial) -> OddPolynomial:
    return a * b


class LaurentInZ:
    """Finite Laurent polynomial in ``z`` with :class:`OddPolynomial` coefficients."""

    __slots__ = ("_coeffs", "cutoff", "window")

    def __init__(self, coeffs: Mapping[int, OddPolynomial] | None = None, cutoff: int = 8, window: int = 64):
        self.cutoff = cutoff
        self.window = window
        self._coeffs: dict[int, OddPolynomial] = {}
        for k, c in (coeffs or {}).items():
            if not isinstance(c, OddPolynomial):
                c = OddPolynomial.constant(c, cutoff)
            if c.cutoff != cutoff:
                raise ValueError("inconsistent cutoff in Laurent coefficients")
            if c.is_zero():
                continue
            if abs(k) > window:
                raise OverflowError(f"z-exponent {k} exceeds window {window}")
            self._coeffs[int(k)] = c

    def coefficient(self, k: int) -> OddPolynomial:
        return self._coeffs.get(k, OddPolynomial.zero(self.cutoff))

    def exponents(self) -> list[int]:
        return sorted(self._coeffs)

    def is_zero(self) -> bool:
        return not self._coeffs

    def __add__(self, other: "LaurentInZ") -> "LaurentInZ":
        out = dict(self._coeffs)
        for k, c in other._coeffs.items():
            out[k] = out[k] + c if k in out else c
        return LaurentInZ(out, self.cutoff, max(self.window, other.window))

    def __mul__(self, other: "LaurentInZ") -> "LaurentInZ":
        window = max(self.window, other.window)
        out: dict[int, OddPolynomial] = {}
        for i, a in self._coeffs.items():
            for j, b in other._coeffs.items():
                p = a * b
                if p.is_zero():
                    continue
                out[i + j] = out[i + j] + p if i + j in out else p
        return LaurentInZ(out, self.cutoff, window)

    def __eq__(self, other) -> bool:
        if not isinstance(other, LaurentInZ):
            return NotImplemented
        return self.cutoff == other.cutoff and self._coeffs == other._coeffs

    def __repr__(self) -> str:
        body = " + ".join(f"({c})*z^{k}" for k, c in sorted(self._coeffs.items()))
        return f"LaurentInZ({body or '0'})"


# -- combinatorics ---------------------------------------------------------


@dataclass(frozen=True, order=False)
class StrictPartition:
    """Strictly decreasing tuple of positive parts."""

    parts: tuple[int, ...] = ()

    def __post_init__(self):
        parts = tuple(int(p) for p in self.parts)
        object.__setattr__(self, "parts", parts)
        if any(p <= 0 for p in parts):
            raise ValueError(f"parts must be positive: {parts}")
        if any(a <= b for a, b in zip(parts, parts[1:])):
            raise ValueError(f"parts must be strictly decreasing: {parts}")

    @property
    def weight(self) -> int:
        return sum(self.parts)

    @property
    def length(self) -> int:
        return len(self.parts)

    def __len__(self) -> int:
        return len(self.parts)

    def __iter__(self):
        return iter(self.parts)

    def doubled(self) -> "StrictPartition":
        return StrictPartition(tuple(2 * p for p in self.parts))

    def halved(self) -> "StrictPartition":
        if any(p % 2 for p in self.parts):
            raise ValueError(f"{self} has an odd part")
        return StrictPartition(tuple(p // 2 for p in self.parts))

    def has_odd_part(self) -> bool:
        return any(p % 2 for p in self.parts)

    def __str__(self) -> str:
        return "(" + ",".join(map(str, self.parts)) + ")" if self.parts else "()"


def _strict_of_weight(n: int, max_part: int) -> Iterator[tuple[int, ...]]:
    if n == 0:
        yield ()
        return
    for first in range(min(n, max_part), 0, -1):
        for rest in _strict_of_weight(n - first, first - 1):
            yield (first,) + rest


def strict_partitions_of(n: int) -> list[StrictPartition]:
    """Strict partitions of weight exactly ``n``, lexicographically decreasing."""
    return [StrictPartition(p) for p in _strict_of_weight(n, n)]


def strict_partitions(max_weight: int) -> list[StrictPartition]:
    """All strict partitions with weight <= max_weight.

    Ordered by weight, then lexicographically decreasing within a weight:
    ``(), (1), (2), (3), (2,1), (4), (3,1), ...``.
    """
    if max_weight < 0:
        raise ValueError("max_weight must be >= 0")
    out = []
    for n in range(max_weight + 1):
        out.extend(strict_partitions_of(n))
    return out


@dataclass(frozen=True)
class SetPartition:
    """Partition of ``{0, ..., n-1}`` into nonempty blocks (each block sorted)."""

    blocks: tuple[tuple[int, ...], ...]

    def __post_init__(self):
        blocks = tuple(sorted(tuple(sorted(b)) for b in self.blocks))
        object.__setattr__(self, "blocks", blocks)
        seen = [x for b in blocks for x in b]
        if any(not b for b in blocks):
            raise ValueError("empty block")
        if sorted(seen) != list(range(len(seen))):
            raise ValueError(f"blocks do not partition [0, {len(seen)}): {blocks}")

    @property
    def n(self) -> int:
        return sum(len(b) for b in self.blocks)

    def __len__(self) -> int:
        return len(self.blocks)

    def __iter__(self):
        return iter(self.blocks)


def _set_partitions(items: list[int]) -> Iterator[list[list[int]]]:
    if not items:
        yield []
        return
    first, rest = items[0], items[1:]
    for part in _set_partitions(rest):
        yield [[first]] + part
        for i in range(len(part)):
            yield part[:i] + [[first] + part[i]] + part[i + 1 :]


def set_partitions(n: int) -> list[SetPartition]:
    if not 1 <= n <= 10:
        raise ValueError(f"set_partitions supports 1 <= n <= 10, got {n}")
    return [SetPartition(tuple(tuple(b) for b in p)) for p in _set_partitions(list(range(n)))]


def _matchings(items: tuple[int, ...]) -> Iterator[tuple[tuple[int, int], ...]]:
    if not items:
        yield ()
        return
    a = items[0]
    for i in range(1, len(items)):
        rest = items[1:i] + items[i + 1 :]
        for m in _matchings(rest):
            yield ((a, items[i]),) + m


@lru_cache(maxsize=16)
def _perfect_matchings_cached(n: int) -> tuple:
    return tuple(_matchings(tuple(range(n))))


def perfect_matchings(n: int) -> list[tuple[tuple[int, int], ...]]:
    """All pairings of ``{0, ..., n-1}``; there are (n-1)!! of them."""
    if n % 2:
        raise ValueError(f"no perfect matchings of an odd set (n={n})")
    if not 0 <= n <= 12:
        raise ValueError(f"perfect_matchings supports n <= 12, got {n}")
    return list(_perfect_matchings_cached(n))


def double_factorial(n: int) -> int:
    if n <= 0:
        return 1
    return math.prod(range(n, 0, -2))


def pfaffian_expand(matrix: Sequence[Sequence], zero=Fraction(0)):
    """Exact Pfaffian by expansion along the first row.

    Works for any ring elements supporting ``+``, ``-`` and ``*``; meant for
    small symbolic matrices (Schur Q-functions), not for floating point.
    """
    n = len(matrix)
    if n % 2:
        raise ValueError("Pfaffian of odd-dimensional matrix")

    def rec(idx: tuple[int, ...]):
        if not idx:
            return None  # multiplicative identity
        i = idx[0]
        total = zero
        for pos in range(1, len(idx)):
            j = idx[pos]
            sub = rec(idx[1:pos] + idx[pos + 1 :])
            term = matrix[i][j] if sub is None else matrix[i][j] * sub
            total = total + term if pos % 2 else total - term
        return total

    out = rec(tuple(range(n)))
    return out if out is not None else zero + 1


__all__ = [
    "Rational",
    "as_rational",
    "OddPolynomial",
    "LaurentInZ",
    "StrictPartition",
    "SetPartition",
    "poly_mul",
    "strict_partitions",
    "strict_partitions_of",
    "set_partitions",
    "perfect_matchings",
    "double_factorial",
    "pfaffian_expand",
    "monomial_weight",
]
