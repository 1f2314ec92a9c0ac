import math
from fractions import Fraction

import pytest
from hypothesis import given
from hypothesis import strategies as st

from kontsevich_bkp.algebra import (
    LaurentInZ,
    OddPolynomial,
    SetPartition,
    StrictPartition,
    as_rational,
    double_factorial,
    pfaffian_expand,
    perfect_matchings,
    poly_mul,
    set_partitions,
    strict_partitions,
    strict_partitions_of,
)

T = OddPolynomial.variable


def test_as_rational_refuses_floats():
    assert as_rational("3/2") == Fraction(3, 2)
    assert as_rational(4) == 4
    with pytest.raises(TypeError):
        as_rational(0.5)


def test_poly_mul_examples():
    one = OddPolynomial.constant(1, 4)
    assert poly_mul(one, T(1, 4, coeff=2)) == T(1, 4, coeff=2)
    assert poly_mul(T(1, 1), T(1, 1)).is_zero()
    a = T(1, 4, coeff=2) + T(3, 4, coeff=2)
    expected = OddPolynomial({(("t", 1, 2),): 4, (("t", 1, 1), ("t", 3, 1)): 4}, 4)
    assert poly_mul(a, T(1, 4, coeff=2)) == expected


def test_mismatched_cutoffs_raise():
    with pytest.raises(ValueError):
        T(1, 4) * T(1, 5)


def test_only_odd_indices():
    with pytest.raises(ValueError):
        OddPolynomial({(("t", 2, 1),): 1})


def test_no_zero_terms_and_truncation():
    p = OddPolynomial({(("t", 1, 1),): 1, (("t", 3, 1),): 0, (("t", 5, 2),): 7}, 8)
    assert len(p) == 1
    assert p.max_weight() == 1


def test_string_form():
    p = T(1, 3, coeff=Fraction(4, 3)) ** 3 * Fraction(9, 16) - T(3, 3, coeff=4)
    assert str(p) == "4/3*t1^3 - 4*t3"


def test_exp_of_linear():
    x = T(1, 6)
    e = x.exp()
    for k in range(7):
        assert e.coefficient((("t", 1, k),) if k else ()) == Fraction(1, math.factorial(k))


def test_serialization_roundtrip_and_stability():
    p = (T(1, 8, coeff=Fraction(-3, 7)) + T(3, 8)) ** 3 + T(5, 8, "tt")
    text = p.to_json()
    q = OddPolynomial.from_json(text)
    assert q == p
    assert q.to_json() == text
    with pytest.raises(ValueError):
        OddPolynomial.from_dict({"format": "other"})


def test_rename_and_evaluate():
    p = T(1, 4) * T(3, 4) + 2
    assert p.rename("t", "p").families() == {"p"}
    assert p.evaluate({1: Fraction(1, 2), 3: 3}) == Fraction(7, 2)
    assert p.evaluate({1: 5}) == 2  # t3 missing counts as zero


def test_derivative_at_zero():
    p = OddPolynomial({(("t", 1, 3), ("t", 3, 1)): Fraction(1, 2)}, 8)
    assert p.derivative_at_zero({1: 3, 3: 1}) == 3


def test_laurent_window():
    c = OddPolynomial.constant(1, 2)
    z = LaurentInZ({-1: c}, 2, window=3)
    assert (z * z).coefficient(-2) == c
    with pytest.raises(OverflowError):
        z * z * z * z


def test_strict_partitions_examples():
    assert strict_partitions(0) == [StrictPartition(())]
    got = [p.parts for p in strict_partitions(4)]
    assert got == [(), (1,), (2,), (3,), (2, 1), (4,), (3, 1)]
    assert [p.parts for p in strict_partitions_of(8)] == [(8,), (7, 1), (6, 2), (5, 3), (5, 2, 1), (4, 3, 1)]


def _strict_count_bruteforce(n):
    # partitions into distinct parts = partitions into odd parts (Euler); count the latter by DP
    ways = [1] + [0] * n
    for part in range(1, n + 1, 2):
        for s in range(part, n + 1):
            ways[s] += ways[s - part]
    return ways[n]


@pytest.mark.parametrize("n", range(0, 16))
def test_strict_partition_counts(n):
    parts = strict_partitions_of(n)
    assert len(parts) == _strict_count_bruteforce(n)
    assert len(set(p.parts for p in parts)) == len(parts)


def test_strict_partition_validation():
    with pytest.raises(ValueError):
        StrictPartition((2, 2))
    with pytest.raises(ValueError):
        StrictPartition((1, 3))


def _bell(n):
    row = [1]
    for _ in range(n - 1):
        new = [row[-1]]
        for v in row:
            new.append(new[-1] + v)
        row = new
    return row[-1]


@pytest.mark.parametrize("n", range(1, 9))
def test_set_partitions_bell(n):
    parts = set_partitions(n)
    assert len(parts) == _bell(n)
    assert len({p.blocks for p in parts}) == len(parts)


def test_set_partition_examples_and_guard():
    assert len(set_partitions(1)) == 1
    assert len(set_partitions(3)) == 5
    assert len(set_partitions(4)) == 15
    with pytest.raises(ValueError):
        set_partitions(11)
    with pytest.raises(ValueError):
        SetPartition(((0,), (2,)))


@pytest.mark.parametrize("n,count", [(0, 1), (2, 1), (4, 3), (6, 15), (8, 105)])
def test_perfect_matchings(n, count):
    assert len(perfect_matchings(n)) == count == double_factorial(n - 1)


def test_perfect_matchings_odd():
    with pytest.raises(ValueError):
        perfect_matchings(3)


def test_pfaffian_expand_4x4():
    a = [[Fraction(0)] * 4 for _ in range(4)]
    vals = {(0, 1): 2, (0, 2): 3, (0, 3): 5, (1, 2): 7, (1, 3): 11, (2, 3): 13}
    for (i, j), v in vals.items():
        a[i][j], a[j][i] = Fraction(v), Fraction(-v)
    assert pfaffian_expand(a) == 2 * 13 - 3 * 11 + 5 * 7


# -- ring axioms on random polynomials ----------------------------------------

coeffs = st.fractions(min_value=-5, max_value=5, max_denominator=6)
monos = st.lists(st.tuples(st.sampled_from(["t", "tt"]), st.sampled_from([1, 3, 5]), st.integers(1, 3)), max_size=3)
polys = st.dictionaries(monos.map(tuple), coeffs, max_size=5).map(lambda d: OddPolynomial(d, 7))


@given(polys, polys, polys)
def test_ring_axioms(a, b, c):
    assert (a * b) * c == a * (b * c)
    assert a * (b + c) == a * b + a * c
    assert a * b == b * a
    assert a + b - b == a
    assert (a * 0).is_zero()


@given(polys)
def test_terms_respect_cutoff(p):
    assert all(sum(k * e for _, k, e in m) <= p.cutoff for m in p.terms)
    assert all(c != 0 for c in p.terms.values())


@given(polys)
def test_json_roundtrip(p):
    assert OddPolynomial.from_json(p.to_json()) == p
