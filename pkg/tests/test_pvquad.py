import math
from fractions import Fraction

import mpmath
import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from kontsevich_bkp.gaussmoments import CoincidentSpectrumError, PotentialSpec, moment_perturbative
from kontsevich_bkp.pvquad import (
    FORMS,
    KernelSpec,
    QuadConfig,
    QuadratureError,
    SkewMatrix,
    basis_F,
    basis_F_scale,
    debruijn_pv_check,
    leading_correction_order,
    mc_z_estimate,
    pfaffian,
    pv_double_integral,
    remainder_RN,
    schur_pfaffian_check,
    z_direct,
    z_theorem1,
)
from kontsevich_bkp.pvquad.quad import pv_epsilon_extrapolation

mpmath.mp.dps = 150


def mp_remainder(N, xi):
    # e^x minus the partial sum cancels ~N*16 digits at tiny x; work well above that
    with mpmath.workdps(500):
        x = mpmath.mpf(xi)
        return +(mpmath.exp(x) - sum(x**k / mpmath.factorial(k) for k in range(N)))


# -- remainders and basis functions -----------------------------------------


@pytest.mark.parametrize("N", [1, 2, 3, 4, 8, 20])
def test_remainder_against_mpmath(N):
    xs = np.concatenate([np.linspace(-20, 20, 81), [1e-8, -1e-3, 0.1, N, -N, N + 1e-9]])
    got = remainder_RN(N, xs)
    for x, g in zip(xs, got):
        ref = mp_remainder(N, float(x))
        assert abs(g - float(ref)) <= 4e-15 * abs(float(ref)) + 1e-300, (N, x)


def test_remainder_examples():
    assert remainder_RN(1, 0.0) == 0.0
    assert remainder_RN(1, 1.0) == pytest.approx(math.e - 1, rel=1e-15)
    assert remainder_RN(2, -30.0) == pytest.approx(math.exp(-30) + 29, rel=1e-15)
    with pytest.raises(ValueError):
        remainder_RN(0, 1.0)


@pytest.mark.parametrize("lam", [(1.0, 2.0), (0.5, 1.0, 3.0, 4.5)])
def test_basis_forms_agree(lam):
    N = len(lam)
    x = np.linspace(-6, 6, 241)
    ref = basis_F(N, 0, lam, x, "remainder")
    for n in range(N):
        vals = {f: basis_F(N, n, lam, x, f) for f in FORMS}
        scale = basis_F_scale(N, n, lam, x)
        for f, v in vals.items():
            assert np.all(np.abs(v - vals["remainder"]) <= 1e-10 * scale), (n, f)
    assert ref.shape == x.shape


def test_basis_small_x_expansion():
    # F_{N;n}(x) = x^{2n} + O(x^{2N})
    lam = (1.0, 2.5, 4.0)
    for n in range(3):
        assert basis_F(3, n, lam, 1e-3) == pytest.approx(1e-6**n, rel=1e-9)
    assert basis_F(3, 0, lam, 0.0) == 1.0


@pytest.mark.parametrize("lam", [(1.0, 2.0), (0.5, 1.0, 3.0, 4.5)])
def test_leading_correction_order(lam):
    N = len(lam)
    for n in range(N):
        assert leading_correction_order(N, n, lam) == pytest.approx(2 * N, abs=1e-3)


def test_basis_validation():
    with pytest.raises(CoincidentSpectrumError):
        basis_F(2, 0, (1.0, 1.0), 0.5)
    with pytest.raises(ValueError):
        basis_F(2, 2, (1.0, 2.0), 0.5)
    with pytest.raises(ValueError):
        basis_F(2, 0, (1.0, 2.0, 3.0), 0.5)
    with pytest.raises(ValueError):
        basis_F(2, 0, (1.0, 2.0), 0.5, form="taylor")


# -- Pfaffians ---------------------------------------------------------------


def test_pfaffian_examples():
    assert pfaffian([[0, 3], [-3, 0]]) == 3
    a, b, c, d, e, f = 1.0, 2.0, 3.0, 4.0, 5.0, 6.0
    A = [[0, a, b, c], [-a, 0, d, e], [-b, -d, 0, f], [-c, -e, -f, 0]]
    assert pfaffian(A) == pytest.approx(a * f - b * e + c * d)
    assert pfaffian(np.zeros((4, 4))) == 0.0
    with pytest.raises(ValueError):
        pfaffian(np.zeros((3, 3)))
    with pytest.raises(ValueError):
        SkewMatrix(np.eye(2))


@settings(max_examples=30)
@given(st.integers(1, 5), st.integers(0, 2**32 - 1))
def test_pfaffian_squared_is_det(half, seed):
    rng = np.random.default_rng(seed)
    B = rng.standard_normal((2 * half, 2 * half))
    A = B - B.T
    pf = pfaffian(SkewMatrix(A))
    det = np.linalg.det(A)
    assert abs(pf * pf - det) <= 1e-12 * max(abs(det), 1.0) * 10**half


@pytest.mark.parametrize("n", [2, 4, 6])
def test_schur_identity(n):
    rng = np.random.default_rng([n, 1])
    for _ in range(50):
        x = np.arange(1, n + 1) + rng.uniform(0, 0.5, n)
        _, _, rel = schur_pfaffian_check(rng.permutation(x))
        assert rel <= 1e-10


def test_schur_guards():
    with pytest.raises(ValueError):
        schur_pfaffian_check([1.0, 2.0, 3.0])
    with pytest.raises(ValueError):
        schur_pfaffian_check([1.0, -1.0])


# -- principal-value quadrature ---------------------------------------------


def _gauss(x):
    return np.exp(-0.5 * x * x)


def test_pv_closed_form_example():
    # f = 1, g = y^2 with rho = e^{-x^2/2}: value -2 pi
    r = pv_double_integral(np.ones_like, lambda y: y * y, _gauss)
    assert r.value == pytest.approx(-2 * math.pi, abs=1e-12)
    assert r.error < 1e-10


def test_pv_symmetric_data_vanishes():
    r = pv_double_integral(np.ones_like, np.ones_like, _gauss)
    assert abs(r.value) < 1e-13


def test_fold_matches_epsilon_oracle():
    f = lambda x: np.cos(x) + x  # noqa: E731
    g = lambda y: y**3 + 0.5  # noqa: E731
    folded = pv_double_integral(f, g, _gauss).value
    oracle, err = pv_epsilon_extrapolation(f, g, _gauss, X=12.0)
    assert err < 1e-9
    assert folded == pytest.approx(oracle, abs=1e-9)
    unfolded = pv_double_integral(f, g, _gauss, QuadConfig(fold=False)).value
    assert unfolded == oracle


def test_quad_config_validation():
    with pytest.raises(ValueError):
        QuadConfig(x_max=-1)
    with pytest.raises(ValueError):
        QuadConfig(rtol=0.5)
    with pytest.raises(ValueError):
        QuadConfig(nodes=1)


def test_quadrature_nonconvergence_is_reported():
    with pytest.raises(QuadratureError):
        pv_double_integral(lambda x: np.cos(40 * x), np.ones_like, _gauss, QuadConfig(nodes=4, panels=1, depth=1))


def test_kernel_spec_validation():
    with pytest.raises(ValueError):
        KernelSpec(2, (1.0,))
    with pytest.raises(CoincidentSpectrumError):
        KernelSpec(2, (1.0, 1.0))
    with pytest.raises(ValueError):
        KernelSpec(2, (1.0, 2.0), {4: 0.25})
    with pytest.raises(ValueError):
        KernelSpec(2, (1.0, 2.0), {}, {2: 0.1})
    with pytest.raises(ValueError):
        KernelSpec(2, (1.0, 2.0), {3: 1.0})
    s = KernelSpec(2, (1, 2), {4: -0.25}, {1: 0.1, 3: 0.0})
    assert s.t == {1: 0.1} and s.has_potential


# -- partition function ------------------------------------------------------

QUARTIC = {4: -0.25}


@pytest.fixture(scope="module")
def quartic_n2():
    return z_theorem1(KernelSpec(2, (1.0, 2.0), QUARTIC))


def test_kernel_entry_against_epsilon_oracle(quartic_n2):
    s = KernelSpec(2, (1.0, 2.0), QUARTIC)
    F0 = lambda x: basis_F(2, 0, s.lambdas, x.ravel()).reshape(x.shape)  # noqa: E731
    F1 = lambda x: basis_F(2, 1, s.lambdas, x.ravel()).reshape(x.shape)  # noqa: E731
    oracle, _ = pv_epsilon_extrapolation(F0, F1, lambda x: np.exp(s.vt(x)), X=s.x_max())
    assert quartic_n2.K[0, 1] == pytest.approx(oracle, abs=1e-6)


def test_theorem1_result_fields(quartic_n2):
    r = quartic_n2
    assert r.asymmetry < 1e-8
    assert r.pf2_det_rel < 1e-12
    assert r.value == -r.literal
    assert np.allclose(r.K, -r.K.T, atol=0)


@pytest.mark.parametrize("lam", [(1.0, 2.0), (0.5, 3.0), (2.0, 2.7)])
def test_gaussian_normalisation(lam):
    assert z_theorem1(KernelSpec(2, lam)).value == pytest.approx(1.0, abs=1e-9)


@pytest.mark.parametrize(
    "lam,v0,t",
    [
        ((1.0, 2.0), QUARTIC, {}),
        ((1.0, 2.0), QUARTIC, {1: 0.1}),
        ((0.7, 1.9), {4: -0.1, 2: 0.05}, {3: 0.02}),
        ((1.5, 4.0), {6: -0.05}, {1: -0.3}),
        ((1.0, 3.0), {}, {1: 0.4}),
    ],
)
def test_theorem1_matches_direct(lam, v0, t):
    s = KernelSpec(2, lam, v0, t)
    direct, err = z_direct(s)
    assert err < 1e-9
    assert z_theorem1(s).value == pytest.approx(direct, rel=1e-8)


def test_direct_free_case_closed_form():
    # V0 = 0 with only t1: Z(t)/Z(0) = exp(t1^2 p1 / 2), p1 = sum 1/lambda
    lam = (1.0, 3.0)
    val, _ = z_direct(KernelSpec(2, lam, {}, {1: 0.4}))
    assert val == pytest.approx(math.exp(0.08 * (1 + 1 / 3)), rel=1e-10)


def test_direct_independent_of_cutoff_radius():
    s = KernelSpec(2, (1.0, 2.0), QUARTIC)
    a, _ = z_direct(s, QuadConfig(x_max=8.0))
    b, _ = z_direct(s, QuadConfig(x_max=10.0))
    assert a == pytest.approx(b, abs=1e-8)


def test_second_derivative_matches_perturbative_cumulant():
    # d^2/dt1^2 log Z at t = 0 equals K_{1,1}(g); the residual against the
    # O(g^2) series must shrink like g^3
    lam, h = (1, 2), 0.1
    series = moment_perturbative(lam, (1, 1), PotentialSpec({4: Fraction(-1, 4)}, 2))
    resid = []
    for g in (0.008, 0.004):
        L = [math.log(z_theorem1(KernelSpec(2, lam, {4: -g / 4}, {1: k * h})).value) for k in (-2, -1, 0, 1, 2)]
        d2 = (-L[0] + 16 * L[1] - 30 * L[2] + 16 * L[3] - L[4]) / (12 * h * h)
        resid.append(d2 - sum(float(c) * g**m for m, c in enumerate(series)))
    assert abs(resid[0]) < 1e-3
    assert 6 < resid[0] / resid[1] < 10


def test_perturbative_needs_exact_spectrum():
    with pytest.raises(TypeError):
        moment_perturbative((1.0, 2.0), (1, 1), PotentialSpec({4: -1}, 1))


def test_theorem1_rejects_odd_n():
    with pytest.raises(ValueError):
        z_theorem1(KernelSpec(3, (1.0, 2.0, 3.0)))
    with pytest.raises(ValueError):
        z_direct(KernelSpec(4, (1.0, 2.0, 3.0, 4.0)))


@pytest.mark.slow
def test_theorem1_n4_gaussian_normalisation():
    assert z_theorem1(KernelSpec(4, (1.0, 2.0, 3.0, 4.0))).value == pytest.approx(1.0, abs=1e-9)


# -- de Bruijn and Monte Carlo ----------------------------------------------


def test_debruijn_exponential_case():
    r = debruijn_pv_check(
        lambda s: np.exp(-0.5 * s),
        lambda s: np.exp(-1.5 * s),
        np.ones_like,
        f0_prime=lambda s: -0.5 * np.exp(-0.5 * s),
        f1_prime=lambda s: -1.5 * np.exp(-1.5 * s),
    )
    assert r.rel_err < 1e-9


def test_debruijn_polynomial_case():
    r = debruijn_pv_check(np.ones_like, lambda s: s, _gauss, f0_prime=np.zeros_like, f1_prime=np.ones_like)
    assert r.K01 == pytest.approx(-2 * math.pi, abs=1e-12)
    assert r.direct == pytest.approx(-4 * math.pi, abs=1e-10)
    assert r.rel_err < 1e-12


def test_monte_carlo_n2(quartic_n2):
    s = KernelSpec(2, (1.0, 2.0), QUARTIC)
    mean, se = mc_z_estimate(s, 200_000, seed=11)
    assert abs(mean - quartic_n2.value) < 4 * se
    assert mc_z_estimate(s, 1000, seed=3, chunk=300) == mc_z_estimate(s, 1000, seed=3, chunk=300)
    assert mc_z_estimate(KernelSpec(2, (1.0, 2.0)), 10, seed=0) == (1.0, 0.0)
