"""Confluent hypergeometric kernel and the square-root model's psi ratios.

The reference oracle is the defining Taylor series evaluated in exact
rational arithmetic, so it is correct to the final float conversion and
shares no code with the implementation under test.
"""

import math
from fractions import Fraction

import numpy as np
import pytest

from buildlag.boundary import Boundary, cir_tangent
from buildlag.demand import CIR
from buildlag.kummer import (
    Z_SWITCH,
    kummer_m,
    kummer_m_log,
    kummer_m_prime,
    psi_over_psi_prime,
    psi_ratio_second,
)

REF = CIR(gamma=0.8, delta=20.0, sigma=0.2)
RHO = 0.08


def series_oracle(a: float, b: float, z: float, terms: int = 400) -> float:
    """M(a,b,z) summed in exact rationals; Fraction(x) is the exact binary
    value of the float, so the oracle evaluates the same point the
    implementation sees."""
    a, b, z = Fraction(a), Fraction(b), Fraction(z)
    total = Fraction(0)
    term = Fraction(1)
    for s in range(terms):
        total += term
        term *= (a + s) * z / ((b + s) * (s + 1))
    assert term < Fraction(1, 10**30) * total, "oracle not converged"
    return float(total)


def test_value_at_zero_is_one():
    assert kummer_m(1.3, 4.5, 0.0) == 1.0
    assert kummer_m_log(1.3, 4.5, 0.0) == 0.0


def test_equal_parameters_give_exponential():
    assert kummer_m(1.7, 1.7, 3.0) == pytest.approx(math.exp(3.0), rel=1e-12)


def test_m_1_2_is_expm1_over_z():
    want = (math.exp(0.5) - 1.0) / 0.5
    assert kummer_m(1.0, 2.0, 0.5) == pytest.approx(want, rel=1e-12)
    assert want == pytest.approx(1.2974425414002564, rel=1e-14)


@pytest.mark.parametrize(
    "a,b,z",
    [
        (0.5, 1.5, 0.1),
        (1.1, 2.2, 3.3),
        (2.0, 7.0, 25.0),
        (0.1, 801.0, 45.0),
        (3.7, 0.4, 10.0),
    ],
)
def test_series_region_against_rational_oracle(a, b, z):
    assert kummer_m(a, b, z) == pytest.approx(series_oracle(a, b, z), rel=1e-10)


@pytest.mark.parametrize("z", [40.0, 45.0, 49.9, 50.1, 55.0, 60.0])
def test_branch_agreement_near_switch(z):
    # both evaluation branches are exercised within +-20% of Z_SWITCH; each
    # must sit on the oracle, hence within 1e-7 of the other
    assert 0.8 * Z_SWITCH <= z <= 1.2 * Z_SWITCH
    for a, b in [(1.1, 2.2), (2.5, 5.0), (0.3, 1.7)]:
        want = series_oracle(a, b, z, terms=600)
        assert kummer_m(a, b, z) == pytest.approx(want, rel=1e-7)


def test_log_form_tracks_scipy_into_large_z():
    # scipy's hyp1f1 is an independent implementation and stays finite in
    # this range; the exact-rational oracle would be too slow here
    from scipy.special import hyp1f1

    for z in (80.0, 200.0, 600.0):
        want = math.log(hyp1f1(1.1, 2.2, z))
        assert kummer_m_log(1.1, 2.2, z) == pytest.approx(want, rel=1e-10)


def test_log_form_finite_at_extreme_z():
    # x = 2 gamma d / sigma^2 reaches ~1e6 at plot scales
    lv = kummer_m_log(1.1, 801.0, 1.0e6)
    assert math.isfinite(lv) and lv > 0.0


def test_overflow_reported_not_saturated():
    with pytest.raises(OverflowError):
        kummer_m(1.1, 2.2, 800.0)


def test_bad_arguments_rejected():
    with pytest.raises(ValueError):
        kummer_m(-1.0, 2.0, 1.0)
    with pytest.raises(ValueError):
        kummer_m(1.0, 0.0, 1.0)
    with pytest.raises(ValueError):
        kummer_m(1.0, 2.0, -0.5)


# ---------------------------------------------------------------------------
# Derivative and the contiguous identity
# ---------------------------------------------------------------------------


def test_prime_at_zero_is_a_over_b():
    assert kummer_m_prime(1.3, 4.0, 0.0) == pytest.approx(1.3 / 4.0, rel=1e-14)


def test_prime_equal_parameters_exponential():
    assert kummer_m_prime(2.5, 2.5, 1.0) == pytest.approx(math.e, rel=1e-11)


def _identity_residual(a, b, z):
    """|z M' - a (M(a+1,b,z) - M(a,b,z))| relative to |z M'|."""
    lhs = z * kummer_m_prime(a, b, z)
    rhs = a * (kummer_m(a + 1.0, b, z) - kummer_m(a, b, z))
    return abs(lhs - rhs) / abs(lhs)


def test_contiguous_identity_at_reference_point():
    assert _identity_residual(1.1, 2.2, 3.3) < 1e-8


def test_contiguous_identity_random_grid():
    rng = np.random.default_rng(7)
    for _ in range(100):
        a = rng.uniform(0.1, 5.0)
        b = rng.uniform(0.2, 10.0)
        z = rng.uniform(0.01, 60.0)
        assert _identity_residual(a, b, z) < 1e-8


def test_prime_against_central_difference():
    a, b, z = 1.4, 3.1, 7.0
    eps = 1e-6
    fd = (kummer_m(a, b, z + eps) - kummer_m(a, b, z - eps)) / (2 * eps)
    assert kummer_m_prime(a, b, z) == pytest.approx(fd, rel=1e-8)


# ---------------------------------------------------------------------------
# psi ratios
# ---------------------------------------------------------------------------


def test_psi_over_psi_prime_limit():
    # kappa_1 = sigma^2 / (2 gamma) = 0.025 at the reference parameters
    got = psi_over_psi_prime(REF, RHO, 1.0e4)
    assert got == pytest.approx(REF.sigma**2 / (2.0 * REF.gamma), rel=1e-2)


def test_psi_over_psi_prime_decreasing_toward_limit():
    # psi(0) = 1 and psi'(0) = rho/(gamma delta), so the ratio starts at
    # gamma delta / rho = 200 and falls toward the limit from above
    start = psi_over_psi_prime(REF, RHO, 1e-8)
    assert start == pytest.approx(REF.gamma * REF.delta / RHO, rel=1e-6)
    grid = [1e-8, 1.0, 10.0, 100.0, 1e4]
    vals = [psi_over_psi_prime(REF, RHO, d) for d in grid]
    assert all(a > b for a, b in zip(vals, vals[1:]))
    assert vals[-1] > REF.sigma**2 / (2.0 * REF.gamma)


def test_psi_ratio_second_positive_random_draws():
    rng = np.random.default_rng(13)
    for _ in range(50):
        g = rng.uniform(0.05, 2.0)
        dl = rng.uniform(1.0, 50.0)
        s = min(rng.uniform(0.05, 1.0), 0.99 * math.sqrt(2.0 * g * dl))
        rho = rng.uniform(0.01, 0.3)
        d = rng.uniform(1e-3, 100.0)
        assert psi_ratio_second(CIR(g, dl, s), rho, d) > 0.0


def test_psi_ratio_second_drives_tangent_slope():
    """Near the origin the full boundary must have the tangent's slope: a
    finite-difference slope of chat at d = 1e-6 against the closed form."""
    h, q0 = 8.0, 1.0
    bound = Boundary(REF, RHO, h, q0)
    d = 1e-6
    eps = 1e-7
    fd = float((bound.eval(np.asarray(d + eps)) - bound.eval(np.asarray(d - eps))) / (2 * eps))
    slope = float(
        cir_tangent(REF, RHO, h, q0, 1.0) - cir_tangent(REF, RHO, h, q0, 0.0)
    )
    assert fd == pytest.approx(slope, rel=1e-4)


def test_psi_convexity_on_dense_grid():
    """psi itself (reconstructed from the log values) is positive, strictly
    increasing, and convex."""
    a = RHO / REF.gamma
    b = 2.0 * REF.gamma * REF.delta / REF.sigma**2
    x = 2.0 * REF.gamma / REF.sigma**2
    d = np.linspace(0.05, 60.0, 200)
    logpsi = np.array([kummer_m_log(a, b, x * di) for di in d])
    # constant rescaling keeps all three properties and avoids overflow
    psi = np.exp(logpsi - logpsi.max() + 50.0)
    assert np.all(psi > 0.0)
    assert np.all(np.diff(psi) > 0.0)
    assert np.all(np.diff(psi, 2) > -1e-12 * psi[:-2])
