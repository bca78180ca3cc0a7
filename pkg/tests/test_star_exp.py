import cmath
import math

import numpy as np
import pytest

from dqengine.propagators import METICULOUS, NAIVE, BosonicPropagatorSpec, fermi_driven_propagator, fermi_ho_propagator
from dqengine.star_exp import (
    fermi_star_exp_meticulous,
    fermi_star_exp_naive,
    fourier_dirichlet_check,
    ho_star_exp_closed,
    ho_star_exp_symbol,
    ho_star_exp_wick,
    ho_wigner_symbol,
    meticulous_constant,
    meticulous_constant_chain,
    printed_meticulous_driven,
    printed_meticulous_ho,
    printed_naive_driven,
    printed_naive_ho,
    star_exp_from_propagator_bosonic,
    wigner_laguerre,
)


def direct_closed_form(omega, q, p, t, hbar=1.0):
    H = 0.5 * (p * p + omega**2 * q * q)
    return cmath.exp(-2j * H * math.tan(omega * t / 2) / (hbar * omega)) / math.cos(omega * t / 2)


def test_closed_form_against_direct_formula():
    assert ho_star_exp_closed(1.3, 0.2, -0.5, 0.8) == pytest.approx(direct_closed_form(1.3, 0.2, -0.5, 0.8))


def test_closed_form_at_zero_time_is_one():
    assert ho_star_exp_closed(1.0, 0.7, 0.4, 1e-12) == pytest.approx(1.0)


@pytest.mark.parametrize("m,hbar", [(1.0, 1.0), (2.0, 1.0), (1.0, 0.3), (0.5, 2.0)])
def test_propagator_route_matches_closed_form(m, hbar):
    omega = 1.1
    spec = BosonicPropagatorSpec("ho", m, omega, hbar=hbar)
    for q in np.linspace(-1, 1, 5):
        for p in np.linspace(-1, 1, 5):
            for wt in (0.3, 1.5, 2.9):
                a = star_exp_from_propagator_bosonic(spec, q, p, wt / omega).value
                b = ho_star_exp_closed(omega, q, p, wt / omega, hbar, m)
                assert abs(a - b) <= 1e-9 * abs(b)


def test_quadratic_family_route_matches_closed_form():
    spec = BosonicPropagatorSpec.oscillator_as_quadratic(1.0, 1.0)
    for q, p, t in [(0.3, 0.4, 0.5), (-0.6, 0.1, 2.0)]:
        a = star_exp_from_propagator_bosonic(spec, q, p, t).value
        assert abs(a - ho_star_exp_closed(1.0, q, p, t)) < 1e-8 * abs(a)


def test_propagator_route_rejects_caustic_window():
    spec = BosonicPropagatorSpec("ho", 1.0, 1.0)
    with pytest.raises(ValueError):
        star_exp_from_propagator_bosonic(spec, 0.0, 0.0, 3.5)
    quad = BosonicPropagatorSpec.oscillator_as_quadratic(1.0, 1.0)
    with pytest.raises(ValueError):
        star_exp_from_propagator_bosonic(quad, 0.0, 0.0, 4.0)


def test_symbol_evaluates_to_closed_form():
    g = ho_star_exp_symbol(0.9, 0.6)
    assert g.evaluate(0.3, -0.2) == pytest.approx(ho_star_exp_closed(0.9, 0.3, -0.2, 0.6))


def test_wick_rotation_integrates_to_partition_function():
    omega, tau = 1.0, 2.0
    xs = np.linspace(-12, 12, 801)
    X, P = np.meshgrid(xs, xs)
    vals = ho_star_exp_wick(omega, X, P, tau)
    h = xs[1] - xs[0]
    Z = np.sum(vals).real * h * h / (2 * math.pi)
    assert Z == pytest.approx(1 / (2 * math.sinh(omega * tau / 2)), rel=1e-8)


def test_trace_equals_dirichlet_sum():
    lhs, rhs = fourier_dirichlet_check(1.0, 2.0, 40)
    assert lhs == pytest.approx(1 / (2 * math.sinh(1.0)), rel=1e-12)
    assert abs(lhs - rhs) < 1e-15


def test_wigner_symbol_matches_laguerre():
    for n in range(4):
        g = ho_wigner_symbol(n, 1.2)
        for q, p in [(0.0, 0.0), (0.4, -0.3), (1.1, 0.5)]:
            assert g.evaluate(q, p).real == pytest.approx(wigner_laguerre(n, q, p, 1.2), abs=1e-14)


@pytest.mark.parametrize("n", range(6))
def test_wigner_functions_are_normalised(n):
    xs = np.linspace(-10, 10, 601)
    X, P = np.meshgrid(xs, xs)
    h = xs[1] - xs[0]
    assert np.sum(wigner_laguerre(n, X, P, 1.0)) * h * h == pytest.approx(1.0, abs=1e-9)


def test_meticulous_constant():
    assert meticulous_constant(1) == pytest.approx(0.2)
    assert meticulous_constant(1, hbar=2.0) == pytest.approx(0.8)
    for n in range(1, 5):
        assert meticulous_constant(n, 0.7) == pytest.approx(meticulous_constant_chain(n, 0.7))


@pytest.mark.parametrize("t", [0.0, 0.3, 1.0])
def test_naive_oscillator_matches_printed(t):
    S = fermi_star_exp_naive(fermi_ho_propagator(1.0, t, NAIVE))
    assert S.element.max_abs_diff(printed_naive_ho(1.0, t)) < 1e-10
    assert S.parity != "even"


@pytest.mark.parametrize("t", [0.0, 0.3, 1.0])
def test_meticulous_oscillator_matches_printed(t):
    S = fermi_star_exp_meticulous(fermi_ho_propagator(1.0, t, METICULOUS))
    assert S.element.max_abs_diff(printed_meticulous_ho(1.0, t)) < 1e-10
    assert S.parity == "even"


@pytest.mark.parametrize("t", [0.3, 1.0])
def test_driven_cases_match_printed(t):
    naive = fermi_star_exp_naive(fermi_driven_propagator(0.8, t, 1.0, NAIVE, "linear"))
    assert naive.element.max_abs_diff(printed_naive_driven(0.8, t)) < 1e-10
    met = fermi_star_exp_meticulous(fermi_driven_propagator(0.8, t, 1.0, METICULOUS, "linear"))
    assert met.element.max_abs_diff(printed_meticulous_driven(0.8, t)) < 1e-10
    assert met.parity == "even"


def test_exact_expansion_differs_only_in_source_pair():
    lin = fermi_star_exp_meticulous(fermi_driven_propagator(0.8, 0.5, 1.0, METICULOUS, "linear")).element
    exact = fermi_star_exp_meticulous(fermi_driven_propagator(0.8, 0.5, 1.0, METICULOUS, "exact")).element
    diff = exact - lin
    for m, c in diff.chop(1e-14).terms.items():
        assert {"alpha", "alpha*"} <= set(diff.monomial_names(m))


def test_naive_weight_orders_differ_by_relative_signs():
    K = fermi_ho_propagator(1.0, 0.4, NAIVE)
    left = fermi_star_exp_naive(K, weight_order="prime-left").element
    right = fermi_star_exp_naive(K, weight_order="prime-right").element
    assert left.coefficient("pi") == pytest.approx(-right.coefficient("pi"))
    assert left.coefficient("Psi") == pytest.approx(right.coefficient("Psi"))
    with pytest.raises(ValueError):
        fermi_star_exp_naive(K, weight_order="middle")


def test_meticulous_transform_scales_with_hbar():
    hbar = 0.5
    S = fermi_star_exp_meticulous(fermi_ho_propagator(1.0, 0.3, METICULOUS, hbar), hbar)
    assert S.element.max_abs_diff(printed_meticulous_ho(1.0, 0.3, hbar)) < 1e-12
