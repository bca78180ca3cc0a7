import math

import pytest
from hypothesis import given, settings, strategies as st

from dqengine.hpoly import qqi
from dqengine.moyal import (
    PhasePoly,
    QuadratureError,
    QuadratureParams,
    moyal_bracket,
    moyal_star,
    poisson_bracket,
    standard_star,
    star_genvalue_residual,
    star_power_series_exp,
    t_transition,
    wigner_from_wavefunction,
)
from dqengine.star_exp import ho_hamiltonian, ho_star_exp_closed, ho_star_exp_symbol, ho_wigner_symbol, wigner_laguerre
from dqengine.weyl_algebra import op_mul, weyl_quantize_poly

x, p, hbar = PhasePoly.x(), PhasePoly.p(), PhasePoly.hbar()

monomial = st.tuples(st.integers(0, 3), st.integers(0, 3), st.integers(-4, 4), st.integers(-4, 4))
polys = st.lists(monomial, min_size=1, max_size=4).map(
    lambda ms: PhasePoly.from_coeffs({(a, b): qqi(re, im) for a, b, re, im in ms})
)


def test_x_star_p():
    assert moyal_star(x, p).to_string(decimal=True) == "x*p + 0.5i*hbar"
    assert moyal_star(p, x).to_string(decimal=True) == "x*p - 0.5i*hbar"


def test_bracket_of_canonical_pair():
    assert moyal_bracket(x, p) == PhasePoly.const(1)


@settings(max_examples=40, deadline=None)
@given(polys, polys, polys)
def test_star_is_associative(f, g, h):
    assert moyal_star(moyal_star(f, g), h) == moyal_star(f, moyal_star(g, h))


@settings(max_examples=40, deadline=None)
@given(polys, polys)
def test_star_reduces_to_product_and_poisson_bracket(f, g):
    fg = moyal_star(f, g)
    assert fg.hbar_part(0) == (f * g).hbar_part(0)
    first = (fg - moyal_star(g, f)).hbar_part(1)
    assert first == poisson_bracket(f, g).scale(qqi(0, 1)).shift_hbar(1).hbar_part(1)


@settings(max_examples=40, deadline=None)
@given(polys, polys)
def test_weyl_map_is_a_homomorphism(f, g):
    assert weyl_quantize_poly(moyal_star(f, g)) == op_mul(weyl_quantize_poly(f), weyl_quantize_poly(g))


@settings(max_examples=25, deadline=None)
@given(polys, polys)
def test_t_transition_intertwines_products(f, g):
    T = t_transition
    assert T(standard_star(f, g)) == moyal_star(T(f), T(g))
    assert T(T(f), "inverse") == f


def test_truncated_star_keeps_low_orders():
    full = moyal_star(x**2, p**2)
    assert moyal_star(x**2, p**2, truncation=0) == x**2 * p**2
    assert full.hbar_part(2) == PhasePoly.const(qqi(-0.5))


def test_series_converges_to_closed_form():
    H = ho_hamiltonian(1.0)
    assert abs(star_power_series_exp(H, 0.1, 12, (0.3, 0.4)) - ho_star_exp_closed(1.0, 0.3, 0.4, 0.1)) < 1e-8
    # at larger omega t the truncation error grows as expected
    assert abs(star_power_series_exp(H, 0.5, 12, (0.3, 0.4)) - ho_star_exp_closed(1.0, 0.3, 0.4, 0.5)) < 1e-9


@pytest.mark.parametrize("n", range(6))
def test_star_genvalue(n):
    H = ho_hamiltonian(1.3)
    pts = [(a, b) for a in (-0.9, 0.2, 1.1) for b in (-0.4, 0.6)]
    assert star_genvalue_residual(H, ho_wigner_symbol(n, 1.3), 1.3 * (n + 0.5), pts) < 1e-9


def test_genvalue_residual_detects_wrong_energy():
    H = ho_hamiltonian(1.0)
    assert star_genvalue_residual(H, ho_wigner_symbol(0, 1.0), 0.7, [(0.0, 0.0)]) > 1e-2


def test_poly_times_gaussian_star_matches_dynamical_equation():
    H = ho_hamiltonian(1.0)
    dt = 1e-5
    lhs = moyal_star(H, ho_star_exp_symbol(1.0, 0.7))
    up, dn = ho_star_exp_symbol(1.0, 0.7 + dt), ho_star_exp_symbol(1.0, 0.7 - dt)
    for q, pp in [(0.1, 0.2), (-0.5, 0.9)]:
        deriv = (up.evaluate(q, pp) - dn.evaluate(q, pp)) / (2 * dt)
        assert abs(lhs.evaluate(q, pp) - 1j * deriv) < 1e-6


def test_gaussian_symbol_scale_and_derivatives():
    g = ho_star_exp_symbol(1.0, 0.4)
    assert abs(g.scale(2.0).evaluate(0.3, 0.1) - 2 * g.evaluate(0.3, 0.1)) < 1e-14
    h = 1e-6
    fd = (g.evaluate(0.3 + h, 0.1) - g.evaluate(0.3 - h, 0.1)) / (2 * h)
    assert abs(g.dx().evaluate(0.3, 0.1) - fd) < 1e-8


def _ground_state(x):
    return math.pi**-0.25 * math.exp(-x * x / 2)


def _first_excited(x):
    return math.pi**-0.25 * math.sqrt(2) * x * math.exp(-x * x / 2)


@pytest.mark.parametrize("n,psi", [(0, _ground_state), (1, _first_excited)])
def test_quadrature_wigner_matches_laguerre(n, psi):
    for q in (-0.5, 0.0, 0.8):
        for pp in (-0.3, 0.4):
            assert abs(wigner_from_wavefunction(psi, q, pp) - wigner_laguerre(n, q, pp, 1.0)) < 1e-7


def test_wigner_values_at_origin():
    assert math.isclose(wigner_laguerre(0, 0, 0, 1.0), 1 / math.pi)
    assert math.isclose(wigner_laguerre(1, 0, 0, 1.0), -1 / math.pi)


def test_non_decaying_wavefunction_is_rejected():
    with pytest.raises(QuadratureError):
        wigner_from_wavefunction(lambda s: 1.0, 0.0, 0.0, quadrature=QuadratureParams(r_max=64))
