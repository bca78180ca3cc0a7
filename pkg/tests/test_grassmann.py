import math

import mpmath
import numpy as np
import pytest
from hypothesis import given, settings, strategies as st

from dqengine.grassmann import (
    GeneratorRegistry,
    GrassmannElement,
    RegistryError,
    berezin_integrate,
    gaussian_berezin,
    gaussian_berezin_bruteforce,
    grassmann_delta,
    grassmann_exp,
    left_derivative,
    parity,
    right_derivative,
    substitute,
)

REG3 = GeneratorRegistry(["a", "b", "c"])


def element_from(coeffs):
    return GrassmannElement(REG3, {m: complex(re, im) for m, (re, im) in enumerate(coeffs) if re or im})


coeff = st.tuples(st.integers(-3, 3), st.integers(-3, 3))
elements = st.lists(coeff, min_size=8, max_size=8).map(element_from)


def test_generators_are_nilpotent_and_anticommute():
    a, b, c = REG3.gens("a", "b", "c")
    assert (a * a).is_zero()
    assert (a * b + b * a).is_zero()
    assert (b * c) == -(c * b)


def test_monomials_are_stored_in_registry_order():
    a, b, c = REG3.gens("a", "b", "c")
    assert (c * a).coefficient("a", "c") == -1
    assert (c * b * a).coefficient("a", "b", "c") == -1
    assert (b * c * a).coefficient("a", "b", "c") == 1


@given(elements, elements, elements)
def test_product_is_associative(f, g, h):
    assert ((f * g) * h).isclose(f * (g * h), 0.0)


@given(elements, elements, elements)
def test_product_distributes(f, g, h):
    assert (f * (g + h)).isclose(f * g + f * h, 0.0)


@given(elements)
def test_even_part_is_central(f):
    even = GrassmannElement(REG3, {m: c for m, c in f.terms.items() if bin(m).count("1") % 2 == 0})
    for g in REG3.basis():
        assert (even * g).isclose(g * even, 0.0)


def test_left_and_right_derivatives_differ_by_degree_sign():
    a, b = REG3.gens("a", "b")
    ab = a * b
    assert left_derivative(ab, "a") == b
    assert left_derivative(ab, "b") == -a
    assert right_derivative(ab, "b") == a
    assert right_derivative(ab, "a") == -b


def test_berezin_measure_conventions():
    a = REG3.gen("a")
    one = REG3.one()
    assert berezin_integrate(a, ["a"], "left") == one
    assert berezin_integrate(a, ["a"], "right") == one
    assert berezin_integrate(a, ["a"], "left-weinberg") == -one
    assert berezin_integrate(one, ["a"]).is_zero()


def test_iterated_integral_order_matters():
    a, b = REG3.gens("a", "b")
    assert berezin_integrate(a * b, ["b", "a"]).body() == -1
    assert berezin_integrate(a * b, ["a", "b"]).body() == 1


def test_duplicate_measure_is_rejected():
    with pytest.raises(RegistryError):
        berezin_integrate(REG3.gen("a"), ["a", "a"])
    with pytest.raises(ValueError):
        berezin_integrate(REG3.gen("a"), ["a"], "sideways")


def test_exp_of_sum_of_commuting_evens():
    a, b, c = REG3.gens("a", "b", "c")
    x, y = 2.0 * (a * b), 0.5 + 1j * (b * c)
    assert (grassmann_exp(x) * grassmann_exp(y)).isclose(grassmann_exp(x + y), 1e-14)


def test_exp_handles_mpmath_coefficients():
    a, b = REG3.gens("a", "b")
    e = grassmann_exp(mpmath.mpc(0, 1) * (a * b) + mpmath.mpf(800))
    assert mpmath.almosteq(e.body(), mpmath.exp(800))
    assert mpmath.almosteq(e.coefficient("a", "b"), 1j * mpmath.exp(800))


def test_parity_classes():
    a, b = REG3.gens("a", "b")
    assert parity(REG3.one() + a * b) == "even"
    assert parity(a + b) == "odd"
    assert parity(REG3.one() + a) == "mixed"
    assert parity(REG3.zero()) == "even"


def test_delta_requires_odd_linear_arguments():
    a, b = REG3.gens("a", "b")
    assert grassmann_delta(a - b, b) == a * b
    with pytest.raises(ValueError):
        grassmann_delta(a * b)


def test_substitute_is_a_homomorphism():
    a, b, c = REG3.gens("a", "b", "c")
    images = {"a": b + c, "b": a - c}
    f, g = REG3.one() + a * b, a + 2 * c
    assert substitute(f * g, images, REG3).isclose(substitute(f, images, REG3) * substitute(g, images, REG3), 0.0)


@pytest.mark.parametrize("n", [1, 2, 3])
def test_gaussian_closed_form_matches_brute_force(n, rng):
    reg = GeneratorRegistry([f"a{i}" for i in range(n)] + [f"b{i}" for i in range(n)])
    a = [reg.gen(f"a{i}") for i in range(n)]
    b = [reg.gen(f"b{i}") for i in range(n)]
    for _ in range(10):
        M = rng.normal(size=(n, n)) + 1j * rng.normal(size=(n, n))
        assert gaussian_berezin(M, a, b).max_abs_diff(gaussian_berezin_bruteforce(M, a, b)) < 1e-12


@pytest.mark.parametrize("n", [1, 2, 3])
def test_stacked_measure_sign(n, rng):
    reg = GeneratorRegistry([f"a{i}" for i in range(n)] + [f"b{i}" for i in range(n)])
    a = [reg.gen(f"a{i}") for i in range(n)]
    b = [reg.gen(f"b{i}") for i in range(n)]
    M = rng.normal(size=(n, n)) + 0j
    paired = gaussian_berezin_bruteforce(M, a, b, "paired")
    stacked = gaussian_berezin_bruteforce(M, a, b, "stacked")
    assert stacked.isclose((-1) ** (n * (n - 1) // 2) * paired, 1e-12)


def test_gaussian_without_sources_is_the_determinant(rng):
    reg = GeneratorRegistry(["s", "t"])
    M = rng.normal(size=(2, 2))
    zero = [reg.zero(), reg.zero()]
    assert math.isclose(gaussian_berezin(M, zero, zero).body().real, np.linalg.det(M), rel_tol=1e-12)


def test_singular_gaussian_is_rejected():
    reg = GeneratorRegistry(["s", "t"])
    z = [reg.zero()]
    with pytest.raises(np.linalg.LinAlgError):
        gaussian_berezin(np.zeros((1, 1)), z, z)


@settings(max_examples=30)
@given(st.integers(1, 4), st.integers(0, 2**16))
def test_integration_equals_left_differentiation(n, seed):
    rng = np.random.default_rng(seed)
    reg = GeneratorRegistry([f"t{i}" for i in range(n)])
    f = GrassmannElement(reg, {m: complex(rng.normal()) for m in range(1 << n)})
    for g in reg.names:
        assert berezin_integrate(f, [g]) == left_derivative(f, g)
