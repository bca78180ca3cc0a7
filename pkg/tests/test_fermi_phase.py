import itertools

import numpy as np
import pytest

from dqengine.fermi_phase import (
    FermiSpace,
    FockOperator,
    fermi_star,
    fermi_star_integral,
    fermi_trace,
    fermi_weyl_quantize,
    fermi_wigner,
    fock_annihilator,
    phase_space_integral,
    symbol_parity,
)


@pytest.fixture(params=[1, 2])
def space(request):
    return FermiSpace(request.param, (), 1.0)


def test_registry_order_interleaves_pairs():
    assert FermiSpace(2, ("alpha",)).registry.names == ("pi1", "psi1", "pi2", "psi2", "alpha")


def test_basic_star_products():
    s = FermiSpace(1, (), 1.0)
    pi, psi = s.pi(), s.psi()
    assert fermi_star(s, psi, pi).isclose(0.5j * s.one() - pi * psi, 1e-15)
    assert fermi_star(s, pi, psi).isclose(0.5j * s.one() + pi * psi, 1e-15)
    assert fermi_star(s, psi, psi).is_zero()


def test_star_anticommutator_scales_with_hbar():
    s = FermiSpace(1, (), 0.3)
    car = fermi_star(s, s.psi(), s.pi()) + fermi_star(s, s.pi(), s.psi())
    assert car.isclose(0.3j * s.one(), 1e-15)


def test_differential_equals_integral_form(space):
    basis = space.phase_basis()
    for f, g in itertools.product(basis, basis):
        assert fermi_star(space, f, g).isclose(fermi_star_integral(space, f, g), 1e-13)


def test_associativity_on_basis(space):
    basis = space.phase_basis()
    sample = basis if space.n == 1 else basis[::2]
    for f, g, h in itertools.product(sample, basis[::3], sample):
        lhs = fermi_star(space, fermi_star(space, f, g), h)
        assert lhs.isclose(fermi_star(space, f, fermi_star(space, g, h)), 1e-13)


def test_weyl_quantization_is_a_homomorphism(space):
    basis = space.phase_basis()
    for f, g in itertools.product(basis, basis):
        lhs = fermi_weyl_quantize(space, fermi_star(space, f, g))
        assert lhs.allclose(fermi_weyl_quantize(space, f) * fermi_weyl_quantize(space, g), 1e-12)


def test_quantized_generators_are_jordan_wigner_modes():
    s = FermiSpace(2, (), 0.5)
    b2 = fock_annihilator(2, 2)
    assert np.allclose(fermi_weyl_quantize(s, s.psi(2)).matrix(), np.sqrt(0.5) * b2)
    assert np.allclose(fermi_weyl_quantize(s, s.pi(2)).matrix(), 1j * np.sqrt(0.5) * b2.conj().T)


def test_annihilators_obey_car():
    n = 3
    bs = [fock_annihilator(j, n) for j in range(1, n + 1)]
    eye = np.eye(2**n)
    for i, j in itertools.product(range(n), range(n)):
        assert np.allclose(bs[i] @ bs[j].conj().T + bs[j].conj().T @ bs[i], eye * (i == j))
        assert np.allclose(bs[i] @ bs[j] + bs[j] @ bs[i], 0)


def test_external_sources_ride_along():
    s = FermiSpace(1, ("alpha",), 1.0)
    a = s.ext("alpha")
    f = a * s.psi()
    g = s.pi()
    lhs = fermi_weyl_quantize(s, fermi_star(s, f, g))
    assert lhs.allclose(fermi_weyl_quantize(s, f) * fermi_weyl_quantize(s, g), 1e-12)


def test_plain_and_graded_trace_of_identity():
    s = FermiSpace(1, (), 1.0)
    ident = FockOperator.from_matrix(np.eye(2), 1)
    assert fermi_trace(s, ident, graded=False) == pytest.approx(-2j)
    assert fermi_trace(s, ident) == pytest.approx(0)


def test_graded_trace_is_cyclic_up_to_sign(space):
    basis = space.phase_basis()
    for f, g in itertools.product(basis, basis):
        A, B = fermi_weyl_quantize(space, f), fermi_weyl_quantize(space, g)
        sign = -1 if symbol_parity(f) == "odd" and symbol_parity(g) == "odd" else 1
        assert fermi_trace(space, A * B) == pytest.approx(sign * fermi_trace(space, B * A), abs=1e-12)


def test_wigner_symbol_normalisation(space, rng):
    dim = 2**space.n
    A = rng.normal(size=(dim, dim)) + 1j * rng.normal(size=(dim, dim))
    rho = A @ A.conj().T
    rho /= np.trace(rho)
    signs = np.array([(-1) ** bin(k).count("1") for k in range(dim)])
    expected = np.sum(signs * np.diag(rho)) / space.hbar**space.n
    assert phase_space_integral(space, fermi_wigner(space, rho)).body() == pytest.approx(expected, abs=1e-12)


def test_wigner_of_vacuum_inverts_quantization():
    s = FermiSpace(1, (), 1.0)
    vac = np.diag([1.0, 0.0]).astype(complex)
    W = fermi_wigner(s, vac)
    assert np.allclose((1j * fermi_weyl_quantize(s, W)).matrix(), vac)


def test_phase_space_integral_of_top_form():
    s = FermiSpace(2, (), 1.0)
    top = s.pi(1) * s.psi(1) * s.pi(2) * s.psi(2)
    assert phase_space_integral(s, top).body() == pytest.approx(1)


def test_fock_model_size_limits():
    with pytest.raises(ValueError):
        fermi_weyl_quantize(FermiSpace(4, ()), FermiSpace(4, ()).one())
    with pytest.raises(ValueError):
        fermi_wigner(FermiSpace(3, ()), np.eye(8))
