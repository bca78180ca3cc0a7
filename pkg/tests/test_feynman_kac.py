import math

import mpmath
import numpy as np
import pytest

from dqengine.feynman_kac import (
    ConvergenceError,
    Schedule,
    TraceFunction,
    fermi_ground_energy,
    fk_fermi_trace,
    fk_trace_ho,
    fk_trace_quadratic,
    ground_energy_limit,
    regime_classify,
)
from dqengine.propagators import driven_matrix_and_spectrum


def test_schedule_grid_and_validation():
    assert Schedule(tau0=0.5, growth=3, max_steps=3).taus() == [0.5, 1.5, 4.5, 13.5]
    with pytest.raises(ValueError):
        Schedule(growth=1.0)
    with pytest.raises(ValueError):
        Schedule(max_steps=2)
    fermi = Schedule.fermionic()
    assert fermi.taus()[-1] >= fermi.min_tau


def test_oscillator_trace_is_partition_function():
    assert fk_trace_ho(1.0, 2.0) == pytest.approx(1 / (2 * math.sinh(1.0)))
    # far beyond float range the mpmath path keeps going
    big = fk_trace_ho(1.0, mpmath.mpf(5000))
    assert mpmath.almosteq(mpmath.log(big), -2500, 1e-9)


@pytest.mark.parametrize("omega", [0.5, 1.0, 2.0])
def test_bosonic_oscillator_energy(omega):
    est = ground_energy_limit(TraceFunction(lambda tau: fk_trace_ho(omega, tau)))
    assert est.converged
    assert est.value == pytest.approx(omega / 2, abs=1e-4)


@pytest.mark.parametrize("hbar", [0.5, 2.0])
def test_bosonic_energy_scales_with_hbar(hbar):
    est = ground_energy_limit(TraceFunction(lambda tau: fk_trace_ho(1.0, tau, hbar)), hbar)
    assert est.value == pytest.approx(hbar / 2, abs=1e-4)


def test_quadratic_energy_for_random_valid_coefficients():
    rng = np.random.default_rng(7)
    for _ in range(5):
        a, b = rng.uniform(0.3, 3.0, size=2)
        c = rng.uniform(-0.95, 0.95) * math.sqrt(a * b)
        est = ground_energy_limit(TraceFunction(lambda tau: fk_trace_quadratic(a, b, c, tau)))
        assert est.value == pytest.approx(math.sqrt(a * b - c * c), abs=1e-4)


def test_quadratic_trace_rejects_unbounded_hamiltonian():
    with pytest.raises(ValueError):
        fk_trace_quadratic(1.0, 1.0, 2.0, 1.0)


def test_constant_trace_has_zero_energy():
    est = ground_energy_limit(TraceFunction(lambda tau: 3.0))
    assert est.value == 0.0


def test_non_convergence_raises_with_last_estimate():
    with pytest.raises(ConvergenceError) as info:
        ground_energy_limit(TraceFunction(lambda tau: mpmath.exp(-mpmath.mpf(tau) ** 1.5)), schedule=Schedule(max_steps=6))
    assert info.value.estimate.converged is False
    assert len(info.value.estimate.estimates) > 0


def test_meticulous_trace_matches_hand_integral():
    # ∫ Exp* DΠDΨ = (2/5)e^{iωt/2} − (3iħ/5)e^{−iωt/2}
    omega, tau = 1.0, 0.7
    t = -1j * tau
    hand = 0.4 * np.exp(0.5j * omega * t) - 0.6j * np.exp(-0.5j * omega * t)
    Z = fk_fermi_trace("ho", "meticulous", omega)
    assert complex(Z(tau)) * 2 * math.pi == pytest.approx(hand, abs=1e-14)


def test_naive_trace_has_two_exponential_branches():
    Z = fk_fermi_trace("ho", "naive", 1.0)
    # a e^{τω/2} + b e^{−τω/2}: fit a, b at two times and predict a third
    z1, z2, z3 = (complex(Z(mpmath.mpf(t))) for t in (1.0, 2.0, 3.0))
    A = np.array([[math.exp(0.5), math.exp(-0.5)], [math.exp(1.0), math.exp(-1.0)]])
    a, b = np.linalg.solve(A, [z1, z2])
    assert z3 == pytest.approx(a * math.exp(1.5) + b * math.exp(-1.5), abs=1e-12)


@pytest.mark.parametrize("scheme", ["naive", "meticulous"])
def test_fermionic_oscillator_energy(scheme):
    est = fermi_ground_energy("ho", scheme, 1.0)
    assert est.value == pytest.approx(-0.5, abs=2e-3)


@pytest.mark.parametrize("scheme", ["naive", "meticulous"])
@pytest.mark.parametrize("omega,g,limit", [(1.0, 0.1, 0.0), (2.0, 1.0, 0.0), (-1.0, 0.1, 1.0), (-2.0, 0.5, 2.0), (0.0, 0.3, 0.0)])
def test_driven_limit(scheme, omega, g, limit):
    est = fermi_ground_energy("driven", scheme, omega, g)
    assert -est.value == pytest.approx(limit, abs=2e-3)


def test_odd_sources_survive_without_the_constraint():
    with_rmd = fk_fermi_trace("driven", "naive", 1.0, 0.3).report(2.0)
    without = fk_fermi_trace("driven", "naive", 1.0, 0.3, rmd=False).report(2.0)
    assert with_rmd.odd_magnitude == 0
    assert without.odd_magnitude > 0.1
    with pytest.raises(ValueError):
        fk_fermi_trace("driven", "naive", 1.0, 0.3, rmd=False)(2.0)


def test_fermionic_trace_validates_arguments():
    with pytest.raises(ValueError):
        fk_fermi_trace("ho", "sideways")
    with pytest.raises(ValueError):
        fk_fermi_trace("ho", "naive", g=-1.0)


@pytest.mark.parametrize(
    "omega,g,regime",
    [(0.1, 1.0, "resonant"), (1.0, 0.1, "dispersive+"), (-1.0, 0.1, "dispersive-"), (1.0, 1e-4, "weak-coupling"), (1.0, 1.0, "intermediate")],
)
def test_regime_classification(omega, g, regime):
    rep = regime_classify(omega, g)
    assert rep.regime == regime
    assert rep.thresholds == {"ratio": 0.2, "weak": 1e-3}
    if regime != "intermediate":
        assert rep.within_bound(2.0)
    else:
        assert rep.approx is None and not rep.within_bound()


def test_resonant_bound_at_tenth():
    rep = regime_classify(0.1, 1.0)
    assert max(rep.errors) <= 2 * 0.1**4 / 128


def test_thresholds_are_configurable():
    assert regime_classify(0.3, 1.0).regime == "intermediate"
    assert regime_classify(0.3, 1.0, ratio=0.5).regime == "resonant"


def test_weak_coupling_energy_approaches_uncoupled_value():
    for omega in (1.0, -1.0):
        _, lp, lm = driven_matrix_and_spectrum(omega, 1e-4)
        assert min(abs(lp), abs(lm)) < 1e-7
