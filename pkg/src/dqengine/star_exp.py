"""Star exponentials by closed forms and by integral transforms of propagators.

Bosonic: the oscillator closed form, and 2∫e^{−2iq'p/ħ}K(q+q', t; q−q', 0)dq'
done as an exact complex Gaussian integral. Fermionic: the same transform
with Berezin integrals, in the naive basis (ψ_f, ψ_0) and in the meticulous
basis (π_f, ψ_0). Berezin integrals use the left measure, ∫dθ θ = 1.
"""

from __future__ import annotations

import cmath
import math
from dataclasses import dataclass

import numpy as np
from scipy.special import eval_laguerre

from .grassmann import (
    GeneratorRegistry,
    GrassmannElement,
    berezin_integrate,
    exp_scalar,
    grassmann_exp,
    parity,
    substitute,
)
from .moyal import GaussianSymbol, NumPoly, PhasePoly
from .propagators import (
    METICULOUS,
    NAIVE,
    BosonicPropagatorSpec,
    FermiPropagator,
    _imag_unit,
    _QuadraticSolution,
    driven_source_coefficients,
    ho_propagator,
)

__all__ = [
    "StarExpResult",
    "ho_hamiltonian",
    "ho_star_exp_closed",
    "ho_star_exp_wick",
    "ho_star_exp_symbol",
    "star_exp_from_propagator_bosonic",
    "fourier_dirichlet_check",
    "wigner_laguerre",
    "ho_wigner_symbol",
    "FermiStarExp",
    "fermi_star_exp_naive",
    "fermi_star_exp_meticulous",
    "meticulous_constant",
    "meticulous_constant_chain",
    "printed_naive_ho",
    "printed_meticulous_ho",
    "printed_naive_driven",
    "printed_meticulous_driven",
]


# -- bosonic -------------------------------------------------------------------


@dataclass(frozen=True)
class StarExpResult:
    value: complex
    route: str  # "closed-form" | "from-propagator" | "series"
    window: tuple[float, float] = (0.0, math.pi)


def ho_hamiltonian(omega: float, m: float = 1.0) -> PhasePoly:
    """p²/2m + mω²x²/2 as an exact phase-space polynomial."""
    return PhasePoly.from_coeffs({(0, 2): 1 / (2 * m), (2, 0): m * omega**2 / 2})


def _h(omega: float, q, p, m: float = 1.0):
    return p**2 / (2 * m) + m * omega**2 * q**2 / 2


def ho_star_exp_closed(omega: float, q, p, t: float, hbar: float = 1.0, m: float = 1.0):
    """(cos ωt/2)^{−1} exp[(2H/iωħ) tan(ωt/2)]."""
    c = math.cos(omega * t / 2)
    if abs(c) < 1e-12:
        raise ValueError("omega*t at an odd multiple of pi: the closed form diverges")
    return np.exp(2 * _h(omega, q, p, m) / (1j * omega * hbar) * math.tan(omega * t / 2)) / c


def ho_star_exp_wick(omega: float, q, p, tau: float, hbar: float = 1.0, m: float = 1.0):
    """Imaginary-time form (cosh ωτ/2)^{−1} exp[−(2H/ωħ) tanh(ωτ/2)]."""
    return np.exp(-2 * _h(omega, q, p, m) / (omega * hbar) * math.tanh(omega * tau / 2)) / math.cosh(omega * tau / 2)


def ho_star_exp_symbol(omega: float, t: float, hbar: float = 1.0) -> GaussianSymbol:
    """The closed form at m = 1 as a Gaussian symbol in (x, p)."""
    tn = math.tan(omega * t / 2)
    k = 2 * tn / (1j * omega * hbar)
    return GaussianSymbol(NumPoly.const(1 / math.cos(omega * t / 2)), A=k * omega**2 / 2, C=k / 2, hbar=hbar)


def _gaussian_integral(a: complex, b: complex) -> complex:
    """∫ exp(i a y² + i b y) dy = √(π/(−ia)) exp(−ib²/4a), principal branch."""
    if a == 0:
        raise ValueError("kernel is not Gaussian in the offset")
    return cmath.sqrt(math.pi / (-1j * a)) * cmath.exp(-1j * b * b / (4 * a))


def star_exp_from_propagator_bosonic(spec: BosonicPropagatorSpec, q: float, p: float, t: float) -> StarExpResult:
    """2∫e^{−2iq'p/ħ} K(q+q', t; q−q', 0) dq' with the q'-quadratic phase read off at q' = 0, ±1."""
    hbar = spec.hbar
    if spec.family == "ho":
        wt = spec.omega * t
        if not 0 < wt < math.pi:
            raise ValueError("outside the caustic-free window 0 < omega*t < pi")
        amp = ho_propagator(spec.m, spec.omega, 0.0, 0.0, t, hbar)
        # taken from the closed-form exponent, since cmath.phase of K would wrap
        s, c = math.sin(wt), math.cos(wt)
        k = spec.m * spec.omega / (2 * hbar * s)

        def phase(y):
            xf, x0 = q + y, q - y
            return k * ((xf**2 + x0**2) * c - 2 * xf * x0)

        prefactor = amp
    else:
        sol = _QuadraticSolution(spec, 0.0, t)
        if sol.maslov:
            raise ValueError("outside the caustic-free window")

        def phase(y):
            return sol.action(q + y, q - y)[0] / hbar

        prefactor = sol.prefactor()
    f0, fp, fm = phase(0.0), phase(1.0), phase(-1.0)
    a = (fp + fm - 2 * f0) / 2
    b = (fp - fm) / 2 - 2 * p / hbar
    value = 2 * prefactor * cmath.exp(1j * f0) * _gaussian_integral(a, b)
    return StarExpResult(value, "from-propagator")


def fourier_dirichlet_check(omega: float, tau: float, N: int, hbar: float = 1.0) -> tuple[float, float]:
    """(1/2πħ)∫Exp⋆(−τH/ħ) dx dp against Σ_{n<N} e^{−τω(n+1/2)}.

    The phase-space integral is the Gaussian ∫exp(−αx² − βp²) = π/√(αβ).
    """
    if omega * tau <= 0:
        raise ValueError("need omega*tau > 0")
    k = 2 * math.tanh(omega * tau / 2) / (omega * hbar)
    alpha, beta = k * omega**2 / 2, k / 2
    lhs = math.pi / math.sqrt(alpha * beta) / math.cosh(omega * tau / 2) / (2 * math.pi * hbar)
    partial = sum(math.exp(-tau * omega * (n + 0.5)) for n in range(N))
    return lhs, partial


def wigner_laguerre(n: int, q, p, omega: float, hbar: float = 1.0):
    """((−1)ⁿ/πħ) e^{−2H/ωħ} L_n(4H/ωħ) at m = 1."""
    if n < 0:
        raise ValueError("n must be non-negative")
    h = _h(omega, q, p) / (omega * hbar)
    return (-1) ** n / (math.pi * hbar) * np.exp(-2 * h) * eval_laguerre(n, 4 * h)


def ho_wigner_symbol(n: int, omega: float, hbar: float = 1.0) -> GaussianSymbol:
    """ρ_n as polynomial × Gaussian with exact Laguerre coefficients."""
    # L_n(z) = Σ_k C(n,k) (−z)^k / k!, with z = 4H/ωħ = (2/ωħ)(p² + ω²x²)
    z = NumPoly({(0, 2): 2 / (omega * hbar), (2, 0): 2 * omega / hbar})
    poly = NumPoly()
    zk = NumPoly.const(1)
    for k in range(n + 1):
        poly = poly + zk * (math.comb(n, k) * (-1) ** k / math.factorial(k))
        zk = zk * z
    pref = poly * ((-1) ** n / (math.pi * hbar))
    return GaussianSymbol(pref, A=-omega / hbar, C=-1 / (omega * hbar), hbar=hbar)


# -- fermionic -----------------------------------------------------------------


@dataclass(frozen=True)
class FermiStarExp:
    element: GrassmannElement
    scheme: str

    @property
    def parity(self) -> str:
        return parity(self.element)

    def coefficient(self, *names: str):
        return self.element.coefficient(*names)


def meticulous_constant(n: int = 1, hbar: float = 1.0) -> complex:
    """i^{3−3n} 2^{n−1} ħ^{n+1} / (5·3^{n−1})."""
    return 1j ** ((3 - 3 * n) % 4) * 2 ** (n - 1) * hbar ** (n + 1) / (5 * 3 ** (n - 1))


def meticulous_constant_chain(n: int = 1, hbar: float = 1.0) -> complex:
    """C fixed by requiring C (−3i/2ħ)ⁿ (10i/3ħ) = 1 in the normalisation chain."""
    return 1 / ((-3j / (2 * hbar)) ** n * (10j / (3 * hbar)))


def _source_names(K: FermiPropagator) -> list[str]:
    return ["alpha", "alpha*"] if K.driven else []


def _restrict(res: GrassmannElement, target: GeneratorRegistry) -> GrassmannElement:
    out = {}
    for m, c in res.terms.items():
        names = res.monomial_names(m)
        missing = [nm for nm in names if nm not in target]
        if missing:
            raise AssertionError(f"integration variables {missing} survived")
        out[target.mask(names)] = c
    return GrassmannElement(target, out)


def fermi_star_exp_naive(
    K: FermiPropagator, hbar: float | None = None, weight_order: str = "prime-left"
) -> FermiStarExp:
    """∫ dΨ' W K(Ψ + Ψ', t; Ψ − Ψ', 0) over registry {π, Ψ, sources}.

    The weight W is exp{−(2i/ħ) Ψ'π} for ``weight_order='prime-left'`` and
    exp{−(2i/ħ) πΨ'} for ``'prime-right'``. The two differ by the sign of
    every term carrying π. The default reproduces the hand-derived
    oscillator and driven results coefficient by coefficient.
    """
    if weight_order not in ("prime-left", "prime-right"):
        raise ValueError("weight_order must be 'prime-left' or 'prime-right'")
    if K.basis != NAIVE:
        raise ValueError("the naive transform needs a naive-basis propagator")
    hbar = K.hbar if hbar is None else hbar
    src = _source_names(K)
    out = GeneratorRegistry(["pi", "Psi"] + src)
    big = GeneratorRegistry(["pi", "Psi", "Psi'"] + src)
    pi, Psi, Psi1 = big.gens("pi", "Psi", "Psi'")
    images = {"psi_f": Psi + Psi1, "psi_0": Psi - Psi1}
    images.update({s: big.gen(s) for s in src})
    Kb = substitute(K.element, images, big)
    j = _imag_unit(K.t)
    pair = Psi1 * pi if weight_order == "prime-left" else pi * Psi1
    integrand = grassmann_exp((-2 * j / hbar) * pair) * Kb
    res = berezin_integrate(integrand, ["Psi'"], "left")
    return FermiStarExp(_restrict(res, out), NAIVE)


def fermi_star_exp_meticulous(K: FermiPropagator, hbar: float | None = None, n: int = 1) -> FermiStarExp:
    """C exp{(i/ħ)ΠΨ} ∫DΨ'DΠ' exp{−(2i/ħ)Π'Ψ'} K(Π + Π', t; Ψ − Ψ') over {Π, Ψ, sources}."""
    if K.basis != METICULOUS:
        raise ValueError("the meticulous transform needs a meticulous-basis propagator")
    if n != 1:
        raise ValueError("only one degree of freedom is supported")
    hbar = K.hbar if hbar is None else hbar
    src = _source_names(K)
    out = GeneratorRegistry(["Pi", "Psi"] + src)
    big = GeneratorRegistry(["Pi", "Psi", "Pi'", "Psi'"] + src)
    Pi, Psi, Pi1, Psi1 = big.gens("Pi", "Psi", "Pi'", "Psi'")
    images = {"pi_f": Pi + Pi1, "psi_0": Psi - Psi1}
    images.update({s: big.gen(s) for s in src})
    Kb = substitute(K.element, images, big)
    j = _imag_unit(K.t)
    integrand = grassmann_exp((-2 * j / hbar) * (Pi1 * Psi1)) * Kb
    # DΨ'DΠ': the Π' integral is innermost
    res = berezin_integrate(integrand, ["Pi'", "Psi'"], "left")
    C = meticulous_constant(n, hbar)
    if not isinstance(j, complex):
        import mpmath

        C = mpmath.mpc(C)
    res = C * (grassmann_exp((j / hbar) * (Pi * Psi)) * res)
    elem = _restrict(res, out)
    if parity(elem) == "odd":
        raise AssertionError("meticulous star exponential came out odd")
    return FermiStarExp(elem, METICULOUS)


# Closed forms as printed for the hand calculations; kept separate from the
# engine so the two can be compared term by term.


def printed_naive_ho(omega, t, hbar: float = 1.0) -> GrassmannElement:
    """e^{iωt/2}(−(2i/ħ)π + 2e^{−iωt}Ψ)."""
    reg = GeneratorRegistry(["pi", "Psi"])
    pi, Psi = reg.gens("pi", "Psi")
    return exp_scalar(1j * omega * t / 2) * ((-2j / hbar) * pi + 2 * exp_scalar(-1j * omega * t) * Psi)


def printed_meticulous_ho(omega, t, hbar: float = 1.0) -> GrassmannElement:
    """−(ħ²/5)[e^{iΠΨ/ħ}(e^{−iωt/2} + (2i/ħ)e^{iωt/2}) + (2i/ħ)ΠΨe^{−iωt/2}]."""
    reg = GeneratorRegistry(["Pi", "Psi"])
    Pi, Psi = reg.gens("Pi", "Psi")
    em, ep = exp_scalar(-1j * omega * t / 2), exp_scalar(1j * omega * t / 2)
    inner = grassmann_exp((1j / hbar) * (Pi * Psi)) * (em + (2j / hbar) * ep) + (2j / hbar) * em * (Pi * Psi)
    return (-(hbar**2) / 5) * inner


def printed_naive_driven(omega, t, hbar: float = 1.0) -> GrassmannElement:
    """2e^{−iωt}Ψ − (2i/ħ)(1 + f)π − (2i/ħω)(1 − e^{−iωt})(α + α*)πΨ − (1/ω)(1 − e^{−iωt})(α − α*).

    Here f = −F α*α with F = (−iωt + e^{−iωt} − 1)/2ω, the sign that agrees
    with the −F α*α term of the driven kernel.
    """
    reg = GeneratorRegistry(["pi", "Psi", "alpha", "alpha*"])
    pi, Psi, a, ac = reg.gens("pi", "Psi", "alpha", "alpha*")
    s, F = driven_source_coefficients(omega, t)
    e = exp_scalar(-1j * omega * t)
    f = -F * (ac * a)
    return (
        2 * e * Psi
        - (2j / hbar) * ((reg.one() + f) * pi)
        - (2j / hbar) * s * ((a + ac) * (pi * Psi))
        - s * (a - ac)
    )


def printed_meticulous_driven(omega, t, hbar: float = 1.0) -> GrassmannElement:
    """−(ħ²/5)[e^{iΠΨ/ħ}(e^{−iωt} + (2i/ħ)(1 − f)) + (2i/ħ)(ΠΨe^{−iωt} + (Πα* + Ψα) s)]."""
    reg = GeneratorRegistry(["Pi", "Psi", "alpha", "alpha*"])
    Pi, Psi, a, ac = reg.gens("Pi", "Psi", "alpha", "alpha*")
    s, F = driven_source_coefficients(omega, t)
    e = exp_scalar(-1j * omega * t)
    f = F * (ac * a)
    first = grassmann_exp((1j / hbar) * (Pi * Psi)) * (e * reg.one() + (2j / hbar) * (reg.one() - f))
    second = (2j / hbar) * (e * (Pi * Psi) + s * (Pi * ac + Psi * a))
    return (-(hbar**2) / 5) * (first + second)
