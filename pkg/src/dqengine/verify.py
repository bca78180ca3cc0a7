"""Invariant suites behind ``dqengine verify``.

Each suite runs a fixed list of checks with a seeded RNG, so two runs
produce identical tables. A check reports its measured value, the
tolerance it was held to and the route that produced it.
"""

from __future__ import annotations

import itertools
import math
from collections.abc import Callable
from dataclasses import dataclass, field
from fractions import Fraction

import numpy as np
from scipy.special import eval_hermite

from .config import Config
from .feynman_kac import (
    TraceFunction,
    fermi_ground_energy,
    fk_trace_ho,
    fk_trace_quadratic,
    ground_energy_limit,
    regime_classify,
)
from .fermi_phase import (
    FermiSpace,
    fermi_star,
    fermi_star_integral,
    fermi_trace,
    fermi_weyl_quantize,
    fermi_wigner,
    phase_space_integral,
)
from .grassmann import (
    GeneratorRegistry,
    berezin_integrate,
    gaussian_berezin,
    gaussian_berezin_bruteforce,
    left_derivative,
    parity,
    right_derivative,
)
from .hpoly import qqi
from .moyal import (
    PhasePoly,
    moyal_star,
    star_genvalue_residual,
    star_power_series_exp,
    wigner_from_wavefunction,
)
from .propagators import (
    METICULOUS,
    NAIVE,
    BosonicPropagatorSpec,
    fermi_driven_propagator,
    fermi_ho_propagator,
    ho_propagator,
    quadratic_propagator,
)
from .star_exp import (
    fermi_star_exp_meticulous,
    fermi_star_exp_naive,
    fourier_dirichlet_check,
    ho_hamiltonian,
    ho_star_exp_closed,
    ho_star_exp_symbol,
    ho_wigner_symbol,
    printed_meticulous_driven,
    printed_meticulous_ho,
    printed_naive_driven,
    printed_naive_ho,
    star_exp_from_propagator_bosonic,
    wigner_laguerre,
)
from .weyl_algebra import (
    OperatorPoly,
    commutator,
    groenewold_check,
    op_mul,
    symmetrized_bruteforce,
    weyl_quantize_poly,
    weyl_symbol,
    xnpm_commutator_closed,
)

__all__ = ["CaseResult", "SuiteResult", "SUITES", "run_suite", "run_suites"]

SEED = 20240611


@dataclass
class CaseResult:
    name: str
    passed: bool
    value: object = None
    tolerance: float | None = None
    route: str = ""
    provenance: str = ""
    detail: str = ""


@dataclass
class SuiteResult:
    name: str
    cases: list[CaseResult] = field(default_factory=list)

    @property
    def passed(self) -> int:
        return sum(c.passed for c in self.cases)

    @property
    def failed(self) -> int:
        return len(self.cases) - self.passed

    @property
    def ok(self) -> bool:
        return self.failed == 0


def _close(name, value, tol, route, provenance="", target=0.0) -> CaseResult:
    err = abs(value - target)
    return CaseResult(name, bool(err <= tol), value, tol, route, provenance, f"|err| = {err:.3g}")


def _exact(name, ok: bool, value, route, provenance="") -> CaseResult:
    return CaseResult(name, bool(ok), value, 0.0, route, provenance)


# -- grassmann -------------------------------------------------------------------


def _leibniz_ok(reg: GeneratorRegistry) -> bool:
    basis = reg.basis()
    for g in reg.names:
        for f in basis:
            sign = -1 if parity(f) == "odd" else 1
            for h in basis:
                lhs = left_derivative(f * h, g)
                rhs = left_derivative(f, g) * h + sign * (f * left_derivative(h, g))
                if not lhs.isclose(rhs, 0.0):
                    return False
    return True


def suite_grassmann(cfg: Config) -> list[CaseResult]:
    out = []
    for n in (1, 2, 3, 4):
        reg = GeneratorRegistry([f"t{i}" for i in range(n)])
        gens = [reg.gen(g) for g in reg.names]
        ok = all((a * b + b * a).is_zero() for a in gens for b in gens)
        out.append(_exact(f"anticommutation n={n}", ok, ok, "bitmask product"))
        basis = reg.basis()
        ok = True
        for f in basis:
            for g in reg.names:
                d = left_derivative(f, g)
                ok &= left_derivative(d, g).is_zero()
                ok &= berezin_integrate(f, [g], "left").isclose(d, 0.0)
                for h in reg.names:
                    ok &= left_derivative(left_derivative(f, g), h).isclose(-left_derivative(left_derivative(f, h), g), 0.0)
                    ok &= left_derivative(right_derivative(f, g), h).isclose(right_derivative(left_derivative(f, h), g), 0.0)
        out.append(_exact(f"derivative algebra n={n}", ok, ok, "full basis"))
        if n <= 3:
            ok = _leibniz_ok(reg)
            out.append(_exact(f"graded Leibniz n={n}", ok, ok, "full basis"))
    rng = np.random.default_rng(SEED)
    worst = 0.0
    for k in range(50):
        n = 1 + k % 3
        names = [f"a{i}" for i in range(n)] + [f"b{i}" for i in range(n)]
        reg = GeneratorRegistry(names)
        M = rng.normal(size=(n, n)) + 1j * rng.normal(size=(n, n))
        a = [reg.gen(f"a{i}") for i in range(n)]
        b = [reg.gen(f"b{i}") for i in range(n)]
        worst = max(worst, gaussian_berezin(M, a, b).max_abs_diff(gaussian_berezin_bruteforce(M, a, b)))
    out.append(_close("gaussian closed form vs brute force (50 matrices, n<=3)", worst, 1e-12, "det(M) exp(a M^-1 b)"))
    return out


# -- weyl ------------------------------------------------------------------------


def _random_phase_poly(rng, max_degree: int = 4) -> PhasePoly:
    coeffs = {}
    for _ in range(rng.integers(1, 5)):
        a = int(rng.integers(0, max_degree + 1))
        b = int(rng.integers(0, max_degree - a + 1))
        re = Fraction(int(rng.integers(-5, 6)), int(rng.integers(1, 4)))
        im = Fraction(int(rng.integers(-5, 6)), int(rng.integers(1, 4)))
        coeffs[(a, b)] = qqi(re, im)
    return PhasePoly.from_coeffs(coeffs)


def suite_weyl(cfg: Config) -> list[CaseResult]:
    out = []
    classical, quantum = groenewold_check()
    out.append(_exact("groenewold classical", classical.is_zero(), str(classical), "Poisson brackets"))
    expected = PhasePoly.hbar() ** 2 * PhasePoly.const(-3)
    out.append(_exact("groenewold", PhasePoly.const(1) * expected == _scalar_poly(quantum), str(quantum), "commutators"))
    ok = True
    X, P = OperatorPoly.x(), OperatorPoly.p()
    for n in range(1, 6):
        for m in range(1, 6):
            ok &= commutator(X**n, P**m) == xnpm_commutator_closed(n, m)
    out.append(_exact("commutator closed form 1<=n,m<=5", ok, ok, "normal ordering"))
    ok = all(weyl_quantize_poly(PhasePoly.monomial(a, b)) == symmetrized_bruteforce(a, b) for a in range(4) for b in range(4 - a))
    out.append(_exact("symmetrization vs brute force deg<=3", ok, ok, "McCoy form"))
    rng = np.random.default_rng(SEED)
    failures = 0
    for _ in range(100):
        f, g = _random_phase_poly(rng), _random_phase_poly(rng)
        Qf, Qg = weyl_quantize_poly(f), weyl_quantize_poly(g)
        if weyl_quantize_poly(moyal_star(f, g)) != op_mul(Qf, Qg) or weyl_symbol(Qf) != f:
            failures += 1
    out.append(_exact("weyl homomorphism (100 random pairs, deg<=4)", failures == 0, failures, "Q(f*g) = Q(f)Q(g)"))
    return out


def _scalar_poly(h) -> PhasePoly:
    return PhasePoly.from_coeffs({}) + sum(
        (PhasePoly.hbar() ** k * PhasePoly.const(c) for k, c in h.items()), PhasePoly.from_coeffs({})
    )


# -- moyal -----------------------------------------------------------------------


def _ho_eigenfunction(n: int, omega: float, hbar: float) -> Callable[[float], float]:
    norm = (omega / (math.pi * hbar)) ** 0.25 / math.sqrt(2.0**n * math.factorial(n))
    s = math.sqrt(omega / hbar)
    return lambda x: norm * eval_hermite(n, s * x) * math.exp(-omega * x * x / (2 * hbar))


def suite_moyal(cfg: Config) -> list[CaseResult]:
    out = []
    x, p = PhasePoly.x(), PhasePoly.p()
    xp = moyal_star(x, p)
    out.append(_exact("x*p", xp.to_string(decimal=True) == "x*p + 0.5i*hbar", xp.to_string(decimal=True), "bidifferential series"))
    rng = np.random.default_rng(SEED)
    ok = True
    for _ in range(20):
        f, g, h = (_random_phase_poly(rng, 3) for _ in range(3))
        ok &= moyal_star(moyal_star(f, g), h) == moyal_star(f, moyal_star(g, h))
    out.append(_exact("associativity (20 random triples)", ok, ok, "exact arithmetic"))
    omega, hbar = 1.0, 1.0
    H = ho_hamiltonian(omega)
    q, pp, wt = 0.3, 0.4, 0.1
    series = star_power_series_exp(H, wt / omega, 12, (q, pp), hbar)
    closed = ho_star_exp_closed(omega, q, pp, wt / omega, hbar)
    out.append(_close("series order 12 at wt=0.1", abs(series - closed), 1e-8, "star powers"))
    pts = [(a, b) for a in (-1.0, 0.0, 0.7) for b in (-0.5, 0.0, 1.2)]
    worst = max(star_genvalue_residual(H, ho_wigner_symbol(n, omega, hbar), hbar * omega * (n + 0.5), pts) for n in range(6))
    out.append(_close("star-genvalue n=0..5", worst, 1e-9, "polynomial x Gaussian"))
    worst, dt = 0.0, 1e-5
    for t in (0.3, 1.0, 2.0):
        lhs = moyal_star(H, ho_star_exp_symbol(omega, t, hbar))
        up, dn = ho_star_exp_symbol(omega, t + dt, hbar), ho_star_exp_symbol(omega, t - dt, hbar)
        for a, b in pts:
            deriv = (up.evaluate(a, b) - dn.evaluate(a, b)) / (2 * dt)
            worst = max(worst, abs(lhs.evaluate(a, b) - 1j * hbar * deriv))
    out.append(_close("dynamical equation", worst, 1e-6, "central difference"))
    worst = 0.0
    quad = cfg.quadrature()
    for n in (0, 1, 2):
        psi = _ho_eigenfunction(n, omega, hbar)
        for a in (-0.8, 0.0, 0.5):
            for b in (-0.6, 0.0, 0.9):
                num = wigner_from_wavefunction(psi, a, b, hbar, quad)
                worst = max(worst, abs(num - wigner_laguerre(n, a, b, omega, hbar)))
    out.append(_close("quadrature wigner vs laguerre n=0,1,2", worst, 1e-7, "adaptive quadrature"))
    return out


# -- fermi -----------------------------------------------------------------------


def suite_fermi(cfg: Config) -> list[CaseResult]:
    out = []
    hbar = 1.0
    for n in (1, 2):
        space = FermiSpace(n, (), hbar)
        basis = space.phase_basis()
        ok_int = ok_hom = True
        for f in basis:
            Qf = fermi_weyl_quantize(space, f)
            for g in basis:
                fg = fermi_star(space, f, g)
                ok_int &= fg.isclose(fermi_star_integral(space, f, g), 1e-13)
                ok_hom &= fermi_weyl_quantize(space, fg).allclose(Qf * fermi_weyl_quantize(space, g), 1e-12)
        out.append(_exact(f"differential = integral n={n}", ok_int, ok_int, "full basis"))
        out.append(_exact(f"weyl homomorphism vs Fock n={n}", ok_hom, ok_hom, "Jordan-Wigner matrices"))
        triples = basis if n == 1 else basis[::3]
        ok = all(
            fermi_star(space, fermi_star(space, f, g), h).isclose(fermi_star(space, f, fermi_star(space, g, h)), 1e-13)
            for f in triples
            for g in basis
            for h in triples
        )
        out.append(_exact(f"associativity n={n}", ok, ok, "nested-pair series"))
        pi, psi = space.pi(1), space.psi(1)
        car = fermi_star(space, psi, pi) + fermi_star(space, pi, psi)
        out.append(_close(f"psi*pi + pi*psi = i hbar n={n}", car.max_abs_diff(1j * hbar * space.one()), 1e-14, "star anticommutator"))
        dim = 2**n
        rng = np.random.default_rng(SEED + n)
        A = rng.normal(size=(dim, dim)) + 1j * rng.normal(size=(dim, dim))
        rho = A @ A.conj().T
        rho /= np.trace(rho)
        sym = fermi_wigner(space, rho)
        signs = np.array([(-1) ** bin(k).count("1") for k in range(dim)])
        expected = complex(np.sum(signs * np.diag(rho))) / hbar**n
        got = complex(phase_space_integral(space, sym).body())
        out.append(_close(f"wigner normalisation n={n}", abs(got - expected), 1e-12, "supertrace"))
        ok = True
        for f, g in itertools.product(basis[:8], basis[:8]):
            Qf, Qg = fermi_weyl_quantize(space, f), fermi_weyl_quantize(space, g)
            ef = 0 if parity(f) == "even" else 1
            eg = 0 if parity(g) == "even" else 1
            lhs = fermi_trace(space, Qf * Qg)
            rhs = (-1) ** (ef * eg) * fermi_trace(space, Qg * Qf)
            ok &= abs(complex(lhs) - complex(rhs)) < 1e-12
        out.append(_exact(f"graded cyclicity of the trace n={n}", ok, ok, "supertrace"))
    return out


# -- starexp ---------------------------------------------------------------------


def suite_starexp(cfg: Config) -> list[CaseResult]:
    out = []
    hbar = 1.0
    worst = 0.0
    for omega in (1.0,):
        spec = BosonicPropagatorSpec(family="ho", omega=omega, hbar=hbar)
        for q in np.linspace(-1, 1, 5):
            for p in np.linspace(-1, 1, 5):
                for wt in (0.5, 1.5, 2.5):
                    a = star_exp_from_propagator_bosonic(spec, q, p, wt / omega).value
                    b = ho_star_exp_closed(omega, q, p, wt / omega, hbar)
                    worst = max(worst, abs(a - b) / abs(b))
    out.append(_close("bosonic routes agree (5x5x3 grid)", worst, 1e-9, "propagator transform vs closed form"))
    worst_amp = worst_phi = 0.0
    omega = 1.0
    spec = BosonicPropagatorSpec.oscillator_as_quadratic(1.0, omega, hbar)
    for T in (0.5, 1.0, 2.0):
        res = quadratic_propagator(spec, 0.7, T, -0.3)
        ref = ho_propagator(1.0, omega, 0.7, -0.3, T, hbar)
        worst_amp = max(worst_amp, abs(res.amplitude - ref) / abs(ref))
        worst_phi = max(worst_phi, abs(res.phi_tf - math.sin(omega * T) / omega))
    out.append(_close("quadratic propagator vs oscillator", worst_amp, 1e-8, "RK4 Jacobi fields"))
    out.append(_close("jacobi field phi = sin(wt)/w", worst_phi, 1e-8, "RK4 Jacobi fields"))
    lhs, rhs = fourier_dirichlet_check(1.0, 2.0, 40, hbar)
    out.append(_close("trace vs Dirichlet sum", abs(lhs - rhs), 1e-12, "geometric series"))
    omega = 1.0
    for t in (0.0, 0.3, 1.0):
        naive = fermi_star_exp_naive(fermi_ho_propagator(omega, t, NAIVE, hbar), hbar)
        out.append(_close(f"naive oscillator t={t}", naive.element.max_abs_diff(printed_naive_ho(omega, t, hbar)), 1e-10, "Berezin transform"))
        met = fermi_star_exp_meticulous(fermi_ho_propagator(omega, t, METICULOUS, hbar), hbar)
        out.append(_close(f"meticulous oscillator t={t}", met.element.max_abs_diff(printed_meticulous_ho(omega, t, hbar)), 1e-10, "Berezin transform"))
        Kn = fermi_driven_propagator(omega, t if t else 0.0, hbar, NAIVE, "linear")
        dn = fermi_star_exp_naive(Kn, hbar)
        out.append(_close(f"naive driven t={t}", dn.element.max_abs_diff(printed_naive_driven(omega, t, hbar)), 1e-10, "Berezin transform"))
        Km = fermi_driven_propagator(omega, t, hbar, METICULOUS, "linear")
        dm = fermi_star_exp_meticulous(Km, hbar)
        out.append(_close(f"meticulous driven t={t}", dm.element.max_abs_diff(printed_meticulous_driven(omega, t, hbar)), 1e-10, "Berezin transform"))
    naive = fermi_star_exp_naive(fermi_ho_propagator(1.0, 0.3, NAIVE, hbar), hbar)
    met = fermi_star_exp_meticulous(fermi_ho_propagator(1.0, 0.3, METICULOUS, hbar), hbar)
    out.append(_exact("parity naive is not even", naive.parity != "even", naive.parity, "parity checker"))
    out.append(_exact("parity meticulous is even", met.parity == "even", met.parity, "parity checker"))
    return out


# -- fk --------------------------------------------------------------------------


def suite_fk(cfg: Config) -> list[CaseResult]:
    out = []
    hbar = cfg.hbar
    sched = cfg.schedule()
    for omega in (0.5, 1.0, 2.0):
        Z = TraceFunction(lambda tau, w=omega: fk_trace_ho(w, tau, hbar), {"omega": omega})
        est = ground_energy_limit(Z, hbar, sched)
        out.append(_close(f"bosonic oscillator omega={omega}", est.value, 1e-4, "secant + Richardson", target=hbar * omega / 2))
    rng = np.random.default_rng(SEED)
    for k in range(5):
        a, b = rng.uniform(0.5, 2.0, size=2)
        c = rng.uniform(-0.9, 0.9) * math.sqrt(a * b)
        Z = TraceFunction(lambda tau, a=a, b=b, c=c: fk_trace_quadratic(a, b, c, tau, hbar))
        est = ground_energy_limit(Z, hbar, sched)
        out.append(_close(f"bosonic quadratic #{k + 1}", est.value, 1e-4, "secant + Richardson", target=hbar * math.sqrt(a * b - c * c)))
    fsched = cfg.fermi_schedule()
    for scheme in (NAIVE, METICULOUS):
        est = fermi_ground_energy("ho", scheme, 1.0, 0.0, 1.0, fsched)
        out.append(_close(f"fermionic oscillator {scheme}", est.value, 2e-3, "Wick rotation", target=-0.5))
    for scheme in (NAIVE, METICULOUS):
        for omega, g, L in ((1.0, 0.1, 0.0), (-1.0, 0.1, 1.0), (0.0, 0.5, 0.0)):
            est = fermi_ground_energy("driven", scheme, omega, g, 1.0, fsched)
            out.append(_close(f"driven limit {scheme} omega={omega} g={g}", -est.value, 2e-3, "Wick rotation", target=L))
    for omega, g in ((0.1, 1.0), (1.0, 0.1), (-1.0, 0.1), (1.0, 1e-4)):
        rep = regime_classify(omega, g, cfg["regime.ratio"], cfg["regime.weak"])
        err = max(rep.errors) if rep.errors else math.inf
        out.append(
            CaseResult(
                f"regime {rep.regime} omega={omega} g={g}",
                rep.within_bound(2.0),
                err,
                2.0 * rep.next_order if rep.next_order else None,
                "asymptotic formula vs 2x2 spectrum",
            )
        )
    return out


SUITES: dict[str, Callable[[Config], list[CaseResult]]] = {
    "grassmann": suite_grassmann,
    "weyl": suite_weyl,
    "moyal": suite_moyal,
    "fermi": suite_fermi,
    "starexp": suite_starexp,
    "fk": suite_fk,
}


def run_suite(name: str, cfg: Config | None = None) -> SuiteResult:
    cfg = cfg or Config()
    try:
        cases = SUITES[name](cfg)
    except Exception as exc:  # a crashing suite is reported, not propagated
        cases = [CaseResult("suite raised", False, None, None, "", "", f"{type(exc).__name__}: {exc}")]
    return SuiteResult(name, cases)


def run_suites(names: list[str], cfg: Config | None = None) -> list[SuiteResult]:
    return [run_suite(n, cfg) for n in names]
