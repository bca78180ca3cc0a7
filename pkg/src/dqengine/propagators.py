"""Quantum propagators: bosonic oscillator, quadratic Lagrangians, fermionic oscillators.

Bosonic kernels are plain complex numbers. Fermionic kernels are Grassmann
elements over {π_f or ψ_f, ψ_0} plus the odd sources α, α* when driven.
Times may be complex (including ``mpmath.mpc``), which is how the
Wick-rotated traces evaluate them at t = −iτ.
"""

from __future__ import annotations

import cmath
import math
from collections.abc import Callable
from dataclasses import dataclass, field

import numpy as np

from .grassmann import GeneratorRegistry, GrassmannElement, exp_scalar, grassmann_exp

__all__ = [
    "CausticError",
    "ho_propagator",
    "BosonicPropagatorSpec",
    "QuadraticPropagatorResult",
    "quadratic_propagator",
    "tabulated",
    "FermiPropagator",
    "fermi_ho_propagator",
    "fermi_driven_propagator",
    "driven_source_coefficients",
    "driven_matrix_and_spectrum",
]


class CausticError(ValueError):
    """The Jacobi field vanishes at the final time, so the kernel is singular."""


def ho_propagator(m: float, omega: float, x_f: float, x_0: float, T: float, hbar: float = 1.0) -> complex:
    """Closed-form oscillator kernel, continued past caustics with the Maslov phase."""
    if m <= 0 or omega <= 0 or hbar <= 0:
        raise ValueError("m, omega and hbar must be positive")
    wt = omega * T
    s = math.sin(wt)
    if abs(s) < 1e-12:
        raise CausticError(f"omega*T = {wt} sits on a caustic")
    nu = math.floor(wt / math.pi) if wt > 0 else 0
    amp = math.sqrt(m * omega / (2 * math.pi * hbar * abs(s))) * cmath.exp(-1j * math.pi / 4 - 1j * math.pi * nu / 2)
    phase = m * omega / (2 * hbar * s) * ((x_f**2 + x_0**2) * math.cos(wt) - 2 * x_f * x_0)
    return amp * cmath.exp(1j * phase)


def tabulated(times, values) -> Callable[[float], float]:
    """Piecewise-linear interpolant through (time, value) samples."""
    ts = np.asarray(times, dtype=float)
    vs = np.asarray(values, dtype=float)
    if ts.ndim != 1 or ts.shape != vs.shape or len(ts) < 2 or np.any(np.diff(ts) <= 0):
        raise ValueError("need at least two samples with increasing times")
    return lambda t: float(np.interp(t, ts, vs))


@dataclass(frozen=True)
class BosonicPropagatorSpec:
    """Either the oscillator (``family='ho'``) or L = m q̇²/2 − c(t) q²/2 + f(t) q."""

    family: str = "ho"
    m: float = 1.0
    omega: float | None = 1.0
    c: Callable[[float], float] | None = None
    f: Callable[[float], float] | None = None
    hbar: float = 1.0
    steps: int = 2000

    def __post_init__(self):
        if self.family not in ("ho", "quadratic"):
            raise ValueError(f"unknown family {self.family!r}")
        if self.m <= 0 or self.hbar <= 0:
            raise ValueError("m and hbar must be positive")
        if self.family == "ho" and (self.omega is None or self.omega <= 0):
            raise ValueError("the oscillator needs omega > 0")
        if self.family == "quadratic" and self.c is None:
            raise ValueError("the quadratic family needs c(t)")
        if self.steps < 2000 or self.steps % 2:
            raise ValueError("steps must be even and at least 2000")

    @classmethod
    def oscillator_as_quadratic(cls, m: float, omega: float, hbar: float = 1.0) -> BosonicPropagatorSpec:
        k = m * omega**2
        return cls("quadratic", m, omega, lambda t: k, None, hbar)


@dataclass
class QuadraticPropagatorResult:
    amplitude: complex
    action: float
    phi_tf: float
    maslov: int
    times: np.ndarray = field(repr=False)
    path: np.ndarray = field(repr=False)
    phi: np.ndarray = field(repr=False)
    spec: BosonicPropagatorSpec = field(repr=False)

    def euler_lagrange_residual(self, checkpoints: int = 9) -> float:
        """max |m q̈ + c q − f| at interior grid points, q̈ by a five-point stencil."""
        h = self.times[1] - self.times[0]
        idx = np.linspace(2, len(self.times) - 3, checkpoints).astype(int)
        s = self.spec
        out = 0.0
        for i in idx:
            t = self.times[i]
            q = self.path[i - 2 : i + 3]
            qdd = (-q[0] + 16 * q[1] - 30 * q[2] + 16 * q[3] - q[4]) / (12 * h**2)
            f = s.f(t) if s.f else 0.0
            out = max(out, abs(s.m * qdd + s.c(t) * self.path[i] - f))
        return out


def _rk4_linear(m: float, c, f, t0: float, t1: float, steps: int, y0: np.ndarray, forced: np.ndarray) -> np.ndarray:
    """Integrate m ÿ + c(t) y = forced·f(t) for several columns at once.

    ``y0`` has shape (2, k) holding (y, ẏ); returns (y, ẏ) on the grid,
    each of shape (steps+1, k).
    """
    h = (t1 - t0) / steps
    ff = f if f is not None else (lambda t: 0.0)

    def rhs(t, y):
        acc = (forced * ff(t) - c(t) * y[0]) / m
        return np.array([y[1], acc])

    y = np.array(y0, dtype=float)
    out = np.empty((steps + 1, 2, y.shape[1]))
    out[0] = y
    t = t0
    for i in range(steps):
        k1 = rhs(t, y)
        k2 = rhs(t + h / 2, y + h / 2 * k1)
        k3 = rhs(t + h / 2, y + h / 2 * k2)
        k4 = rhs(t + h, y + h * k3)
        y = y + h / 6 * (k1 + 2 * k2 + 2 * k3 + k4)
        t = t0 + (i + 1) * h
        out[i + 1] = y
    return out[:, 0, :], out[:, 1, :]


class _QuadraticSolution:
    """φ, the unit homogeneous solution and a particular solution on one grid."""

    def __init__(self, spec: BosonicPropagatorSpec, t0: float, t1: float):
        if not t1 > t0:
            raise ValueError("need t_f > t_0")
        self.spec = spec
        self.times = np.linspace(t0, t1, spec.steps + 1)
        y0 = np.array([[0.0, 1.0, 0.0], [1.0, 0.0, 0.0]])
        forced = np.array([0.0, 0.0, 1.0])
        sol, dsol = _rk4_linear(spec.m, spec.c, spec.f, t0, t1, spec.steps, y0, forced)
        self.phi, self.chi, self.eta = sol[:, 0], sol[:, 1], sol[:, 2]
        self.dphi, self.dchi, self.deta = dsol[:, 0], dsol[:, 1], dsol[:, 2]
        scale = max(1.0, float(np.max(np.abs(self.phi))))
        if abs(self.phi[-1]) < 1e-9 * scale:
            raise CausticError("phi(t_f) vanishes: the endpoints are conjugate")
        interior = self.phi[1:-1]
        self.maslov = int(np.count_nonzero(np.signbit(interior[1:]) != np.signbit(interior[:-1])))

    def path(self, q_f: float, q_0: float) -> tuple[np.ndarray, np.ndarray]:
        s = (q_f - q_0 * self.chi[-1] - self.eta[-1]) / self.phi[-1]
        q = q_0 * self.chi + s * self.phi + self.eta
        q[-1] = q_f
        return q, q_0 * self.dchi + s * self.dphi + self.deta

    def action(self, q_f: float, q_0: float) -> tuple[float, np.ndarray]:
        q, qd = self.path(q_f, q_0)
        spec = self.spec
        h = self.times[1] - self.times[0]
        c = np.array([spec.c(t) for t in self.times])
        f = np.array([spec.f(t) for t in self.times]) if spec.f else 0.0
        lag = spec.m / 2 * qd**2 - c / 2 * q**2 + f * q
        return _simpson(lag, h), q

    def prefactor(self) -> complex:
        m, hbar = self.spec.m, self.spec.hbar
        phi = self.phi[-1]
        # 1/√φ = e^{−iπν/2}/√|φ| and 1/√i = e^{−iπ/4}
        return math.sqrt(m / (2 * math.pi * hbar * abs(phi))) * cmath.exp(-1j * math.pi / 4 - 1j * math.pi * self.maslov / 2)


def _simpson(y: np.ndarray, h: float) -> float:
    n = len(y) - 1
    if n % 2:
        raise ValueError("Simpson's rule needs an even number of intervals")
    return float(h / 3 * (y[0] + y[-1] + 4 * np.sum(y[1:-1:2]) + 2 * np.sum(y[2:-1:2])))


def quadratic_propagator(spec: BosonicPropagatorSpec, q_f: float, t_f: float, q_0: float, t_0: float = 0.0) -> QuadraticPropagatorResult:
    if spec.family != "quadratic":
        raise ValueError("quadratic_propagator needs a quadratic spec")
    sol = _QuadraticSolution(spec, t_0, t_f)
    action, q = sol.action(q_f, q_0)
    amp = sol.prefactor() * cmath.exp(1j * action / spec.hbar)
    return QuadraticPropagatorResult(amp, action, float(sol.phi[-1]), sol.maslov, sol.times, q, sol.phi, spec)


# -- fermionic kernels ---------------------------------------------------------

NAIVE, METICULOUS = "naive", "meticulous"


@dataclass(frozen=True)
class FermiPropagator:
    element: GrassmannElement
    basis: str
    omega: object
    t: object
    hbar: float
    driven: bool

    @property
    def final_name(self) -> str:
        return "psi_f" if self.basis == NAIVE else "pi_f"


def _registry(basis: str, driven: bool) -> GeneratorRegistry:
    if basis not in (NAIVE, METICULOUS):
        raise ValueError(f"basis must be 'naive' or 'meticulous', not {basis!r}")
    first = "psi_f" if basis == NAIVE else "pi_f"
    names = [first, "psi_0"] + (["alpha", "alpha*"] if driven else [])
    return GeneratorRegistry(names)


def fermi_ho_propagator(omega, t, basis: str = METICULOUS, hbar: float = 1.0) -> FermiPropagator:
    """e^{iωt/2} exp{χ_f e^{−iωt} ψ_0} with χ_f = ψ_f (naive) or π_f (meticulous)."""
    reg = _registry(basis, False)
    first, psi0 = reg.gens(reg.names[0], "psi_0")
    j = _imag_unit(t)
    elem = exp_scalar(j * omega * t / 2) * (reg.one() + exp_scalar(-j * omega * t) * (first * psi0))
    return FermiPropagator(elem, basis, omega, t, hbar, False)


def _imag_unit(t):
    import mpmath

    return mpmath.mpc(0, 1) if isinstance(t, (mpmath.mpf, mpmath.mpc)) else 1j


def driven_source_coefficients(omega, t) -> tuple[object, object]:
    """(s, F) with s = (1 − e^{−iωt})/ω and F = (−iωt + e^{−iωt} − 1)/(2ω).

    Both are analytic in ω; at ω = 0 they take their limits it and −it.
    """
    j = _imag_unit(t)
    if omega == 0:
        return j * t, -j * t
    e = exp_scalar(-j * omega * t)
    return (1 - e) / omega, (-j * omega * t + e - 1) / (2 * omega)


def fermi_driven_propagator(
    omega, t, hbar: float = 1.0, basis: str = METICULOUS, expansion: str = "exact"
) -> FermiPropagator:
    """exp{χ_f e^{−iωt} ψ_0 − s (α* χ_f + α ψ_0) − F α*α}.

    ``expansion='exact'`` exponentiates in the Grassmann algebra. ``'linear'``
    keeps only 1 + exponent, the truncation used when the sources are
    expanded term by term by hand.
    """
    if omega == 0:
        raise ValueError("omega = 0 makes the source coefficients singular")
    return _driven(omega, t, hbar, basis, expansion)


def _driven(omega, t, hbar, basis, expansion) -> FermiPropagator:
    if expansion not in ("exact", "linear"):
        raise ValueError("expansion must be 'exact' or 'linear'")
    reg = _registry(basis, True)
    first, psi0, a, ac = reg.gens(reg.names[0], "psi_0", "alpha", "alpha*")
    j = _imag_unit(t)
    s, F = driven_source_coefficients(omega, t)
    expo = exp_scalar(-j * omega * t) * (first * psi0) - s * (ac * first + a * psi0) - F * (ac * a)
    elem = grassmann_exp(expo) if expansion == "exact" else reg.one() + expo
    return FermiPropagator(elem, basis, omega, t, hbar, True)


def driven_matrix_and_spectrum(omega: float, g: float) -> tuple[np.ndarray, float, float]:
    """[[0, g], [g, ω]] with |α| = g and its eigenvalues ω/2 ± ½√(ω² + 4g²)."""
    if g < 0:
        raise ValueError("g must be non-negative")
    M = np.array([[0.0, g], [g, omega]])
    r = math.hypot(omega, 2 * g)
    # take the larger-magnitude root directly and the other from λ₊λ₋ = −g²
    if omega >= 0:
        lam_p = (omega + r) / 2
        lam_m = -(g * g) / lam_p if lam_p else 0.0
    else:
        lam_m = (omega - r) / 2
        lam_p = -(g * g) / lam_m
    return M, lam_p, lam_m
