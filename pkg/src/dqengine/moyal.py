"""Bosonic phase-space symbols (one degree of freedom).

``PhasePoly`` is exact: coefficients are Gaussian rationals attached to
monomials x^a p^b ħ^k. ``GaussianSymbol`` is numeric (ħ fixed) and covers
polynomial-times-Gaussian functions such as Wigner functions and star
exponentials of quadratic Hamiltonians.
"""

from __future__ import annotations

import math
from collections.abc import Callable, Iterable, Mapping
from dataclasses import dataclass
from functools import lru_cache

import numpy as np
from scipy import integrate

from .hpoly import HPoly, I, QQ_I, format_qqi, qqi, qqi_to_complex

__all__ = [
    "PhasePoly",
    "NumPoly",
    "GaussianSymbol",
    "QuadratureParams",
    "QuadratureError",
    "poisson_bracket",
    "moyal_star",
    "moyal_bracket",
    "standard_star",
    "t_transition",
    "star_power",
    "star_power_series_exp",
    "star_genvalue_residual",
    "wigner_from_wavefunction",
]

_ZERO = QQ_I(0, 0)
_ONE = QQ_I(1, 0)


@lru_cache(maxsize=None)
def _inv_fact(n: int):
    return QQ_I(1, 0) / QQ_I(math.factorial(n), 0)


@lru_cache(maxsize=None)
def _falling(a: int, k: int) -> int:
    """a (a-1) ... (a-k+1)"""
    out = 1
    for j in range(k):
        out *= a - j
    return out


class PhasePoly:
    """Exact polynomial in x, p with HPoly coefficients.

    Stored flat as {(deg_x, deg_p, deg_hbar): Gaussian rational}.
    """

    __slots__ = ("_t",)

    def __init__(self, terms: Mapping[tuple[int, int, int], object] | None = None):
        t = {}
        for (a, b, k), v in (terms or {}).items():
            v = qqi(v)
            if v != _ZERO:
                t[(int(a), int(b), int(k))] = v
        self._t = t

    @classmethod
    def _raw(cls, t: dict) -> PhasePoly:
        obj = cls.__new__(cls)
        obj._t = {key: v for key, v in t.items() if v != _ZERO}
        return obj

    # -- constructors ---------------------------------------------------
    @classmethod
    def x(cls) -> PhasePoly:
        return cls({(1, 0, 0): 1})

    @classmethod
    def p(cls) -> PhasePoly:
        return cls({(0, 1, 0): 1})

    @classmethod
    def hbar(cls) -> PhasePoly:
        return cls({(0, 0, 1): 1})

    @classmethod
    def const(cls, c) -> PhasePoly:
        if isinstance(c, HPoly):
            return cls({(0, 0, k): v for k, v in c.items()})
        return cls({(0, 0, 0): c})

    @classmethod
    def monomial(cls, a: int, b: int, coeff=1) -> PhasePoly:
        if isinstance(coeff, HPoly):
            return cls({(a, b, k): v for k, v in coeff.items()})
        return cls({(a, b, 0): coeff})

    @classmethod
    def from_coeffs(cls, coeffs: Mapping[tuple[int, int], object]) -> PhasePoly:
        out = cls()
        for (a, b), c in coeffs.items():
            out = out + cls.monomial(a, b, c)
        return out

    # -- access ---------------------------------------------------------
    @property
    def terms(self) -> dict[tuple[int, int, int], object]:
        return dict(self._t)

    def coeff(self, a: int, b: int) -> HPoly:
        return HPoly({k: v for (aa, bb, k), v in self._t.items() if aa == a and bb == b})

    def monomials(self) -> list[tuple[int, int]]:
        return sorted({(a, b) for a, b, _ in self._t})

    def hbar_part(self, k: int) -> PhasePoly:
        """Coefficient of ħ^k as a PhasePoly with no ħ."""
        return PhasePoly._raw({(a, b, 0): v for (a, b, kk), v in self._t.items() if kk == k})

    def is_zero(self) -> bool:
        return not self._t

    def deg_x(self) -> int:
        return max((a for a, _, _ in self._t), default=0)

    def deg_p(self) -> int:
        return max((b for _, b, _ in self._t), default=0)

    def degree(self) -> int:
        return max((a + b for a, b, _ in self._t), default=0)

    # -- arithmetic -----------------------------------------------------
    @staticmethod
    def _coerce(other) -> PhasePoly:
        if isinstance(other, PhasePoly):
            return other
        return PhasePoly.const(other)

    def __add__(self, other) -> PhasePoly:
        other = self._coerce(other)
        out = dict(self._t)
        for key, v in other._t.items():
            out[key] = out.get(key, _ZERO) + v
        return PhasePoly._raw(out)

    __radd__ = __add__

    def __neg__(self) -> PhasePoly:
        return PhasePoly._raw({key: -v for key, v in self._t.items()})

    def __sub__(self, other) -> PhasePoly:
        return self + (-self._coerce(other))

    def __rsub__(self, other) -> PhasePoly:
        return self._coerce(other) - self

    def __mul__(self, other) -> PhasePoly:
        other = self._coerce(other)
        out: dict = {}
        for (a1, b1, k1), v1 in self._t.items():
            for (a2, b2, k2), v2 in other._t.items():
                key = (a1 + a2, b1 + b2, k1 + k2)
                out[key] = out.get(key, _ZERO) + v1 * v2
        return PhasePoly._raw(out)

    __rmul__ = __mul__

    def __pow__(self, n: int) -> PhasePoly:
        out = PhasePoly.const(1)
        for _ in range(n):
            out = out * self
        return out

    def scale(self, c) -> PhasePoly:
        c = qqi(c)
        return PhasePoly._raw({key: v * c for key, v in self._t.items()})

    def shift_hbar(self, k: int) -> PhasePoly:
        """Multiply by ħ^k (k may be negative if every term allows it)."""
        if k < 0 and any(kk + k < 0 for _, _, kk in self._t):
            raise ValueError("division by hbar leaves a negative power")
        return PhasePoly._raw({(a, b, kk + k): v for (a, b, kk), v in self._t.items()})

    def __eq__(self, other) -> bool:
        if not isinstance(other, PhasePoly):
            try:
                other = PhasePoly.const(other)
            except Exception:
                return NotImplemented
        return self._t == other._t

    def __hash__(self) -> int:
        return hash(tuple(sorted((key, (v.x, v.y)) for key, v in self._t.items())))

    # -- calculus -------------------------------------------------------
    def deriv(self, nx: int = 0, np_: int = 0) -> PhasePoly:
        """∂_x^nx ∂_p^np"""
        out = {}
        for (a, b, k), v in self._t.items():
            if a < nx or b < np_:
                continue
            out[(a - nx, b - np_, k)] = v * QQ_I(_falling(a, nx) * _falling(b, np_), 0)
        return PhasePoly._raw(out)

    def dx(self, n: int = 1) -> PhasePoly:
        return self.deriv(n, 0)

    def dp(self, n: int = 1) -> PhasePoly:
        return self.deriv(0, n)

    # -- numerics -------------------------------------------------------
    def at_hbar(self, hbar: float) -> NumPoly:
        out: dict[tuple[int, int], complex] = {}
        for (a, b, k), v in self._t.items():
            out[(a, b)] = out.get((a, b), 0j) + qqi_to_complex(v) * hbar**k
        return NumPoly(out)

    def evaluate(self, x, p, hbar: float):
        return self.at_hbar(hbar).evaluate(x, p)

    def __repr__(self) -> str:
        return f"PhasePoly({self})"

    def to_string(self, decimal: bool = False) -> str:
        if not self._t:
            return "0"
        parts = []
        for key in sorted(self._t, key=lambda t: (-(t[0] + t[1]), t[2], -t[0])):
            a, b, k = key
            factors = []
            for sym, e in (("x", a), ("p", b), ("hbar", k)):
                if e == 1:
                    factors.append(sym)
                elif e > 1:
                    factors.append(f"{sym}^{e}")
            c = format_qqi(self._t[key], decimal)
            word = "*".join(factors)
            if not word:
                parts.append(c)
            elif c == "1":
                parts.append(word)
            elif c == "-1":
                parts.append("-" + word)
            else:
                parts.append(f"{c}*{word}")
        out = parts[0]
        for part in parts[1:]:
            out += " - " + part[1:] if part.startswith("-") else " + " + part
        return out

    __str__ = to_string


class NumPoly:
    """Numeric polynomial in x, p: {(deg_x, deg_p): complex}."""

    __slots__ = ("_t",)

    def __init__(self, terms: Mapping[tuple[int, int], complex] | None = None):
        self._t = {k: complex(v) for k, v in (terms or {}).items() if v != 0}

    @classmethod
    def const(cls, c) -> NumPoly:
        return cls({(0, 0): c})

    @property
    def terms(self) -> dict[tuple[int, int], complex]:
        return dict(self._t)

    def is_zero(self) -> bool:
        return not self._t

    def deg_x(self) -> int:
        return max((a for a, _ in self._t), default=0)

    def deg_p(self) -> int:
        return max((b for _, b in self._t), default=0)

    def __add__(self, other) -> NumPoly:
        if not isinstance(other, NumPoly):
            other = NumPoly.const(other)
        out = dict(self._t)
        for k, v in other._t.items():
            out[k] = out.get(k, 0j) + v
        return NumPoly(out)

    __radd__ = __add__

    def __neg__(self) -> NumPoly:
        return NumPoly({k: -v for k, v in self._t.items()})

    def __sub__(self, other) -> NumPoly:
        return self + (-other if isinstance(other, NumPoly) else NumPoly.const(-other))

    def __mul__(self, other) -> NumPoly:
        if not isinstance(other, NumPoly):
            return NumPoly({k: v * other for k, v in self._t.items()})
        out: dict = {}
        for (a1, b1), v1 in self._t.items():
            for (a2, b2), v2 in other._t.items():
                key = (a1 + a2, b1 + b2)
                out[key] = out.get(key, 0j) + v1 * v2
        return NumPoly(out)

    __rmul__ = __mul__

    def deriv(self, nx: int = 0, np_: int = 0) -> NumPoly:
        return NumPoly(
            {
                (a - nx, b - np_): v * _falling(a, nx) * _falling(b, np_)
                for (a, b), v in self._t.items()
                if a >= nx and b >= np_
            }
        )

    def evaluate(self, x, p):
        x = np.asarray(x, dtype=complex) if np.ndim(x) else complex(x)
        p = np.asarray(p, dtype=complex) if np.ndim(p) else complex(p)
        out = 0j * x * p if np.ndim(x) or np.ndim(p) else 0j
        for (a, b), v in self._t.items():
            out = out + v * x**a * p**b
        return out

    def __repr__(self) -> str:
        return f"NumPoly({self._t})"


@dataclass(frozen=True)
class GaussianSymbol:
    """prefactor(x, p) * exp(A x² + B xp + C p² + u x + v p + w), ħ fixed."""

    prefactor: NumPoly
    A: complex = 0j
    B: complex = 0j
    C: complex = 0j
    u: complex = 0j
    v: complex = 0j
    w: complex = 0j
    hbar: float = 1.0

    def _with(self, prefactor: NumPoly) -> GaussianSymbol:
        return GaussianSymbol(prefactor, self.A, self.B, self.C, self.u, self.v, self.w, self.hbar)

    def exponent_poly(self) -> NumPoly:
        return NumPoly(
            {(2, 0): self.A, (1, 1): self.B, (0, 2): self.C, (1, 0): self.u, (0, 1): self.v, (0, 0): self.w}
        )

    def dx(self) -> GaussianSymbol:
        q = NumPoly({(1, 0): 2 * self.A, (0, 1): self.B, (0, 0): self.u})
        return self._with(self.prefactor.deriv(1, 0) + self.prefactor * q)

    def dp(self) -> GaussianSymbol:
        q = NumPoly({(1, 0): self.B, (0, 1): 2 * self.C, (0, 0): self.v})
        return self._with(self.prefactor.deriv(0, 1) + self.prefactor * q)

    def deriv(self, nx: int = 0, np_: int = 0) -> GaussianSymbol:
        out = self
        for _ in range(nx):
            out = out.dx()
        for _ in range(np_):
            out = out.dp()
        return out

    def mul_poly(self, poly: NumPoly | PhasePoly) -> GaussianSymbol:
        if isinstance(poly, PhasePoly):
            poly = poly.at_hbar(self.hbar)
        return self._with(self.prefactor * poly)

    def same_exponent(self, other: GaussianSymbol) -> bool:
        return (self.A, self.B, self.C, self.u, self.v, self.w, self.hbar) == (
            other.A, other.B, other.C, other.u, other.v, other.w, other.hbar
        )

    def __add__(self, other: GaussianSymbol) -> GaussianSymbol:
        if not self.same_exponent(other):
            raise ValueError("can only add Gaussian symbols sharing an exponent")
        return self._with(self.prefactor + other.prefactor)

    def __sub__(self, other: GaussianSymbol) -> GaussianSymbol:
        return self + other.scale(-1)

    def scale(self, c) -> GaussianSymbol:
        return self._with(self.prefactor * c)

    def evaluate(self, x, p):
        e = self.exponent_poly().evaluate(x, p)
        return self.prefactor.evaluate(x, p) * np.exp(e)

    __call__ = evaluate


def poisson_bracket(f: PhasePoly, g: PhasePoly) -> PhasePoly:
    return f.dx() * g.dp() - f.dp() * g.dx()


def _star_terms(nf_x: int, nf_p: int, ng_x: int, ng_p: int):
    """(m, n, coefficient of ħ^(m+n)) in the Moyal bidifferential series."""
    half_i = I / QQ_I(2, 0)
    for m in range(min(nf_p, ng_x) + 1):
        for n in range(min(nf_x, ng_p) + 1):
            c = half_i ** (m + n) * _inv_fact(m) * _inv_fact(n)
            if m % 2:
                c = -c
            yield m, n, c


def moyal_star(f, g, truncation: int | None = None):
    """Σ (iħ/2)^{m+n} (-1)^m/(m!n!) (∂_p^m ∂_x^n f)(∂_p^n ∂_x^m g).

    Exact when both factors are PhasePoly. With one GaussianSymbol factor the
    series still terminates (the polynomial side runs out of derivatives)
    and the result is a GaussianSymbol. Two Gaussian factors need an
    explicit truncation order, which is not provided in this version.
    """
    if isinstance(f, PhasePoly) and isinstance(g, PhasePoly):
        out: dict = {}
        for m, n, c in _star_terms(f.deg_x(), f.deg_p(), g.deg_x(), g.deg_p()):
            if truncation is not None and m + n > truncation:
                continue
            prod = f.deriv(n, m) * g.deriv(m, n)
            for (a, b, k), v in prod._t.items():
                key = (a, b, k + m + n)
                out[key] = out.get(key, _ZERO) + v * c
        return PhasePoly._raw(out)
    if isinstance(f, GaussianSymbol) and isinstance(g, GaussianSymbol):
        raise ValueError("Gaussian * Gaussian star products are not supported in exact mode")
    if isinstance(f, PhasePoly) and isinstance(g, GaussianSymbol):
        fn = f.at_hbar(g.hbar)
        hbar = g.hbar
        limits = (fn.deg_x(), fn.deg_p(), 10**6, 10**6)
        pairs = ((m, n, c) for m, n, c in _star_terms(*limits))
        total = NumPoly()
        for m, n, c in pairs:
            if truncation is not None and m + n > truncation:
                continue
            df = fn.deriv(n, m)
            if df.is_zero():
                continue
            dg = g.deriv(m, n)
            total = total + df * dg.prefactor * (qqi_to_complex(c) * hbar ** (m + n))
        return g._with(total)
    if isinstance(f, GaussianSymbol) and isinstance(g, PhasePoly):
        gn = g.at_hbar(f.hbar)
        hbar = f.hbar
        total = NumPoly()
        for m, n, c in _star_terms(10**6, 10**6, gn.deg_x(), gn.deg_p()):
            if truncation is not None and m + n > truncation:
                continue
            dg = gn.deriv(m, n)
            if dg.is_zero():
                continue
            df = f.deriv(n, m)
            total = total + df.prefactor * dg * (qqi_to_complex(c) * hbar ** (m + n))
        return f._with(total)
    raise TypeError(f"unsupported operand types {type(f).__name__}, {type(g).__name__}")


def moyal_bracket(f: PhasePoly, g: PhasePoly) -> PhasePoly:
    """(f⋆g − g⋆f)/(iħ)"""
    comm = moyal_star(f, g) - moyal_star(g, f)
    return comm.shift_hbar(-1).scale(-I)


def standard_star(f: PhasePoly, g: PhasePoly) -> PhasePoly:
    """f exp(iħ ←∂_x →∂_p) g: every x-derivative on the left, p on the right."""
    out = PhasePoly()
    for k in range(min(f.deg_x(), g.deg_p()) + 1):
        c = I**k * _inv_fact(k)
        out = out + (f.dx(k) * g.dp(k)).shift_hbar(k).scale(c)
    return out


def t_transition(f: PhasePoly, direction: str = "forward") -> PhasePoly:
    """T = exp(-(iħ/2) ∂_x ∂_p) (forward) or its inverse.

    With this sign T(f ⋆_S g) = T f ⋆ T g, i.e. the forward map carries the
    standard product onto the Moyal product.
    """
    if direction == "forward":
        base = -I / QQ_I(2, 0)
    elif direction == "inverse":
        base = I / QQ_I(2, 0)
    else:
        raise ValueError("direction must be 'forward' or 'inverse'")
    out = PhasePoly()
    for k in range(min(f.deg_x(), f.deg_p()) + 1):
        out = out + f.deriv(k, k).shift_hbar(k).scale(base**k * _inv_fact(k))
    return out


def star_power(H: PhasePoly, n: int) -> PhasePoly:
    out = PhasePoly.const(1)
    for _ in range(n):
        out = moyal_star(H, out)
    return out


def star_power_series_exp(H: PhasePoly, t: float, order: int, point: tuple[float, float], hbar: float = 1.0) -> complex:
    """Partial sum Σ_{n≤order} (-it/ħ)^n H^{⋆n}/n! at one phase-space point."""
    if order < 0:
        raise ValueError("order must be non-negative")
    x, p = point
    total = 0j
    power = PhasePoly.const(1)
    for n in range(order + 1):
        if n:
            power = moyal_star(H, power)
        total += (-1j * t / hbar) ** n / math.factorial(n) * complex(power.evaluate(x, p, hbar))
    return total


def star_genvalue_residual(H: PhasePoly, rho: GaussianSymbol, E: float, sample_points: Iterable[tuple[float, float]]) -> float:
    """max |H⋆ρ − Eρ| over the samples."""
    lhs = moyal_star(H, rho)
    diff = lhs - rho.scale(E)
    pts = np.asarray(list(sample_points), dtype=float)
    return float(np.max(np.abs(diff.evaluate(pts[:, 0], pts[:, 1]))))


class QuadratureError(RuntimeError):
    pass


@dataclass(frozen=True)
class QuadratureParams:
    cutoff: float = 1e-12  # |ψ| below this counts as zero
    epsabs: float = 1e-13
    epsrel: float = 1e-11
    limit: int = 400
    r_max: float = 1e4
    tol: float = 1e-9  # accepted error estimate / imaginary residue


def _support_radius(psi: Callable[[float], complex], cutoff: float, r_max: float) -> float:
    r = 1.0
    while r <= r_max:
        probe = np.linspace(r, 2 * r, 33)
        if all(abs(psi(s)) < cutoff and abs(psi(-s)) < cutoff for s in probe):
            return r
        r *= 2
    raise QuadratureError(f"wavefunction does not decay below {cutoff} within |x| < {r_max}")


def wigner_from_wavefunction(
    psi: Callable[[float], complex],
    x: float,
    p: float,
    hbar: float = 1.0,
    quadrature: QuadratureParams = QuadratureParams(),
) -> float:
    """(1/2πħ) ∫ ψ(x + y/2) ψ̄(x − y/2) e^{−iyp/ħ} dy by adaptive quadrature."""
    R = _support_radius(psi, quadrature.cutoff, quadrature.r_max)
    L = 2.0 * (R - abs(x))
    if L <= 0:
        return 0.0

    def integrand(y: float) -> complex:
        return psi(x + y / 2) * np.conj(psi(x - y / 2)) * np.exp(-1j * y * p / hbar)

    opts = dict(epsabs=quadrature.epsabs, epsrel=quadrature.epsrel, limit=quadrature.limit)
    re, err_re = integrate.quad(lambda y: integrand(y).real, -L, L, **opts)
    im, err_im = integrate.quad(lambda y: integrand(y).imag, -L, L, **opts)
    if max(err_re, err_im) > quadrature.tol:
        raise QuadratureError(f"quadrature error estimate {max(err_re, err_im):.2e} above {quadrature.tol}")
    scale = 1.0 / (2 * math.pi * hbar)
    if abs(im) * scale > quadrature.tol * max(1.0, abs(re) * scale):
        raise QuadratureError(f"Wigner function has imaginary residue {im * scale:.2e}")
    return re * scale
