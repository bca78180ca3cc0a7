"""Finite Grassmann algebra over a fixed, ordered set of odd generators.

Monomials are stored as bitmasks over the registry order; a monomial's
coefficient always multiplies the generators written in ascending registry
order. Every sign in the module comes from counting transpositions to that
order.

Coefficients are complex doubles by default. Any numeric type closed under
``+``/``*`` (e.g. ``mpmath.mpc``) also works, which the Feynman-Kac code uses
to evaluate traces far beyond the float exponent range.
"""

from __future__ import annotations

import cmath
import math
from collections.abc import Iterable, Mapping, Sequence
from typing import Literal

import mpmath
import numpy as np

__all__ = [
    "GeneratorRegistry",
    "GrassmannElement",
    "RegistryError",
    "g_mul",
    "left_derivative",
    "right_derivative",
    "berezin_integrate",
    "grassmann_exp",
    "parity",
    "grassmann_delta",
    "substitute",
    "gaussian_berezin",
    "gaussian_berezin_bruteforce",
]

Parity = Literal["even", "odd", "mixed"]
MeasureSide = Literal["left", "right", "left-weinberg"]


class RegistryError(ValueError):
    """Raised for unknown generators or mixing elements of different registries."""


def _popcount(n: int) -> int:
    return bin(n).count("1")


def _is_zero(c) -> bool:
    return c == 0


def exp_scalar(z):
    """exp that keeps mpmath values in mpmath."""
    if isinstance(z, (mpmath.mpf, mpmath.mpc)):
        return mpmath.exp(z)
    return cmath.exp(z)


class GeneratorRegistry:
    """Immutable ordered list of odd generator names."""

    __slots__ = ("_names", "_index")

    def __init__(self, names: Iterable[str]):
        names = tuple(names)
        if len(set(names)) != len(names):
            raise RegistryError(f"duplicate generator names in {names}")
        object.__setattr__(self, "_names", names)
        object.__setattr__(self, "_index", {n: i for i, n in enumerate(names)})

    def __setattr__(self, key, value):
        raise AttributeError("GeneratorRegistry is immutable")

    @property
    def names(self) -> tuple[str, ...]:
        return self._names

    def __len__(self) -> int:
        return len(self._names)

    def __contains__(self, name: object) -> bool:
        return name in self._index

    def __eq__(self, other: object) -> bool:
        return isinstance(other, GeneratorRegistry) and self._names == other._names

    def __hash__(self) -> int:
        return hash(self._names)

    def __repr__(self) -> str:
        return f"GeneratorRegistry({list(self._names)!r})"

    def index(self, name: str) -> int:
        try:
            return self._index[name]
        except KeyError:
            raise RegistryError(f"unknown generator {name!r}") from None

    def mask(self, names: Iterable[str]) -> int:
        m = 0
        for n in names:
            m |= 1 << self.index(n)
        return m

    def gen(self, name: str) -> GrassmannElement:
        return GrassmannElement(self, {1 << self.index(name): 1.0 + 0j})

    def gens(self, *names: str) -> tuple[GrassmannElement, ...]:
        return tuple(self.gen(n) for n in names)

    def scalar(self, c) -> GrassmannElement:
        return GrassmannElement(self, {0: c})

    def zero(self) -> GrassmannElement:
        return GrassmannElement(self, {})

    def one(self) -> GrassmannElement:
        return self.scalar(1.0 + 0j)

    def monomial(self, *names: str, coeff=1.0 + 0j) -> GrassmannElement:
        """coeff * (product of `names` in the order given)."""
        out = self.scalar(coeff)
        for n in names:
            out = out * self.gen(n)
        return out

    def basis(self) -> list[GrassmannElement]:
        """All 2^n canonical basis monomials."""
        return [GrassmannElement(self, {m: 1.0 + 0j}) for m in range(1 << len(self))]

    def extend(self, *names: str) -> GeneratorRegistry:
        return GeneratorRegistry(self._names + tuple(names))


def _merge_sign(s: int, t: int) -> int:
    """Sign of reordering (monomial s)(monomial t) into canonical order.

    Each generator j of t has to hop over every generator of s sitting
    above it in the registry order.
    """
    swaps = 0
    while t:
        low = t & -t
        swaps += _popcount(s & ~((low << 1) - 1))
        t ^= low
    return -1 if swaps & 1 else 1


class GrassmannElement:
    """Sparse linear combination of canonical monomials."""

    __slots__ = ("registry", "_terms")

    def __init__(self, registry: GeneratorRegistry, terms: Mapping[int, object] | None = None):
        self.registry = registry
        self._terms = {m: c for m, c in (terms or {}).items() if not _is_zero(c)}

    # -- access ---------------------------------------------------------
    @property
    def terms(self) -> dict[int, object]:
        return dict(self._terms)

    def items(self):
        return self._terms.items()

    def __len__(self) -> int:
        return len(self._terms)

    def is_zero(self) -> bool:
        return not self._terms

    def degree(self) -> int:
        return max((_popcount(m) for m in self._terms), default=0)

    def body(self):
        """Scalar (empty monomial) coefficient."""
        return self._terms.get(0, 0)

    def monomial_names(self, mask: int) -> tuple[str, ...]:
        return tuple(n for i, n in enumerate(self.registry.names) if mask >> i & 1)

    def coefficient(self, *names: str):
        """Coefficient c of c*(names in the order given).

        The stored coefficient refers to canonical order; reordering the
        requested word to canonical order fixes the sign.
        """
        idx = [self.registry.index(n) for n in names]
        if len(set(idx)) != len(idx):
            return 0
        inversions = sum(1 for i in range(len(idx)) for j in range(i + 1, len(idx)) if idx[i] > idx[j])
        mask = 0
        for i in idx:
            mask |= 1 << i
        c = self._terms.get(mask, 0)
        return -c if inversions & 1 else c

    # -- arithmetic -----------------------------------------------------
    def _check(self, other: GrassmannElement) -> None:
        if self.registry != other.registry:
            raise RegistryError("elements belong to different registries")

    def _coerce(self, other) -> GrassmannElement:
        if isinstance(other, GrassmannElement):
            self._check(other)
            return other
        return self.registry.scalar(other)

    def __add__(self, other) -> GrassmannElement:
        other = self._coerce(other)
        out = dict(self._terms)
        for m, c in other._terms.items():
            out[m] = out.get(m, 0) + c
        return GrassmannElement(self.registry, out)

    __radd__ = __add__

    def __neg__(self) -> GrassmannElement:
        return GrassmannElement(self.registry, {m: -c for m, c in self._terms.items()})

    def __sub__(self, other) -> GrassmannElement:
        return self + (-self._coerce(other))

    def __rsub__(self, other) -> GrassmannElement:
        return self._coerce(other) - self

    def __mul__(self, other) -> GrassmannElement:
        if not isinstance(other, GrassmannElement):
            return GrassmannElement(self.registry, {m: c * other for m, c in self._terms.items()})
        return g_mul(self, other)

    def __rmul__(self, other) -> GrassmannElement:
        # scalars commute with everything
        return GrassmannElement(self.registry, {m: other * c for m, c in self._terms.items()})

    def __truediv__(self, other) -> GrassmannElement:
        return GrassmannElement(self.registry, {m: c / other for m, c in self._terms.items()})

    def __pow__(self, k: int) -> GrassmannElement:
        if k < 0:
            raise ValueError("negative powers are not defined")
        out = self.registry.one()
        for _ in range(k):
            out = out * self
        return out

    def __eq__(self, other: object) -> bool:
        if isinstance(other, GrassmannElement):
            return self.registry == other.registry and self._terms == other._terms
        if isinstance(other, (int, float, complex)):
            return self._terms == ({0: other} if other != 0 else {})
        return NotImplemented

    __hash__ = None  # type: ignore[assignment]

    def isclose(self, other, tol: float = 1e-12) -> bool:
        other = self._coerce(other)
        keys = set(self._terms) | set(other._terms)
        return all(abs(self._terms.get(k, 0) - other._terms.get(k, 0)) <= tol for k in keys)

    def max_abs_diff(self, other) -> float:
        other = self._coerce(other)
        keys = set(self._terms) | set(other._terms)
        return max((float(abs(self._terms.get(k, 0) - other._terms.get(k, 0))) for k in keys), default=0.0)

    def chop(self, tol: float = 1e-14) -> GrassmannElement:
        return GrassmannElement(self.registry, {m: c for m, c in self._terms.items() if abs(c) > tol})

    def map_coefficients(self, fn) -> GrassmannElement:
        return GrassmannElement(self.registry, {m: fn(c) for m, c in self._terms.items()})

    def __repr__(self) -> str:
        return f"GrassmannElement({self})"

    def __str__(self) -> str:
        if not self._terms:
            return "0"
        parts = []
        for m in sorted(self._terms, key=lambda m: (_popcount(m), m)):
            c = self._terms[m]
            word = "*".join(self.monomial_names(m))
            parts.append(f"({_fmt(c)})" + (f"*{word}" if word else ""))
        return " + ".join(parts)


def _fmt(c) -> str:
    if isinstance(c, complex):
        return f"{c.real:.12g}{c.imag:+.12g}i"
    return str(c)


def g_mul(a: GrassmannElement, b: GrassmannElement) -> GrassmannElement:
    """Sign-correct product; overlapping monomials vanish."""
    a._check(b)
    out: dict[int, object] = {}
    for s, cs in a._terms.items():
        for t, ct in b._terms.items():
            if s & t:
                continue
            c = cs * ct
            if _merge_sign(s, t) < 0:
                c = -c
            u = s | t
            out[u] = out.get(u, 0) + c
    return GrassmannElement(a.registry, out)


def left_derivative(f: GrassmannElement, gen: str) -> GrassmannElement:
    """Anticommute `gen` to the front of each monomial, then strip it."""
    k = f.registry.index(gen)
    bit = 1 << k
    below = bit - 1
    out = {}
    for m, c in f._terms.items():
        if m & bit:
            out[m ^ bit] = -c if _popcount(m & below) & 1 else c
    return GrassmannElement(f.registry, out)


def right_derivative(f: GrassmannElement, gen: str) -> GrassmannElement:
    """Right derivative, from the left one: (-1)^(deg-1) per monomial."""
    left = left_derivative(f, gen)
    # a monomial of degree d loses one generator, so deg-1 = degree of the result
    return GrassmannElement(
        f.registry, {m: (-c if _popcount(m) & 1 else c) for m, c in left._terms.items()}
    )


def berezin_integrate(
    f: GrassmannElement, gens: Sequence[str], measure_side: MeasureSide = "left"
) -> GrassmannElement:
    """Iterated Berezin integral; `gens` lists the integrations innermost first.

    measure_side:
      ``"left"``           ∫dθ θ = 1 (integration is the left derivative)
      ``"right"``          ∫θ dθ = 1 (measure written on the right: right derivative)
      ``"left-weinberg"``  ∫dθ θ = -1, the left-written companion of ``"right"``
    """
    if len(set(gens)) != len(gens):
        raise RegistryError(f"duplicate generator in measure {list(gens)}")
    for g in gens:
        f.registry.index(g)
    out = f
    for g in gens:
        if measure_side == "left":
            out = left_derivative(out, g)
        elif measure_side == "right":
            out = right_derivative(out, g)
        elif measure_side == "left-weinberg":
            out = -left_derivative(out, g)
        else:
            raise ValueError(f"unknown measure side {measure_side!r}")
    return out


def grassmann_exp(f: GrassmannElement) -> GrassmannElement:
    """exp(body + soul) = e^body * sum_k soul^k / k!, exact by nilpotency."""
    body = f.body()
    soul = GrassmannElement(f.registry, {m: c for m, c in f._terms.items() if m})
    total = f.registry.one()
    power = f.registry.one()
    for k in range(1, len(f.registry) + 1):
        power = power * soul
        if power.is_zero():
            break
        total = total + power / math.factorial(k)
    return total if _is_zero(body) else exp_scalar(body) * total


def parity(f: GrassmannElement) -> Parity:
    degrees = {_popcount(m) & 1 for m in f._terms}
    if degrees <= {0}:
        return "even"
    if degrees == {1}:
        return "odd"
    return "mixed"


def grassmann_delta(*args: GrassmannElement) -> GrassmannElement:
    """Product of odd linear arguments in the order given."""
    if not args:
        raise ValueError("delta needs at least one argument")
    out = args[0].registry.one()
    for a in args:
        if a.is_zero() or any(_popcount(m) != 1 for m in a._terms):
            raise ValueError("delta arguments must be odd linear combinations of generators")
        out = out * a
    return out


def substitute(
    f: GrassmannElement, images: Mapping[str, GrassmannElement], target: GeneratorRegistry
) -> GrassmannElement:
    """Algebra homomorphism sending each generator to an odd element of `target`.

    Generators missing from `images` must also exist in `target` and map to
    themselves.
    """
    cache: dict[int, GrassmannElement] = {}
    imgs = []
    for name in f.registry.names:
        if name in images:
            img = images[name]
            if img.registry != target:
                raise RegistryError(f"image of {name!r} is not over the target registry")
            if parity(img) != "odd" and not img.is_zero():
                raise ValueError(f"image of {name!r} must be odd")
            imgs.append(img)
        else:
            imgs.append(target.gen(name))
    out = target.zero()
    for m, c in f._terms.items():
        prod = cache.get(m)
        if prod is None:
            prod = target.one()
            i = 0
            mm = m
            while mm:
                if mm & 1:
                    prod = prod * imgs[i]
                mm >>= 1
                i += 1
            cache[m] = prod
        out = out + c * prod
    return out


def _bilinear(a: Sequence[GrassmannElement], M: np.ndarray, b: Sequence[GrassmannElement]) -> GrassmannElement:
    out = a[0].registry.zero()
    n = len(a)
    for i in range(n):
        for j in range(n):
            if M[i, j] != 0:
                out = out + complex(M[i, j]) * (a[i] * b[j])
    return out


def _check_sources(M: np.ndarray, a, b) -> np.ndarray:
    M = np.asarray(M, dtype=complex)
    if M.ndim != 2 or M.shape[0] != M.shape[1]:
        raise ValueError("M must be square")
    n = M.shape[0]
    if len(a) != n or len(b) != n:
        raise ValueError("source vectors must match the size of M")
    regs = {x.registry for x in (*a, *b)}
    if len(regs) != 1:
        raise RegistryError("all sources must live in one registry")
    return M


def gaussian_berezin(M, a: Sequence[GrassmannElement], b: Sequence[GrassmannElement]) -> GrassmannElement:
    """Closed form of ∫DuDv exp(vᵀMu + uᵀa + vᵀb) = det(M) exp(+aᵀM⁻¹b).

    The measure is the paired one, (dv_1 du_1)...(dv_n du_n) read innermost
    first, which makes the source-free integral exactly det(M).
    """
    M = _check_sources(M, a, b)
    det = np.linalg.det(M)
    if abs(det) < 1e-300 or np.linalg.cond(M) > 1e14:
        raise np.linalg.LinAlgError("singular matrix in Gaussian Berezin integral")
    Minv = np.linalg.inv(M)
    return complex(det) * grassmann_exp(_bilinear(a, Minv, b))


def gaussian_berezin_bruteforce(
    M, a: Sequence[GrassmannElement], b: Sequence[GrassmannElement], measure: str = "paired"
) -> GrassmannElement:
    """Oracle: build the integrand over fresh u, v generators and integrate.

    ``measure="paired"`` integrates v_1, u_1, v_2, u_2, ... innermost first.
    ``measure="stacked"`` integrates v_1..v_n then u_1..u_n, i.e. the
    du_n...du_1 dv_n...dv_1 ordering; it differs by (-1)^(n(n-1)/2).
    """
    M = _check_sources(M, a, b)
    n = M.shape[0]
    src = a[0].registry
    us = [f"__u{i}" for i in range(n)]
    vs = [f"__v{i}" for i in range(n)]
    big = src.extend(*us, *vs)
    lift = {name: big.gen(name) for name in src.names}
    A = [substitute(x, lift, big) for x in a]
    B = [substitute(x, lift, big) for x in b]
    U = [big.gen(u) for u in us]
    V = [big.gen(v) for v in vs]
    exponent = _bilinear(V, M, U)
    for i in range(n):
        exponent = exponent + U[i] * A[i] + V[i] * B[i]
    integrand = grassmann_exp(exponent)
    if measure == "paired":
        order = [g for pair in zip(vs, us) for g in pair]
    elif measure == "stacked":
        order = vs + us
    else:
        raise ValueError(f"unknown measure {measure!r}")
    result = berezin_integrate(integrand, order, "left")
    # drop back to the source registry
    k = len(src)
    low = (1 << k) - 1
    if any(m & ~low for m in result.terms):
        raise AssertionError("integration left integration variables behind")
    return GrassmannElement(src, result.terms)
