"""Polynomials in x̂, p̂ modulo [x̂, p̂] = iħ, kept in normal order (x̂ left of p̂)."""

from __future__ import annotations

import itertools
import math
from collections.abc import Mapping, Sequence
from functools import lru_cache

from .hpoly import HPoly, I, QQ_I, format_qqi, qqi
from .moyal import PhasePoly, poisson_bracket

__all__ = [
    "OperatorPoly",
    "op_mul",
    "commutator",
    "xnpm_commutator_closed",
    "groenewold_check",
    "weyl_quantize_poly",
    "weyl_symbol",
    "word_product",
    "symmetrized_bruteforce",
]

_ZERO = QQ_I(0, 0)


@lru_cache(maxsize=None)
def _reorder_coeffs(b: int, c: int) -> tuple[tuple[int, object], ...]:
    """p̂^b x̂^c = Σ_k C(b,k) C(c,k) k! (−iħ)^k x̂^{c−k} p̂^{b−k}; returns (k, coefficient)."""
    out = []
    for k in range(min(b, c) + 1):
        coef = QQ_I(math.comb(b, k) * math.comb(c, k) * math.factorial(k), 0) * (-I) ** k
        out.append((k, coef))
    return tuple(out)


class OperatorPoly:
    """Normal-ordered operator polynomial, stored as {(a, b, k): coeff} for ħ^k x̂^a p̂^b."""

    __slots__ = ("_t",)

    def __init__(self, terms: Mapping[tuple[int, int, int], object] | None = None):
        t = {}
        for (a, b, k), v in (terms or {}).items():
            v = qqi(v)
            if v != _ZERO:
                t[(int(a), int(b), int(k))] = v
        self._t = t

    @classmethod
    def _raw(cls, t: dict) -> OperatorPoly:
        obj = cls.__new__(cls)
        obj._t = {key: v for key, v in t.items() if v != _ZERO}
        return obj

    @classmethod
    def x(cls) -> OperatorPoly:
        return cls({(1, 0, 0): 1})

    @classmethod
    def p(cls) -> OperatorPoly:
        return cls({(0, 1, 0): 1})

    @classmethod
    def const(cls, c) -> OperatorPoly:
        if isinstance(c, HPoly):
            return cls({(0, 0, k): v for k, v in c.items()})
        return cls({(0, 0, 0): c})

    @classmethod
    def word(cls, a: int, b: int, coeff=1) -> OperatorPoly:
        if isinstance(coeff, HPoly):
            return cls({(a, b, k): v for k, v in coeff.items()})
        return cls({(a, b, 0): coeff})

    @property
    def terms(self) -> dict:
        return dict(self._t)

    def coeff(self, a: int, b: int) -> HPoly:
        return HPoly({k: v for (aa, bb, k), v in self._t.items() if (aa, bb) == (a, b)})

    def words(self) -> list[tuple[int, int]]:
        return sorted({(a, b) for a, b, _ in self._t})

    def is_zero(self) -> bool:
        return not self._t

    def as_scalar(self) -> HPoly:
        """The operator as a pure ħ-polynomial; raises if any x̂ or p̂ survives."""
        if any(a or b for a, b, _ in self._t):
            raise ValueError("operator is not a multiple of the identity")
        return HPoly({k: v for (_, _, k), v in self._t.items()})

    @staticmethod
    def _coerce(other) -> OperatorPoly:
        return other if isinstance(other, OperatorPoly) else OperatorPoly.const(other)

    def __add__(self, other) -> OperatorPoly:
        other = self._coerce(other)
        out = dict(self._t)
        for key, v in other._t.items():
            out[key] = out.get(key, _ZERO) + v
        return OperatorPoly._raw(out)

    __radd__ = __add__

    def __neg__(self) -> OperatorPoly:
        return OperatorPoly._raw({key: -v for key, v in self._t.items()})

    def __sub__(self, other) -> OperatorPoly:
        return self + (-self._coerce(other))

    def __rsub__(self, other) -> OperatorPoly:
        return self._coerce(other) - self

    def __mul__(self, other) -> OperatorPoly:
        return op_mul(self, self._coerce(other))

    def __rmul__(self, other) -> OperatorPoly:
        return op_mul(self._coerce(other), self)

    def __pow__(self, n: int) -> OperatorPoly:
        out = OperatorPoly.const(1)
        for _ in range(n):
            out = op_mul(out, self)
        return out

    def scale(self, c) -> OperatorPoly:
        c = qqi(c)
        return OperatorPoly._raw({key: v * c for key, v in self._t.items()})

    def shift_hbar(self, k: int) -> OperatorPoly:
        if k < 0 and any(kk + k < 0 for _, _, kk in self._t):
            raise ValueError("division by hbar leaves a negative power")
        return OperatorPoly._raw({(a, b, kk + k): v for (a, b, kk), v in self._t.items()})

    def __eq__(self, other) -> bool:
        if not isinstance(other, OperatorPoly):
            try:
                other = OperatorPoly.const(other)
            except Exception:
                return NotImplemented
        return self._t == other._t

    def __hash__(self) -> int:
        return hash(tuple(sorted((key, (v.x, v.y)) for key, v in self._t.items())))

    def __repr__(self) -> str:
        return f"OperatorPoly({self})"

    def __str__(self) -> str:
        if not self._t:
            return "0"
        parts = []
        for key in sorted(self._t, key=lambda t: (-(t[0] + t[1]), t[2], -t[0])):
            a, b, k = key
            factors = [s if e == 1 else f"{s}^{e}" for s, e in (("hbar", k), ("X", a), ("P", b)) if e]
            c = format_qqi(self._t[key])
            word = "*".join(factors)
            parts.append(c if not word else (word if c == "1" else f"{c}*{word}"))
        return " + ".join(parts)


def op_mul(A: OperatorPoly, B: OperatorPoly) -> OperatorPoly:
    """Product with the middle p̂^b x̂^c moved into normal order."""
    out: dict = {}
    for (a1, b1, k1), v1 in A._t.items():
        for (a2, b2, k2), v2 in B._t.items():
            vv = v1 * v2
            for j, c in _reorder_coeffs(b1, a2):
                key = (a1 + a2 - j, b1 + b2 - j, k1 + k2 + j)
                out[key] = out.get(key, _ZERO) + vv * c
    return OperatorPoly._raw(out)


def word_product(letters: Sequence[str]) -> OperatorPoly:
    """Normal-ordered form of a product of 'x'/'p' letters, left to right."""
    out = OperatorPoly.const(1)
    for ch in letters:
        out = op_mul(out, OperatorPoly.x() if ch == "x" else OperatorPoly.p())
    return out


def commutator(A: OperatorPoly, B: OperatorPoly) -> OperatorPoly:
    return op_mul(A, B) - op_mul(B, A)


def xnpm_commutator_closed(n: int, m: int) -> OperatorPoly:
    """Σ_{k=0}^{n−1} iħ m x̂^k p̂^{m−1} x̂^{n−1−k}, normal ordered."""
    if n < 1 or m < 1:
        raise ValueError("n and m must be positive")
    X, P = OperatorPoly.x(), OperatorPoly.p()
    total = OperatorPoly()
    for k in range(n):
        total = total + op_mul(op_mul(X**k, P ** (m - 1)), X ** (n - 1 - k))
    return total.scale(I * m).shift_hbar(1)


def _promote(bracket: OperatorPoly) -> OperatorPoly:
    """Dirac's rule: a Poisson bracket becomes (1/iħ)[·,·]."""
    return bracket.shift_hbar(-1).scale(-I)


def groenewold_check() -> tuple[PhasePoly, HPoly]:
    """Classical and quantum sides of the Groenewold identity.

    Classically {x³, p³} + (1/12){{p², x³}, {x², p³}} = 0. Promoting each
    Poisson bracket to (1/iħ) times a commutator gives a nonzero scalar.
    """
    x, p = PhasePoly.x(), PhasePoly.p()
    classical = poisson_bracket(x**3, p**3) + poisson_bracket(
        poisson_bracket(p**2, x**3), poisson_bracket(x**2, p**3)
    ).scale(QQ_I(1, 0) / QQ_I(12, 0))

    X, P = OperatorPoly.x(), OperatorPoly.p()
    first = _promote(commutator(X**3, P**3))
    inner_a = _promote(commutator(P**2, X**3))
    inner_b = _promote(commutator(X**2, P**3))
    second = _promote(commutator(inner_a, inner_b)).scale(QQ_I(1, 0) / QQ_I(12, 0))
    # the x̂²p̂² and x̂p̂ parts cancel exactly; only a multiple of the identity survives
    return classical, (first + second).as_scalar()


@lru_cache(maxsize=None)
def _weyl_monomial(a: int, b: int) -> OperatorPoly:
    """Symmetrized x^a p^b via McCoy's form 2^{-a} Σ_k C(a,k) x̂^k p̂^b x̂^{a−k}."""
    X, P = OperatorPoly.x(), OperatorPoly.p()
    total = OperatorPoly()
    pb = P**b
    for k in range(a + 1):
        total = total + op_mul(op_mul(X**k, pb), X ** (a - k)).scale(math.comb(a, k))
    return total.scale(QQ_I(1, 0) / QQ_I(2**a, 0))


def symmetrized_bruteforce(a: int, b: int) -> OperatorPoly:
    """Average over every distinct arrangement of a x̂'s and b p̂'s."""
    total = OperatorPoly()
    count = 0
    for positions in itertools.combinations(range(a + b), a):
        letters = ["p"] * (a + b)
        for i in positions:
            letters[i] = "x"
        total = total + word_product(letters)
        count += 1
    return total.scale(QQ_I(1, 0) / QQ_I(count, 0))


def weyl_quantize_poly(f: PhasePoly) -> OperatorPoly:
    out = OperatorPoly()
    for (a, b, k), v in f.terms.items():
        out = out + _weyl_monomial(a, b).shift_hbar(k).scale(v)
    return out


def weyl_symbol(A: OperatorPoly) -> PhasePoly:
    """Inverse of weyl_quantize_poly by elimination from the top degree down."""
    rest = A
    symbol = PhasePoly()
    while not rest.is_zero():
        top = max(a + b for a, b, _ in rest._t)
        for (a, b, k), v in list(rest._t.items()):
            if a + b != top:
                continue
            symbol = symbol + PhasePoly({(a, b, k): v})
            rest = rest - _weyl_monomial(a, b).shift_hbar(k).scale(v)
    return symbol
