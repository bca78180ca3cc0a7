"""Exact Gaussian-rational numbers and polynomials in the formal parameter ħ."""

from __future__ import annotations

from collections.abc import Mapping
from decimal import Decimal
from fractions import Fraction
from numbers import Rational

from sympy.polys.domains import QQ, QQ_I

__all__ = ["QQ_I", "qqi", "qqi_to_complex", "format_qqi", "I", "HPoly"]

I = QQ_I(0, 1)
_ZERO = QQ_I(0, 0)
_ONE = QQ_I(1, 0)


def _qq(x):
    if isinstance(x, bool):
        x = int(x)
    if isinstance(x, int):
        return QQ(x)
    if isinstance(x, Fraction):
        return QQ(x.numerator, x.denominator)
    if isinstance(x, float):
        f = Fraction(x)  # floats are dyadic rationals; this is exact
        return QQ(f.numerator, f.denominator)
    if isinstance(x, Rational):
        return QQ(int(x.numerator), int(x.denominator))
    return QQ.convert(x)


def qqi(x, y=0):
    """Exact Gaussian rational from ints, Fractions, floats or complex."""
    if isinstance(x, type(_ONE)) and y == 0:
        return x
    if isinstance(x, complex):
        return QQ_I(_qq(x.real), _qq(x.imag))
    return QQ_I(_qq(x), _qq(y))


def qqi_to_complex(c) -> complex:
    return complex(float(c.x), float(c.y))


def _terminating(d: int) -> bool:
    for q in (2, 5):
        while d % q == 0:
            d //= q
    return d == 1


def _fmt_rat(r, decimal: bool) -> str:
    num, den = int(r.numerator), int(r.denominator)
    if den == 1:
        return str(num)
    if decimal and _terminating(den):
        return str(Decimal(num) / Decimal(den))
    return f"{num}/{den}"


def format_qqi(c, decimal: bool = False) -> str:
    """Render a Gaussian rational; terminating fractions become decimals if asked."""
    re, im = c.x, c.y
    if im == 0:
        return _fmt_rat(re, decimal)
    mag = _fmt_rat(abs(im), decimal)
    if "/" in mag:
        mag = f"({mag})"
    # decimal output doubles as expression-language input, which spells i as 1i
    mag = "" if mag == "1" and not decimal else mag
    if re == 0:
        return ("-" if im < 0 else "") + mag + "i"
    sign = "+" if im > 0 else "-"
    return f"({_fmt_rat(re, decimal)}{sign}{mag}i)"


class HPoly:
    """Polynomial in ħ with Gaussian-rational coefficients: {power: coeff}."""

    __slots__ = ("_c",)

    def __init__(self, coeffs: Mapping[int, object] | None = None):
        c = {}
        for k, v in (coeffs or {}).items():
            if k < 0:
                raise ValueError("negative powers of hbar are not polynomial")
            v = qqi(v)
            if v != _ZERO:
                c[int(k)] = v
        self._c = c

    @classmethod
    def const(cls, c) -> HPoly:
        return cls({0: c})

    @classmethod
    def hbar(cls, power: int = 1, coeff=1) -> HPoly:
        return cls({power: coeff})

    @property
    def coeffs(self) -> dict[int, object]:
        return dict(self._c)

    def items(self):
        return self._c.items()

    def __getitem__(self, k: int):
        return self._c.get(k, _ZERO)

    def is_zero(self) -> bool:
        return not self._c

    def degree(self) -> int:
        return max(self._c, default=0)

    def _coerce(self, other) -> HPoly:
        return other if isinstance(other, HPoly) else HPoly.const(other)

    def __add__(self, other) -> HPoly:
        other = self._coerce(other)
        out = dict(self._c)
        for k, v in other._c.items():
            out[k] = out.get(k, _ZERO) + v
        return HPoly(out)

    __radd__ = __add__

    def __neg__(self) -> HPoly:
        return HPoly({k: -v for k, v in self._c.items()})

    def __sub__(self, other) -> HPoly:
        return self + (-self._coerce(other))

    def __rsub__(self, other) -> HPoly:
        return self._coerce(other) - self

    def __mul__(self, other) -> HPoly:
        other = self._coerce(other)
        out: dict[int, object] = {}
        for k1, v1 in self._c.items():
            for k2, v2 in other._c.items():
                out[k1 + k2] = out.get(k1 + k2, _ZERO) + v1 * v2
        return HPoly(out)

    __rmul__ = __mul__

    def __pow__(self, n: int) -> HPoly:
        out = HPoly.const(1)
        for _ in range(n):
            out = out * self
        return out

    def __eq__(self, other) -> bool:
        if not isinstance(other, HPoly):
            try:
                other = HPoly.const(other)
            except Exception:
                return NotImplemented
        return self._c == other._c

    def __hash__(self) -> int:
        return hash(tuple(sorted((k, (v.x, v.y)) for k, v in self._c.items())))

    def evaluate(self, hbar: float) -> complex:
        return sum((qqi_to_complex(v) * hbar**k for k, v in self._c.items()), 0j)

    def __repr__(self) -> str:
        return f"HPoly({self})"

    def __str__(self) -> str:
        if not self._c:
            return "0"
        parts = []
        for k in sorted(self._c):
            c = format_qqi(self._c[k])
            h = "" if k == 0 else ("hbar" if k == 1 else f"hbar^{k}")
            if not h:
                parts.append(c)
            elif c == "1":
                parts.append(h)
            elif c == "-1":
                parts.append("-" + h)
            else:
                parts.append(f"{c}*{h}")
        return " + ".join(parts).replace("+ -", "- ")
