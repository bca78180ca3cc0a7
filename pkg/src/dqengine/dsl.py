"""A small expression language for phase-space symbols.

    expr   := term (('+' | '-') term)*
    term   := factor ('*' factor)*
    factor := atom ('^' uint)?
    atom   := number | symbol | '(' expr ')' | '-' atom

Numbers are decimals with an optional exponent; a trailing ``i`` makes them
imaginary (``1.5i``). Symbols are x, p, hbar, psi<j>, pi<j>, Psi, Pi, alpha
and alpha*. A ``*`` written directly after ``alpha`` is the conjugation
mark unless an operand follows it, so ``alpha*x`` is a product while
``alpha* * x`` and ``alpha*`` alone are the conjugate.
"""

from __future__ import annotations

import re
from dataclasses import dataclass
from decimal import Decimal
from fractions import Fraction

from .fermi_phase import FermiSpace
from .grassmann import GrassmannElement
from .hpoly import qqi
from .moyal import PhasePoly

__all__ = [
    "DSLError",
    "Num",
    "Sym",
    "Neg",
    "Bin",
    "Pow",
    "Group",
    "parse",
    "to_source",
    "elaborate",
    "symbol_population",
    "evaluate",
    "time_function",
]


class DSLError(ValueError):
    def __init__(self, message: str, pos: int | None = None):
        super().__init__(message if pos is None else f"{message} at position {pos}")
        self.pos = pos


@dataclass(frozen=True)
class Num:
    value: Decimal
    imaginary: bool = False


@dataclass(frozen=True)
class Sym:
    name: str


@dataclass(frozen=True)
class Neg:
    operand: object


@dataclass(frozen=True)
class Bin:
    op: str
    left: object
    right: object


@dataclass(frozen=True)
class Pow:
    base: object
    exponent: int


@dataclass(frozen=True)
class Group:
    inner: object


_BOSE = {"x", "p", "hbar"}
_FERMI_FIXED = {"Psi", "Pi", "alpha", "alpha*"}
_INDEXED = re.compile(r"(psi|pi)([1-9][0-9]*)$")
_NUMBER = re.compile(r"(\d+\.?\d*|\.\d+)([eE][+-]?\d+)?")
_IDENT = re.compile(r"[A-Za-z_][A-Za-z0-9_]*")


def _known(name: str) -> bool:
    return name in _BOSE or name in _FERMI_FIXED or bool(_INDEXED.match(name))


def _tokenize(src: str, extra: frozenset = frozenset()) -> list[tuple[str, object, int]]:
    toks: list[tuple[str, object, int]] = []
    i, n = 0, len(src)
    while i < n:
        ch = src[i]
        if ch.isspace():
            i += 1
            continue
        m = _NUMBER.match(src, i)
        if m and (ch.isdigit() or ch == "."):
            j = m.end()
            imag = j < n and src[j] == "i" and not (j + 1 < n and (src[j + 1].isalnum() or src[j + 1] == "_"))
            toks.append(("num", (Decimal(m.group(0)), imag), i))
            i = j + 1 if imag else j
            continue
        m = _IDENT.match(src, i)
        if m:
            name, j = m.group(0), m.end()
            if name == "alpha" and j < n and src[j] == "*":
                k = j + 1
                while k < n and src[k].isspace():
                    k += 1
                if k >= n or not (src[k].isalnum() or src[k] in "_(."):
                    name, j = "alpha*", j + 1
            if not (_known(name) or name in extra):
                raise DSLError(f"unknown symbol {name!r}", i)
            toks.append(("sym", name, i))
            i = j
            continue
        if ch in "+-*^()":
            toks.append((ch, ch, i))
            i += 1
            continue
        raise DSLError(f"unexpected character {ch!r}", i)
    toks.append(("end", None, n))
    return toks


class _Parser:
    def __init__(self, src: str, extra: frozenset = frozenset()):
        self.toks = _tokenize(src, extra)
        self.k = 0

    def peek(self) -> tuple[str, object, int]:
        return self.toks[self.k]

    def take(self, kind: str) -> tuple[str, object, int]:
        tok = self.peek()
        if tok[0] != kind:
            found = "end of input" if tok[0] == "end" else repr(tok[1])
            raise DSLError(f"expected {kind!r}, found {found}", tok[2])
        self.k += 1
        return tok

    def expr(self):
        node = self.term()
        while self.peek()[0] in ("+", "-"):
            op = self.take(self.peek()[0])[0]
            node = Bin(op, node, self.term())
        return node

    def term(self):
        node = self.factor()
        while self.peek()[0] == "*":
            self.take("*")
            node = Bin("*", node, self.factor())
        return node

    def factor(self):
        base = self.atom()
        if self.peek()[0] == "^":
            self.take("^")
            tok = self.peek()
            if tok[0] != "num" or tok[1][1] or tok[1][0] != tok[1][0].to_integral_value() or tok[1][0] < 0:
                raise DSLError("exponent must be a non-negative integer", tok[2])
            if not re.fullmatch(r"\d+", _source_text(tok[1][0])):
                raise DSLError("exponent must be written as an integer", tok[2])
            self.k += 1
            return Pow(base, int(tok[1][0]))
        return base

    def atom(self):
        kind, val, pos = self.peek()
        if kind == "num":
            self.k += 1
            return Num(val[0], val[1])
        if kind == "sym":
            self.k += 1
            return Sym(val)
        if kind == "(":
            self.take("(")
            inner = self.expr()
            self.take(")")
            return Group(inner)
        if kind == "-":
            self.take("-")
            return Neg(self.atom())
        found = "end of input" if kind == "end" else repr(val)
        raise DSLError(f"expected a number, symbol, '(' or '-', found {found}", pos)


def parse(src: str, extra_symbols: tuple[str, ...] = ()):
    """Parse ``src``; ``extra_symbols`` admits further names such as ``t``."""
    p = _Parser(src, frozenset(extra_symbols))
    node = p.expr()
    tok = p.peek()
    if tok[0] != "end":
        raise DSLError(f"unexpected {tok[1]!r}", tok[2])
    return node


def _source_text(d: Decimal) -> str:
    s = format(d, "f")
    if "." in s:
        s = s.rstrip("0").rstrip(".")
    return s or "0"


def _prec(node) -> int:
    if isinstance(node, Bin):
        return 1 if node.op in "+-" else 2
    if isinstance(node, Pow):
        return 3
    return 4


def to_source(node) -> str:
    """Print an AST so that parsing the text gives the same AST back."""
    if isinstance(node, Num):
        return _source_text(node.value) + ("i" if node.imaginary else "")
    if isinstance(node, Sym):
        return node.name
    if isinstance(node, Group):
        return "(" + to_source(node.inner) + ")"
    if isinstance(node, Neg):
        inner = to_source(node.operand)
        return "-" + (inner if _prec(node.operand) == 4 else f"({inner})")
    if isinstance(node, Pow):
        base = to_source(node.base)
        return (base if _prec(node.base) == 4 else f"({base})") + f"^{node.exponent}"
    if isinstance(node, Bin):
        need = 1 if node.op in "+-" else 2
        left = to_source(node.left)
        right = to_source(node.right)
        if _prec(node.left) < need:
            left = f"({left})"
        if _prec(node.right) <= need:
            right = f"({right})"
        if node.op == "*":
            return f"{left} * {right}"
        return f"{left} {node.op} {right}"
    raise TypeError(f"not an expression node: {node!r}")


def _symbols(node, out: set) -> set:
    if isinstance(node, Sym):
        out.add(node.name)
    elif isinstance(node, (Neg,)):
        _symbols(node.operand, out)
    elif isinstance(node, Group):
        _symbols(node.inner, out)
    elif isinstance(node, Pow):
        _symbols(node.base, out)
    elif isinstance(node, Bin):
        _symbols(node.left, out)
        _symbols(node.right, out)
    return out


def symbol_population(node) -> str:
    """'bose', 'fermi' or 'scalar' (only numbers and hbar)."""
    names = _symbols(node, set())
    bose = names & {"x", "p"}
    fermi = names - _BOSE
    if bose and fermi:
        raise DSLError(f"mixes bosonic {sorted(bose)} and fermionic {sorted(fermi)} symbols")
    if fermi:
        return "fermi"
    return "bose" if bose else "scalar"


def fermi_space_for(*nodes, hbar: float = 1.0) -> FermiSpace:
    n = 1
    externals = []
    for node in nodes:
        for name in _symbols(node, set()):
            m = _INDEXED.match(name)
            if m:
                n = max(n, int(m.group(2)))
            elif name in ("alpha", "alpha*") and name not in externals:
                externals.append(name)
    return FermiSpace(n, tuple(sorted(externals)), hbar)


def elaborate(node, statistics: str | None = None, hbar: float = 1.0, space: FermiSpace | None = None):
    """Turn an AST into a PhasePoly (bosonic) or a GrassmannElement (fermionic)."""
    pop = symbol_population(node)
    if statistics is None:
        statistics = "fermi" if pop == "fermi" else "bose"
    if statistics == "bose":
        if pop == "fermi":
            raise DSLError("fermionic symbols in a bosonic expression")
        return _elab_bose(node)
    if statistics == "fermi":
        if pop == "bose":
            raise DSLError("bosonic symbols in a fermionic expression")
        space = space or fermi_space_for(node, hbar=hbar)
        return _elab_fermi(node, space)
    raise ValueError(f"unknown statistics {statistics!r}")


def _number(node: Num):
    f = Fraction(node.value)
    return qqi(0, f) if node.imaginary else qqi(f)


def _elab_bose(node) -> PhasePoly:
    if isinstance(node, Num):
        return PhasePoly.const(_number(node))
    if isinstance(node, Sym):
        return {"x": PhasePoly.x, "p": PhasePoly.p, "hbar": PhasePoly.hbar}[node.name]()
    if isinstance(node, Group):
        return _elab_bose(node.inner)
    if isinstance(node, Neg):
        return -_elab_bose(node.operand)
    if isinstance(node, Pow):
        return _elab_bose(node.base) ** node.exponent
    a, b = _elab_bose(node.left), _elab_bose(node.right)
    return a + b if node.op == "+" else a - b if node.op == "-" else a * b


def _elab_fermi(node, space: FermiSpace) -> GrassmannElement:
    reg = space.registry
    if isinstance(node, Num):
        c = _number(node)
        return reg.scalar(complex(float(c.x), float(c.y)))
    if isinstance(node, Sym):
        name = {"Psi": "psi1", "Pi": "pi1"}.get(node.name, node.name)
        if name == "hbar":
            return reg.scalar(space.hbar)
        return reg.gen(name)
    if isinstance(node, Group):
        return _elab_fermi(node.inner, space)
    if isinstance(node, Neg):
        return -_elab_fermi(node.operand, space)
    if isinstance(node, Pow):
        base = _elab_fermi(node.base, space)
        out = reg.one()
        for _ in range(node.exponent):
            out = out * base
        return out
    a, b = _elab_fermi(node.left, space), _elab_fermi(node.right, space)
    return a + b if node.op == "+" else a - b if node.op == "-" else a * b


def evaluate(node, env: dict[str, complex]) -> complex:
    """Numeric value of an expression whose symbols are all bound in ``env``."""
    if isinstance(node, Num):
        v = complex(float(node.value))
        return v * 1j if node.imaginary else v
    if isinstance(node, Sym):
        if node.name not in env:
            raise DSLError(f"symbol {node.name!r} has no numeric value here")
        return complex(env[node.name])
    if isinstance(node, Group):
        return evaluate(node.inner, env)
    if isinstance(node, Neg):
        return -evaluate(node.operand, env)
    if isinstance(node, Pow):
        return evaluate(node.base, env) ** node.exponent
    a, b = evaluate(node.left, env), evaluate(node.right, env)
    return a + b if node.op == "+" else a - b if node.op == "-" else a * b


def time_function(src: str, hbar: float = 1.0):
    """A real function of ``t`` written in the expression language."""
    node = parse(src, ("t",))

    def fn(t: float) -> float:
        v = evaluate(node, {"t": t, "hbar": hbar})
        if abs(v.imag) > 1e-14 * max(1.0, abs(v.real)):
            raise DSLError(f"{src!r} is not real at t = {t}")
        return v.real

    return fn
