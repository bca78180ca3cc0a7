import random
from decimal import Decimal

import pytest
from hypothesis import given, settings, strategies as st

from dqengine.dsl import (
    Bin,
    DSLError,
    Group,
    Neg,
    Num,
    Pow,
    Sym,
    elaborate,
    evaluate,
    parse,
    symbol_population,
    time_function,
    to_source,
)
from dqengine.moyal import PhasePoly

HAND = [
    "x^2*p + hbar*x",
    "pi1*psi1",
    "2",
    "1.5i",
    "(2+3i)",
    "-x",
    "--x",
    "-x^2",
    "(-x)^2",
    "x-(p-x)",
    "x - p - x",
    "2*(x*p)",
    "x*p*x",
    "-(x+p)^3",
    "1e-3*x",
    ".5*p",
    "x^0",
    "alpha* * psi1",
    "alpha*psi1",
    "alpha*",
    "alpha* - Psi",
    "Pi*Psi + alpha*Pi",
    "hbar^2",
    "psi12*pi3",
    "  x   +   p  ",
    "((x))",
    "3.0*x^10",
    "0i",
    "(x + p)*(x - p)",
    "-(-(x))",
]

ATOMS = ["x", "p", "hbar", "2", "0.25", "3i", "1.5i", "7"]
FERMI_ATOMS = ["psi1", "pi1", "psi2", "pi2", "Psi", "Pi", "alpha", "alpha*", "hbar", "2", "0.5i"]


def random_source(rng: random.Random, atoms, depth: int = 0) -> str:
    r = rng.random()
    sp = " " * rng.randint(0, 2)
    if depth > 3 or (depth > 0 and r < 0.3):
        a = rng.choice(atoms)
        # keep the conjugation mark from swallowing a following operand
        return a + " " if a == "alpha*" else a
    if r < 0.55:
        op = rng.choice(["+", "-", "*"])
        return random_source(rng, atoms, depth + 1) + sp + op + sp + random_source(rng, atoms, depth + 1)
    if r < 0.65:
        return "(" + random_source(rng, atoms, depth + 1) + ")"
    if r < 0.8:
        return "-" + rng.choice(["x", "p", "(" + random_source(rng, atoms, depth + 1) + ")"]) if atoms is ATOMS else "-" + rng.choice(["psi1", "pi1"])
    return "(" + random_source(rng, atoms, depth + 1) + ")^" + str(rng.randint(0, 3))


def corpus() -> list[str]:
    rng = random.Random(99)
    out = list(HAND)
    while len(out) < 200:
        src = random_source(rng, ATOMS if len(out) % 2 else FERMI_ATOMS)
        if src not in out:
            out.append(src)
    return out


CORPUS = corpus()


def test_corpus_size():
    assert len(CORPUS) == 200


@pytest.mark.parametrize("src", CORPUS)
def test_round_trip(src):
    ast = parse(src)
    assert parse(to_source(ast)) == ast


def test_example_trees():
    ast = parse("x^2*p + hbar*x")
    assert isinstance(ast, Bin) and ast.op == "+"
    assert ast.left == Bin("*", Pow(Sym("x"), 2), Sym("p"))
    assert parse("pi1*psi1") == Bin("*", Sym("pi1"), Sym("psi1"))
    assert parse("(2+3i)") == Group(Bin("+", Num(Decimal(2)), Num(Decimal(3), True)))
    assert parse("-x^2") == Pow(Neg(Sym("x")), 2)


def test_conjugation_mark():
    assert parse("alpha*") == Sym("alpha*")
    assert parse("alpha*x") == Bin("*", Sym("alpha"), Sym("x"))
    assert parse("alpha* * x") == Bin("*", Sym("alpha*"), Sym("x"))


@pytest.mark.parametrize(
    "src,pos",
    [("x + * p", 4), ("x +", 3), ("(x", 2), ("x)", 1), ("x ^ p", 4), ("x^1.5", 2), ("x ^ 2i", 4), ("y", 0), ("x $ p", 2)],
)
def test_errors_carry_positions(src, pos):
    with pytest.raises(DSLError) as info:
        parse(src)
    assert info.value.pos == pos
    assert f"position {pos}" in str(info.value)


def test_mixed_population_is_rejected():
    with pytest.raises(DSLError, match="mixes"):
        elaborate(parse("x + psi1"))
    with pytest.raises(DSLError):
        elaborate(parse("psi1"), "bose")
    with pytest.raises(DSLError):
        elaborate(parse("x"), "fermi")


def test_population():
    assert symbol_population(parse("hbar*2")) == "scalar"
    assert symbol_population(parse("x*hbar")) == "bose"
    assert symbol_population(parse("alpha*Pi")) == "fermi"


def test_bosonic_elaboration_is_exact():
    f = elaborate(parse("(x + 0.5i*p)^2"))
    x, p = PhasePoly.x(), PhasePoly.p()
    half_i = PhasePoly.const(complex(0, 0.5))
    assert f == (x + half_i * p) ** 2


def test_grassmann_powers_fold_to_zero():
    assert elaborate(parse("psi1^2")).is_zero()
    assert elaborate(parse("(psi1 + pi1)^2")).is_zero()
    assert not elaborate(parse("(psi1*pi1 + 1)^2")).is_zero()
    assert elaborate(parse("psi1^0")).body() == 1


def test_fermionic_aliases_and_sources():
    f = elaborate(parse("Pi*Psi + alpha* * psi1"))
    assert f.coefficient("pi1", "psi1") == 1
    assert f.coefficient("psi1", "alpha*") == -1


def test_time_functions():
    c = time_function("1 + 0.5*t^2")
    assert c(2.0) == pytest.approx(3.0)
    with pytest.raises(DSLError):
        time_function("1i*t")(1.0)
    with pytest.raises(DSLError):
        parse("t")
    assert evaluate(parse("(2+3i)*hbar"), {"hbar": 2.0}) == 4 + 6j


names = st.sampled_from(["x", "p", "hbar", "psi1", "pi2", "Psi", "Pi", "alpha", "alpha*"])
numbers = st.builds(
    Num, st.decimals(min_value=0, max_value=1000, places=3, allow_nan=False, allow_infinity=False), st.booleans()
)
leaves = numbers | names.map(Sym)


def extend(children):
    return (
        st.builds(Neg, children)
        | st.builds(Group, children)
        | st.builds(Pow, children, st.integers(0, 4))
        | st.builds(Bin, st.sampled_from(["+", "-", "*"]), children, children)
    )


trees = st.recursive(leaves, extend, max_leaves=12)


@settings(max_examples=300)
@given(trees)
def test_printed_trees_reparse_to_a_fixed_point(tree):
    # arbitrary trees may gain parentheses once; after that printing is stable
    text = to_source(tree)
    again = parse(text)
    assert to_source(again) == text or parse(to_source(again)) == again
    assert parse(to_source(again)) == again
