from fractions import Fraction

import pytest

from dqengine.hpoly import HPoly, qqi
from dqengine.moyal import PhasePoly
from dqengine.weyl_algebra import (
    OperatorPoly,
    commutator,
    groenewold_check,
    op_mul,
    symmetrized_bruteforce,
    weyl_quantize_poly,
    weyl_symbol,
    word_product,
    xnpm_commutator_closed,
)

X, P = OperatorPoly.x(), OperatorPoly.p()


def test_canonical_commutator():
    assert commutator(X, P) == OperatorPoly.const(qqi(0, 1)).shift_hbar(1)


def test_normal_ordering_of_px():
    # p x = x p - i hbar
    assert op_mul(P, X) == op_mul(X, P) - OperatorPoly.const(qqi(0, 1)).shift_hbar(1)


def test_word_product_matches_op_mul():
    assert word_product(["p", "x", "p"]) == op_mul(op_mul(P, X), P)


def test_groenewold_anomaly():
    classical, quantum = groenewold_check()
    assert classical.is_zero()
    assert quantum == HPoly.hbar(2, -3)
    assert str(quantum) == "-3*hbar^2"


@pytest.mark.parametrize("n", range(1, 6))
@pytest.mark.parametrize("m", range(1, 6))
def test_commutator_closed_form(n, m):
    assert commutator(X**n, P**m) == xnpm_commutator_closed(n, m)


def test_closed_form_rejects_zero_powers():
    with pytest.raises(ValueError):
        xnpm_commutator_closed(0, 2)


@pytest.mark.parametrize("a,b", [(a, b) for a in range(4) for b in range(4 - a)])
def test_weyl_monomial_is_symmetrized_average(a, b):
    assert weyl_quantize_poly(PhasePoly.monomial(a, b)) == symmetrized_bruteforce(a, b)


def test_weyl_of_xp_is_symmetric_product():
    half = qqi(Fraction(1, 2))
    expected = (op_mul(X, P) + op_mul(P, X)).scale(half)
    assert weyl_quantize_poly(PhasePoly.monomial(1, 1)) == expected


def test_symbol_inverts_quantization():
    f = PhasePoly.monomial(2, 2, 3) + PhasePoly.monomial(1, 0, qqi(0, 2)) + PhasePoly.hbar() * PhasePoly.monomial(0, 1)
    assert weyl_symbol(weyl_quantize_poly(f)) == f


def test_symbol_of_normal_ordered_xp():
    # xp = W(xp) + i hbar/2
    assert weyl_symbol(op_mul(X, P)) == PhasePoly.x() * PhasePoly.p() + PhasePoly.hbar() * PhasePoly.const(qqi(0, Fraction(1, 2)))
