from fractions import Fraction

import pytest
from hypothesis import given, strategies as st
from sympy import legendre_symbol, primerange

from hypfermat.cyclotomic import galois_apply
from hypfermat.elliptic import FAMILIES, ap, specialize_family
from hypfermat.euler_curve import (EulerCurve, affine_count, affine_count_naive,
                                   eigenspace_char_sum, exponents_from_params, verify_trace_frob)
from hypfermat.finite_char import get_ctx
from hypfermat.hgm_core import classify_prime, make_parameter

F = Fraction
LEGENDRE = make_parameter(F(1, 2), F(1, 2), 1, 1)


def test_exponents_examples():
    ec = exponents_from_params(LEGENDRE)
    assert (ec.N, ec.A, ec.B, ec.C, ec.D) == (2, 1, 1, 1, 0)
    ec = exponents_from_params(make_parameter(F(1, 5), F(-1, 5), 1, 1))
    assert (ec.N, ec.A, ec.B, ec.C, ec.D) == (5, 1, 4, 1, 0)
    for p in (make_parameter(F(1, 3), F(2, 3), 1, 1), make_parameter(F(1, 5), F(2, 5), 1, 1)):
        assert exponents_from_params(p).D == 0


def test_affine_count_examples():
    assert affine_count(EulerCurve(1, 0, 0, 0, 0).at(2), get_ctx(7)) == 7
    ec = exponents_from_params(LEGENDRE).at(2)
    ctx = get_ctx(5)
    assert affine_count(ec, ctx) == 7
    assert affine_count_naive(ec, ctx) == 7
    # a-number of the affine model is the quadratic character sum
    assert eigenspace_char_sum(ec, 1, ctx).as_integer() == 5 - 7


@pytest.mark.parametrize("t0", [2, 3, F(1, 3), F(-4, 5)])
def test_orthogonality_double_enumeration(t0):
    ec = exponents_from_params(make_parameter(F(1, 5), F(-1, 5), 1, 1)).at(t0)
    ctx = get_ctx(11)
    s = sum((eigenspace_char_sum(ec, j, ctx) for j in range(1, 5)),
            eigenspace_char_sum(ec, 1, ctx) * 0)
    total = ctx.q - s.as_integer()
    assert total == affine_count(ec, ctx) == affine_count_naive(ec, ctx)


@given(st.sampled_from([11, 31, 41, 61]), st.sampled_from([2, 3, F(1, 3), F(9, 7)]),
       st.integers(1, 4), st.integers(1, 4))
def test_galois_equivariance(q, t0, j, r):
    ec = exponents_from_params(make_parameter(F(1, 5), F(2, 5), F(3, 5), 1)).at(t0)
    ctx = get_ctx(q)
    if F(t0).numerator % q == 0 or F(t0).denominator % q == 0 or (F(t0) - 1).numerator % q == 0:
        return
    assert eigenspace_char_sum(ec, j * r % 5, ctx) == galois_apply(eigenspace_char_sum(ec, j, ctx), r)


@pytest.mark.parametrize("t0", [2, -1, F(1, 3)])
def test_trace_frob_legendre(t0):
    n = 0
    for q in primerange(3, 200):
        if classify_prime(LEGENDRE, t0, q).kind != "good":
            continue
        assert verify_trace_frob(LEGENDRE, t0, get_ctx(q)).equal
        n += 1
    assert n >= 20


def test_trace_frob_cubic_at_7():
    assert verify_trace_frob(make_parameter(F(1, 3), F(2, 3), 1, 1), 2, get_ctx(7)).equal


def test_trace_frob_other_eigenspaces():
    p = make_parameter(F(1, 5), F(-1, 5), 1, 1)
    for j in (1, 2, 3, 4):
        assert verify_trace_frob(p, 2, get_ctx(11), j=j).equal


@pytest.mark.parametrize("tag", sorted(FAMILIES))
def test_eigenspace_sum_is_ap_up_to_a_quadratic_character(tag):
    fam = FAMILIES[tag]
    p = fam.parameter
    ec = exponents_from_params(p).at(3)
    E = specialize_family(fam, 3)
    data = []
    for q in primerange(5, 200):
        if (q - 1) % p.N or classify_prime(p, 3, q).kind != "good":
            continue
        v = eigenspace_char_sum(ec, 1, get_ctx(q)).as_integer()
        assert v is not None
        data.append((q, v, ap(E, q)))
    assert len(data) >= 6
    found = [d for d in (1, -1, 2, -2, 3, -3, 6, -6)
             if all(v == legendre_symbol(d % q, q) * a for q, v, a in data)]
    assert found
