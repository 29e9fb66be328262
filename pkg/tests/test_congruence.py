from fractions import Fraction

import pytest
from hypothesis import given, strategies as st
from sympy import primerange

from hypfermat.congruence import (eisenstein_check, params_congruent, sim_p, verify_congruence)
from hypfermat.hgm_core import make_parameter

F = Fraction
LEGENDRE = make_parameter(F(1, 2), F(1, 2), 1, 1)
PRIMES = list(primerange(3, 400))


def test_sim_p_examples():
    assert sim_p(F(1, 10), F(1, 2), 5)
    assert sim_p(F(3, 7), F(3, 7), 5)
    assert not sim_p(F(1, 3), F(1, 2), 5)


def test_params_congruent_examples():
    left = make_parameter(F(1, 10), F(-1, 10), F(1, 5), F(-1, 5))
    claim = params_congruent(left, LEGENDRE, 5)
    assert claim is not None and claim.p == 5
    assert params_congruent(left, left, 7) is not None
    assert params_congruent(LEGENDRE, make_parameter(F(1, 3), F(2, 3), 1, 1), 5) is None


def test_legendre_congruence_mod_5():
    left = make_parameter(F(1, 10), F(-1, 10), F(1, 5), F(-1, 5))
    rep = verify_congruence(params_congruent(left, LEGENDRE, 5), 2, [11, 31, 41])
    assert rep.all_equal and len(rep.rows) == 3


def test_mod_7_analog():
    left = make_parameter(F(1, 14), F(-1, 14), F(1, 7), F(-1, 7))
    rep = verify_congruence(params_congruent(left, LEGENDRE, 7), 3, PRIMES)
    assert rep.all_equal and len(rep.rows) >= 8


def test_left_equals_right():
    p = make_parameter(F(1, 5), F(2, 5), F(3, 5), 1)
    rep = verify_congruence(params_congruent(p, p, 5), 2, PRIMES[:40])
    assert rep.all_equal


def test_symmetry():
    left = make_parameter(F(1, 10), F(-1, 10), F(1, 5), F(-1, 5))
    a = verify_congruence(params_congruent(left, LEGENDRE, 5), 2, PRIMES[:60])
    b = verify_congruence(params_congruent(LEGENDRE, left, 5), 2, PRIMES[:60])
    assert [r["left"] for r in a.rows] == [r["right"] for r in b.rows]
    assert a.all_equal and b.all_equal


def test_eisenstein():
    p = make_parameter(F(1, 5), F(2, 5), F(3, 5), F(4, 5))
    rep = eisenstein_check(p, 5, 2, [11, 31])
    assert rep.all_equal and len(rep.rows) == 2
    rep = eisenstein_check(p, 5, 2, PRIMES)
    assert rep.all_equal and len(rep.rows) >= 5
    assert any(s["q"] == 19 and s["reason"] == "not split" for s in rep.skipped)
    with pytest.raises(ValueError):
        eisenstein_check(LEGENDRE, 5, 2, [11])


def test_wrong_residue_would_be_caught():
    # Legendre and (1/3,2/3),(1,1) are not congruent, and their traces differ mod 5
    p = make_parameter(F(1, 3), F(2, 3), 1, 1)
    from hypfermat.congruence import CongruenceClaim
    fake = CongruenceClaim(LEGENDRE, p, 5, (False, False))
    rep = verify_congruence(fake, 2, PRIMES[:80])
    assert not rep.all_equal


rationals = st.builds(F, st.integers(-60, 60), st.integers(1, 60))


@given(rationals, rationals, rationals, st.sampled_from([2, 3, 5, 7]))
def test_sim_p_is_an_equivalence(x, y, z, p):
    assert sim_p(x, x, p)
    assert sim_p(x, y, p) == sim_p(y, x, p)
    if sim_p(x, y, p) and sim_p(y, z, p):
        assert sim_p(x, z, p)
