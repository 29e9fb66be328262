import cmath
import math

import pytest
from hypothesis import given, strategies as st
from sympy import Poly, cyclotomic_poly as sym_cyclotomic, symbols

from hypfermat.cyclotomic import (CyclotomicInteger, LevelMismatchError, NotInSublevelError,
                                  change_level, embed_all_float, embed_complex, euler_phi,
                                  galois_apply, prime_ideal_reduction, reduce_mod_prime,
                                  ring_arithmetic)

X = symbols("x")


@st.composite
def elements(draw, level=None, lo=-20, hi=20):
    M = level if level is not None else draw(st.integers(1, 60))
    coeffs = draw(st.lists(st.integers(lo, hi), min_size=euler_phi(M), max_size=euler_phi(M)))
    return CyclotomicInteger(M, tuple(coeffs))


@st.composite
def triples(draw):
    M = draw(st.integers(1, 60))
    return tuple(draw(elements(level=M, lo=-6, hi=6)) for _ in range(3))


def units(M):
    return [k for k in range(1, M + 1) if math.gcd(k, M) == 1]


def test_zeta4_squared():
    z = CyclotomicInteger.zeta(4)
    assert ring_arithmetic(z, z, "mul") == CyclotomicInteger(4, (-1, 0))


def test_mul_by_one_level12():
    x = CyclotomicInteger(12, (3, -1, 4, 7))
    assert x * CyclotomicInteger.from_int(1, 12) == x


def test_product_against_polynomial_oracle():
    z = CyclotomicInteger.zeta(5)
    got = (1 + z) * (1 + z ** 4)
    expected = Poly((1 + X) * (1 + X ** 4), X).rem(Poly(sym_cyclotomic(5, X), X))
    coeffs = list(reversed(expected.all_coeffs()))
    coeffs += [0] * (4 - len(coeffs))
    assert got.coeffs == tuple(int(c) for c in coeffs)


def test_length_and_zero():
    assert len(CyclotomicInteger.from_int(0, 36).coeffs) == 12
    assert CyclotomicInteger.from_int(0, 36).is_zero()
    with pytest.raises(ValueError):
        CyclotomicInteger(5, (1, 2))


@pytest.mark.parametrize("M", [1, 2, 3, 4, 7, 12, 15, 30])
def test_zeta_to_the_level_is_one(M):
    assert CyclotomicInteger.zeta(M) ** M == CyclotomicInteger.from_int(1, M)


def test_level_mismatch_raises():
    with pytest.raises(LevelMismatchError):
        CyclotomicInteger.zeta(3) + CyclotomicInteger.zeta(5)


def test_change_level_examples():
    assert change_level(CyclotomicInteger.zeta(2), 6) == CyclotomicInteger(6, (-1, 0))
    assert change_level(CyclotomicInteger.from_int(7, 20), 1) == CyclotomicInteger.from_int(7)
    x = CyclotomicInteger.zeta(10) + CyclotomicInteger.zeta(10, -1)
    down = change_level(x, 5)
    expected = -(CyclotomicInteger.zeta(5, 3) + CyclotomicInteger.zeta(5, 2))
    assert down == expected
    assert abs(embed_complex(down).center - embed_complex(x).center) < 1e-10


def test_change_level_refuses_outside_subring():
    with pytest.raises(NotInSublevelError):
        change_level(CyclotomicInteger.zeta(12), 4)


def test_galois_examples():
    assert galois_apply(CyclotomicInteger.zeta(8), 3) == CyclotomicInteger.zeta(8, 3)
    x = CyclotomicInteger(12, (1, 2, 3, 4))
    assert galois_apply(x, 1) == x
    one_plus = 1 + CyclotomicInteger.zeta(5)
    prod = CyclotomicInteger.from_int(1, 5)
    for r in units(5):
        prod = prod * galois_apply(one_plus, r)
    # Phi_5(-1) = 1
    assert prod == CyclotomicInteger.from_int(1, 5)
    assert one_plus.norm() == 1
    with pytest.raises(ValueError):
        galois_apply(one_plus, 5)


def test_embedding_examples():
    assert embed_complex(CyclotomicInteger.from_int(-1)).contains(-1)
    assert embed_complex(CyclotomicInteger.zeta(4)).contains(1j)


def test_gauss_sum_absolute_square_via_embedding():
    from hypfermat.finite_char import gauss_sum, get_ctx
    g = gauss_sum(get_ctx(13), 5)
    z = embed_complex(g).center
    assert abs(abs(z) ** 2 - 13) < 1e-9
    # direct summation oracle
    ctx = get_ctx(13)
    direct = sum(cmath.exp(2j * cmath.pi * (5 * ctx.dlog(x) / 12 + x / 13)) for x in range(1, 13))
    assert abs(direct - z) < 1e-9


def test_reduction_examples():
    assert reduce_mod_prime(CyclotomicInteger.from_int(7), prime_ideal_reduction(1, 5)) == 2
    assert reduce_mod_prime(CyclotomicInteger.zeta(5), prime_ideal_reduction(5, 5)) == 1
    red = prime_ideal_reduction(3, 7)
    assert red.f == 1
    # roots of x^2 + x + 1 mod 7 are 2 and 4; the smaller is pinned
    assert reduce_mod_prime(CyclotomicInteger.zeta(3), red) == 2


@pytest.mark.parametrize("M,p", [(5, 2), (7, 2), (12, 5), (15, 2), (20, 3), (10, 5)])
def test_residue_degree_is_order_of_p(M, p):
    Mp = M
    while Mp % p == 0:
        Mp //= p
    f = 1
    while Mp > 1 and pow(p, f, Mp) != 1:
        f += 1
    assert prime_ideal_reduction(M, p).f == f


def test_json_round_trip_with_big_coefficients():
    x = CyclotomicInteger(3, (2 ** 70, -5))
    obj = x.to_json()
    assert obj["coeffs"][0] == str(2 ** 70)
    assert CyclotomicInteger.from_json(obj) == x


# -- properties -------------------------------------------------------------

@given(triples())
def test_ring_axioms(t):
    x, y, z = t
    assert (x * y) * z == x * (y * z)
    assert x * (y + z) == x * y + x * z
    assert x + y == y + x
    assert x * y == y * x
    assert x - x == CyclotomicInteger.from_int(0, x.level)


@given(elements(lo=-5, hi=5), st.data())
def test_embedding_commutes_with_galois(x, data):
    r = data.draw(st.sampled_from(units(x.level)))
    k_embed = embed_complex(x, r)
    g_embed = embed_complex(galois_apply(x, r), 1)
    assert abs(k_embed.center - g_embed.center) <= k_embed.radius + g_embed.radius + 1e-12


@given(elements(lo=-5, hi=5))
def test_float_embeddings_match_interval(x):
    floats = embed_all_float(x)
    for k, v in floats.items():
        assert abs(embed_complex(x, k).center - v) < 1e-8


@st.composite
def reduction_pairs(draw):
    M = draw(st.sampled_from([3, 4, 5, 7, 8, 12, 15]))
    p = draw(st.sampled_from([2, 3, 5, 7, 11, 13]))
    x = draw(elements(level=M, lo=-9, hi=9))
    y = draw(elements(level=M, lo=-9, hi=9))
    return prime_ideal_reduction(M, p), x, y


@given(reduction_pairs())
def test_reduction_is_a_ring_homomorphism(args):
    red, x, y = args
    F = red.field
    rx, ry = reduce_mod_prime(x, red), reduce_mod_prime(y, red)
    if red.f == 1:
        assert reduce_mod_prime(x + y, red) == (rx + ry) % red.p
        assert reduce_mod_prime(x * y, red) == (rx * ry) % red.p
    else:
        assert reduce_mod_prime(x + y, red) == F.add(rx, ry)
        assert reduce_mod_prime(x * y, red) == F.mul(rx, ry)


@given(st.data())
def test_lift_then_descend_is_identity(data):
    M = data.draw(st.integers(1, 30))
    k = data.draw(st.integers(2, 4))
    x = data.draw(elements(level=M))
    assert change_level(change_level(x, M * k), M) == x
