"""Multiplicative characters of prime fields and the sums built from them.

Conventions (fixed once for the whole package):

* ``g`` is the least primitive root modulo q and ``dlog`` is the discrete
  logarithm to base g.
* The prime above q is pinned by identifying zeta_{q-1} with g.  Every
  zeta_N with N | q-1 is then identified with g^((q-1)/N), so all levels use
  mutually compatible roots of unity.
* The generator of the character group is varpi(x) = zeta_{q-1}^dlog(x); the
  order-N character is omega = varpi^((q-1)/N), i.e. omega(x) = zeta_N^dlog(x).
* The additive character is psi(x) = zeta_q^(s x) with s = 1 unless stated.
"""
from __future__ import annotations

import math
from fractions import Fraction
from functools import lru_cache

import numpy as np
from sympy import isprime, primitive_root

from .cyclotomic import CyclotomicInteger, euler_phi


class NotSplitError(ValueError):
    pass


class RamifiedError(ValueError):
    pass


class PrimeFieldCtx:
    """Tables for F_q: least primitive root, discrete logs, pinned roots."""

    def __init__(self, q, needed_levels=()):
        if q < 3 or not isprime(q):
            raise ValueError(f"{q} is not an odd prime")
        self.q = q
        self.generator = int(primitive_root(q))
        Q = q - 1
        dlog = np.zeros(q, dtype=np.int64)
        powers = np.zeros(Q, dtype=np.int64)
        x = 1
        for e in range(Q):
            powers[e] = x
            dlog[x] = e
            x = x * self.generator % q
        self._dlog = dlog
        self._powers = powers
        self.pinned_roots = {}
        for N in needed_levels:
            self.pinned_root(N)
        # x = 2..q-1 and the logs of x and 1-x, used by every Jacobi sum
        xs = np.arange(2, q, dtype=np.int64)
        self._jx = dlog[xs]
        self._j1x = dlog[(1 - xs) % q]

    def __repr__(self):
        return f"PrimeFieldCtx(q={self.q}, generator={self.generator})"

    def pinned_root(self, N):
        """The element of F_q identified with zeta_N."""
        if (self.q - 1) % N:
            raise NotSplitError(f"prime not split: {N} does not divide {self.q}-1")
        if N not in self.pinned_roots:
            self.pinned_roots[N] = pow(self.generator, (self.q - 1) // N, self.q)
        return self.pinned_roots[N]

    def dlog(self, x):
        x %= self.q
        if x == 0:
            raise ValueError("dlog of 0")
        return int(self._dlog[x])

    def reduce(self, t):
        """Reduce a rational (int or Fraction) modulo q."""
        t = Fraction(t)
        if t.denominator % self.q == 0:
            raise RamifiedError(f"{t} has q={self.q} in its denominator")
        return t.numerator * pow(t.denominator, -1, self.q) % self.q

    def omega_exponent(self, x, N):
        """j with omega_N(x) = zeta_N^j."""
        self.pinned_root(N)
        return self.dlog(self.reduce(x)) % N

    def omega(self, x, N, power=1):
        return CyclotomicInteger.zeta(N, power * self.omega_exponent(x, N))

    def varpi_sign(self, m):
        """varpi^m(-1) as +-1."""
        return -1 if (m * ((self.q - 1) // 2)) % (self.q - 1) else 1

    def char_exponent(self, alpha):
        """Exponent m of varpi with varpi^m = omega^(alpha N), alpha rational."""
        alpha = Fraction(alpha)
        m = alpha * (self.q - 1)
        if m.denominator != 1:
            raise NotSplitError(
                f"prime not split: denominator of {alpha} does not divide {self.q}-1")
        return int(m) % (self.q - 1)


def build_ctx(q, needed_levels=()):
    return _cached_ctx(q, tuple(sorted(set(needed_levels))))


@lru_cache(maxsize=512)
def _cached_ctx(q, levels):
    return PrimeFieldCtx(q, levels)


def get_ctx(q):
    return _cached_ctx(q, ())


# -- Gauss and Jacobi sums -------------------------------------------------

def gauss_sum(ctx, m, psi_scale=1):
    """g(varpi^m) = sum_x varpi^m(x) zeta_q^(psi_scale x), at level q(q-1)."""
    return _gauss_sum(ctx.q, m % (ctx.q - 1), psi_scale % ctx.q)


@lru_cache(maxsize=4096)
def _gauss_sum(q, m, s):
    ctx = get_ctx(q)
    Q = q - 1
    L = q * Q
    xs = np.arange(1, q, dtype=np.int64)
    exps = q * ((m * ctx._dlog[xs]) % Q) + Q * ((s * xs) % q)
    return CyclotomicInteger.from_exponents(exps, L)


def jacobi_group_ring(ctx, m1, m2):
    """Histogram over Z/(q-1) of m1 dlog(x) + m2 dlog(1-x), x != 0, 1."""
    Q = ctx.q - 1
    e = (m1 * ctx._jx + m2 * ctx._j1x) % Q
    return np.bincount(e, minlength=Q)


def jacobi_sum(ctx, m1, m2):
    """J(varpi^m1, varpi^m2) = sum_{x != 0,1} varpi^m1(x) varpi^m2(1-x), level q-1."""
    return CyclotomicInteger.from_group_ring(jacobi_group_ring(ctx, m1, m2), ctx.q - 1)


def jacobi_norm(ctx, m1, m2):
    """J * conj(J) as an integer: q if m1, m2, m1+m2 are all nontrivial."""
    Q = ctx.q - 1
    m1 %= Q
    m2 %= Q
    if m1 == 0 and m2 == 0:
        return (ctx.q - 2) ** 2
    if m1 == 0 or m2 == 0:
        return 1
    if (m1 + m2) % Q == 0:
        return 1
    return ctx.q


def gauss_ratio(ctx, num_exps, den_exps):
    """prod g(n) / prod g(d) for exponent lists with equal sums mod q-1.

    The ratio does not depend on the additive character and lies in
    Q(zeta_{q-1}); it is assembled from Jacobi sums.  Returns a pair
    (numerator, denominator) with numerator in Z[zeta_{q-1}] and a positive
    integer denominator.
    """
    Q = ctx.q - 1
    if (sum(num_exps) - sum(den_exps)) % Q:
        raise ValueError("Gauss sum ratio does not have trivial total character")
    num = _gauss_chain(ctx, num_exps)
    den = _gauss_chain(ctx, den_exps)
    # 1/den = conj(den) / (den conj(den)); den conj(den) is a rational integer
    den_conj = den.conjugate()
    dd = (den * den_conj).as_integer()
    if dd is None or dd == 0:
        raise ArithmeticError("Gauss sum chain has non-integral absolute square")
    top = num * den_conj
    g = math.gcd(dd, *top.coeffs) if any(top.coeffs) else dd
    if dd < 0:
        g = -g
    return top.exact_div_int(g), dd // g


def _gauss_chain(ctx, exps):
    """c with prod g(e) = c * g(sum e), c in Z[zeta_{q-1}]."""
    Q = ctx.q - 1
    scalar = CyclotomicInteger.from_int(1, Q)
    if not exps:
        # empty product = 1 = -g(0)
        return -scalar
    s = exps[0] % Q
    for n in exps[1:]:
        n %= Q
        if (s + n) % Q:
            scalar = scalar * jacobi_sum(ctx, s, n)
        elif s:
            scalar = scalar * (-ctx.varpi_sign(s) * ctx.q)
        else:
            scalar = -scalar
        s = (s + n) % Q
    return scalar


def jacobi_motive(ctx, a_list, b_list):
    """Jacobi motive value at q: sign (-1)^(r+s+1) times a Gauss sum ratio.

    Entries are rationals whose denominators divide q-1.  Returns an exact
    element of Z[zeta_{q-1}]; an inexact quotient signals a convention bug.
    """
    num, den = jacobi_motive_fraction(ctx, a_list, b_list)
    if den != 1:
        raise ArithmeticError(
            f"Jacobi motive {a_list},{b_list} at q={ctx.q} is not integral (denominator {den})")
    return num


def jacobi_motive_fraction(ctx, a_list, b_list):
    """Like jacobi_motive but returns (numerator, integer denominator)."""
    a_list = [Fraction(a) for a in a_list]
    b_list = [Fraction(b) for b in b_list]
    r, s = len(a_list), len(b_list)
    extra = sum(b_list, Fraction(0)) - sum(a_list, Fraction(0))
    num_exps = [ctx.char_exponent(a) for a in a_list] + [ctx.char_exponent(extra)]
    den_exps = [ctx.char_exponent(b) for b in b_list]
    num, den = gauss_ratio(ctx, num_exps, den_exps)
    if (r + s + 1) % 2:
        num = -num
    return num, den


# -- twist characters ------------------------------------------------------

def _twist(ctx, alpha, arg):
    alpha = Fraction(alpha)
    N = alpha.denominator
    r = alpha.numerator
    if (ctx.q - 1) % N:
        raise NotSplitError(f"prime not split: {N} does not divide {ctx.q}-1")
    arg = Fraction(arg)
    if arg.numerator % ctx.q == 0 or arg.denominator % ctx.q == 0:
        raise RamifiedError(f"theta undefined at ramified prime q={ctx.q} for argument {arg}")
    if r == 0:
        return CyclotomicInteger.from_int(1, 1)
    return CyclotomicInteger.zeta(N, r * ctx.omega_exponent(arg, N))


def twist_char_theta(ctx, alpha, t0):
    """theta_alpha(Frob_q) = chi_q(t0)^r for alpha = r/N."""
    return _twist(ctx, alpha, t0)


def twist_char_eta(ctx, alpha, t0):
    """eta_alpha(Frob_q) = chi_q(1 - t0)^r for alpha = r/N."""
    return _twist(ctx, alpha, 1 - Fraction(t0))
