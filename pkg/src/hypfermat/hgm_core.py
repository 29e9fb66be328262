"""Rank-2 hypergeometric parameters, local monodromy, and Frobenius traces."""
from __future__ import annotations

import math
from dataclasses import dataclass
from fractions import Fraction
from typing import NamedTuple

import numpy as np

from .cyclotomic import CyclotomicFraction, CyclotomicInteger, NotInSublevelError, change_level
from .finite_char import (NotSplitError, RamifiedError, gauss_sum, get_ctx,
                          jacobi_group_ring, jacobi_norm, jacobi_sum)

INFINITY = math.inf


class NonGenericError(ValueError):
    pass


class WildPrimeError(ValueError):
    pass


class DescentError(ArithmeticError):
    pass


def mod1(x):
    """Canonical representative of x in Q/Z, as a Fraction in [0, 1)."""
    return Fraction(x) % 1


def parse_rational(s):
    return Fraction(str(s).strip())


def _fmt(x):
    # integers print as "1", matching the usual (1,1) notation
    return "1" if x == 0 else str(x)


@dataclass(frozen=True)
class HgmParameter:
    """The parameter (a,b),(c,d) with entries in Q/Z, pairs sorted."""

    a: Fraction
    b: Fraction
    c: Fraction
    d: Fraction

    @property
    def top(self):
        return (self.a, self.b)

    @property
    def bottom(self):
        return (self.c, self.d)

    @property
    def N(self):
        return math.lcm(*(x.denominator for x in (self.a, self.b, self.c, self.d)))

    @property
    def gamma(self):
        return self.c + self.d - self.a - self.b

    @property
    def generic(self):
        return all((x - y).denominator != 1
                   for x in self.top for y in self.bottom)

    def require_generic(self):
        if not self.generic:
            raise NonGenericError(f"parameter {self} is not generic")

    def galois_conjugate(self, r):
        return make_parameter(r * self.a, r * self.b, r * self.c, r * self.d)

    def __str__(self):
        return "{},{};{},{}".format(*map(_fmt, (self.a, self.b, self.c, self.d)))

    def to_json(self):
        return {"top": [_fmt(self.a), _fmt(self.b)], "bottom": [_fmt(self.c), _fmt(self.d)]}

    @classmethod
    def from_json(cls, obj):
        return make_parameter(*obj["top"], *obj["bottom"])

    @classmethod
    def parse(cls, text):
        """Parse "a,b;c,d" with rationals written n/d."""
        top, bottom = text.split(";")
        a, b = top.split(",")
        c, d = bottom.split(",")
        return make_parameter(*(parse_rational(v) for v in (a, b, c, d)))


def make_parameter(a, b, c, d):
    a, b = sorted((mod1(a), mod1(b)))
    c, d = sorted((mod1(c), mod1(d)))
    return HgmParameter(a, b, c, d)


# -- field of definition ---------------------------------------------------

@dataclass(frozen=True)
class FieldDescriptor:
    N: int
    H: tuple
    degree: int
    totally_real: bool

    def to_json(self):
        return {"N": self.N, "H": list(self.H), "degree": self.degree,
                "totally_real": self.totally_real}


def symmetry_group(p):
    """H = {r in (Z/N)^x : r{a,b} = {a,b}, r{c,d} = {c,d}} and K = Q(zeta_N)^H."""
    p.require_generic()
    N = p.N
    top = sorted(p.top)
    bottom = sorted(p.bottom)
    units = [r for r in range(1, N + 1) if math.gcd(r, N) == 1]
    H = []
    for r in units:
        if (sorted(mod1(r * x) for x in top) == top
                and sorted(mod1(r * x) for x in bottom) == bottom):
            H.append(r % N if N > 1 else 1)
    H = tuple(sorted(H))
    degree = len(units) // len(H)
    totally_real = N <= 2 or (N - 1) in H
    return FieldDescriptor(N, H, degree, totally_real)


# -- monodromy -------------------------------------------------------------

@dataclass(frozen=True)
class MonodromyMatrix:
    """diag(exp(e1), exp(e2)) or exp(e1) times the unipotent [[1,1],[0,1]]."""

    kind: str
    exponents: tuple

    def det_exponent(self):
        if self.kind == "diagonal":
            return mod1(sum(self.exponents))
        return mod1(2 * self.exponents[0])

    def trace_exponents(self):
        if self.kind == "diagonal":
            return self.exponents
        return (self.exponents[0], self.exponents[0])


def monodromy(p, point):
    """Local monodromy at 0, 1 or infinity ("inf")."""
    p.require_generic()
    if point == 0:
        if (p.c - p.d).denominator != 1:
            return MonodromyMatrix("diagonal", (mod1(-p.c), mod1(-p.d)))
        return MonodromyMatrix("scaled_unipotent", (mod1(-p.c),))
    if point == 1:
        if p.gamma.denominator != 1:
            return MonodromyMatrix("diagonal", (Fraction(0), mod1(p.gamma)))
        return MonodromyMatrix("scaled_unipotent", (Fraction(0),))
    if point in ("inf", INFINITY, "infinity"):
        if (p.a - p.b).denominator != 1:
            return MonodromyMatrix("diagonal", (p.a, p.b))
        return MonodromyMatrix("scaled_unipotent", (p.a,))
    raise ValueError(f"unknown ramification point {point!r}")


def monodromy_order(m, power=1):
    """Order of m**power (infinite for nonzero powers of a scaled unipotent)."""
    if power == 0:
        return 1
    if m.kind == "scaled_unipotent":
        return INFINITY
    return math.lcm(*(mod1(power * e).denominator for e in m.exponents))


# -- local behaviour at a prime ---------------------------------------------

def valuation(x, q):
    x = Fraction(x)
    if x == 0:
        return INFINITY
    v = 0
    n, d = x.numerator, x.denominator
    while n % q == 0:
        n //= q
        v += 1
    while d % q == 0:
        d //= q
        v -= 1
    return v


class PrimeClass(NamedTuple):
    kind: str
    valuation: int | None = None


def classify_prime(p, t0, q):
    """good, tame0(r), tame1(r), tameInf(r), or wild."""
    t0 = Fraction(t0)
    if p.N % q == 0:
        return PrimeClass("wild")
    v0 = valuation(t0, q)
    if v0 > 0:
        return PrimeClass("tame0", v0)
    if v0 < 0:
        return PrimeClass("tameInf", v0)
    v1 = valuation(t0 - 1, q)
    if v1 > 0:
        return PrimeClass("tame1", v1)
    return PrimeClass("good")


def tame_inertia_order(p, t0, q):
    cls = classify_prime(p, t0, q)
    if cls.kind == "wild":
        raise WildPrimeError(f"wild prime: {q} divides N={p.N}, not computable")
    if cls.kind == "good":
        return 1
    point = {"tame0": 0, "tame1": 1, "tameInf": "inf"}[cls.kind]
    return monodromy_order(monodromy(p, point), cls.valuation)


# -- finite hypergeometric sums ---------------------------------------------

class HypergeometricValue(NamedTuple):
    """H_q = numerator / q**qpow with numerator in Z[zeta_N]."""

    numerator: CyclotomicInteger
    qpow: int
    q: int

    def as_fraction(self):
        return CyclotomicFraction(self.numerator, self.q ** self.qpow)


def _check_trace_inputs(p, t0, ctx):
    p.require_generic()
    t0 = Fraction(t0)
    if t0 in (0, 1):
        raise ValueError("t0 must avoid the ramified points 0 and 1")
    q = ctx.q
    if (q - 1) % p.N:
        raise NotSplitError(f"prime not split: N={p.N} does not divide {q}-1")
    if classify_prime(p, t0, q).kind != "good":
        raise RamifiedError(f"q={q} is not a good prime for {p} at t0={t0}")
    return t0


def _exponents(p, ctx):
    Q = ctx.q - 1
    return [int(x * Q) for x in (p.a, p.b, p.c, p.d)]


def _collapsed_sum(ctx, A, B, C, D, t):
    """sum over u of zeta^(A L(u) - C L(1-u) + B L(v) - D L(1-v)) in Z[x]/(x^Q - 1).

    v is the unique solution of u v t = (1-u)(1-v); summing the m-index of the
    defining series by orthogonality leaves exactly these terms (times q-1).
    """
    q = ctx.q
    Q = q - 1
    dl = ctx._dlog
    u = np.arange(2, q, dtype=np.int64)
    den = (u * t + 1 - u) % q
    keep = den != 0
    u = u[keep]
    den = den[keep]
    inv = np.array([pow(int(x), -1, q) for x in den], dtype=np.int64) if len(den) else den
    v = ((1 - u) % q) * inv % q
    e = (A * dl[u] - C * dl[(1 - u) % q] + B * dl[v] - D * dl[(1 - v) % q]) % Q
    return np.bincount(e, minlength=Q).astype(np.int64)


def _cyclic_mul(x, y):
    Q = len(x)
    full = np.convolve(x, y)
    out = full[:Q].copy()
    out[: len(full) - Q] += full[Q:]
    return out


def _conj_group_ring(x):
    return np.concatenate(([x[0]], x[:0:-1]))


def finite_hyp_value(p, t0, ctx):
    """Exact H_q((a,b),(c,d)|t0) as numerator / q**qpow, numerator at level N."""
    t0 = _check_trace_inputs(p, t0, ctx)
    q = ctx.q
    Q = q - 1
    A, B, C, D = _exponents(p, ctx)
    t = ctx.reduce(t0)
    S = _collapsed_sum(ctx, A, B, C, D, t)
    # H = -S / (J(A,-C) J(B,-D)); invert the Jacobi sums through conjugates
    J1 = jacobi_group_ring(ctx, A, -C).astype(np.int64)
    J2 = jacobi_group_ring(ctx, B, -D).astype(np.int64)
    top = _cyclic_mul(_cyclic_mul(S, _conj_group_ring(J1)), _conj_group_ring(J2))
    denom = jacobi_norm(ctx, A, -C) * jacobi_norm(ctx, B, -D)
    x = -CyclotomicInteger.from_group_ring(top, Q)
    qpow = 0
    while denom % q == 0:
        denom //= q
        qpow += 1
    assert denom == 1
    while qpow and all(c % q == 0 for c in x.coeffs):
        x = x.exact_div_int(q)
        qpow -= 1
    try:
        x = change_level(x, p.N)
    except NotInSublevelError as exc:
        raise DescentError(f"descent failure for {p} at q={q}: value not in Z[zeta_{p.N}]") from exc
    return HypergeometricValue(x, qpow, q)


def _frac(x):
    return x - math.floor(x)


def valuation_shift(p, r=1):
    """Stickelberger bound on the q-adic denominator of H_q at the embedding r.

    With the Teichmueller-type character, v(g(m)) = {-m/(q-1)}; the m-th term
    of the series has valuation f(m/(q-1)) - f(0) with f as below.
    """
    a, b, c, d = (mod1(r * x) for x in (p.a, p.b, p.c, p.d))
    f = lambda x: _frac(-x - a) + _frac(x + c) + _frac(-x - b) + _frac(x + d)
    grid = (Fraction(k, 2 * p.N) for k in range(2 * p.N))
    return int(f(Fraction(0)) - min(f(x) for x in grid))


def tate_twist(p):
    """Power of q by which H_q is scaled to give an integral trace.

    This is the smallest Stickelberger shift over the Galois conjugates of the
    parameter.  When all conjugates share the same shift the twisted value is
    integral and still satisfies the Weil bound; otherwise the missing twist is
    a genuine Hecke character and finite_hyp_trace refuses.
    """
    units = [r for r in range(1, p.N + 1) if math.gcd(r, p.N) == 1]
    return min(valuation_shift(p, r) for r in units)


def finite_hyp_trace(p, t0, ctx):
    """Frobenius trace q**w * H_q in Z[zeta_N], w = tate_twist(p)."""
    val = finite_hyp_value(p, t0, ctx)
    w = tate_twist(p)
    if val.qpow > w:
        raise ArithmeticError(
            f"inexact division: H_q for {p} at q={ctx.q} has denominator "
            f"q^{val.qpow}, beyond the Tate twist {w}; use finite_hyp_value")
    return val.numerator * (ctx.q ** (w - val.qpow))


def motive_trace(p, t0, ctx):
    """Trace of Frobenius on the motive in the pinned orientation: conj(H_q).

    With omega(x) congruent to x^((q-1)/N) the Euler-curve identity and the
    transposition formulas hold for the complex conjugate of H_q (that is,
    H_q evaluated with the inverse generator of the character group).
    """
    return finite_hyp_value(p, t0, ctx).as_fraction().conjugate()


def finite_hyp_sum_literal(p, t0, ctx, psi_scale=1):
    """The defining series evaluated term by term with exact Gauss sums.

    Works at level q(q-1); meant as an oracle for small q.  Returns
    (numerator, denominator) with numerator at level q(q-1) and an integer
    denominator.
    """
    t0 = _check_trace_inputs(p, t0, ctx)
    q = ctx.q
    Q = q - 1
    A, B, C, D = _exponents(p, ctx)
    L = q * Q
    lt = ctx.dlog(ctx.reduce(t0))
    g = lambda m: gauss_sum(ctx, m, psi_scale)
    total = CyclotomicInteger.from_int(0, L)
    for m in range(Q):
        term = g(m + A) * g(-m - C) * g(m + B) * g(-m - D)
        total = total + term * change_level(CyclotomicInteger.zeta(Q, m * lt), L)
    den = g(A) * g(-C) * g(B) * g(-D)
    # divide by den: den * conj(den) is a rational integer
    den_conj = den.conjugate()
    dd = (den * den_conj).as_integer()
    num = total * den_conj
    return num, dd * (1 - q)


def finite_hyp_sum_jacobi(p, t0, ctx):
    """The defining series as an explicit m-sum of Jacobi sum products (level q-1)."""
    t0 = _check_trace_inputs(p, t0, ctx)
    q = ctx.q
    Q = q - 1
    A, B, C, D = _exponents(p, ctx)
    lt = ctx.dlog(ctx.reduce(t0))
    S = np.zeros(Q, dtype=np.int64)
    for m in range(Q):
        j1 = jacobi_group_ring(ctx, m + A, -m - C).astype(np.int64)
        j2 = jacobi_group_ring(ctx, m + B, -m - D).astype(np.int64)
        S += np.roll(_cyclic_mul(j1, j2), (m * lt) % Q)
    num = CyclotomicInteger.from_group_ring(S, Q)
    J1 = jacobi_sum(ctx, A, -C)
    J2 = jacobi_sum(ctx, B, -D)
    den = J1 * J2
    dd = (den * den.conjugate()).as_integer()
    return num * den.conjugate(), dd * (1 - q)


# -- boundary (ramified-point) traces ------------------------------------------

def _unit_part(t0, q):
    v = valuation(t0, q)
    return Fraction(t0) / Fraction(q) ** v


def _omega_pow(ctx, x, e):
    """omega(x)^e at level q-1 via varpi^((q-1)/N * e) = varpi^(e') with e' = e (q-1)/N."""
    return CyclotomicInteger.zeta(ctx.q - 1, e * ctx.dlog(ctx.reduce(x)))


def _sign_pow(ctx, m):
    return ctx.varpi_sign(m)


def degenerate_trace_at_zero(p, t0, ctx):
    """Trace at a prime dividing t0 where inertia acts trivially."""
    p.require_generic()
    q = ctx.q
    Q = q - 1
    cls = classify_prime(p, t0, q)
    if cls.kind != "tame0":
        raise ValueError(f"q={q} does not divide t0={t0}")
    if tame_inertia_order(p, t0, q) != 1:
        raise RamifiedError("ramified: no trace")
    tt = _unit_part(t0, q)
    a, b, c, d = (int(x * Q) for x in (p.a, p.b, p.c, p.d))
    term1 = _omega_pow(ctx, tt, d) * jacobi_sum(ctx, d - b, b - c)
    term2 = _omega_pow(ctx, tt, c) * jacobi_sum(ctx, d - c, a - d) * _sign_pow(ctx, b - c)
    # omega(-1)^(N(d-b)) matches the normalization of finite_hyp_trace
    return _descend_or_raise(-(term1 + term2) * _sign_pow(ctx, d - b), p.N)


def degenerate_trace_at_infinity(p, t0, ctx):
    """Trace at a prime in the denominator of t0 where inertia acts trivially."""
    p.require_generic()
    q = ctx.q
    Q = q - 1
    cls = classify_prime(p, t0, q)
    if cls.kind != "tameInf":
        raise ValueError(f"q={q} does not divide the denominator of t0={t0}")
    if tame_inertia_order(p, t0, q) != 1:
        raise RamifiedError("ramified: no trace")
    tt = _unit_part(t0, q)
    a, b, c, d = (int(x * Q) for x in (p.a, p.b, p.c, p.d))
    term1 = _omega_pow(ctx, tt, b) * jacobi_sum(ctx, d - b, a - d)
    term2 = _omega_pow(ctx, tt, a) * jacobi_sum(ctx, a - b, b - c) * _sign_pow(ctx, a - d)
    return _descend_or_raise(-(term1 + term2) * _sign_pow(ctx, d - b), p.N)


def _descend_or_raise(x, N):
    try:
        return change_level(x, N)
    except NotInSublevelError as exc:
        raise DescentError(f"value not in Z[zeta_{N}]") from exc
