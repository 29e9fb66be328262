"""Euler's curve y^N = x^A (1-x)^B (1-tx)^C t^D and its character sums."""
from __future__ import annotations

import math
from dataclasses import dataclass, replace
from fractions import Fraction

import numpy as np

from .cyclotomic import CyclotomicInteger, NotInSublevelError, change_level, galois_apply
from .finite_char import NotSplitError, RamifiedError, jacobi_motive_fraction
from .hgm_core import classify_prime, finite_hyp_value

#: eigenspace of the curve that carries the motive
EIGENSPACE = 1


@dataclass(frozen=True)
class EulerCurve:
    N: int
    A: int
    B: int
    C: int
    D: int
    t0: Fraction | None = None

    def at(self, t0):
        return replace(self, t0=Fraction(t0))


def exponents_from_params(p):
    """A = (d-b)N, B = (b-c)N, C = (a-d)N, D = dN, all reduced mod N."""
    p.require_generic()
    N = p.N
    red = lambda x: int(x * N) % N
    return EulerCurve(N, red(p.d - p.b), red(p.b - p.c), red(p.a - p.d), red(p.d))


def _check(ec, ctx):
    if ec.t0 is None:
        raise ValueError("curve has no specialization point t0")
    q = ctx.q
    if (q - 1) % ec.N:
        raise NotSplitError(f"prime not split: N={ec.N} does not divide {q}-1")
    t = ec.t0
    if t in (0, 1) or any(v % q == 0 for v in (t.numerator, t.denominator, (t - 1).numerator)):
        raise RamifiedError(f"q={q} is not a good prime for t0={t}")
    return ctx.reduce(t)


def _rhs_values(ec, ctx):
    """f(x) for x in F_q as an integer array."""
    q = ctx.q
    t = _check(ec, ctx)
    x = np.arange(q, dtype=object)
    f = [(pow(int(v), ec.A, q) * pow(1 - int(v), ec.B, q) * pow(1 - t * int(v), ec.C, q)
          * pow(t, ec.D, q)) % q for v in x]
    return np.array(f, dtype=np.int64)


def affine_count(ec, ctx):
    """Number of (x, y) in F_q^2 on the curve."""
    q = ctx.q
    f = _rhs_values(ec, ctx)
    N = ec.N
    total = 0
    for v in f:
        if v == 0:
            total += 1
        elif ctx.dlog(int(v)) % N == 0:
            # v is an N-th power and N | q-1, so it has N roots
            total += N
    return total


def affine_count_naive(ec, ctx):
    q = ctx.q
    f = _rhs_values(ec, ctx)
    nth = np.zeros(q, dtype=np.int64)
    for y in range(q):
        nth[pow(y, ec.N, q)] += 1
    return int(sum(nth[v] for v in f))


def eigenspace_char_sum(ec, j, ctx):
    """-sum over x with f(x) != 0 of omega^j(f(x)), exact at level N."""
    if not 0 < j < ec.N:
        raise ValueError(f"j must lie in 1..{ec.N - 1}")
    f = _rhs_values(ec, ctx)
    f = f[f != 0]
    logs = ctx._dlog[f] * j % ec.N
    hist = np.bincount(logs, minlength=ec.N)
    return -CyclotomicInteger.from_group_ring(hist, ec.N)


@dataclass
class TraceFrobReport:
    q: int
    lhs: CyclotomicInteger
    rhs_numerator: CyclotomicInteger
    rhs_denominator: int
    equal: bool
    correction: CyclotomicInteger | None

    def to_json(self):
        return {"q": self.q, "lhs": self.lhs.to_json(),
                "rhs": {"num": self.rhs_numerator.to_json(), "den": self.rhs_denominator},
                "equal": self.equal}


def trace_frob_rhs(p, t0, ctx):
    """(-1)^{d-b} J([-a,-b,c,d],[c-b,d-a]) conj(H_q) as (numerator, denominator).

    (-1)^{d-b} is omega(-1)^{N(d-b)} for the order-N character omega, and the
    hypergeometric factor enters through complex conjugation, which is
    H_q evaluated with the inverse generator of the character group.
    """
    val = finite_hyp_value(p, t0, ctx)
    jn, jd = jacobi_motive_fraction(ctx, [-p.a, -p.b, p.c, p.d], [p.c - p.b, p.d - p.a])
    Q = ctx.q - 1
    sign = ctx.varpi_sign(int((p.d - p.b) * p.N) * (Q // p.N))
    num = change_level(jn, Q) * change_level(val.numerator.conjugate(), Q) * sign
    den = jd * ctx.q ** val.qpow
    g = math.gcd(den, *num.coeffs)
    return num.exact_div_int(g), den // g


def verify_trace_frob(p, t0, ctx, j=EIGENSPACE):
    """Compare the eigenspace character sum with the Jacobi-twisted H_q.

    For j coprime to N the right-hand side is moved by the Galois action.
    Mismatches are returned as data; the difference lhs - rhs is reported when
    the right-hand side is integral.
    """
    ec = exponents_from_params(p).at(t0)
    if math.gcd(j, ec.N) != 1:
        raise ValueError(f"j={j} is not coprime to N={ec.N}")
    lhs = eigenspace_char_sum(ec, j, ctx)
    num, den = trace_frob_rhs(p, t0, ctx)
    try:
        num = change_level(num, ec.N)
    except NotInSublevelError:
        return TraceFrobReport(ctx.q, lhs, num, den, False, None)
    num = galois_apply(num, j)
    equal = lhs * den == num
    correction = None
    if not equal and den == 1:
        correction = lhs - num
    return TraceFrobReport(ctx.q, lhs, num, den, equal, correction)
