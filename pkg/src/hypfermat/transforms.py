"""Transpositions of the ramification points and twisted motives."""
from __future__ import annotations

import math
from dataclasses import dataclass, field
from fractions import Fraction

from .cyclotomic import CyclotomicFraction
from .finite_char import (NotSplitError, get_ctx, jacobi_motive_fraction, twist_char_eta,
                          twist_char_theta)
from .hgm_core import (HgmParameter, NonGenericError, classify_prime, make_parameter,
                       mod1, motive_trace)

TRANSPOSITIONS = ("12", "13", "23")


def _moebius(g, t):
    t = Fraction(t)
    if g == "12":
        return 1 - t
    if g == "13":
        return 1 / t
    if g == "23":
        return t / (t - 1)
    raise ValueError(f"unknown transposition {g!r}")


@dataclass(frozen=True)
class TwistedMotive:
    """sign * J(prefactor)**jacobi_power * HGM(base) (x) theta_alpha (x) eta_beta.

    sign_exponent x stands for omega(-1)^(N x), i.e. (-1)^((q-1) x) at q.
    """

    base: HgmParameter
    theta_exponent: Fraction = Fraction(0)
    eta_exponent: Fraction = Fraction(0)
    jacobi_prefactor: tuple | None = None
    jacobi_power: int = 1
    sign_exponent: Fraction = Fraction(0)

    @property
    def level(self):
        dens = [self.base.N, self.theta_exponent.denominator, self.eta_exponent.denominator,
                self.sign_exponent.denominator]
        if self.jacobi_prefactor:
            dens += [Fraction(x).denominator for lst in self.jacobi_prefactor for x in lst]
        return math.lcm(*dens)

    def to_json(self):
        return {
            "base": self.base.to_json(),
            "theta": str(self.theta_exponent),
            "eta": str(self.eta_exponent),
            "jacobi": None if self.jacobi_prefactor is None else
            [[str(x) for x in lst] for lst in self.jacobi_prefactor],
            "jacobi_power": self.jacobi_power,
            "sign": str(self.sign_exponent),
        }


def s3_transform(p, g):
    """Right-hand side of the transposition formula for g in {12, 13, 23}.

    The left-hand side is the motive of p at (g . t).
    """
    g = str(g).strip("()")
    p.require_generic()
    a, b, c, d = p.a, p.b, p.c, p.d
    if g == "12":
        base = make_parameter(a, b, a + b - c, d)
        tm = TwistedMotive(base, theta_exponent=mod1(-d), eta_exponent=mod1(d),
                           jacobi_prefactor=((c, a - c), (c - b, a + b - c)),
                           jacobi_power=-1, sign_exponent=d - b)
    elif g == "13":
        tm = TwistedMotive(make_parameter(-c, -d, -a, -b))
    elif g == "23":
        base = make_parameter(a, c + d - b, c, d)
        tm = TwistedMotive(base, eta_exponent=mod1(-a),
                           jacobi_prefactor=((b - d, -b), (c - b, b - c - d)),
                           jacobi_power=-1, sign_exponent=c)
    else:
        raise ValueError(f"unknown transposition {g!r}")
    if not tm.base.generic:
        raise NonGenericError(f"transformed parameter {tm.base} is not generic")
    return tm


def twisted_trace(tm, t0, ctx):
    """Exact trace at q of a TwistedMotive, as a CyclotomicFraction."""
    q = ctx.q
    if (q - 1) % tm.level:
        raise NotSplitError(f"prime not split: {tm.level} does not divide {q}-1")
    val = motive_trace(tm.base, t0, ctx)
    if tm.jacobi_prefactor is not None:
        top, bottom = tm.jacobi_prefactor
        jn, jd = jacobi_motive_fraction(ctx, list(top), list(bottom))
        val = val * CyclotomicFraction(jn, jd) ** tm.jacobi_power
    if tm.theta_exponent:
        val = val * twist_char_theta(ctx, tm.theta_exponent, t0)
    if tm.eta_exponent:
        val = val * twist_char_eta(ctx, tm.eta_exponent, t0)
    k = tm.sign_exponent * (q - 1)
    if k.denominator != 1:
        raise ValueError("sign exponent incompatible with q")
    if int(k) % 2:
        val = -val
    return val


@dataclass
class S3Report:
    transposition: str
    parameter: HgmParameter
    t0: Fraction
    rows: list = field(default_factory=list)
    skipped: list = field(default_factory=list)

    @property
    def all_equal(self):
        return bool(self.rows) and all(r["equal"] for r in self.rows)

    def to_json(self):
        return {"case": self.transposition, "params": str(self.parameter), "t": str(self.t0),
                "rows": self.rows, "skipped": self.skipped, "all_equal": self.all_equal}


def verify_s3(p, g, t0, primes):
    """Compare both sides of a transposition formula prime by prime."""
    g = str(g).strip("()")
    t0 = Fraction(t0)
    if t0 in (0, 1) or (g == "13" and t0 == -1):
        raise ValueError(f"t0={t0} is excluded for this transposition")
    tm = s3_transform(p, g)
    lhs_t = _moebius(g, t0)
    if lhs_t in (0, 1):
        raise ValueError(f"t0={t0} is excluded: ramified under ({g})")
    rep = S3Report(g, p, t0)
    for q in primes:
        reason = _skip_reason(p, tm, lhs_t, t0, q)
        if reason:
            rep.skipped.append({"q": q, "reason": reason})
            continue
        ctx = get_ctx(q)
        lhs = motive_trace(p, lhs_t, ctx)
        rhs = twisted_trace(tm, t0, ctx)
        rep.rows.append({"q": q, "lhs": lhs.to_json(), "rhs": rhs.to_json(), "equal": lhs == rhs})
    return rep


def _skip_reason(p, tm, lhs_t, t0, q):
    if (q - 1) % tm.level or (q - 1) % p.N:
        return "not split"
    if classify_prime(p, lhs_t, q).kind != "good" or classify_prime(tm.base, t0, q).kind != "good":
        return "bad prime"
    if Fraction(1 - t0).numerator % q == 0:
        return "bad prime"
    return None
