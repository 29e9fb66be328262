"""Congruences between hypergeometric motives modulo primes above p."""
from __future__ import annotations

import math
from dataclasses import dataclass, field
from fractions import Fraction
from itertools import product

from .cyclotomic import change_level, prime_ideal_reduction, reduce_mod_prime
from .finite_char import get_ctx
from .hgm_core import HgmParameter, classify_prime, finite_hyp_value, make_parameter, mod1



def _is_power_of(n, p):
    while n % p == 0:
        n //= p
    return n == 1


def sim_p(x, y, p):
    """x ~_p y: the denominator of x - y is a power of p (p^0 included)."""
    return _is_power_of(Fraction(Fraction(x) - Fraction(y)).denominator, p)


@dataclass(frozen=True)
class CongruenceClaim:
    left: HgmParameter
    right: HgmParameter
    p: int
    pairing: tuple  # (swap_top, swap_bottom) applied to the right parameter

    def to_json(self):
        return {"left": str(self.left), "right": str(self.right), "p": self.p,
                "pairing": {"swap_top": self.pairing[0], "swap_bottom": self.pairing[1]}}


def params_congruent(left, right, p):
    """Search both orderings inside each pair; return the witnessing claim or None."""
    for st, sb in product((False, True), repeat=2):
        rt = right.top[::-1] if st else right.top
        rb = right.bottom[::-1] if sb else right.bottom
        if (all(sim_p(x, y, p) for x, y in zip(left.top, rt))
                and all(sim_p(x, y, p) for x, y in zip(left.bottom, rb))):
            return CongruenceClaim(left, right, p, (st, sb))
    return None


def _reduce_value(val, red, level):
    """Image of a HypergeometricValue in the residue field (f = 1 fields return ints)."""
    F = red.field
    x = reduce_mod_prime(change_level(val.numerator, level), red)
    inv = pow(val.q ** val.qpow, -1, red.p)
    if red.f == 1:
        return x * inv % red.p
    return F.mul(x, F.elem([inv]))


@dataclass
class CongruenceReport:
    claim: CongruenceClaim
    t0: Fraction
    rows: list = field(default_factory=list)
    skipped: list = field(default_factory=list)

    @property
    def all_equal(self):
        return bool(self.rows) and all(r["equal"] for r in self.rows)

    def to_json(self):
        return {"claim": self.claim.to_json(), "t": str(self.t0), "rows": self.rows,
                "skipped": self.skipped, "all_equal": self.all_equal}


def _residue_json(x):
    return x if isinstance(x, int) else list(x)


def verify_congruence(claim, t0, primes):
    """Reduce both traces at a prime above claim.p of Q(zeta_L), L the common level."""
    t0 = Fraction(t0)
    L = math.lcm(claim.left.N, claim.right.N)
    red = prime_ideal_reduction(L, claim.p)
    rep = CongruenceReport(claim, t0)
    for q in primes:
        if q == claim.p or (q - 1) % L:
            rep.skipped.append({"q": q, "reason": "not split"})
            continue
        if any(classify_prime(x, t0, q).kind != "good" for x in (claim.left, claim.right)):
            rep.skipped.append({"q": q, "reason": "bad prime"})
            continue
        ctx = get_ctx(q)
        lv = _reduce_value(finite_hyp_value(claim.left, t0, ctx), red, L)
        rv = _reduce_value(finite_hyp_value(claim.right, t0, ctx), red, L)
        rep.rows.append({"q": q, "left": _residue_json(lv), "right": _residue_json(rv),
                         "equal": lv == rv})
    return rep


def eisenstein_check(param, p, t0, primes):
    """H_q congruent to 1 + q modulo a prime above p when param ~_p (1,1),(1,1)."""
    trivial = make_parameter(0, 0, 0, 0)
    if not all(sim_p(x, 0, p) for x in (*param.top, *param.bottom)):
        raise ValueError(f"{param} is not ~_{p} to (1,1),(1,1)")
    t0 = Fraction(t0)
    red = prime_ideal_reduction(param.N, p)
    rep = CongruenceReport(CongruenceClaim(param, trivial, p, (False, False)), t0)
    for q in primes:
        if q == p or (q - 1) % param.N:
            rep.skipped.append({"q": q, "reason": "not split"})
            continue
        if classify_prime(param, t0, q).kind != "good":
            rep.skipped.append({"q": q, "reason": "bad prime"})
            continue
        v = _reduce_value(finite_hyp_value(param, t0, get_ctx(q)), red, param.N)
        e = (1 + q) % p
        if red.f > 1:
            e = red.field.elem([e])
        rep.rows.append({"q": q, "trace": _residue_json(v), "expected": _residue_json(e),
                         "equal": v == e})
    return rep
