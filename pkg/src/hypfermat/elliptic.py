"""Elliptic curves over Q attached to the rational rank-2 hypergeometric motives."""
from __future__ import annotations

import math
from dataclasses import dataclass, field
from fractions import Fraction
from typing import Callable

import numpy as np
from sympy import factorint, legendre_symbol

from .finite_char import get_ctx
from .hgm_core import HgmParameter, classify_prime, finite_hyp_trace, make_parameter, valuation


class SingularCurveError(ValueError):
    pass


class BadReductionError(ValueError):
    pass


def _v(x, p):
    return valuation(x, p)


@dataclass(frozen=True)
class EllipticCurveQ:
    """y^2 + a1 xy + a3 y = x^3 + a2 x^2 + a4 x + a6 with rational coefficients."""

    a1: Fraction
    a2: Fraction
    a3: Fraction
    a4: Fraction
    a6: Fraction

    def __post_init__(self):
        for name in ("a1", "a2", "a3", "a4", "a6"):
            object.__setattr__(self, name, Fraction(getattr(self, name)))
        if self.discriminant == 0:
            raise SingularCurveError(f"singular model {self.ainvs}")

    @property
    def ainvs(self):
        return (self.a1, self.a2, self.a3, self.a4, self.a6)

    @property
    def b_invariants(self):
        a1, a2, a3, a4, a6 = self.ainvs
        b2 = a1 * a1 + 4 * a2
        b4 = 2 * a4 + a1 * a3
        b6 = a3 * a3 + 4 * a6
        b8 = a1 * a1 * a6 + 4 * a2 * a6 - a1 * a3 * a4 + a2 * a3 * a3 - a4 * a4
        return b2, b4, b6, b8

    @property
    def c4(self):
        b2, b4, _, _ = self.b_invariants
        return b2 * b2 - 24 * b4

    @property
    def c6(self):
        b2, b4, b6, _ = self.b_invariants
        return -b2 ** 3 + 36 * b2 * b4 - 216 * b6

    @property
    def discriminant(self):
        b2, b4, b6, b8 = self.b_invariants
        return -b2 * b2 * b8 - 8 * b4 ** 3 - 27 * b6 * b6 + 9 * b2 * b4 * b6

    @property
    def j_invariant(self):
        return self.c4 ** 3 / self.discriminant

    def rst(self, r, s, t):
        """Model after x = x' + r, y = y' + s x' + t."""
        a1, a2, a3, a4, a6 = self.ainvs
        return EllipticCurveQ(
            a1 + 2 * s,
            a2 - s * a1 + 3 * r - s * s,
            a3 + r * a1 + 2 * t,
            a4 - s * a3 + 2 * r * a2 - (t + r * s) * a1 + 3 * r * r - 2 * s * t,
            a6 + r * a4 + r * r * a2 + r ** 3 - t * a3 - t * t - r * t * a1,
        )

    def scale(self, u):
        """Model after x = u^2 x', y = u^3 y' (divides a_i by u^i)."""
        u = Fraction(u)
        return EllipticCurveQ(*(a / u ** i for a, i in zip(self.ainvs, (1, 2, 3, 4, 6))))

    def is_integral(self):
        return all(a.denominator == 1 for a in self.ainvs)

    def integral_model(self):
        u = 1
        dens = [a.denominator for a in self.ainvs]
        primes = set()
        for d in dens:
            primes.update(factorint(d))
        for p in primes:
            k = max(math.ceil(-_v(a, p) / i) for a, i in zip(self.ainvs, (1, 2, 3, 4, 6)) if a)
            u *= p ** max(k, 0)
        return self.scale(Fraction(1, u))

    def to_json(self):
        return {"ainvs": [str(a) for a in self.ainvs], "disc": str(self.discriminant),
                "j": str(self.j_invariant)}

    def __str__(self):
        return "[" + ",".join(str(a) for a in self.ainvs) + "]"


# -- point counting ------------------------------------------------------------

def _reduce(x, p):
    x = Fraction(x)
    return x.numerator * pow(x.denominator, -1, p) % p


def count_points(E, p):
    """Projective points of the reduction of an integral-at-p model."""
    a1, a2, a3, a4, a6 = (_reduce(a, p) for a in E.ainvs)
    if p == 2:
        n = 1
        for x in range(2):
            for y in range(2):
                if (y * y + a1 * x * y + a3 * y - x ** 3 - a2 * x * x - a4 * x - a6) % 2 == 0:
                    n += 1
        return n
    x = np.arange(p, dtype=np.int64)
    b = (a1 * x + a3) % p
    r = (((x * x % p) * x) % p + a2 * (x * x % p) + a4 * x + a6) % p
    disc = (b * b + 4 * r) % p
    chi = np.zeros(p, dtype=np.int64)
    chi[(x[1:] * x[1:]) % p] = 1
    sym = np.where(disc == 0, 0, np.where(chi[disc] == 1, 1, -1))
    return int(1 + p + sym.sum())


def ap(E, p):
    """a_p = p + 1 - #E(F_p) at a prime of good reduction."""
    model = E
    bad = any(Fraction(a).denominator % p == 0 for a in E.ainvs) or _v(E.discriminant, p) > 0
    if bad:
        res = tate(E, p)
        if res.conductor_exponent != 0:
            raise BadReductionError(f"bad reduction at {p}: {res.kodaira}")
        model = res.minimal_model
    return p + 1 - count_points(model, p)


# -- Tate's algorithm ------------------------------------------------------------

@dataclass(frozen=True)
class TateResult:
    conductor_exponent: int
    kodaira: str
    minimal_model: EllipticCurveQ
    disc_valuation: int

    def to_json(self):
        return {"exponent": self.conductor_exponent, "kodaira": self.kodaira,
                "minimal_disc_valuation": self.disc_valuation}


def _local_integral(E, p):
    """Scale so the model is integral at p (other primes untouched)."""
    k = 0
    for a, i in zip(E.ainvs, (1, 2, 3, 4, 6)):
        if a:
            k = max(k, math.ceil(-_v(a, p) / i))
    return E.scale(Fraction(1, p ** k)) if k > 0 else E


def _div(x, p, k):
    """x / p^k reduced mod p, for x integral at p with p^k | x."""
    y = Fraction(x) / p ** k
    return _reduce(y, p)


def _sq_double_root(a, b, c, p):
    """For a X^2 + b X + c mod p (a a unit): the double root, or None if roots are distinct."""
    a, b, c = a % p, b % p, c % p
    if p == 2:
        return c * a % 2 if b == 0 else None
    if (b * b - 4 * a * c) % p:
        return None
    return (-b * pow(2 * a, -1, p)) % p


def _cubic_roots(a, b, c, p):
    """Root multiplicity data of T^3 + a T^2 + b T + c mod p: ('distinct'|'double'|'triple', root)."""
    a, b, c = a % p, b % p, c % p
    if p <= 3:
        roots = [x for x in range(p) if (x ** 3 + a * x * x + b * x + c) % p == 0]
        d1 = [x for x in roots if (3 * x * x + 2 * a * x + b) % p == 0]
        if not d1:
            return ("distinct", None)
        x = d1[0]
        if (a + 3 * x) % p == 0 and (b - 3 * x * x) % p == 0 and (c + x ** 3) % p == 0:
            return ("triple", x)
        return ("double", x)
    disc = (a * a * b * b - 4 * b ** 3 - 4 * a ** 3 * c - 27 * c * c + 18 * a * b * c) % p
    if disc:
        return ("distinct", None)
    if (a * a - 3 * b) % p == 0:
        return ("triple", (-a * pow(3, -1, p)) % p)
    r = (9 * c - a * b) * pow(2 * (a * a - 3 * b), -1, p) % p
    return ("double", r)


def _find_rt_singular(E, p):
    """(r, t) mod p moving the singular point of the reduction to (0, 0)."""
    for r in range(p):
        for t in range(p):
            F = E.rst(r, 0, t)
            if all(Fraction(a).numerator % p == 0 for a in (F.a3, F.a4, F.a6)):
                return r, t
    raise AssertionError("no singular point found")


def _find_st_step6(E, p):
    """(s, t) with p | a1, a2; p^2 | a3, a4; p^3 | a6 after y -> y + s x + t."""
    for s in range(p):
        for t in range(0, p ** 3, p):
            F = E.rst(0, s, t)
            if (_v(F.a1, p) >= 1 and _v(F.a2, p) >= 1 and _v(F.a3, p) >= 2
                    and _v(F.a4, p) >= 2 and _v(F.a6, p) >= 3):
                return s, t
    raise AssertionError("step 6 translation not found")


def tate(E, p):
    """Tate's algorithm at p: conductor exponent, Kodaira symbol, p-minimal model."""
    E = _local_integral(E, p)
    while True:
        n = _v(E.discriminant, p)
        if n == 0:
            return TateResult(0, "I0", E, 0)
        b2, b4, b6, b8 = E.b_invariants
        if p > 3:
            c4, c6 = E.c4, E.c6
            if _reduce(c4, p) == 0:
                r = -_reduce(b2, p) * pow(12, -1, p)
            else:
                r = -_reduce(c6 + b2 * c4, p) * pow(_reduce(12 * c4, p), -1, p)
            r %= p
            t = (-pow(2, -1, p) * _reduce(E.a1 * r + E.a3, p)) % p
        else:
            r, t = _find_rt_singular(E, p)
        E = E.rst(r, 0, t)
        b2, b4, b6, b8 = E.b_invariants
        if _reduce(b2, p) != 0:
            return TateResult(1, f"I{n}", E, n)
        if _v(E.a6, p) < 2:
            return TateResult(n, "II", E, n)
        if _v(b8, p) < 3:
            return TateResult(n - 1, "III", E, n)
        if _v(b6, p) < 3:
            return TateResult(n - 2, "IV", E, n)
        # p | a1, a2; p^2 | a3, a4; p^3 | a6
        if p <= 3:
            s, t = _find_st_step6(E, p)
        else:
            s = (-_reduce(E.a1, p) * pow(2, -1, p)) % p
            t = (-_reduce(E.a3 / p, p) * pow(2, -1, p)) % p * p
        E = E.rst(0, s, t)
        kind, root = _cubic_roots(_div(E.a2, p, 1), _div(E.a4, p, 2), _div(E.a6, p, 3), p)
        if kind == "distinct":
            return TateResult(n - 4, "I0*", E, n)
        if kind == "double":
            E = E.rst(root * p, 0, 0)
            m = 1
            while True:
                k = (m + 1) // 2
                if m % 2:
                    beta = _sq_double_root(1, _div(E.a3, p, k + 1), -_div(E.a6, p, 2 * k + 2), p)
                    if beta is None:
                        return TateResult(n - 4 - m, f"I{m}*", E, n)
                    E = E.rst(0, 0, beta * p ** (k + 1))
                else:
                    alpha = _sq_double_root(_div(E.a2, p, 1), _div(E.a4, p, k + 2),
                                            _div(E.a6, p, 2 * k + 3), p)
                    if alpha is None:
                        return TateResult(n - 4 - m, f"I{m}*", E, n)
                    E = E.rst(alpha * p ** (k + 1), 0, 0)
                m += 1
        # triple root
        E = E.rst(root * p, 0, 0)
        beta = _sq_double_root(1, _div(E.a3, p, 2), -_div(E.a6, p, 4), p)
        if beta is None:
            return TateResult(n - 6, "IV*", E, n)
        E = E.rst(0, 0, beta * p * p)
        if _v(E.a4, p) < 4:
            return TateResult(n - 7, "III*", E, n)
        if _v(E.a6, p) < 6:
            return TateResult(n - 8, "II*", E, n)
        E = E.scale(p)


def tate_conductor_exponent(E, p):
    res = tate(E, p)
    return {"exponent": res.conductor_exponent, "kodaira": res.kodaira}


def conductor(E):
    disc = E.integral_model().discriminant
    N = 1
    for p in factorint(abs(disc.numerator)):
        N *= p ** tate(E, p).conductor_exponent
    return N


# -- the six rational families ---------------------------------------------------

@dataclass(frozen=True)
class RationalFamily:
    tag: str
    parameter: HgmParameter
    model: Callable
    frey: Callable
    disc_formula: Callable
    j_formula: Callable
    exponents: tuple
    fermat: Callable  # (A,B,C,al,be,ga,p) -> bool
    singular: tuple = ()


def _legendre(t):
    # y^2 = x(x-1)(1-tx) in Weierstrass form: x -> -x/t, y -> y/t gives x(x+1)(x+t)
    return EllipticCurveQ(0, 1 + t, 0, t, 0)


def _frey_legendre(A, B, C, al, be, ga, p):
    u, w = C * ga ** p, A * al ** p
    return EllipticCurveQ(0, -(u + w), 0, u * w, 0)


def _frey_t64(A, B, C, al, be, ga, p):
    a = Fraction(4 * 27 * (3 * A * al ** p - 4 * C * ga ** 2), C)
    b = Fraction(-16 * 27 * (9 * A * al ** p - 8 * C * ga ** 2) * ga, C)
    return EllipticCurveQ(0, 0, 0, a, b)


FAMILIES = {
    "legendre": RationalFamily(
        "legendre", make_parameter(Fraction(1, 2), Fraction(1, 2), 1, 1), _legendre,
        _frey_legendre,
        lambda t: 16 * t ** 2 * (t - 1) ** 2,
        lambda t: 256 * (t * t - t + 1) ** 3 / (t ** 2 * (t - 1) ** 2),
        ("p", "p", "p"),
        lambda A, B, C, a, b, c, p: A * a ** p + B * b ** p == C * c ** p),
    "t27": RationalFamily(
        "t27", make_parameter(Fraction(1, 3), Fraction(2, 3), 1, 1),
        lambda t: EllipticCurveQ(1, 0, t / 27, 0, 0),
        lambda A, B, C, al, be, ga, p: EllipticCurveQ(3 * C * ga, 0, A * al ** p * C * C, 0, 0),
        lambda t: -t ** 3 * (t - 1) / Fraction(3 ** 9),
        lambda t: 27 * (8 * t - 9) ** 3 / (t ** 3 * (t - 1)),
        ("p", "p", 3),
        lambda A, B, C, a, b, c, p: A * a ** p + B * b ** p == C * c ** 3),
    "t64": RationalFamily(
        "t64", make_parameter(Fraction(1, 4), Fraction(3, 4), 1, 1),
        lambda t: EllipticCurveQ(1, 0, 0, t / 64, 0),
        _frey_t64,
        lambda t: -t ** 2 * (t - 1) / Fraction(2 ** 12),
        lambda t: 64 * (3 * t - 4) ** 3 / (t ** 2 * (t - 1)),
        ("p", "p", 2),
        lambda A, B, C, a, b, c, p: A * a ** p + B * b ** p == C * c ** 2),
    "t432": RationalFamily(
        "t432", make_parameter(Fraction(1, 6), Fraction(5, 6), 1, 1),
        lambda t: EllipticCurveQ(1, 0, 0, 0, -t / 432),
        lambda A, B, C, al, be, ga, p: EllipticCurveQ(
            0, 0, 0, -27 * C ** 4 * ga ** 2, -54 * (2 * A * al ** p - C * ga ** 3) * C ** 5),
        lambda t: -t * (t - 1) / Fraction(2 ** 4 * 3 ** 3),
        lambda t: -Fraction(2 ** 4 * 3 ** 3) / (t * (t - 1)),
        ("p", "p", 3),
        lambda A, B, C, a, b, c, p: A * a ** p + B * b ** p == C * c ** 3),
    "e2p3": RationalFamily(
        "e2p3", make_parameter(Fraction(1, 3), Fraction(2, 3), Fraction(1, 4), Fraction(3, 4)),
        lambda t: EllipticCurveQ(0, 0, 0, -12 * t, 16 * t * t),
        lambda A, B, C, al, be, ga, p: EllipticCurveQ(
            0, 0, 0, 12 * A * B ** 3 * be, 16 * A * A * B ** 4 * al),
        lambda t: -(2 ** 12) * 27 * t ** 3 * (t - 1),
        lambda t: -Fraction(2 ** 6 * 27) / (t - 1),
        (2, 3, "p"),
        lambda A, B, C, a, b, c, p: A * a ** 2 + B * b ** 3 == C * c ** p),
    "e3p3": RationalFamily(
        "e3p3", make_parameter(Fraction(1, 6), Fraction(5, 6), Fraction(1, 3), Fraction(2, 3)),
        lambda t: EllipticCurveQ(0, 0, 0, -3 * t ** 3, t ** 4 * (t + 1)),
        lambda A, B, C, al, be, ga, p: EllipticCurveQ(
            0, 0, 0, 3 * A ** 3 * B * al * be, A ** 4 * B * (B * be ** 3 - A * al ** 3)),
        lambda t: -16 * 27 * t ** 8 * (t - 1) ** 2,
        lambda t: -256 * 27 * t / (t - 1) ** 2,
        (3, 3, "p"),
        lambda A, B, C, a, b, c, p: A * a ** 3 + B * b ** 3 == C * c ** p),
}


def get_family(tag):
    try:
        return FAMILIES[tag]
    except KeyError:
        raise ValueError(f"unknown family {tag!r}; choose from {sorted(FAMILIES)}") from None


def specialize_family(fam, t0):
    if isinstance(fam, str):
        fam = get_family(fam)
    t0 = Fraction(t0)
    if t0 in (0, 1) or t0 in fam.singular:
        raise SingularCurveError(f"{fam.tag} is singular at t0={t0}")
    return fam.model(t0)


def frey_curve(fam, A, B, C, al, be, ga, p=None):
    """Frey model attached to a putative solution.

    The relation is checked when p is given.  Families whose model involves
    alpha^p or gamma^p need p; the (2,3,p) and (3,3,p) models do not.
    """
    if isinstance(fam, str):
        fam = get_family(fam)
    if p is None:
        if "p" in fam.exponents[:2] or fam.tag in ("legendre",):
            raise ValueError(f"the exponent p is required to build the {fam.tag} model")
    elif not fam.fermat(A, B, C, al, be, ga, p):
        raise ValueError(f"({al},{be},{ga}) does not solve the {fam.tag} equation with p={p}")
    return fam.frey(A, B, C, al, be, ga, p)


# -- conductor at 2 of the Legendre family -----------------------------------------

def legendre_conductor2(t0):
    """Conductor exponent at 2 of y^2 = x(x-1)(1-t0 x), by the closed case table."""
    return legendre_conductor2_branch(t0)[0]


def legendre_conductor2_branch(t0):
    """(exponent, branch label) from the case table."""
    t0 = Fraction(t0)
    if t0 in (0, 1):
        raise ValueError("t0 must avoid 0 and 1")
    v = _v(t0, 2)
    u = t0 / Fraction(2) ** v
    u4 = (u.numerator * pow(u.denominator, -1, 4)) % 4
    if v >= 0:
        if v == 0:
            t4 = u4
            if t4 == 3:
                return 5, "v>=0:2,3mod4"
            return 4, "v>=0:1mod4"
        if v == 1:
            return 5, "v>=0:2,3mod4"
        if v in (2, 3):
            return 3, "v=2,3"
        if v == 4:
            return 0, "v=4"
        return 1, "v>=5"
    if v % 2:
        return 6, "v<0:odd"
    if u4 == 3:
        return 4, "v<0:even,3mod4"
    if v == -2:
        return 3, "v=-2,1mod4"
    if v == -4:
        return 0, "v=-4,1mod4"
    return 1, "v<-4:even,1mod4"


LEGENDRE_CONDUCTOR2_BRANCHES = (
    "v>=0:2,3mod4", "v>=0:1mod4", "v=2,3", "v=4", "v>=5",
    "v<0:odd", "v<0:even,3mod4", "v=-2,1mod4", "v=-4,1mod4", "v<-4:even,1mod4",
)


# -- rational HGM identification -----------------------------------------------------

def _squarefree_kernel(n):
    n = abs(int(n))
    out = 1
    for p, e in factorint(n).items():
        if e % 2:
            out *= p
    return out


def twist_candidates(t0):
    t0 = Fraction(t0)
    base = {1, 2, 3, 6}
    for x in (t0.numerator, t0.denominator, (t0 - 1).numerator):
        k = _squarefree_kernel(x)
        base |= {k, 2 * k // math.gcd(2, k), 3 * k // math.gcd(3, k)}
    cands = []
    for d in sorted(base):
        cands += [d, -d]
    return cands


@dataclass
class RationalHgmReport:
    family: str
    t0: Fraction
    rows: list = field(default_factory=list)
    skipped: list = field(default_factory=list)
    epsilon: int | None = None
    twist: int | None = None

    @property
    def all_equal(self):
        return self.epsilon is not None and bool(self.rows)

    def to_json(self):
        return {"family": self.family, "t": str(self.t0), "epsilon": self.epsilon,
                "twist": self.twist, "rows": self.rows, "skipped": self.skipped,
                "all_equal": self.all_equal}


def verify_rational_hgm(fam, t0, primes):
    """Match the twisted trace q^w H_q with eps * chi_d(q) * a_q for one (eps, d)."""
    if isinstance(fam, str):
        fam = get_family(fam)
    t0 = Fraction(t0)
    E = specialize_family(fam, t0)
    disc = E.discriminant
    rep = RationalHgmReport(fam.tag, t0)
    data = []
    for q in primes:
        if q < 5 or (q - 1) % fam.parameter.N:
            rep.skipped.append({"q": q, "reason": "not split"})
            continue
        if classify_prime(fam.parameter, t0, q).kind != "good" or _v(disc, q) != 0 \
                or any(Fraction(a).denominator % q == 0 for a in E.ainvs):
            rep.skipped.append({"q": q, "reason": "bad prime"})
            continue
        h = finite_hyp_trace(fam.parameter, t0, get_ctx(q)).as_integer()
        a = ap(E, q)
        data.append((q, h, a))
    for d in twist_candidates(t0):
        for eps in (1, -1):
            if all(h == eps * legendre_symbol(d % q, q) * a for q, h, a in data if d % q):
                rep.epsilon, rep.twist = eps, d
                break
        if rep.epsilon is not None:
            break
    for q, h, a in data:
        chi = legendre_symbol(rep.twist % q, q) if rep.twist else None
        rep.rows.append({"q": q, "trace": h, "ap": a,
                         "equal": rep.epsilon is not None and h == rep.epsilon * chi * a})
    return rep
