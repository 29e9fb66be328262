"""Hyperelliptic models realizing the (k/N, -k/N),(1,1) motives, and their point counts."""
from __future__ import annotations

import math
from dataclasses import dataclass, field
from fractions import Fraction

import numpy as np
from sympy import Poly, Rational, divisors, isprime, legendre_symbol, symbols, totient
from sympy.polys.domains import ZZ
from sympy.polys.galoistools import gf_from_int_poly, gf_gcd, gf_pow_mod, gf_sub, gf_degree, gf_diff

from .cyclotomic import galois_apply
from .finite_char import get_ctx
from .hgm_core import classify_prime, finite_hyp_trace, make_parameter

_X = symbols("x")

MODELS = ("CprimeN", "DN", "DprimeN", "DN_even", "quotient_even")


class BadReductionError(ValueError):
    pass


@dataclass(frozen=True)
class IntPoly:
    """Integer polynomial; coeffs[i] is the coefficient of x^i."""

    coeffs: tuple

    def __post_init__(self):
        c = [int(v) for v in self.coeffs]
        while len(c) > 1 and c[-1] == 0:
            c.pop()
        object.__setattr__(self, "coeffs", tuple(c))

    @property
    def degree(self):
        return -1 if self.coeffs == (0,) else len(self.coeffs) - 1

    @property
    def leading(self):
        return self.coeffs[-1]

    @classmethod
    def from_sympy(cls, p):
        return cls(tuple(int(v) for v in reversed(Poly(p, _X).all_coeffs())))

    def to_sympy(self):
        return Poly(list(reversed(self.coeffs)), _X, domain=ZZ)

    def __call__(self, x):
        v = 0
        for c in reversed(self.coeffs):
            v = v * x + c
        return v

    def __str__(self):
        return str(self.to_sympy().as_expr())


def _dickson(n):
    """D_n with D_n(u + 1/u) = u^n + u^-n."""
    a, b = Poly(2, _X, domain=ZZ), Poly(_X, _X, domain=ZZ)
    if n == 0:
        return a
    for _ in range(n - 1):
        a, b = b, Poly(_X, _X, domain=ZZ) * b - a
    return b


def _g_poly(M):
    """Monic g whose roots are xi + 1/xi over xi^M = -1, xi != -1."""
    h = _dickson(M) + 2
    if M % 2:
        h, r = h.div(Poly(_X + 2, _X, domain=ZZ))
        assert r.is_zero
    # every root of h is double
    g = h.exquo(h.gcd(h.diff(_X)))
    return g


def build_g(N, variant="odd_N"):
    if variant == "odd_N":
        if N % 2 == 0:
            raise ValueError("odd_N needs N odd")
        return IntPoly.from_sympy(_g_poly(N))
    if variant == "even_half":
        if N % 2:
            raise ValueError("even_half needs N even")
        return IntPoly.from_sympy(_g_poly(N // 2))
    raise ValueError(f"unknown variant {variant!r}")


def g_degree_formula(N, variant="odd_N"):
    if variant == "odd_N":
        return (N - 1) // 2
    return (N // 2 - 1) // 2 if N % 4 else N // 4


@dataclass(frozen=True)
class HyperCurve:
    """y^2 = h(x); h is scaled by a square to make it integral."""

    h: IntPoly
    name: str = ""

    @property
    def genus(self):
        d = self.h.degree
        return (d - 1) // 2 if d % 2 else (d - 2) // 2

    def to_json(self):
        return {"name": self.name, "h": list(self.h.coeffs), "genus": self.genus}


def _clear(expr):
    p = Poly(expr, _X)
    den = 1
    for c in p.all_coeffs():
        den = math.lcm(den, int(Fraction(str(c)).denominator))
    return IntPoly.from_sympy(Poly(expr * den * den, _X))


def curve_model(N, a, which):
    a = Fraction(a)
    if a in (2, -2):
        raise ValueError("a must differ from 2 and -2")
    ar = Rational(a.numerator, a.denominator)
    x = _X
    if which == "CprimeN":
        e = x ** (2 * N) + ar * x ** N + 1
    elif which in ("DN", "DprimeN"):
        if N % 2 == 0:
            raise ValueError(f"{which} needs N odd")
        gg = _g_poly(N).as_expr().subs(x, x ** 2 - 2)
        e = (x + 2 if which == "DN" else x - 2) * (x * gg + ar)
    elif which == "DN_even":
        if N % 2:
            raise ValueError("DN_even needs N even")
        e = x * (x ** N + ar * x ** (N // 2) + 1)
    elif which == "quotient_even":
        if N % 2:
            raise ValueError("quotient_even needs N even")
        gg = _g_poly(N // 2).as_expr().subs(x, x ** 2 - 2)
        e = x * gg + ar if (N // 2) % 2 else (x + 2) * (x * gg + ar)
    else:
        raise ValueError(f"unknown model {which!r}; choose from {MODELS}")
    return HyperCurve(_clear(e), f"{which}(N={N}, a={a})")


# -- point counting ---------------------------------------------------------------

def _good_at(c, ell):
    if ell == 2 or not isprime(ell):
        raise BadReductionError(f"{ell} is not an odd prime")
    if c.h.leading % ell == 0:
        raise BadReductionError(f"bad reduction at {ell}: leading coefficient vanishes")
    f = gf_from_int_poly(list(reversed(c.h.coeffs)), ell)
    if gf_degree(gf_gcd(f, gf_diff(f, ell, ZZ), ell, ZZ)) > 0:
        raise BadReductionError(f"bad reduction at {ell}: h is not squarefree mod {ell}")


def _infinity_points(c, ell):
    if c.h.degree % 2:
        return 1
    return 2 if legendre_symbol(c.h.leading % ell, ell) == 1 else 0


def hyper_count(c, ell):
    """Points of the smooth projective model over F_ell."""
    _good_at(c, ell)
    xs = np.arange(ell, dtype=np.int64)
    v = np.zeros(ell, dtype=np.int64)
    for coef in reversed(c.h.coeffs):
        v = (v * xs + coef % ell) % ell
    sq = np.zeros(ell, dtype=bool)
    sq[(xs * xs) % ell] = True
    affine = int(np.where(v == 0, 1, np.where(sq[v], 2, 0)).sum())
    return affine + _infinity_points(c, ell)


def hyper_count_by_y(c, ell):
    """Same count, solving for x at each y by root counting over F_ell."""
    _good_at(c, ell)
    f = gf_from_int_poly(list(reversed(c.h.coeffs)), ell)
    total = 0
    for y in range(ell):
        hy = gf_sub(f, [y * y % ell], ell, ZZ)
        r = gf_pow_mod([1, 0], ell, hy, ell, ZZ)
        r = gf_sub(r, [1, 0], ell, ZZ)
        total += gf_degree(gf_gcd(hy, r, ell, ZZ))
    return total + _infinity_points(c, ell)


def frobenius_trace(c, ell):
    return ell + 1 - hyper_count(c, ell)


# -- new parts ----------------------------------------------------------------------

def _old_divisors(N, parity):
    if parity == "odd":
        return [d for d in divisors(N) if 1 < d < N]
    return [d for d in divisors(N) if d < N and (N // d) % 2 == 1]


def _genus(N, parity):
    return (N - 1) // 2 if parity == "odd" else N // 2


def newpart_dim(N, parity="odd"):
    """Genus of D_N minus the old contributions of its divisors."""
    if N < 2:
        raise ValueError("N must be at least 2")
    if parity == "odd" and N % 2 == 0 or parity == "even" and N % 2:
        raise ValueError(f"N={N} does not have parity {parity}")
    return _genus(N, parity) - sum(newpart_dim(d, parity) for d in _old_divisors(N, parity))


def expected_newpart_dim(N):
    phi = int(totient(N))
    return phi // 2 if N % 2 else phi


def new_trace(N, a, ell, parity="odd"):
    """Frobenius trace on the new part of Jac(D_N)."""
    model = "DN" if parity == "odd" else "DN_even"
    t = frobenius_trace(curve_model(N, a, model), ell)
    return t - sum(new_trace(d, a, ell, parity) for d in _old_divisors(N, parity))


def hgm_orbit_sum(N, t0, ell):
    """Sum of finite_hyp_trace((k/N,-k/N),(1,1)|t0) over k in (Z/N)^x / {+-1}."""
    p = make_parameter(Fraction(1, N), Fraction(-1, N), 1, 1)
    h = finite_hyp_trace(p, t0, get_ctx(ell))
    reps = [k for k in range(1, N // 2 + 1) if math.gcd(k, N) == 1] if N > 2 else [1]
    total = None
    for k in reps:
        v = galois_apply(h, k)
        total = v if total is None else total + v
    out = total.as_integer()
    if out is None:
        raise ArithmeticError("orbit sum is not rational")
    return out


# -- verification -----------------------------------------------------------------

TWIST_CANDIDATES = (1, -1, 2, -2)


@dataclass
class AppendixReport:
    N: int
    t0: Fraction
    model: str
    rows: list = field(default_factory=list)
    skipped: list = field(default_factory=list)
    twist: int | None = None

    @property
    def all_equal(self):
        return self.twist is not None and bool(self.rows) and all(r["equal"] for r in self.rows)

    def to_json(self):
        return {"N": self.N, "t": str(self.t0), "model": self.model, "twist": self.twist,
                "rows": self.rows, "skipped": self.skipped, "all_equal": self.all_equal}


def _collect(N, t0, primes, curve_trace, rep):
    p = make_parameter(Fraction(1, N), Fraction(-1, N), 1, 1)
    data = []
    for ell in primes:
        if (ell - 1) % N or N % ell == 0:
            rep.skipped.append({"ell": ell, "reason": "not split"})
            continue
        try:
            if classify_prime(p, t0, ell).kind != "good":
                rep.skipped.append({"ell": ell, "reason": "bad for the parameter"})
                continue
            lhs = curve_trace(ell)
        except BadReductionError as e:
            rep.skipped.append({"ell": ell, "reason": str(e)})
            continue
        data.append((ell, lhs, hgm_orbit_sum(N, t0, ell)))
    for d in TWIST_CANDIDATES:
        if all(lhs == legendre_symbol(d % ell, ell) * rhs for ell, lhs, rhs in data):
            rep.twist = d
            break
    for ell, lhs, rhs in data:
        chi = legendre_symbol(rep.twist % ell, ell) if rep.twist is not None else 0
        rep.rows.append({"ell": ell, "curve_trace": lhs, "hgm_sum": rhs,
                         "equal": rep.twist is not None and lhs == chi * rhs})
    return rep


def verify_appendix(N, t0, primes):
    """New-part trace of D_N at a = 2(1 - 2 t0) against the HGM orbit sum (N odd)."""
    if N % 2 == 0:
        raise ValueError("verify_appendix needs N odd; use verify_even_quotient")
    t0 = Fraction(t0)
    a = 2 * (1 - 2 * t0)
    rep = AppendixReport(N, t0, "DN")
    return _collect(N, t0, primes, lambda ell: new_trace(N, a, ell, "odd"), rep)


def verify_even_quotient(N, t0, primes):
    """Trace of the iota-quotient of D_N at a = 2 - 4 t0 against the orbit sum (N even)."""
    if N % 2:
        raise ValueError("verify_even_quotient needs N even")
    t0 = Fraction(t0)
    a = 2 - 4 * t0
    c = curve_model(N, a, "quotient_even")
    rep = AppendixReport(N, t0, "quotient_even")
    return _collect(N, t0, primes, lambda ell: frobenius_trace(c, ell), rep)


# -- involutions on C'_N ---------------------------------------------------------

def _cprime_points(N, a, ell):
    """Affine points (0, x, y) and the points (1, 0, v) over u = 1/x = 0."""
    a = a.numerator * pow(a.denominator, -1, ell) % ell
    pts = []
    roots = {}
    for y in range(ell):
        roots.setdefault(y * y % ell, []).append(y)
    for x in range(ell):
        v = (pow(x, 2 * N, ell) + a * pow(x, N, ell) + 1) % ell
        for y in roots.get(v, ()):
            pts.append((0, x, y))
    for v in roots.get(1, ()):
        pts.append((1, 0, v))
    return pts


def _normalize(pt, N, ell):
    chart, x, y = pt
    if chart == 1 and x != 0:
        xi = pow(x, -1, ell)
        return (0, xi, y * pow(xi, N, ell) % ell)
    return pt


def _iota(pt, N, ell):
    # affine (x, y) and chart-at-infinity (u, v) = (x, y) are exchanged
    chart, x, y = pt
    return _normalize((1 - chart, x, y), N, ell)


def _tau(pt, N, ell):
    chart, x, y = pt
    return (chart, x, (-y) % ell)


def _sigma(pt, N, ell):
    chart, x, y = pt
    return (chart, (-x) % ell, y)


def _zeta(pt, z, N, ell):
    chart, x, y = pt
    if chart == 0:
        return (0, z * x % ell, y)
    return (1, pow(z, -1, ell) * x % ell, y)


def verify_involutions(N, a, ell):
    a = Fraction(a)
    c = curve_model(N, a, "CprimeN")
    _good_at(c, ell)
    if (ell - 1) % N:
        raise ValueError(f"need ell = 1 mod N for the root-of-unity action, got {ell}")
    pts = _cprime_points(N, a, ell)
    S = set(pts)
    z = get_ctx(ell).pinned_root(N)
    zi = pow(z, -1, ell)
    io = lambda P: _iota(P, N, ell)
    ta = lambda P: _tau(P, N, ell)

    def permutes(f):
        return {f(P) for P in pts} == S

    out = {
        "N": N, "a": str(a), "ell": ell, "points": len(pts),
        "count_matches_model": len(pts) == hyper_count(c, ell),
        "iota_permutes": permutes(io),
        "tau_permutes": permutes(ta),
        "iota_squared_identity": all(io(io(P)) == P for P in pts),
        "tau_iota_commute": all(ta(io(P)) == io(ta(P)) for P in pts),
        "zeta_iota_relation": all(_zeta(io(P), z, N, ell) == io(_zeta(P, zi, N, ell)) for P in pts),
    }
    if N % 2 == 0:
        sg = lambda P: _sigma(P, N, ell)
        out["sigma_permutes"] = permutes(sg)
        out["sigma_commutes"] = all(sg(io(P)) == io(sg(P)) and sg(ta(P)) == ta(sg(P)) for P in pts)
    out["all_ok"] = all(v for k, v in out.items() if isinstance(v, bool))
    return out
