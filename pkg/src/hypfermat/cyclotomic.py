"""Exact arithmetic in the cyclotomic rings Z[zeta_M].

Elements are integer coefficient vectors in the power basis
``1, zeta, ..., zeta^(phi(M)-1)``.  Products are formed in the group ring
Z[x]/(x^M - 1) and then reduced modulo the M-th cyclotomic polynomial through
a precomputed reduction matrix, so every operation stays in integers.
"""
from __future__ import annotations

import json
import math
from dataclasses import dataclass
from fractions import Fraction
from functools import lru_cache

import numpy as np
from mpmath import iv
from sympy import factorint, totient

_INT64_SAFE = 2**62


class LevelMismatchError(ValueError):
    pass


class NotInSublevelError(ValueError):
    def __init__(self, msg, residual=None):
        super().__init__(msg)
        self.residual = residual


def euler_phi(n):
    return int(totient(n))


@lru_cache(maxsize=None)
def cyclotomic_poly(M):
    """Coefficients (low to high) of Phi_M, by the Moebius product of x^d - 1."""
    num = [1]
    den = [1]
    for d in _divisors(M):
        mu = _moebius(M // d)
        if mu == 0:
            continue
        factor = [-1] + [0] * (d - 1) + [1]
        if mu == 1:
            num = _polymul(num, factor)
        else:
            den = _polymul(den, factor)
    quot, rem = _polydivmod(num, den)
    assert not any(rem)
    return tuple(quot)


@lru_cache(maxsize=None)
def _reduction_matrix(M):
    """Row i holds the power-basis coordinates of zeta_M^i, 0 <= i < M."""
    phi_poly = cyclotomic_poly(M)
    n = len(phi_poly) - 1
    rows = np.zeros((M, n), dtype=object)
    cur = [0] * n
    if n:
        cur[0] = 1
    for i in range(M):
        if n:
            rows[i] = cur
        # multiply cur by x, reduce by the monic Phi_M
        top = cur[-1] if n else 0
        cur = [0] + cur[:-1] if n else []
        if top:
            for j in range(n):
                cur[j] -= top * phi_poly[j]
    small = rows.astype(np.int64) if n else np.zeros((M, 0), dtype=np.int64)
    return small, int(np.abs(small).max()) if n else 0


def reduce_group_ring(vec, M):
    """Map a vector indexed by Z/M (coefficient of zeta^i) to power-basis coords."""
    R, rmax = _reduction_matrix(M)
    vec = np.asarray(vec)
    if vec.dtype != object:
        bound = int(np.abs(vec).max()) if vec.size else 0
        if bound * M * max(rmax, 1) < _INT64_SAFE:
            return tuple(int(c) for c in vec.astype(np.int64) @ R)
    v = np.array([int(c) for c in vec], dtype=object)
    return tuple(int(c) for c in v.dot(R.astype(object)))


@dataclass(frozen=True)
class CyclotomicInteger:
    level: int
    coeffs: tuple

    def __post_init__(self):
        if self.level < 1:
            raise ValueError("level must be positive")
        coeffs = tuple(int(c) for c in self.coeffs)
        if len(coeffs) != euler_phi(self.level):
            raise ValueError(
                f"level {self.level} needs {euler_phi(self.level)} coefficients, got {len(coeffs)}")
        object.__setattr__(self, "coeffs", coeffs)

    # -- constructors -------------------------------------------------
    @classmethod
    def from_int(cls, n, level=1):
        c = [0] * euler_phi(level)
        c[0] = int(n)
        return cls(level, tuple(c))

    @classmethod
    def zeta(cls, level, power=1):
        """zeta_level ** power."""
        R, _ = _reduction_matrix(level)
        return cls(level, tuple(int(c) for c in R[power % level]))

    @classmethod
    def from_group_ring(cls, vec, level):
        return cls(level, reduce_group_ring(vec, level))

    @classmethod
    def from_exponents(cls, exponents, level):
        """Sum of zeta_level**e over an iterable of exponents (with repeats)."""
        counts = np.bincount(np.asarray(list(exponents), dtype=np.int64) % level,
                             minlength=level)
        return cls.from_group_ring(counts, level)

    # -- basic predicates ---------------------------------------------
    def is_zero(self):
        return not any(self.coeffs)

    def as_integer(self):
        """The rational integer this element equals, or None."""
        if any(self.coeffs[1:]):
            return None
        return self.coeffs[0]

    def group_ring(self):
        v = np.zeros(self.level, dtype=object)
        v[: len(self.coeffs)] = self.coeffs
        return v

    # -- ring arithmetic ------------------------------------------------
    def _check(self, other):
        if isinstance(other, int):
            return CyclotomicInteger.from_int(other, self.level)
        if not isinstance(other, CyclotomicInteger):
            return NotImplemented
        if other.level != self.level:
            raise LevelMismatchError(
                f"levels differ ({self.level} vs {other.level}); use change_level first")
        return other

    def __add__(self, other):
        other = self._check(other)
        if other is NotImplemented:
            return other
        return CyclotomicInteger(self.level, tuple(a + b for a, b in zip(self.coeffs, other.coeffs)))

    __radd__ = __add__

    def __neg__(self):
        return CyclotomicInteger(self.level, tuple(-a for a in self.coeffs))

    def __sub__(self, other):
        other = self._check(other)
        if other is NotImplemented:
            return other
        return CyclotomicInteger(self.level, tuple(a - b for a, b in zip(self.coeffs, other.coeffs)))

    def __rsub__(self, other):
        return (-self) + other

    def __mul__(self, other):
        if isinstance(other, int):
            return CyclotomicInteger(self.level, tuple(other * a for a in self.coeffs))
        other = self._check(other)
        if other is NotImplemented:
            return other
        M = self.level
        prod = _polymul(self.coeffs, other.coeffs)
        vec = [0] * M
        for i, c in enumerate(prod):
            vec[i % M] += c
        return CyclotomicInteger.from_group_ring(np.array(vec, dtype=object), M)

    __rmul__ = __mul__

    def __pow__(self, n):
        if n < 0:
            raise ValueError("negative powers are not ring operations")
        result = CyclotomicInteger.from_int(1, self.level)
        base = self
        while n:
            if n & 1:
                result = result * base
            base = base * base
            n >>= 1
        return result

    def exact_div_int(self, n):
        """Divide every coordinate by the integer n; raises if inexact."""
        out = []
        for c in self.coeffs:
            qt, r = divmod(c, n)
            if r:
                raise ArithmeticError(f"{self} is not divisible by {n}")
            out.append(qt)
        return CyclotomicInteger(self.level, tuple(out))

    def conjugate(self):
        return galois_apply(self, -1)

    def norm(self):
        """Absolute norm down to Z (product over all Galois conjugates)."""
        M = self.level
        result = CyclotomicInteger.from_int(1, M)
        for r in range(1, M + 1):
            if math.gcd(r, M) == 1:
                result = result * galois_apply(self, r)
        n = result.as_integer()
        assert n is not None
        return n

    def __repr__(self):
        return f"CyclotomicInteger(level={self.level}, coeffs={list(self.coeffs)})"

    # -- serialization --------------------------------------------------
    def to_json(self):
        return {"level": self.level,
                "coeffs": [c if abs(c) < 2**53 else str(c) for c in self.coeffs]}

    @classmethod
    def from_json(cls, obj):
        if isinstance(obj, str):
            obj = json.loads(obj)
        return cls(int(obj["level"]), tuple(int(c) for c in obj["coeffs"]))


def ring_arithmetic(x, y, op):
    if op == "add":
        return x + y
    if op == "sub":
        return x - y
    if op == "mul":
        return x * y
    raise ValueError(f"unknown op {op!r}")


def galois_apply(x, r):
    """Image of x under zeta_M -> zeta_M^r."""
    M = x.level
    if math.gcd(r, M) != 1:
        raise ValueError(f"{r} is not a unit modulo {M}")
    vec = np.zeros(M, dtype=object)
    for i, c in enumerate(x.coeffs):
        if c:
            vec[(i * r) % M] += c
    return CyclotomicInteger.from_group_ring(vec, M)


def change_level(x, new_level):
    """Re-express x in Z[zeta_new_level].

    Lifting (old level divides new level) always succeeds.  Otherwise the
    element is moved down through gcd(old, new); this raises
    NotInSublevelError when x does not lie in the smaller ring.
    """
    M = x.level
    if new_level == M:
        return x
    if new_level % M == 0:
        step = new_level // M
        vec = np.zeros(new_level, dtype=object)
        for i, c in enumerate(x.coeffs):
            vec[i * step] += c
        return CyclotomicInteger.from_group_ring(vec, new_level)
    g = math.gcd(M, new_level)
    # Q(zeta_M) and Q(zeta_2M) coincide for odd M
    if M % 2 == 1 and new_level % 2 == 0 and new_level // 2 % M == 0:
        return change_level(change_level(x, 2 * M), new_level)
    down = _descend(x, g)
    return change_level(down, new_level)


def _descend(x, sub):
    M = x.level
    if M % sub:
        raise ValueError("descent target must divide the level")
    if sub == M:
        return x
    # for odd sub, Z[zeta_sub] = Z[zeta_2sub]; descend to the larger of the two if possible
    if sub % 2 == 1 and M % (2 * sub) == 0:
        return _descend_odd_double(_descend(x, 2 * sub), sub)
    inv, rows = _descent_data(M, sub)
    xs = [Fraction(x.coeffs[r]) for r in rows]
    y = [sum(inv[i][j] * xs[j] for j in range(len(rows))) for i in range(len(rows))]
    if any(v.denominator != 1 for v in y):
        cand = None
    else:
        cand = CyclotomicInteger(sub, tuple(int(v) for v in y))
    if cand is not None:
        back = change_level(cand, M)
        if back == x:
            return cand
        residual = x - back
    else:
        residual = None
    raise NotInSublevelError(
        f"element of level {M} does not lie in Z[zeta_{sub}]", residual)


def _descend_odd_double(y, sub):
    """Level 2*sub -> level sub for odd sub (zeta_2sub = -zeta_sub^((sub+1)/2))."""
    vec = np.zeros(sub, dtype=object)
    half = (sub + 1) // 2
    for i, c in enumerate(y.coeffs):
        if c:
            sign = -1 if i % 2 else 1
            vec[(i * half) % sub] += sign * c
    return CyclotomicInteger.from_group_ring(vec, sub)


@lru_cache(maxsize=None)
def _descent_data(M, sub):
    """Pivot rows and inverse of the lift matrix Z[zeta_sub] -> Z[zeta_M]."""
    n = euler_phi(sub)
    cols = []
    for j in range(n):
        e = [0] * n
        e[j] = 1
        cols.append(change_level(CyclotomicInteger(sub, tuple(e)), M).coeffs)
    mat = [[Fraction(cols[j][i]) for j in range(n)] for i in range(len(cols[0]))] if n else []
    rows = _independent_rows(mat, n)
    sq = [mat[r] for r in rows]
    return _invert(sq), tuple(rows)


def _independent_rows(mat, n):
    chosen = []
    basis = []
    for i, row in enumerate(mat):
        v = list(row)
        for b, piv in basis:
            if v[piv]:
                f = v[piv] / b[piv]
                v = [a - f * c for a, c in zip(v, b)]
        piv = next((k for k, a in enumerate(v) if a), None)
        if piv is not None:
            basis.append((v, piv))
            chosen.append(i)
            if len(chosen) == n:
                break
    return chosen


def _invert(mat):
    n = len(mat)
    aug = [list(row) + [Fraction(int(i == j)) for j in range(n)] for i, row in enumerate(mat)]
    for col in range(n):
        piv = next(r for r in range(col, n) if aug[r][col])
        aug[col], aug[piv] = aug[piv], aug[col]
        p = aug[col][col]
        aug[col] = [a / p for a in aug[col]]
        for r in range(n):
            if r != col and aug[r][col]:
                f = aug[r][col]
                aug[r] = [a - f * b for a, b in zip(aug[r], aug[col])]
    return [row[n:] for row in aug]


# -- fractions ----------------------------------------------------------

class CyclotomicFraction:
    """An element num/den of Q(zeta_M) with num in Z[zeta_M] and den a positive integer."""

    __slots__ = ("num", "den")

    def __init__(self, num, den=1):
        if isinstance(num, int):
            num = CyclotomicInteger.from_int(num)
        if den == 0:
            raise ZeroDivisionError("zero denominator")
        if den < 0:
            num, den = -num, -den
        g = math.gcd(den, *num.coeffs)
        if g > 1:
            num, den = num.exact_div_int(g), den // g
        self.num = num
        self.den = den

    @property
    def level(self):
        return self.num.level

    @classmethod
    def coerce(cls, x):
        if isinstance(x, CyclotomicFraction):
            return x
        if isinstance(x, CyclotomicInteger):
            return cls(x)
        if isinstance(x, Fraction):
            return cls(CyclotomicInteger.from_int(x.numerator), x.denominator)
        return cls(CyclotomicInteger.from_int(int(x)))

    def at_level(self, level):
        return CyclotomicFraction(change_level(self.num, level), self.den)

    def _common(self, other):
        other = CyclotomicFraction.coerce(other)
        L = math.lcm(self.level, other.level)
        return change_level(self.num, L), change_level(other.num, L), other.den

    def __mul__(self, other):
        a, b, d = self._common(other)
        return CyclotomicFraction(a * b, self.den * d)

    __rmul__ = __mul__

    def __add__(self, other):
        a, b, d = self._common(other)
        return CyclotomicFraction(a * d + b * self.den, self.den * d)

    __radd__ = __add__

    def __neg__(self):
        return CyclotomicFraction(-self.num, self.den)

    def __sub__(self, other):
        return self + (-CyclotomicFraction.coerce(other))

    def __eq__(self, other):
        if not isinstance(other, (CyclotomicFraction, CyclotomicInteger, int, Fraction)):
            return NotImplemented
        a, b, d = self._common(other)
        return a * d == b * self.den

    def __hash__(self):
        return hash((self.num.coeffs, self.den))

    def conjugate(self):
        return CyclotomicFraction(self.num.conjugate(), self.den)

    def inverse(self):
        n = self.num
        if n.is_zero():
            raise ZeroDivisionError("inverse of zero")
        nn = (n * n.conjugate()).as_integer()
        if nn is not None:
            return CyclotomicFraction(n.conjugate() * self.den, nn)
        M = n.level
        other = CyclotomicInteger.from_int(1, M)
        for r in range(2, M):
            if math.gcd(r, M) == 1:
                other = other * galois_apply(n, r)
        norm = (other * n).as_integer()
        return CyclotomicFraction(other * self.den, norm)

    def __truediv__(self, other):
        return self * CyclotomicFraction.coerce(other).inverse()

    def __pow__(self, k):
        if k < 0:
            return self.inverse() ** (-k)
        out = CyclotomicFraction(CyclotomicInteger.from_int(1, self.level))
        for _ in range(k):
            out = out * self
        return out

    def is_integral(self):
        return self.den == 1

    def to_integer(self):
        if self.den != 1:
            raise ArithmeticError(f"not integral: denominator {self.den}")
        return self.num

    def galois(self, r):
        return CyclotomicFraction(galois_apply(self.num, r), self.den)

    def __repr__(self):
        return f"CyclotomicFraction({self.num!r}, den={self.den})"

    def to_json(self):
        return {"num": self.num.to_json(), "den": self.den}


# -- complex embeddings -------------------------------------------------

@dataclass(frozen=True)
class ComplexInterval:
    """Rectangle [re] x [im] enclosing a complex number."""

    re: object
    im: object

    @property
    def center(self):
        return complex(float(self.re.mid), float(self.im.mid))

    @property
    def radius(self):
        return float(abs(self.re.delta) + abs(self.im.delta)) / 2

    def abs_upper(self):
        hi_re = max(abs(float(self.re.a)), abs(float(self.re.b)))
        hi_im = max(abs(float(self.im.a)), abs(float(self.im.b)))
        return math.hypot(hi_re, hi_im) * (1 + 4e-16)

    def abs2_interval(self):
        return self.re * self.re + self.im * self.im

    def contains(self, z, slack=0.0):
        z = complex(z)
        return (float(self.re.a) - slack <= z.real <= float(self.re.b) + slack
                and float(self.im.a) - slack <= z.imag <= float(self.im.b) + slack)


def embed_complex(x, k=1, precision=80):
    """Rigorous enclosure of x under zeta_M -> exp(2 pi i k / M)."""
    M = x.level
    if math.gcd(k, M) != 1:
        raise ValueError(f"{k} is not a unit modulo {M}")
    old = iv.prec
    iv.prec = precision
    try:
        re = iv.mpf(0)
        im = iv.mpf(0)
        two_pi = 2 * iv.pi
        for i, c in enumerate(x.coeffs):
            if not c:
                continue
            ang = two_pi * ((i * k) % M) / M
            re += c * iv.cos(ang)
            im += c * iv.sin(ang)
        return ComplexInterval(re, im)
    finally:
        iv.prec = old


def embed_all_float(x):
    """Float values of x under every embedding, keyed by the unit k."""
    M = x.level
    ks = [k for k in range(1, M + 1) if math.gcd(k, M) == 1]
    c = np.array([float(v) for v in x.coeffs])
    idx = np.arange(len(c))
    out = {}
    for k in ks:
        out[k % M] = complex(np.sum(c * np.exp(2j * np.pi * ((idx * k) % M) / M)))
    return out


def embedding_abs_bound(x):
    """Upper bound for |sigma(x)| over all embeddings, with float error slack."""
    vals = embed_all_float(x)
    slack = 1e-12 * (1 + sum(abs(c) for c in x.coeffs))
    return max(abs(v) for v in vals.values()) + slack


# -- reduction modulo prime ideals ---------------------------------------

class FiniteField:
    """F_{p^f} as F_p[x]/(m(x)) with m the smallest monic irreducible of degree f."""

    def __init__(self, p, f):
        self.p = p
        self.f = f
        self.modulus = _smallest_irreducible(p, f)

    def elem(self, coords):
        c = [int(v) % self.p for v in coords] + [0] * self.f
        return tuple(c[: self.f])

    def zero(self):
        return (0,) * self.f

    def one(self):
        return self.elem([1])

    def add(self, a, b):
        return tuple((x + y) % self.p for x, y in zip(a, b))

    def mul(self, a, b):
        prod = [0] * (2 * self.f - 1)
        for i, x in enumerate(a):
            if x:
                for j, y in enumerate(b):
                    prod[i + j] += x * y
        return self._reduce(prod)

    def _reduce(self, prod):
        m = self.modulus
        f = self.f
        prod = [c % self.p for c in prod]
        for i in range(len(prod) - 1, f - 1, -1):
            c = prod[i]
            if c:
                for j in range(f + 1):
                    prod[i - f + j] = (prod[i - f + j] - c * m[j]) % self.p
        return tuple(prod[:f]) + (0,) * max(0, f - len(prod))

    def pow(self, a, n):
        result = self.one()
        while n:
            if n & 1:
                result = self.mul(result, a)
            a = self.mul(a, a)
            n >>= 1
        return result

    def elements(self):
        for idx in range(self.p ** self.f):
            c = []
            for _ in range(self.f):
                c.append(idx % self.p)
                idx //= self.p
            yield tuple(c)

    def eval_poly(self, coeffs, a):
        acc = self.zero()
        for c in reversed(coeffs):
            acc = self.add(self.mul(acc, a), self.elem([c]))
        return acc


@dataclass(frozen=True)
class PrimeIdealReduction:
    """Homomorphism Z[zeta_M] -> F_{p^f} killing p-power roots of unity."""

    level: int
    p: int
    f: int
    root: tuple
    zeta_image: tuple

    @property
    def field(self):
        return _field(self.p, self.f)


@lru_cache(maxsize=None)
def _field(p, f):
    return FiniteField(p, f)


@lru_cache(maxsize=None)
def prime_ideal_reduction(M, p):
    """Pinned reduction of Z[zeta_M] at a prime above p.

    The root of Phi_{M'} (M' the prime-to-p part of M) with the
    lexicographically smallest coordinate vector (constant term first) is
    chosen.
    """
    Mp = M
    pv = 1
    while Mp % p == 0:
        Mp //= p
        pv *= p
    f = _mult_order(p, Mp) if Mp > 1 else 1
    F = _field(p, f)
    phi = cyclotomic_poly(Mp)
    roots = [a for a in F.elements() if F.eval_poly(phi, a) == F.zero()]
    root = min(roots)
    inv = pow(pv, -1, Mp) if Mp > 1 else 0
    zeta_image = F.pow(root, inv) if Mp > 1 else F.one()
    return PrimeIdealReduction(M, p, f, root, zeta_image)


def reduce_mod_prime(x, red):
    if x.level != red.level:
        raise LevelMismatchError("reduction level differs from element level")
    F = red.field
    acc = F.zero()
    power = F.one()
    for c in x.coeffs:
        if c:
            acc = F.add(acc, F.mul(F.elem([c]), power))
        power = F.mul(power, red.zeta_image)
    return acc if red.f > 1 else acc[0]


# -- small integer polynomial helpers ------------------------------------

def _polymul(a, b):
    if not a or not b:
        return []
    out = [0] * (len(a) + len(b) - 1)
    for i, x in enumerate(a):
        if x:
            for j, y in enumerate(b):
                if y:
                    out[i + j] += x * y
    return out


def _polydivmod(num, den):
    num = list(num)
    dl = len(den) - 1
    lead = den[-1]
    quot = [0] * max(1, len(num) - dl)
    for i in range(len(num) - 1, dl - 1, -1):
        c = num[i]
        if c:
            qc, r = divmod(c, lead)
            assert r == 0
            quot[i - dl] = qc
            for j in range(dl + 1):
                num[i - dl + j] -= qc * den[j]
    return quot, num[:dl]


def _divisors(n):
    return [d for d in range(1, n + 1) if n % d == 0]


def _moebius(n):
    fac = factorint(n)
    if any(e > 1 for e in fac.values()):
        return 0
    return -1 if len(fac) % 2 else 1


def _mult_order(a, n):
    a %= n
    k, x = 1, a
    while x != 1:
        x = x * a % n
        k += 1
    return k


@lru_cache(maxsize=None)
def _smallest_irreducible(p, f):
    if f == 1:
        return (0, 1)
    for idx in range(p ** f):
        c = []
        t = idx
        for _ in range(f):
            c.append(t % p)
            t //= p
        poly = tuple(c) + (1,)
        if c[0] and _is_irreducible(poly, p):
            return poly
    raise RuntimeError("no irreducible polynomial found")


def _is_irreducible(poly, p):
    from sympy import Poly, symbols, GF
    x = symbols("x")
    P = Poly(list(reversed(poly)), x, domain=GF(p))
    return P.is_irreducible
