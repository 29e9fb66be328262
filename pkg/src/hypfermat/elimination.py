"""Mazur-style elimination of candidate newforms against Frey hypergeometric motives.

The equation is A x^p + B y^r = C z^q with r the varying exponent, and the Frey
parameter is specialized at t0 = A alpha^p / (C gamma^q).
"""
from __future__ import annotations

import json
import math
import re
import warnings
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass, field
from fractions import Fraction
from pathlib import Path

from sympy import factorint, isprime, primefactors

from .cyclotomic import CyclotomicInteger, change_level, embed_all_float, galois_apply
from .finite_char import get_ctx
from .hgm_core import (
    HgmParameter,
    degenerate_trace_at_infinity,
    degenerate_trace_at_zero,
    finite_hyp_trace,
    make_parameter,
    tame_inertia_order,
)

DEFAULT_FLOOR = 5


class SchemaError(ValueError):
    pass


class InadmissiblePrimeError(ValueError):
    pass


# -- instances --------------------------------------------------------------------

def default_parameter(p, q):
    """(1/q, -1/q),(1/p, -1/p): order p at 0 and order q at infinity."""
    return make_parameter(Fraction(1, q), Fraction(-1, q), Fraction(1, p), Fraction(-1, p))


@dataclass(frozen=True)
class DiophantineInstance:
    A: int
    B: int
    C: int
    p: int
    q: int
    parameter: HgmParameter | None = None

    def __post_init__(self):
        if 0 in (self.A, self.B, self.C):
            raise ValueError("A, B, C must be nonzero")
        for x, y in ((self.A, self.B), (self.A, self.C), (self.B, self.C)):
            if math.gcd(x, y) != 1:
                raise ValueError(f"A, B, C must be pairwise coprime, got {self.A},{self.B},{self.C}")
        for e in (self.p, self.q):
            if e < 3 or not isprime(e):
                raise ValueError(f"exponent {e} is not an odd prime")
        if self.parameter is None:
            if self.p == self.q:
                raise ValueError("p = q needs an explicit parameter")
            object.__setattr__(self, "parameter", default_parameter(self.p, self.q))
        self.parameter.require_generic()

    @property
    def N(self):
        return self.parameter.N

    def t0(self, alpha, gamma):
        return Fraction(self.A * alpha ** self.p, self.C * gamma ** self.q)

    def admissible(self, ell):
        return (isprime(ell) and ell > 2 and (ell - 1) % self.N == 0
                and (self.A * self.B * self.C * self.p * self.q) % ell != 0)

    def to_json(self):
        return {"A": self.A, "B": self.B, "C": self.C, "p": self.p, "q": self.q,
                "params": str(self.parameter)}


# -- forms ------------------------------------------------------------------------

@dataclass
class FormCoefficients:
    level: int
    entries: dict
    provenance: str = "file"

    def to_json(self):
        return {"level": self.level, "provenance": self.provenance,
                "coefficients": [{"ell": ell, "a": self.entries[ell].to_json()}
                                 for ell in sorted(self.entries)]}

    def write(self, path):
        Path(path).write_text(json.dumps(self.to_json(), indent=1, sort_keys=True) + "\n")


def _line_of(text, pattern, occurrence=0):
    hits = [m.start() for m in re.finditer(pattern, text)]
    if len(hits) <= occurrence:
        return None
    return text.count("\n", 0, hits[occurrence]) + 1


def _weil_check(entries):
    for ell, a in entries.items():
        bound = 2 * math.sqrt(ell) + 1e-9
        if any(abs(z) > bound for z in embed_all_float(a).values()):
            warnings.warn(f"a_{ell} exceeds the Weil bound in some embedding", stacklevel=3)


def parse_form(text):
    try:
        obj = json.loads(text)
    except json.JSONDecodeError as e:
        raise SchemaError(f"line {e.lineno}: invalid JSON: {e.msg}") from None
    if not isinstance(obj, dict) or "level" not in obj or "coefficients" not in obj:
        raise SchemaError("line 1: expected an object with 'level' and 'coefficients'")
    level = obj["level"]
    if not isinstance(level, int) or level < 1:
        line = _line_of(text, '"level"') or 1
        raise SchemaError(f"line {line}: level must be a positive integer")
    entries = {}
    for i, row in enumerate(obj["coefficients"]):
        line = _line_of(text, r'"ell"', i) or 1
        if not isinstance(row, dict) or "ell" not in row or "a" not in row:
            raise SchemaError(f"line {line}: entry {i} needs 'ell' and 'a'")
        ell = row["ell"]
        if not isinstance(ell, int) or not isprime(ell):
            raise SchemaError(f"line {line}: ell={ell!r} is not a prime")
        a = row["a"]
        if isinstance(a, int):
            a = {"level": 1, "coeffs": [a]}
        if not isinstance(a, dict) or "coeffs" not in a:
            raise SchemaError(f"line {line}: coefficient must be an integer or {{level, coeffs}}")
        alevel = a.get("level", level)
        coeffs = []
        for c in a["coeffs"]:
            if isinstance(c, bool) or not (isinstance(c, int) or (isinstance(c, str) and re.fullmatch(r"-?\d+", c))):
                raise SchemaError(f"line {line}: non-integer coefficient {c!r} for ell={ell}")
            coeffs.append(int(c))
        if level % alevel:
            raise SchemaError(f"line {line}: coefficient level {alevel} does not divide {level}")
        try:
            value = CyclotomicInteger(alevel, tuple(coeffs))
        except Exception as e:  # wrong vector length
            raise SchemaError(f"line {line}: {e}") from None
        if ell in entries:
            raise SchemaError(f"line {line}: duplicate ell={ell}")
        entries[ell] = change_level(value, level)
    _weil_check(entries)
    return FormCoefficients(level, entries, obj.get("provenance", "file"))


def ingest_form(path):
    return parse_form(Path(path).read_text())


def synth_form_from_curve(E, primes):
    from .elliptic import ap
    entries = {ell: CyclotomicInteger.from_int(ap(E, ell), 1) for ell in primes}
    return FormCoefficients(1, entries, "from_curve")


def synth_form_from_motive(inst, alpha, beta, gamma, primes, r=None):
    """Coefficients of the instance's own Frey motive at a genuine solution."""
    if r is not None and inst.A * alpha ** inst.p + inst.B * beta ** r != inst.C * gamma ** inst.q:
        raise ValueError("not a solution")
    t0 = inst.t0(alpha, gamma)
    entries = {ell: finite_hyp_trace(inst.parameter, t0, get_ctx(ell)) for ell in primes}
    return FormCoefficients(inst.N, entries, "from_motive")


# -- solutions modulo ell ------------------------------------------------------------

@dataclass
class ModEllSolutions:
    ell: int
    case1: list
    case2a: list
    case2c: list
    case3: list

    @property
    def size(self):
        return len(self.case1) + len(self.case2a) + len(self.case2c) + len(self.case3)

    @property
    def units(self):
        return self.case1


def solutions_mod_ell(inst, ell, r=None):
    """Points (alpha, beta, gamma) of S_ell parametrized by (alpha, gamma) != (0, 0).

    beta is given as beta^r unless r (coprime to ell-1) is supplied.
    """
    if not inst.admissible(ell):
        raise InadmissiblePrimeError(f"ell={ell} is not admissible for N={inst.N}, ABCpq")
    if r is not None and math.gcd(r, ell - 1) != 1:
        raise InadmissiblePrimeError(f"r={r} is not coprime to ell-1={ell - 1}")
    binv = pow(inst.B, -1, ell)
    rinv = pow(r, -1, ell - 1) if r is not None else None
    out = ModEllSolutions(ell, [], [], [], [])
    for al in range(ell):
        ap_ = inst.A * pow(al, inst.p, ell)
        for ga in range(ell):
            if al == 0 and ga == 0:
                continue
            br = (inst.C * pow(ga, inst.q, ell) - ap_) * binv % ell
            be = pow(br, rinv, ell) if rinv is not None and br else (br if rinv is None else 0)
            pt = (al, be, ga)
            if br == 0:
                out.case3.append(pt)
            elif al == 0:
                out.case2a.append(pt)
            elif ga == 0:
                out.case2c.append(pt)
            else:
                out.case1.append(pt)
    return out


def count_S_ell_bruteforce(inst, ell, r):
    n = 0
    for al in range(ell):
        for be in range(ell):
            for ga in range(ell):
                if (al, be, ga) != (0, 0, 0) and (
                        inst.A * pow(al, inst.p, ell) + inst.B * pow(be, r, ell)
                        - inst.C * pow(ga, inst.q, ell)) % ell == 0:
                    n += 1
    return n


# -- per-ell elimination ---------------------------------------------------------------

def field_norm(x):
    """Product of the distinct Galois conjugates of x: the norm from Q(x) to Q."""
    seen = {}
    for k in range(1, x.level + 1):
        if math.gcd(k, x.level) == 1:
            y = galois_apply(x, k)
            seen.setdefault(y.coeffs, y)
    prod = CyclotomicInteger.from_int(1, x.level)
    for y in seen.values():
        prod = prod * y
    n = prod.as_integer()
    if n is None:
        raise ArithmeticError("norm is not a rational integer")
    return n


def _difference_norm(a, predicted):
    L = math.lcm(a.level, predicted.level)
    d = change_level(a, L) - change_level(predicted, L)
    return 0 if d.is_zero() else abs(field_norm(d))


@dataclass
class EliminationRow:
    ell: int
    case_counts: dict
    norms: dict = field(default_factory=dict)
    witnesses: list = field(default_factory=list)
    notices: list = field(default_factory=list)
    product: int = 1

    @property
    def survived(self):
        return bool(self.witnesses)

    def to_json(self):
        return {"ell": self.ell, "case_counts": self.case_counts,
                "norms": {k: sorted(v) for k, v in sorted(self.norms.items())},
                "witnesses": self.witnesses, "notices": self.notices,
                "product": str(self.product), "survived": self.survived,
                "excluded_r": primefactors(self.ell - 1) + [self.ell]}


def _case2_predictions(inst, ell, ctx, at):
    """Distinct degenerate traces over all unit parts; None when ramified."""
    P = inst.parameter
    g = ctx.generator
    out = []
    for j in range(P.N):
        u = pow(g, j, ell)
        t0 = Fraction(u * ell ** inst.p) if at == "zero" else Fraction(u, ell ** inst.q)
        if tame_inertia_order(P, t0, ell) != 1:
            return None
        fn = degenerate_trace_at_zero if at == "zero" else degenerate_trace_at_infinity
        out.append((u, fn(P, t0, ctx)))
    return out


def eliminate_at_ell(form, inst, ell, ctx=None):
    if ell not in form.entries:
        row = EliminationRow(ell, {})
        row.notices.append(f"no coefficient for ell={ell}; skipped")
        return row
    ctx = ctx or get_ctx(ell)
    sols = solutions_mod_ell(inst, ell)
    a = form.entries[ell]
    row = EliminationRow(ell, {"1": len(sols.case1), "2a": len(sols.case2a),
                               "2c": len(sols.case2c), "3": len(sols.case3)})
    norms = {"1": set(), "2a": set(), "2c": set(), "3": set()}

    t0s = sorted({inst.A * pow(al, inst.p, ell) * pow(inst.C * pow(ga, inst.q, ell), -1, ell) % ell
                  for al, _, ga in sols.case1})
    for t in t0s:
        n = _difference_norm(a, finite_hyp_trace(inst.parameter, t, ctx))
        if n == 0:
            row.witnesses.append({"case": "1", "t0": t})
        else:
            norms["1"].add(n)

    for key, at, members in (("2a", "zero", sols.case2a), ("2c", "infinity", sols.case2c)):
        if not members:
            continue
        preds = _case2_predictions(inst, ell, ctx, at)
        if preds is None:
            row.notices.append(f"case {key}: ramified at {at}, no constraint")
            continue
        for u, pred in preds:
            n = _difference_norm(a, pred)
            if n == 0:
                row.witnesses.append({"case": key, "unit": u})
            else:
                norms[key].add(n)

    if sols.case3:
        for sign in (1, -1):
            n = _difference_norm(a, CyclotomicInteger.from_int(sign * (ell + 1), 1))
            if n == 0:
                row.witnesses.append({"case": "3", "sign": sign})
            else:
                norms["3"].add(n)

    row.norms = {k: v for k, v in norms.items() if v}
    prod = 1
    for v in row.norms.values():
        for n in v:
            prod *= n
    row.product = prod
    return row


# -- aggregation --------------------------------------------------------------------------

@dataclass
class EliminationReport:
    rows: list
    floor: int
    gcd: int | None
    candidates: list
    survives: bool

    @property
    def eliminated(self):
        return not self.survives and not self.candidates

    @property
    def bound(self):
        if self.gcd in (None, 0):
            return None
        return max(primefactors(self.gcd), default=1)

    def to_json(self):
        return {"rows": [r.to_json() for r in self.rows], "floor": self.floor,
                "gcd": None if self.gcd is None else str(self.gcd),
                "gcd_factorization": {} if not self.gcd else
                {str(k): v for k, v in sorted(factorint(self.gcd).items())},
                "bound": self.bound, "candidates": self.candidates,
                "survives": self.survives, "eliminated_above_floor": self.eliminated}

    def dumps(self):
        return json.dumps(self.to_json(), indent=1, sort_keys=True)


def combine(rows, floor=DEFAULT_FLOOR):
    """gcd of the per-ell norm products over non-surviving rows, and the surviving r."""
    if not rows:
        raise ValueError("need at least one row")
    live = [r for r in rows if r.case_counts and not r.survived]
    if not live:
        return EliminationReport(list(rows), floor, None, [], True)
    g = 0
    for r in live:
        g = math.gcd(g, r.product)
    pool = set()
    for r in live:
        pool |= set(primefactors(r.product)) | set(primefactors(r.ell - 1)) | {r.ell}
    cands = []
    for r in sorted(pool):
        if r <= floor:
            continue
        if all(row.product % r == 0 or (row.ell - 1) % r == 0 or row.ell == r for row in live):
            cands.append(r)
    return EliminationReport(list(rows), floor, g, cands, False)


def run_elimination(form, inst, ells, floor=DEFAULT_FLOOR, jobs=1):
    ells = sorted(set(ells))
    for ell in ells:
        if not inst.admissible(ell):
            raise InadmissiblePrimeError(f"ell={ell} is not admissible for N={inst.N}, ABCpq")
    if jobs > 1 and len(ells) > 1:
        with ProcessPoolExecutor(max_workers=jobs) as ex:
            rows = list(ex.map(_row_job, [(form, inst, ell) for ell in ells]))
    else:
        rows = [eliminate_at_ell(form, inst, ell) for ell in ells]
    return combine(rows, floor)


def _row_job(args):
    form, inst, ell = args
    return eliminate_at_ell(form, inst, ell)
