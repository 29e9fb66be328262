"""Command-line front end: subcommands, JSON/CSV output, result cache.

Every subcommand prints one JSON document (or a CSV projection of its rows).
Exit codes: 0 success, 2 verification mismatch, 1 usage error.

The cache directory defaults to $HYPFERMAT_CACHE; per-prime results are
stored as content-addressed JSON files and reused across runs.
"""
from __future__ import annotations

import argparse
import csv
import hashlib
import io
import json
import os
import sys
import tempfile
import warnings
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass, field
from fractions import Fraction
from pathlib import Path

from sympy import isprime, primefactors, primerange

from .congruence import params_congruent, verify_congruence
from .elimination import (DiophantineInstance, InadmissiblePrimeError, SchemaError,
                          DEFAULT_FLOOR, ingest_form, run_elimination)
from .elliptic import (FAMILIES, get_family, legendre_conductor2_branch, specialize_family,
                       tate, verify_rational_hgm)
from .euler_curve import exponents_from_params, verify_trace_frob
from .finite_char import NotSplitError, RamifiedError, get_ctx
from .hgm_core import (HgmParameter, INFINITY, NonGenericError, WildPrimeError, classify_prime,
                       finite_hyp_trace, finite_hyp_value, monodromy, monodromy_order,
                       symmetry_group, tame_inertia_order)
from .hyperelliptic import verify_appendix, verify_even_quotient
from .transforms import verify_s3

CACHE_ENV = "HYPFERMAT_CACHE"
SUBCOMMANDS = ("trace", "monodromy", "field", "s3", "congruence", "verify-rational",
               "conductor2", "eliminate", "hyperell", "verify-euler")

EXIT_OK, EXIT_USAGE, EXIT_MISMATCH = 0, 1, 2


class UsageError(Exception):
    pass


# -- cache --------------------------------------------------------------------------

def cache_key(params, t0, q, kind):
    return [str(params), str(t0), int(q), str(kind)]


def _cache_path(cache_dir, key):
    h = hashlib.sha256(json.dumps(key, separators=(",", ":")).encode()).hexdigest()
    return Path(cache_dir) / h[:2] / f"{h}.json"


def cache_get(cache_dir, key):
    """Cached value for key, or None on a miss.  Corrupt files count as misses."""
    if not cache_dir:
        return None
    path = _cache_path(cache_dir, key)
    try:
        text = path.read_text()
    except FileNotFoundError:
        return None
    try:
        obj = json.loads(text)
        if obj["key"] != key:
            raise ValueError("key mismatch")
        return obj["value"]
    except (ValueError, KeyError, TypeError) as e:
        warnings.warn(f"corrupt cache entry {path} ({e}); recomputing", stacklevel=2)
        return None


def cache_put(cache_dir, key, value):
    """Write atomically: temp file in the same directory, then os.replace."""
    if not cache_dir:
        return
    path = _cache_path(cache_dir, key)
    path.parent.mkdir(parents=True, exist_ok=True)
    data = json.dumps({"key": key, "value": value}, sort_keys=True, separators=(",", ":"))
    fd, tmp = tempfile.mkstemp(dir=path.parent, prefix=".tmp-", suffix=".json")
    try:
        with os.fdopen(fd, "w") as f:
            f.write(data)
        os.replace(tmp, path)
    except BaseException:
        try:
            os.unlink(tmp)
        except FileNotFoundError:
            pass
        raise


# -- config -------------------------------------------------------------------------

@dataclass
class RunConfig:
    subcommand: str
    params: str | None = None
    t0: Fraction | None = None
    primes: list = field(default_factory=list)
    output: str | None = None
    cache_dir: str | None = None
    jobs: int = 1
    floor: int = DEFAULT_FLOOR
    fmt: str = "json"
    explain_skips: bool = False
    options: dict = field(default_factory=dict)


def parse_primes(text):
    """"lo..hi" (inclusive) or a comma list; returns the sorted primes."""
    text = text.strip()
    if ".." in text:
        lo, hi = text.split("..")
        lo, hi = int(lo), int(hi)
        if lo > hi:
            raise UsageError(f"empty prime range {text!r}")
        return [int(p) for p in primerange(lo, hi + 1)]
    out = sorted({int(x) for x in text.split(",") if x.strip()})
    bad = [p for p in out if not isprime(p)]
    if bad:
        raise UsageError(f"not prime: {bad}")
    return out


def parse_t(text):
    try:
        t = Fraction(text.strip())
    except (ValueError, ZeroDivisionError):
        raise UsageError(f"cannot parse t0 {text!r}; write n/d") from None
    if t in (0, 1):
        raise UsageError("t0 must not be 0 or 1")
    return t


def parse_params(text):
    try:
        p = HgmParameter.parse(text)
    except (ValueError, ZeroDivisionError):
        raise UsageError(f"cannot parse parameter {text!r}; expected \"a,b;c,d\"") from None
    if not p.generic:
        raise UsageError(f"parameter {text} is not generic")
    return p


# -- per-prime tasks (run in workers, pure) -----------------------------------------

def _trace_task(params, t0, q):
    p = HgmParameter.parse(params)
    t0 = Fraction(t0)
    if q == 2:
        return "skip", {"q": q, "reason": "q = 2"}
    if (q - 1) % p.N:
        return "skip", {"q": q, "reason": f"not split (N={p.N})"}
    kind = classify_prime(p, t0, q).kind
    if kind != "good":
        return "skip", {"q": q, "reason": f"bad prime ({kind})"}
    ctx = get_ctx(q)
    val = finite_hyp_value(p, t0, ctx)
    try:
        tr = finite_hyp_trace(p, t0, ctx).to_json()
    except ArithmeticError:
        tr = None
    return "row", {"q": q, "H": {"numerator": val.numerator.to_json(), "qpow": val.qpow},
                   "trace": tr}


def _euler_task(params, t0, q):
    p = HgmParameter.parse(params)
    t0 = Fraction(t0)
    ec = exponents_from_params(p).at(t0)
    if q == 2 or (q - 1) % ec.N or (q - 1) % p.N:
        return "skip", {"q": q, "reason": f"not split (N={ec.N})"}
    kind = classify_prime(p, t0, q).kind
    if kind != "good":
        return "skip", {"q": q, "reason": f"bad prime ({kind})"}
    try:
        rep = verify_trace_frob(p, t0, get_ctx(q))
    except (NotSplitError, RamifiedError) as e:
        return "skip", {"q": q, "reason": str(e)}
    return "row", rep.to_json()


def _s3_task(params, t0, q, case):
    rep = verify_s3(HgmParameter.parse(params), case, Fraction(t0), [q])
    if rep.rows:
        return "row", rep.rows[0]
    return "skip", rep.skipped[0]


def _congruence_task(left, t0, q, right, mod):
    claim = params_congruent(HgmParameter.parse(left), HgmParameter.parse(right), mod)
    rep = verify_congruence(claim, Fraction(t0), [q])
    if rep.rows:
        return "row", rep.rows[0]
    return "skip", rep.skipped[0]


def _run_task(args):
    name, rest = args
    return TASKS[name](*rest)


TASKS = {"trace": _trace_task, "euler": _euler_task, "s3": _s3_task,
         "congruence": _congruence_task}


def _per_prime(config, name, kind, params, t0, extra=()):
    """Run one task per prime, with cache and worker pool; rows in ascending q."""
    results = {}
    todo = []
    for q in config.primes:
        key = cache_key(params, t0, q, kind)
        hit = cache_get(config.cache_dir, key)
        if hit is not None:
            results[q] = tuple(hit)
        else:
            todo.append(q)
    jobs = [(name, (str(params), str(t0), q, *extra)) for q in todo]
    if config.jobs > 1 and len(jobs) > 1:
        with ProcessPoolExecutor(max_workers=config.jobs) as ex:
            computed = list(ex.map(_run_task, jobs))
    else:
        computed = [_run_task(j) for j in jobs]
    for q, res in zip(todo, computed):
        results[q] = res
        cache_put(config.cache_dir, cache_key(params, t0, q, kind), list(res))
    rows, skipped = [], []
    for q in config.primes:
        status, payload = results[q]
        (rows if status == "row" else skipped).append(payload)
    return rows, skipped


# -- subcommands ---------------------------------------------------------------------

def _require(config, *names):
    for n in names:
        if getattr(config, n, None) in (None, []) and config.options.get(n) is None:
            raise UsageError(f"{config.subcommand} needs --{n.replace('_', '-')}")


def _need_rows(config, rows, skipped):
    if not rows:
        raise UsageError(
            f"no admissible primes in the given range ({len(skipped)} skipped); "
            "rerun with --explain-skips to see why")


def _finish(config, doc, rows, skipped, ok=True):
    if config.explain_skips:
        doc["skipped"] = skipped
    doc["rows"] = rows
    return doc, rows, (EXIT_OK if ok else EXIT_MISMATCH)


def cmd_trace(config):
    _require(config, "params", "t0", "primes")
    p = parse_params(config.params)
    rows, skipped = _per_prime(config, "trace", "trace", p, config.t0)
    _need_rows(config, rows, skipped)
    doc = {"command": "trace", "params": str(p), "t": str(config.t0), "N": p.N}
    return _finish(config, doc, rows, skipped)


def cmd_verify_euler(config):
    _require(config, "params", "t0", "primes")
    p = parse_params(config.params)
    rows, skipped = _per_prime(config, "euler", "euler", p, config.t0)
    _need_rows(config, rows, skipped)
    ok = all(r["equal"] for r in rows)
    doc = {"command": "verify-euler", "params": str(p), "t": str(config.t0), "all_equal": ok}
    return _finish(config, doc, rows, skipped, ok)


def _order_json(o):
    return "inf" if o == INFINITY else o


def cmd_monodromy(config):
    _require(config, "params")
    p = parse_params(config.params)
    rows = []
    for point in (0, 1, "inf"):
        m = monodromy(p, point)
        rows.append({"point": str(point), "kind": m.kind,
                     "exponents": [str(e) for e in m.exponents],
                     "order": _order_json(monodromy_order(m))})
    doc = {"command": "monodromy", "params": str(p)}
    skipped = []
    if config.t0 is not None:
        t0 = config.t0
        ps = config.primes or sorted(
            {int(x) for n in (t0.numerator, t0.denominator, (t0 - 1).numerator) for x in
             primefactors(n)})
        inertia = []
        for q in ps:
            try:
                inertia.append({"q": q, "class": classify_prime(p, t0, q).kind,
                                "inertia_order": _order_json(tame_inertia_order(p, t0, q))})
            except WildPrimeError as e:
                skipped.append({"q": q, "reason": str(e)})
        doc["t"] = str(t0)
        doc["inertia"] = inertia
    return _finish(config, doc, rows, skipped)


def cmd_field(config):
    _require(config, "params")
    fd = symmetry_group(parse_params(config.params))
    doc = fd.to_json()
    return doc, [doc], EXIT_OK


def cmd_s3(config):
    _require(config, "params", "t0", "primes")
    case = str(config.options.get("case") or "").strip("()")
    if case not in ("12", "13", "23"):
        raise UsageError("--case must be 12, 13 or 23")
    p = parse_params(config.params)
    try:
        verify_s3(p, case, config.t0, [])
    except ValueError as e:
        raise UsageError(str(e)) from None
    rows, skipped = _per_prime(config, "s3", f"s3:{case}", p, config.t0, (case,))
    _need_rows(config, rows, skipped)
    ok = all(r["equal"] for r in rows)
    doc = {"command": "s3", "case": case, "params": str(p), "t": str(config.t0),
           "all_equal": ok}
    return _finish(config, doc, rows, skipped, ok)


def cmd_congruence(config):
    _require(config, "t0", "primes")
    opts = config.options
    if not opts.get("left") or not opts.get("right") or not opts.get("mod"):
        raise UsageError("congruence needs --left, --right and --mod")
    left, right, mod = parse_params(opts["left"]), parse_params(opts["right"]), int(opts["mod"])
    if not isprime(mod):
        raise UsageError(f"--mod {mod} is not prime")
    claim = params_congruent(left, right, mod)
    if claim is None:
        raise UsageError(f"{left} and {right} are not congruent modulo {mod}")
    rows, skipped = _per_prime(config, "congruence", f"congruence:{right}:{mod}", left,
                               config.t0, (str(right), mod))
    _need_rows(config, rows, skipped)
    ok = all(r["equal"] for r in rows)
    doc = {"command": "congruence", "claim": claim.to_json(), "t": str(config.t0),
           "all_equal": ok}
    return _finish(config, doc, rows, skipped, ok)


def cmd_verify_rational(config):
    _require(config, "t0", "primes")
    tag = config.options.get("family")
    if tag not in FAMILIES:
        raise UsageError(f"--family must be one of {sorted(FAMILIES)}")
    fam = get_family(tag)
    if config.t0 in fam.singular:
        raise UsageError(f"t0={config.t0} is singular for {tag}")
    rep = verify_rational_hgm(fam, config.t0, config.primes)
    _need_rows(config, rep.rows, rep.skipped)
    doc = rep.to_json()
    doc.pop("skipped")
    doc.pop("rows")
    doc["command"] = "verify-rational"
    return _finish(config, doc, rep.rows, rep.skipped, rep.all_equal)


def cmd_conductor2(config):
    _require(config, "t0")
    exp, branch = legendre_conductor2_branch(config.t0)
    res = tate(specialize_family(get_family("legendre"), config.t0), 2)
    doc = {"command": "conductor2", "t": str(config.t0), "exponent": exp, "branch": branch,
           "tate_exponent": res.conductor_exponent, "kodaira": res.kodaira,
           "equal": exp == res.conductor_exponent}
    return doc, [doc], EXIT_OK if doc["equal"] else EXIT_MISMATCH


def cmd_eliminate(config):
    opts = config.options
    if not opts.get("instance") or not opts.get("form") or not opts.get("ells"):
        raise UsageError("eliminate needs --instance, --form and --ells")
    try:
        A, B, C, p, q = (int(x) for x in opts["instance"].split(","))
    except ValueError:
        raise UsageError("--instance must be A,B,C,p,q") from None
    param = parse_params(config.params) if config.params else None
    try:
        inst = DiophantineInstance(A, B, C, p, q, param)
    except ValueError as e:
        raise UsageError(str(e)) from None
    try:
        form = ingest_form(opts["form"])
    except (SchemaError, OSError) as e:
        raise UsageError(f"{opts['form']}: {e}") from None
    try:
        rep = run_elimination(form, inst, opts["ells"], config.floor, config.jobs)
    except InadmissiblePrimeError as e:
        raise UsageError(str(e)) from None
    doc = rep.to_json()
    doc["command"] = "eliminate"
    doc["instance"] = inst.to_json()
    rows = [r.to_json() for r in rep.rows]
    return doc, rows, EXIT_OK


def cmd_hyperell(config):
    _require(config, "t0", "primes")
    N = config.options.get("N")
    if not N or N < 2:
        raise UsageError("hyperell needs --N >= 2")
    even = bool(config.options.get("even"))
    if even != (N % 2 == 0):
        raise UsageError("--even is required exactly when N is even")
    try:
        rep = (verify_even_quotient if even else verify_appendix)(N, config.t0, config.primes)
    except ValueError as e:
        raise UsageError(str(e)) from None
    _need_rows(config, rep.rows, rep.skipped)
    doc = rep.to_json()
    doc.pop("skipped")
    doc.pop("rows")
    doc["command"] = "hyperell"
    return _finish(config, doc, rep.rows, rep.skipped, rep.all_equal)


COMMANDS = {"trace": cmd_trace, "monodromy": cmd_monodromy, "field": cmd_field,
            "s3": cmd_s3, "congruence": cmd_congruence, "verify-rational": cmd_verify_rational,
            "conductor2": cmd_conductor2, "eliminate": cmd_eliminate, "hyperell": cmd_hyperell,
            "verify-euler": cmd_verify_euler}


# -- output ----------------------------------------------------------------------------

def _flatten(obj, prefix=""):
    out = {}
    if isinstance(obj, dict):
        for k, v in obj.items():
            out.update(_flatten(v, f"{prefix}{k}."))
    elif isinstance(obj, list):
        out[prefix[:-1]] = json.dumps(obj, separators=(",", ":"))
    else:
        out[prefix[:-1]] = "" if obj is None else obj
    return out


def to_csv(rows):
    flat = [_flatten(r) for r in rows]
    cols = []
    for r in flat:
        cols += [k for k in r if k not in cols]
    buf = io.StringIO()
    w = csv.DictWriter(buf, fieldnames=cols, lineterminator="\n")
    w.writeheader()
    w.writerows(flat)
    return buf.getvalue()


def render(doc, rows, fmt):
    if fmt == "csv":
        return to_csv(rows)
    return json.dumps(doc, indent=1, sort_keys=True) + "\n"


def run(config):
    """Dispatch one subcommand; returns the exit code and writes the output."""
    if config.subcommand not in COMMANDS:
        print(f"error: unknown subcommand {config.subcommand!r}", file=sys.stderr)
        return EXIT_USAGE
    if config.fmt not in ("json", "csv"):
        print("error: --format must be json or csv", file=sys.stderr)
        return EXIT_USAGE
    try:
        doc, rows, code = COMMANDS[config.subcommand](config)
    except UsageError as e:
        print(f"error: {e}", file=sys.stderr)
        return EXIT_USAGE
    except (NonGenericError, NotSplitError, RamifiedError, WildPrimeError) as e:
        print(f"error: {e}", file=sys.stderr)
        return EXIT_USAGE
    text = render(doc, rows, config.fmt)
    if config.output:
        Path(config.output).write_text(text)
    else:
        sys.stdout.write(text)
    return code


# -- argument parsing -------------------------------------------------------------------

class _Parser(argparse.ArgumentParser):
    def error(self, message):
        raise UsageError(f"{self.prog}: {message}")


def _common(sp):
    sp.add_argument("--format", dest="fmt", choices=("json", "csv"), default="json")
    sp.add_argument("--output", "-o", help="write to this file instead of stdout")
    sp.add_argument("--jobs", type=int, default=1, help="worker processes")
    sp.add_argument("--cache-dir", default=None,
                    help=f"result cache directory (default ${CACHE_ENV})")
    sp.add_argument("--explain-skips", action="store_true",
                    help="list the primes filtered out and why")


def build_parser():
    ap = _Parser(prog="hypfermat", description="Frobenius traces of rank-2 hypergeometric motives")
    sub = ap.add_subparsers(dest="subcommand", parser_class=_Parser)

    def add(name, help, params=False, t=False, primes=False):
        sp = sub.add_parser(name, help=help)
        if params:
            sp.add_argument("--params", required=params == "required",
                            help='parameter "a,b;c,d", rationals as n/d')
        if t:
            sp.add_argument("--t", required=t == "required", help="t0 as n/d")
        if primes:
            sp.add_argument("--primes", required=primes == "required",
                            help="lo..hi or a comma list")
        _common(sp)
        return sp

    add("trace", "finite hypergeometric traces", "required", "required", "required")
    add("monodromy", "local monodromy and tame inertia orders", "required", True, True)
    add("field", "symmetry group H and field of definition", "required")
    sp = add("s3", "transposition formulas", "required", "required", "required")
    sp.add_argument("--case", required=True, choices=("12", "13", "23"))
    sp = add("congruence", "trace congruences modulo a prime", False, "required", "required")
    sp.add_argument("--left", required=True)
    sp.add_argument("--right", required=True)
    sp.add_argument("--mod", type=int, required=True)
    sp = add("verify-rational", "rational families against elliptic curves", False,
             "required", "required")
    sp.add_argument("--family", required=True, choices=sorted(FAMILIES))
    add("conductor2", "conductor exponent at 2 of the Legendre curve", False, "required")
    sp = add("eliminate", "modular elimination for a generalized Fermat equation", True)
    sp.add_argument("--instance", required=True, help="A,B,C,p,q")
    sp.add_argument("--form", required=True, help="form coefficient JSON file")
    sp.add_argument("--ells", required=True, help="comma list of auxiliary primes")
    sp.add_argument("--floor", type=int, default=DEFAULT_FLOOR)
    sp = add("hyperell", "hyperelliptic point counts against orbit sums", False,
             "required", "required")
    sp.add_argument("--N", type=int, required=True)
    sp.add_argument("--even", action="store_true")
    add("verify-euler", "Euler-curve character sums against H_q", "required", "required",
        "required")
    return ap


def config_from_args(ns):
    if not ns.subcommand:
        raise UsageError(f"a subcommand is required: {', '.join(SUBCOMMANDS)}")
    if ns.jobs < 1:
        raise UsageError("--jobs must be positive")
    opts = {}
    for k in ("case", "left", "right", "mod", "family", "instance", "form", "N", "even"):
        if hasattr(ns, k):
            opts[k] = getattr(ns, k)
    if getattr(ns, "ells", None):
        try:
            opts["ells"] = sorted({int(x) for x in ns.ells.split(",") if x.strip()})
        except ValueError:
            raise UsageError("--ells must be a comma list of integers") from None
    t = getattr(ns, "t", None)
    primes = getattr(ns, "primes", None)
    return RunConfig(
        subcommand=ns.subcommand,
        params=getattr(ns, "params", None),
        t0=parse_t(t) if t is not None else None,
        primes=parse_primes(primes) if primes else [],
        output=ns.output,
        cache_dir=ns.cache_dir or os.environ.get(CACHE_ENV) or None,
        jobs=ns.jobs,
        floor=getattr(ns, "floor", DEFAULT_FLOOR),
        fmt=ns.fmt,
        explain_skips=ns.explain_skips,
        options=opts,
    )


def main(argv=None):
    try:
        config = config_from_args(build_parser().parse_args(argv))
    except UsageError as e:
        print(f"error: {e}", file=sys.stderr)
        return EXIT_USAGE
    return run(config)


if __name__ == "__main__":
    sys.exit(main())
