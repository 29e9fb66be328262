import csv
import io
import json
import multiprocessing as mp
import subprocess
import sys

import pytest

from hypfermat import cli
from hypfermat.cli import (
    EXIT_MISMATCH, EXIT_OK, EXIT_USAGE, _cache_path, cache_get, cache_key, cache_put, main,
    UsageError, parse_primes, parse_t,
)
from hypfermat.elimination import synth_form_from_curve
from hypfermat.elliptic import EllipticCurveQ


def run_cli(capsys, *argv):
    code = main(list(argv))
    out, err = capsys.readouterr()
    return code, out, err


def test_trace_example(capsys):
    code, out, _ = run_cli(capsys, "trace", "--params", "1/2,1/2;1,1", "--t", "2",
                           "--primes", "5..30")
    assert code == EXIT_OK
    doc = json.loads(out)
    qs = [r["q"] for r in doc["rows"]]
    assert qs == [5, 7, 11, 13, 17, 19, 23, 29]
    assert {13, 17, 29} <= set(qs)
    assert [r["trace"]["coeffs"] for r in doc["rows"]] == [[-2], [0], [0], [6], [2], [0], [0], [-10]]


def test_field_example(capsys):
    code, out, _ = run_cli(capsys, "field", "--params", "1/7,6/7;1,1")
    assert code == EXIT_OK
    assert json.loads(out) == {"N": 7, "H": [1, 6], "degree": 3, "totally_real": True}


def test_verify_rational_example(capsys):
    code, out, _ = run_cli(capsys, "verify-rational", "--family", "legendre", "--t", "2",
                           "--primes", "5..199")
    assert code == EXIT_OK
    assert json.loads(out)["all_equal"]


def test_monodromy(capsys):
    code, out, _ = run_cli(capsys, "monodromy", "--params", "1/2,1/2;1,1")
    assert code == EXIT_OK
    rows = json.loads(out)["rows"]
    assert [r["point"] for r in rows] == ["0", "1", "inf"]
    assert rows[2]["exponents"] == ["1/2"] and rows[0]["order"] == "inf"


def test_s3_and_congruence(capsys):
    code, out, _ = run_cli(capsys, "s3", "--params", "1/2,1/2;1,1", "--t", "3",
                           "--primes", "5..60", "--case", "13")
    assert code == EXIT_OK
    code, out, _ = run_cli(capsys, "congruence", "--left", "1/10,-1/10;1/5,-1/5",
                           "--right", "1/2,1/2;1,1", "--mod", "5", "--t", "2",
                           "--primes", "11..200")
    assert code == EXIT_OK
    assert all(r["equal"] for r in json.loads(out)["rows"])


def test_congruence_non_congruent_params_is_usage_error(capsys):
    code, _, err = run_cli(capsys, "congruence", "--left", "1/3,2/3;1,1",
                           "--right", "1/2,1/2;1,1", "--mod", "7", "--t", "2",
                           "--primes", "5..200")
    assert code == EXIT_USAGE and "not congruent" in err


def test_mismatch_exit_code(capsys, monkeypatch):
    # a deliberately wrong closed form must be reported, not hidden
    monkeypatch.setattr(cli, "legendre_conductor2_branch", lambda t0: (99, "broken"))
    code, out, _ = run_cli(capsys, "conductor2", "--t", "1/64")
    assert code == EXIT_MISMATCH and not json.loads(out)["equal"]


def test_conductor2(capsys):
    code, out, _ = run_cli(capsys, "conductor2", "--t", "1/64")
    doc = json.loads(out)
    assert code == EXIT_OK and doc["exponent"] == 1 and doc["equal"]


def test_hyperell(capsys):
    code, out, _ = run_cli(capsys, "hyperell", "--N", "5", "--t", "2", "--primes", "3..200")
    assert code == EXIT_OK and json.loads(out)["twist"] == 1
    code, out, _ = run_cli(capsys, "hyperell", "--N", "10", "--even", "--t", "2",
                           "--primes", "3..200")
    assert code == EXIT_OK and json.loads(out)["twist"] == -1
    code, _, err = run_cli(capsys, "hyperell", "--N", "10", "--t", "2", "--primes", "3..200")
    assert code == EXIT_USAGE and "--even" in err


def test_verify_euler(capsys):
    code, out, _ = run_cli(capsys, "verify-euler", "--params", "1/2,1/2;1,1", "--t", "2",
                           "--primes", "5..60")
    assert code == EXIT_OK


def test_eliminate(capsys, tmp_path):
    form = tmp_path / "f.json"
    synth_form_from_curve(EllipticCurveQ(0, 0, 1, -1, 0), [11, 31, 41]).write(form)
    argv = ["eliminate", "--instance", "1,1,2,5,5", "--params", "2/5,-2/5;1/5,-1/5",
            "--form", str(form), "--ells", "11,31,41"]
    code, out, _ = run_cli(capsys, *argv)
    doc = json.loads(out)
    assert code == EXIT_OK and doc["gcd"] == "638" and doc["candidates"] == [11, 29]
    code, out2, _ = run_cli(capsys, *argv, "--jobs", "3")
    assert out == out2
    code, _, err = run_cli(capsys, *argv[:-1], "11,13")
    assert code == EXIT_USAGE and "admissible" in err


@pytest.mark.parametrize("argv", [
    [],
    ["trace", "--params", "1/2,1/2;1,1", "--t", "1", "--primes", "5..30"],
    ["trace", "--params", "1/2,1/2;1,1", "--t", "0", "--primes", "5..30"],
    ["trace", "--params", "1/2,1/2;1/2,1", "--t", "2", "--primes", "5..30"],
    ["trace", "--params", "1/2,1/2;1,1", "--t", "2", "--primes", "30..5"],
    ["trace", "--params", "1/7,6/7;1,1", "--t", "2", "--primes", "5..12"],
    ["trace", "--params", "1/2,1/2;1,1", "--t", "2"],
    ["nosuch"],
    ["trace", "--params", "1/2,1/2;1,1", "--t", "2", "--primes", "5..30", "--jobs", "0"],
])
def test_usage_errors(capsys, argv):
    code, _, err = run_cli(capsys, *argv)
    assert code == EXIT_USAGE
    assert err.startswith("error:")


def test_explain_skips(capsys):
    _, out, _ = run_cli(capsys, "trace", "--params", "1/3,2/3;1,1", "--t", "2",
                        "--primes", "5..40", "--explain-skips")
    doc = json.loads(out)
    assert {s["q"] for s in doc["skipped"]} >= {5, 11, 17, 23, 29}
    _, out, _ = run_cli(capsys, "trace", "--params", "1/3,2/3;1,1", "--t", "2",
                        "--primes", "5..40")
    assert "skipped" not in json.loads(out)


def test_csv_projection(capsys):
    argv = ["trace", "--params", "1/5,-1/5;1,1", "--t", "2", "--primes", "5..60"]
    _, out_json, _ = run_cli(capsys, *argv)
    _, out_csv, _ = run_cli(capsys, *argv, "--format", "csv")
    rows = json.loads(out_json)["rows"]
    back = list(csv.DictReader(io.StringIO(out_csv)))
    assert len(back) == len(rows)
    for r, b in zip(rows, back):
        assert int(b["q"]) == r["q"]
        assert json.loads(b["H.numerator.coeffs"]) == r["H"]["numerator"]["coeffs"]
        assert int(b["H.qpow"]) == r["H"]["qpow"]


def test_output_file(capsys, tmp_path):
    out = tmp_path / "o.json"
    code, stdout, _ = run_cli(capsys, "field", "--params", "1/5,2/5;3/5,4/5", "-o", str(out))
    assert code == EXIT_OK and stdout == ""
    assert json.loads(out.read_text())["N"] == 5


def test_jobs_and_cache_byte_identical(capsys, tmp_path):
    argv = ["trace", "--params", "1/5,-1/5;1,1", "--t", "1/3", "--primes", "5..150"]
    _, plain, _ = run_cli(capsys, *argv)
    _, par, _ = run_cli(capsys, *argv, "--jobs", "4")
    _, cold, _ = run_cli(capsys, *argv, "--cache-dir", str(tmp_path))
    _, warm, _ = run_cli(capsys, *argv, "--cache-dir", str(tmp_path), "--jobs", "2")
    assert plain == par == cold == warm
    assert any(tmp_path.rglob("*.json"))


def test_cache_env_var(capsys, tmp_path, monkeypatch):
    monkeypatch.setenv("HYPFERMAT_CACHE", str(tmp_path))
    run_cli(capsys, "trace", "--params", "1/2,1/2;1,1", "--t", "2", "--primes", "5..20")
    assert len(list(tmp_path.rglob("*.json"))) == 6


def test_cache_roundtrip_and_miss(tmp_path):
    key = cache_key("1/2,1/2;1,1", "2", 5, "trace")
    assert cache_get(tmp_path, key) is None
    cache_put(tmp_path, key, {"trace": -2})
    assert cache_get(tmp_path, key) == {"trace": -2}
    assert cache_get(None, key) is None


def test_cache_corruption_recovers(tmp_path, capsys):
    argv = ["trace", "--params", "1/2,1/2;1,1", "--t", "2", "--primes", "5..5",
            "--cache-dir", str(tmp_path)]
    _, fresh, _ = run_cli(capsys, *argv)
    (path,) = list(tmp_path.rglob("*.json"))
    path.write_text("{truncated")
    with pytest.warns(UserWarning, match="corrupt"):
        _, again, _ = run_cli(capsys, *argv)
    assert again == fresh
    json.loads(path.read_text())


def _writer(args):
    d, i = args
    key = cache_key("1/5,2/5;3/5,4/5", "2", 11, "trace")
    for _ in range(30):
        cache_put(d, key, {"value": list(range(200)), "writer": 0})
    return i


def test_cache_concurrent_writers(tmp_path):
    with mp.get_context("spawn").Pool(8) as pool:
        assert sorted(pool.map(_writer, [(str(tmp_path), i) for i in range(8)])) == list(range(8))
    files = [p for p in tmp_path.rglob("*") if p.is_file()]
    key = cache_key("1/5,2/5;3/5,4/5", "2", 11, "trace")
    assert files == [_cache_path(tmp_path, key)]
    assert cache_get(tmp_path, key) == {"value": list(range(200)), "writer": 0}


def test_parse_helpers():
    assert parse_primes("5..30") == [5, 7, 11, 13, 17, 19, 23, 29]
    assert parse_primes("7,5,7") == [5, 7]
    with pytest.raises(UsageError):
        parse_primes("7,9")
    assert parse_t("-4/5").numerator == -4


def test_console_script_help():
    res = subprocess.run([sys.executable, "-m", "hypfermat.cli", "--help"],
                         capture_output=True, text=True)
    assert res.returncode == 0
    for name in ("trace", "eliminate", "hyperell", "verify-euler"):
        assert name in res.stdout
