import json
import math
from fractions import Fraction as F

import pytest
from hypothesis import given, settings, strategies as st

from sympy import resultant, symbols

from hypfermat.cyclotomic import CyclotomicInteger, galois_apply
from hypfermat.elimination import (
    DiophantineInstance, EliminationRow, FormCoefficients, InadmissiblePrimeError,
    SchemaError, combine, count_S_ell_bruteforce, eliminate_at_ell, field_norm, ingest_form,
    parse_form, run_elimination, solutions_mod_ell, synth_form_from_curve,
    synth_form_from_motive,
)
from hypfermat.elliptic import EllipticCurveQ, FAMILIES, specialize_family
from hypfermat.hgm_core import make_parameter

P55 = make_parameter(F(2, 5), F(-2, 5), F(1, 5), F(-1, 5))
CURVE_37A = EllipticCurveQ(0, 0, 1, -1, 0)


@pytest.fixture(scope="module")
def inst55():
    return DiophantineInstance(1, 1, 2, 5, 5, P55)


def test_instance_validation():
    with pytest.raises(ValueError):
        DiophantineInstance(2, 4, 1, 3, 5)
    with pytest.raises(ValueError):
        DiophantineInstance(1, 1, 2, 4, 5)
    with pytest.raises(ValueError):
        DiophantineInstance(1, 1, 2, 5, 5)
    inst = DiophantineInstance(1, 1, 2, 3, 5)
    assert inst.N == 15
    assert inst.admissible(31) and not inst.admissible(11) and not inst.admissible(61 * 2)


def test_solutions_partition(inst55):
    ell = 11
    sols = solutions_mod_ell(inst55, ell)
    pts = sols.case1 + sols.case2a + sols.case2c + sols.case3
    assert len(pts) == len(set(pts)) == ell * ell - 1
    assert all(a and g and b for a, b, g in sols.case1)
    assert all(a == 0 for a, _, _ in sols.case2a)
    assert all(g == 0 for _, _, g in sols.case2c)
    assert all(b == 0 for _, b, _ in sols.case3)


@pytest.mark.parametrize("ell,r", [(11, 3), (11, 7), (31, 7)])
def test_count_against_bruteforce(inst55, ell, r):
    sols = solutions_mod_ell(inst55, ell, r)
    assert sols.size == count_S_ell_bruteforce(inst55, ell, r)
    for al, be, ga in sols.case1 + sols.case2a + sols.case2c + sols.case3:
        assert (al ** 5 + pow(be, r, ell) - 2 * ga ** 5) % ell == 0


def test_solutions_refuse_bad_input(inst55):
    with pytest.raises(InadmissiblePrimeError):
        solutions_mod_ell(inst55, 13)
    with pytest.raises(InadmissiblePrimeError):
        solutions_mod_ell(inst55, 11, 5)


def test_soundness_genuine_solution(inst55):
    # 1^5 + 1^r = 2 * 1^5 for every r
    ells = [ell for ell in range(3, 61) if inst55.admissible(ell)]
    assert ells == [11, 31, 41]
    form = synth_form_from_motive(inst55, 1, 1, 1, ells, r=7)
    rep = run_elimination(form, inst55, ells)
    assert rep.survives
    assert all(row.survived for row in rep.rows)


def test_soundness_mixed_exponents():
    inst = DiophantineInstance(1, 1, 2, 3, 5)
    form = synth_form_from_motive(inst, 1, 1, 1, [31], r=11)
    assert run_elimination(form, inst, [31]).survives


def test_synth_refuses_non_solution(inst55):
    with pytest.raises(ValueError):
        synth_form_from_motive(inst55, 1, 2, 1, [11], r=3)


def test_effectiveness_37a(inst55):
    form = synth_form_from_curve(CURVE_37A, [11, 31, 41])
    rep = run_elimination(form, inst55, [11, 31, 41])
    assert not rep.survives
    assert rep.gcd == 638 == 2 * 11 * 29
    assert rep.bound == 29
    assert rep.candidates == [11, 29]


def test_elimination_deterministic(inst55):
    form = synth_form_from_curve(CURVE_37A, [11, 31, 41])
    a = run_elimination(form, inst55, [11, 31, 41]).dumps()
    b = run_elimination(form, inst55, [41, 11, 31]).dumps()
    c = run_elimination(form, inst55, [11, 31, 41], jobs=3).dumps()
    assert a == b == c


def test_inadmissible_ell_refused(inst55):
    form = synth_form_from_curve(CURVE_37A, [13])
    with pytest.raises(InadmissiblePrimeError):
        run_elimination(form, inst55, [13])


def test_ell_plus_one_is_case3_witness():
    # with C = 1 the case beta = 0 is populated
    inst = DiophantineInstance(1, 1, 1, 5, 5, P55)
    form = FormCoefficients(1, {11: CyclotomicInteger.from_int(12, 1)})
    row = eliminate_at_ell(form, inst, 11)
    assert row.case_counts["3"] > 0
    assert {"case": "3", "sign": 1} in row.witnesses


def test_missing_coefficient_notice(inst55):
    form = FormCoefficients(1, {})
    row = eliminate_at_ell(form, inst55, 11)
    assert row.notices and not row.case_counts


def _row(ell, product):
    return EliminationRow(ell, {"1": 1}, product=product)


def test_combine_examples():
    rep = combine([_row(11, 40), _row(31, 28)], floor=1)
    assert rep.gcd == 4
    assert rep.bound == 2
    rep = combine([_row(11, 2 * 7 * 13)], floor=5)
    assert rep.gcd == 182 and rep.candidates == [7, 11, 13]
    with pytest.raises(ValueError):
        combine([])


@given(st.lists(st.tuples(st.sampled_from([11, 31, 41, 61, 71]), st.integers(1, 10 ** 6)),
                min_size=1, max_size=5))
def test_combine_gcd_property(pairs):
    rows = [_row(ell, n) for ell, n in pairs]
    rep = combine(rows)
    assert rep.gcd == math.gcd(*[n for _, n in pairs])
    for r in rep.candidates:
        assert all(n % r == 0 or (ell - 1) % r == 0 or ell == r for ell, n in pairs)


@settings(max_examples=25)
@given(st.lists(st.integers(-40, 40), min_size=4, max_size=4))
def test_field_norm_integral(coeffs):
    x = CyclotomicInteger(5, tuple(coeffs))
    if x.is_zero():
        return
    n = field_norm(x)
    # the full norm from Q(zeta_5) is a resultant with the cyclotomic polynomial
    k = len({galois_apply(x, j).coeffs for j in range(1, 5)})
    z = symbols("z")
    full = resultant(sum(c * z ** i for i, c in enumerate(coeffs)), z ** 4 + z ** 3 + z ** 2 + z + 1, z)
    assert n ** (4 // k) == full


def test_field_norm_examples():
    # 1 - zeta_5 has norm 5; a rational integer of degree 1 is its own norm
    assert field_norm(CyclotomicInteger(5, (1, -1, 0, 0))) == 5
    assert field_norm(CyclotomicInteger.from_int(7, 5)) == 7


def test_schema_errors():
    with pytest.raises(SchemaError, match="line 1"):
        parse_form("{not json")
    with pytest.raises(SchemaError):
        parse_form(json.dumps({"level": 1}))
    bad = '{\n "level": 1,\n "coefficients": [\n  {"ell": 11, "a": 1},\n  {"ell": 12, "a": 0}\n ]\n}'
    with pytest.raises(SchemaError, match="line 5"):
        parse_form(bad)
    with pytest.raises(SchemaError, match="non-integer"):
        parse_form('{"level": 1, "coefficients": [{"ell": 11, "a": {"coeffs": [1.5]}}]}')
    with pytest.raises(SchemaError, match="duplicate"):
        parse_form('{"level": 1, "coefficients": [{"ell": 11, "a": 1}, {"ell": 11, "a": 2}]}')
    with pytest.raises(SchemaError, match="does not divide"):
        parse_form('{"level": 5, "coefficients": [{"ell": 11, "a": {"level": 3, "coeffs": [1, 0]}}]}')


def test_weil_warning():
    with pytest.warns(UserWarning):
        parse_form('{"level": 1, "coefficients": [{"ell": 11, "a": 100}]}')


def test_write_ingest_roundtrip(tmp_path, inst55):
    form = synth_form_from_motive(inst55, 1, 1, 1, [11, 31], r=3)
    path = tmp_path / "form.json"
    form.write(path)
    back = ingest_form(path)
    assert back.level == form.level
    assert back.entries == form.entries
    assert back.provenance == "from_motive"


def test_form_from_curve_legendre():
    E = specialize_family(FAMILIES["legendre"], F(1, 2))
    form = synth_form_from_curve(E, [5, 7, 11])
    assert form.level == 1
    for ell in (5, 7, 11):
        # y^2 = x(x + 1)(x + 1/2) counted directly
        h = pow(2, -1, ell)
        n = 1 + sum(1 for x in range(ell) for y in range(ell)
                    if (y * y - x * (x + 1) * (x + h)) % ell == 0)
        assert form.entries[ell].as_integer() == ell + 1 - n
