from fractions import Fraction
from math import comb

import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from hvec import closed_forms as cf
from hvec.codes import DomainError

# reference values printed to a fixed number of decimals
REFERENCE = [
    ("RepX", 3, 0.1, "0.0124444"),
    ("Vec", 3, 0.1, "0.0036899"),
    ("Sur", 3, 0.1, "0.1368889"),
    ("CY", 3, 0.1, "1.512793"),
    ("FH", 1, 0.3, "0.907407"),
    ("FSqrtY", 1, 0.3, "0.844828"),
    ("FSymH", 1, 0.3, "0.980000"),
]


def exact_rep_x(d, p):
    p = Fraction(p)
    t = (d + 1) // 2
    return comb(d, t) * (1 - 2 * p / 3) ** ((d - 1) // 2) * (2 * p / 3) ** t


def exact_vec(d, p):
    p = Fraction(p)
    t = (d + 1) // 2
    return comb(d, t) * (1 - p) ** ((d - 1) // 2) * (p / 3) ** t / (1 - 2 * p / 3) ** d


@pytest.mark.parametrize("name,d,p,text", REFERENCE)
def test_reference_values(name, d, p, text):
    ulp = 10.0 ** -len(text.split(".")[1])
    assert abs(cf.evaluate(name, d, p) - float(text)) <= ulp


def test_rounding_of_reference_values():
    # most values round exactly; the overhead value is one unit high in its last digit
    assert round(cf.rep_x(3, 0.1), 7) == 0.0124444
    assert round(cf.vec(3, 0.1), 7) == 0.0036899
    assert round(cf.c_y(3, 0.1), 7) == 1.5127924
    assert round(cf.f_h(0.3), 6) == 0.907407


@pytest.mark.parametrize("d", [1, 3, 5, 7])
@pytest.mark.parametrize("p", ["0.001", "0.05", "0.3"])
def test_rational_oracle(d, p):
    assert cf.rep_x(d, float(p)) == pytest.approx(float(exact_rep_x(d, Fraction(p))), rel=1e-13)
    assert cf.vec(d, float(p)) == pytest.approx(float(exact_vec(d, Fraction(p))), rel=1e-13)


def test_fidelity_fractions():
    assert cf.f_h(0.3) == pytest.approx(0.49 / 0.54, abs=1e-15)
    assert cf.f_sqrt_y(0.3) == pytest.approx(0.49 / 0.58, abs=1e-15)
    assert cf.f_sym_h(0.3) == pytest.approx(0.49 / 0.50, abs=1e-15)


def test_rep_z_distance_one():
    assert cf.rep_z(1, 0.1) == pytest.approx(2 * 0.1 / 3)


@pytest.mark.parametrize("d", [1, 3, 5, 7])
@pytest.mark.parametrize("p", [1e-4, 1e-3, 0.005, 0.01])
def test_rep_z_small_p_expansion(d, p):
    assert abs(cf.rep_z(d, p) / (2 * d * p / 3) - 1) < 0.05


def test_ratio_limits():
    assert cf.improvement_ratios(3, 1e-6)[0] == pytest.approx(4.0, rel=1e-3)
    r, s = cf.improvement_ratios(5, 1e-6)
    assert r == pytest.approx(8.0, rel=1e-3) and s == pytest.approx(168.0, rel=1e-3)
    assert cf.improvement_ratios(3, 0.0) == (4.0, 44.0)
    assert cf.improvement_ratios(7, 0.0)[0] == 16.0


@pytest.mark.parametrize("d", [3, 5, 7])
@pytest.mark.parametrize("p", [1e-3, 0.05, 0.3])
def test_ratio_matches_quotient(d, p):
    r, s = cf.improvement_ratios(d, p)
    assert r == pytest.approx(cf.rep_x(d, p) / cf.vec(d, p), rel=1e-12)
    assert s == pytest.approx(cf.sur(d, p) / cf.vec(d, p), rel=1e-12)


def test_a_d():
    assert cf.a_d(3) == 33 and cf.a_d(5) == 210
    for d in (3, 5, 7):
        assert comb(d + 1, (d + 1) // 2) == 2 * comb(d, (d + 1) // 2)
    with pytest.raises(DomainError):
        cf.a_d(1)


def test_domain_errors():
    with pytest.raises(DomainError):
        cf.evaluate("RepX", 2, 0.1)
    with pytest.raises(DomainError):
        cf.evaluate("Vec", 3, 1.2)
    with pytest.raises(DomainError):
        cf.evaluate("FH", 1, 0.8)
    with pytest.raises(ValueError):
        cf.evaluate("Nope", 3, 0.1)
    with pytest.raises(DomainError):
        cf.improvement_ratios(1, 0.1)


@settings(max_examples=100, deadline=None)
@given(st.sampled_from([1, 3, 5, 7]), st.floats(0.0, 0.75))
def test_ranges(d, p):
    for name in ("RepX", "RepZ", "Vec", "PY", "PCorClosed", "PMaxClosed"):
        v = cf.evaluate(name, d, p)
        assert 0.0 <= v <= 1.0 + 1e-12
    assert cf.evaluate("CY", d, p) >= 1.0
    for name in ("FSqrtY", "FSymH"):
        assert 0.0 <= cf.evaluate(name, d, p) <= 1.0 + 1e-12


@settings(max_examples=200, deadline=None)
@given(st.floats(0.0, 0.75))
def test_fh_above_one_iff_denominator_small(p):
    a = (1 - p) ** 2
    den = a + (1 - p) * p / 3 - 2 * p * p / 9
    assert cf.fidelity_exceeds_one(p) == (den < a)
    if cf.fidelity_exceeds_one(p):
        assert cf.f_h(p) > 1.0
    elif p < 0.74:
        assert cf.f_h(p) <= 1.0 + 1e-15


def test_fh_exceeds_one_at_large_p():
    # denominator drops below numerator once 2p/9 > (1 - p)/3, i.e. p > 0.6
    assert not cf.fidelity_exceeds_one(0.59)
    assert cf.fidelity_exceeds_one(0.61)
    assert cf.f_h(0.7) > 1.0
