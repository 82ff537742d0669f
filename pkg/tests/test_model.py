import math

import numpy as np
import pytest
from hypothesis import given, strategies as st

from allee_zone.model import (
    BCKind, BoundarySpec, CaseTag, GrowthPair, Verdict, ZoneLayout, classify_case, verdict_from_sign,
)


@pytest.mark.parametrize("lam, expected", [(-0.05, CaseTag.H1), (0.02, CaseTag.H2), (0.10, CaseTag.H3)])
def test_classify_case_examples(lam, expected):
    assert classify_case(lam, -0.02, tol=1e-10) == expected


def test_h2_band():
    assert classify_case(0.02 + 5e-10, -0.02) == CaseTag.H2
    assert classify_case(0.02 + 5e-9, -0.02) == CaseTag.H3


@given(st.floats(0.01, 10.0), st.floats(0.01, 0.99))
def test_default_laws_vanish_at_roots(r, a):
    g = GrowthPair.cubic(r, a)
    assert abs(g.fp0 - r) == 0 and abs(g.gp0 + r * a) <= 1e-15
    for u in (0.0, 1.0):
        assert abs(g.f_eval(np.array(u))) <= 1e-14
    for u in (0.0, a, 1.0):
        assert abs(g.g_eval(np.array(u))) <= 1e-14


def test_subhomogeneity_rejected():
    with pytest.raises(ValueError):
        GrowthPair.from_slopes(0.1, -0.2)


@pytest.mark.parametrize("kwargs", [dict(fp0=-0.1, gp0=-0.01), dict(fp0=0.1, gp0=0.01)])
def test_sign_conditions(kwargs):
    with pytest.raises(ValueError):
        GrowthPair.from_slopes(**kwargs)


@given(st.floats(0.01, 5.0), st.floats(0.01, 0.99))
def test_from_slopes_matches_linearisation(fp0, ratio):
    g = GrowthPair.from_slopes(fp0, -ratio * fp0)
    h = 1e-10
    assert math.isclose(float(g.f_eval(np.array(h))) / h, fp0, rel_tol=1e-6)
    assert math.isclose(float(g.g_eval(np.array(h))) / h, -ratio * fp0, rel_tol=1e-5)


def test_boundary_kinds():
    bc = BoundarySpec(1.0, 0.0, 0.0, 1.0)
    assert bc.kind_left == BCKind.NEUMANN and bc.kind_right == BCKind.DIRICHLET
    assert bc.code == "ND"
    assert BoundarySpec(1.0, 2.0, 1.0, 0.0).code == "RN"
    assert BoundarySpec.from_keyword("dn") == BoundarySpec(0.0, 1.0, 1.0, 0.0)
    assert BoundarySpec.parse_raw("1, 0.5, 0, 1") == BoundarySpec(1.0, 0.5, 0.0, 1.0)
    assert bc.reflected().code == "DN"


@pytest.mark.parametrize("coeffs", [(0, 0, 1, 0), (1, 0, 0, 0), (-1, 1, 1, 0), (1, math.inf, 1, 0)])
def test_boundary_rejects(coeffs):
    with pytest.raises(ValueError):
        BoundarySpec(*coeffs)


@pytest.mark.parametrize("text", ["NX", "N", "NND"])
def test_bad_keyword(text):
    with pytest.raises(ValueError):
        BoundarySpec.from_keyword(text)


def test_layout_validation():
    ZoneLayout(10.0, 6.0, 4.0)
    for args in [(10.0, 7.0, 4.0), (10.0, -1.0, 2.0), (10.0, 1.0, 0.0), (0.0, 0.0, 1.0)]:
        with pytest.raises(ValueError):
            ZoneLayout(*args)
    lay = ZoneLayout(10.0, 1.0, 3.0)
    assert lay.reflected() == ZoneLayout(10.0, 6.0, 3.0)
    assert lay.segments == (1.0, 3.0, 6.0)


def test_verdict_from_sign():
    assert verdict_from_sign(-0.1).verdict == Verdict.PERSIST
    assert verdict_from_sign(0.1).verdict == Verdict.EXTINCT
    assert verdict_from_sign(1e-5, band=1e-3).verdict == Verdict.UNDECIDED
