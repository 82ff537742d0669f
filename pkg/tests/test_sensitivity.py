import numpy as np
import pytest
from hypothesis import assume, given, settings, strategies as st

from allee_zone.eigen_core import principal_eigenvalue
from allee_zone.model import BoundarySpec, CaseTag, GrowthPair, ZoneLayout
from allee_zone.sensitivity import (
    NoFormula, SingularDenominator, _finish, dlambda_dalpha_closed, dlambda_dalpha_fd,
    dlambda_dalpha_specialised,
)

from cases import BCS, FIG, L, h2_growth, h2_layout


def closed(lay, bc, g=FIG, **kw):
    res = principal_eigenvalue(lay, bc, g)
    return dlambda_dalpha_closed(res, lay, bc, g, **kw)


def close_enough(a, b):
    return abs(a - b) <= max(1e-4 * abs(b), 1e-8)


@pytest.mark.parametrize("code", ["NN", "DD"])
def test_zero_at_midpoint(code):
    lay = ZoneLayout(L, 3.0, 4.0)
    assert abs(closed(lay, BCS[code]).dlambda_dalpha) <= 1e-6


def test_nn_example_matches_fd():
    lay = ZoneLayout(L, 1.0, 4.0)
    c = closed(lay, BCS["NN"]).dlambda_dalpha
    fd = dlambda_dalpha_fd(lay, BCS["NN"], FIG)
    assert c > 0
    assert close_enough(c, fd)


def test_nd_left_end_positive():
    assert closed(ZoneLayout(L, 0.0, 4.0), BCS["ND"]).dlambda_dalpha > 0


def test_nd_h3_positive():
    g = GrowthPair.cubic(0.2, 0.05)
    n = 0
    for l in (1.0, 1.5):
        for alpha in np.linspace(0, L - l, 6):
            lay = ZoneLayout(L, alpha, l)
            res = principal_eigenvalue(lay, BCS["ND"], g)
            if res.case_tag == CaseTag.H3:
                n += 1
                assert dlambda_dalpha_closed(res, lay, BCS["ND"]).dlambda_dalpha > 0
    assert n >= 4


def test_nd_h2_positive():
    lay = ZoneLayout(L, 6.5, 3.0)
    g = h2_growth(lay, BCS["ND"])
    res = principal_eigenvalue(lay, BCS["ND"], g)
    assert res.case_tag == CaseTag.H2
    assert dlambda_dalpha_closed(res, lay, BCS["ND"], g).dlambda_dalpha > 0


@pytest.mark.parametrize("code, sign", [("NN", 1), ("DD", -1)])
def test_symmetric_sign_pattern(code, sign):
    l = 3.0
    for a in np.linspace(0, L - l, 9):
        d = closed(ZoneLayout(L, a, l), BCS[code]).dlambda_dalpha
        mid = 0.5 * (L - l)
        if abs(a - mid) < 1e-12:
            assert abs(d) < 1e-6
        elif a < mid:
            assert sign * d > 0
        else:
            assert sign * d < 0


@pytest.mark.parametrize("code, sign", [("ND", 1), ("DN", -1)])
def test_monotone_sign_pattern(code, sign):
    for l in (2.5, 4.0):
        for a in np.linspace(0, L - l, 7):
            assert sign * closed(ZoneLayout(L, a, l), BCS[code]).dlambda_dalpha > 0


@st.composite
def h1_cases(draw):
    code = draw(st.sampled_from(["NN", "DD", "ND", "DN", "robin"]))
    if code == "robin":
        bc = BoundarySpec(*(draw(st.floats(0.1, 10)) for _ in range(4)))
    else:
        bc = BCS[code]
    l = draw(st.floats(0.5, 8.0))
    alpha = draw(st.floats(0.02, 0.98)) * (L - l)
    g = GrowthPair.cubic(draw(st.floats(0.1, 0.6)), draw(st.floats(0.05, 0.5)))
    return ZoneLayout(L, alpha, l), bc, g


@settings(max_examples=30)
@given(h1_cases())
def test_h1_closed_matches_fd(case):
    lay, bc, g = case
    res = principal_eigenvalue(lay, bc, g)
    assume(res.case_tag == CaseTag.H1)
    c = dlambda_dalpha_closed(res, lay, bc, g).dlambda_dalpha
    assert close_enough(c, dlambda_dalpha_fd(lay, bc, g))


@settings(max_examples=30)
@given(h1_cases())
def test_specialised_matches_general(case):
    lay, bc, g = case
    assume("R" not in bc.code)
    res = principal_eigenvalue(lay, bc, g)
    assume(res.case_tag == CaseTag.H1)
    gen = dlambda_dalpha_closed(res, lay, bc, g).dlambda_dalpha
    spec = dlambda_dalpha_specialised(res, lay, bc).dlambda_dalpha
    assert spec == pytest.approx(gen, rel=1e-8, abs=1e-12)


@pytest.mark.parametrize("code", ["DD", "ND", "DN"])
def test_h3_closed_matches_fd(code):
    g = GrowthPair.cubic(0.2, 0.05)
    n = 0
    for alpha in np.linspace(0, L - 1.5, 5):
        lay = ZoneLayout(L, alpha, 1.5)
        res = principal_eigenvalue(lay, BCS[code], g)
        if res.case_tag != CaseTag.H3:
            continue
        n += 1
        c = dlambda_dalpha_closed(res, lay, BCS[code], g).dlambda_dalpha
        assert close_enough(c, dlambda_dalpha_fd(lay, BCS[code], g))
    assert n >= 2


@pytest.mark.parametrize("code, alpha, l", [("DD", 1.0, 3.0), ("ND", 6.5, 3.0), ("DN", 0.5, 3.0)])
def test_h2_closed_matches_fd(code, alpha, l):
    lay = ZoneLayout(L, alpha, l)
    g = h2_growth(lay, BCS[code])
    res = principal_eigenvalue(lay, BCS[code], g)
    assert res.case_tag == CaseTag.H2
    c = dlambda_dalpha_closed(res, lay, BCS[code], g).dlambda_dalpha
    assert close_enough(c, dlambda_dalpha_fd(lay, BCS[code], g))


@pytest.mark.parametrize("code, alpha", [("DN", 0.0), ("ND", None)])
def test_h2_zone_touching_dirichlet_end(code, alpha):
    # f l = pi/2 and beta = 0: sec^2 overflows while beta^2 vanishes
    g = GrowthPair.cubic(0.2, 0.1)
    if alpha is None:
        mirror = h2_layout(0.0, BCS["DN"], g)
        lay = mirror.reflected()
    else:
        lay = h2_layout(alpha, BCS[code], g)
    res = principal_eigenvalue(lay, BCS[code], g)
    assert res.case_tag == CaseTag.H2
    c = dlambda_dalpha_closed(res, lay, BCS[code], g).dlambda_dalpha
    assert close_enough(c, dlambda_dalpha_fd(lay, BCS[code], g))


def test_literal_variants_disagree_with_fd():
    # kept for comparison: the g-held-fixed H2 forms and the f^2 g variant of
    # the DD H3 tail term miss finite differences by far more than 1e-4
    lay = ZoneLayout(L, 1.0, 3.0)
    g = h2_growth(lay, BCS["DD"])
    fd = dlambda_dalpha_fd(lay, BCS["DD"], g)
    lit = closed(lay, BCS["DD"], g, literal=True).dlambda_dalpha
    assert abs(lit - fd) > 0.1 * abs(fd)
    lay = ZoneLayout(L, 1.0, 2.5)
    fd = dlambda_dalpha_fd(lay, BCS["DD"], FIG)
    lit = closed(lay, BCS["DD"], FIG, literal=True).dlambda_dalpha
    assert abs(lit - fd) > 1e-3 * abs(fd)


def test_no_formula_for_robin_h3():
    bc = BoundarySpec(1.0, 5.0, 1.0, 5.0)
    lay = ZoneLayout(L, 0.0, 2.0)
    res = principal_eigenvalue(lay, bc, FIG)
    assert res.case_tag == CaseTag.H3
    with pytest.raises(NoFormula):
        dlambda_dalpha_closed(res, lay, bc)
    # the finite-difference path still works
    assert np.isfinite(dlambda_dalpha_fd(lay, bc, FIG))


def test_specialised_needs_h1():
    lay = ZoneLayout(L, 0.0, 2.5)
    res = principal_eigenvalue(lay, BCS["DD"], FIG)
    with pytest.raises(NoFormula):
        dlambda_dalpha_specialised(res, lay, BCS["DD"])


def test_singular_denominator():
    with pytest.raises(SingularDenominator):
        _finish(1.0, [1.0, -1.0], "test")


def test_fd_end_points_one_sided():
    lay = ZoneLayout(L, 0.0, 4.0)
    c = closed(lay, BCS["ND"]).dlambda_dalpha
    assert close_enough(c, dlambda_dalpha_fd(lay, BCS["ND"], FIG))
    lay = ZoneLayout(L, 6.0, 4.0)
    c = closed(lay, BCS["ND"]).dlambda_dalpha
    assert close_enough(c, dlambda_dalpha_fd(lay, BCS["ND"], FIG))
    with pytest.raises(ValueError):
        dlambda_dalpha_fd(lay, BCS["ND"], FIG, step=-1.0)
