import math

import numpy as np
import pytest
from hypothesis import assume, given, strategies as st

from allee_zone.baseline import spectral_bracket
from allee_zone.eigen_core import (
    IDENTITY, characteristic_residual, eigenfunction, piecewise_form, principal_eigenvalue,
    segment_transfer, tan_equations, total_transfer, verify_transcendental,
)
from allee_zone.model import BoundarySpec, CaseTag, GrowthPair, ZoneLayout

from cases import BCS, FIG, L, h2_growth

NN, DD, ND, DN = (BCS[k] for k in ("NN", "DD", "ND", "DN"))

# frozen from the finite-difference oracle (see test_fd_oracle)
GOLDEN_NN_3_4 = -0.0915991783734
GOLDEN_DD_35_3 = -0.014457062079


def _arr(m):
    return m.as_array()


def test_segment_transfer_examples():
    np.testing.assert_allclose(_arr(segment_transfer(0.3, 0.3, 2.0)), [[1, 2], [0, 1]], atol=1e-15)
    np.testing.assert_allclose(_arr(segment_transfer(0.7, -0.1, 0.0)), _arr(IDENTITY), atol=0)
    np.testing.assert_allclose(_arr(segment_transfer(1.0, 0.0, math.pi / 2)), [[0, 1], [-1, 0]],
                               atol=1e-15)


@given(st.floats(-5, 5), st.floats(-5, 5), st.floats(0, 50))
def test_determinant_is_one(lam, pot, length):
    m = segment_transfer(lam, pot, length)
    assert abs(m.determinant - 1.0) <= 1e-10 * _det_scale(m)


def _det_scale(m):
    # cosh^2 - sinh^2 cancels: rounding in the entries alone is eps * |m11 m22|
    s = math.exp(2 * m.log_scale)
    return max(1.0, 1e6 * np.finfo(float).eps * s * (abs(m.m11 * m.m22) + abs(m.m12 * m.m21)) / 1e-10)


@given(st.floats(-0.5, 0.5), st.floats(0, 6), st.floats(0.1, 4))
def test_composition_determinant(lam, alpha, l):
    m = total_transfer(lam, ZoneLayout(L, alpha, l), FIG)
    assert abs(m.determinant - 1.0) <= 1e-10 * _det_scale(m)


def test_series_branch_continuity():
    # small |q| len^2 switches to the Taylor series; both sides must agree
    for q in (1e-9, 1e-5, 0.999e-2 / 4, 1.001e-2 / 4):
        for sgn in (1, -1):
            a = _arr(segment_transfer(sgn * q, 0.0, 2.0))
            k = math.sqrt(q)
            if sgn > 0:
                ref = [[math.cos(2 * k), math.sin(2 * k) / k], [-k * math.sin(2 * k), math.cos(2 * k)]]
            else:
                ref = [[math.cosh(2 * k), math.sinh(2 * k) / k], [k * math.sinh(2 * k), math.cosh(2 * k)]]
            np.testing.assert_allclose(a, ref, rtol=1e-12, atol=1e-14)


def test_residual_examples():
    lay = ZoneLayout(L, 3.0, 4.0)
    res = principal_eigenvalue(lay, NN, FIG)
    assert abs(characteristic_residual(res.lambda1, lay, NN, FIG)) < 1e-10
    whole = ZoneLayout(L, 0.0, L)
    assert characteristic_residual(-0.2, whole, NN, FIG) == pytest.approx(0.0, abs=1e-15)
    lo = characteristic_residual(-0.2, lay, NN, FIG)
    hi = characteristic_residual(0.02, lay, NN, FIG)
    assert lo * hi < 0


def test_principal_examples():
    assert principal_eigenvalue(ZoneLayout(L, 0.0, L), NN, FIG).lambda1 == pytest.approx(-0.2, abs=1e-14)
    res = principal_eigenvalue(ZoneLayout(L, 3.0, 4.0), NN, FIG)
    assert res.lambda1 < 0 and res.case_tag == CaseTag.H1
    assert res.lambda1 == pytest.approx(GOLDEN_NN_3_4, abs=1e-10)


def test_dd_centred_short_zone():
    # zone [3.5, 6.5] under Dirichlet ends: lambda1 is slightly negative
    res = principal_eigenvalue(ZoneLayout(L, 3.5, 3.0), DD, FIG)
    assert res.lambda1 == pytest.approx(GOLDEN_DD_35_3, abs=1e-10)
    assert res.lambda1 < 0
    # at the habitat end the same zone is too weak
    assert principal_eigenvalue(ZoneLayout(L, 0.0, 3.0), DD, FIG).lambda1 > 0


def test_eigenfunction_examples():
    whole = ZoneLayout(L, 0.0, L)
    res = principal_eigenvalue(whole, NN, FIG)
    np.testing.assert_allclose(res.phi, 1.0, atol=1e-12)
    lay = ZoneLayout(L, 1.0, 4.0)
    res = principal_eigenvalue(lay, DD, FIG)
    assert abs(res.phi[0]) < 1e-12 and abs(res.phi[-1]) < 1e-12
    lay = ZoneLayout(L, 3.0, 4.0)
    res = principal_eigenvalue(lay, NN, FIG, n_samples=513)
    np.testing.assert_allclose(res.phi, res.phi[::-1], atol=1e-8)
    assert res.x[np.argmax(res.phi)] == pytest.approx(5.0)
    samples = eigenfunction(res, lay, NN, FIG, n_samples=101)
    assert len(samples) == 101 and max(p for _, p in samples) == pytest.approx(1.0)


def test_tan_residual_examples():
    lay = ZoneLayout(L, 3.0, 4.0)
    res = principal_eigenvalue(lay, NN, FIG)
    rep = verify_transcendental(res, lay, NN)
    assert set(rep) == {"robin_h1", "nn_h1"}
    assert max(abs(v) for v in rep.values()) <= 1e-6
    res = principal_eigenvalue(ZoneLayout(L, 0.0, 4.0), NN, FIG)
    assert 0 < res.f_tilde * 4.0 < math.pi / 2
    res = principal_eigenvalue(ZoneLayout(L, 0.0, 8.0), DD, FIG)
    assert res.case_tag == CaseTag.H1
    assert math.pi / 2 < res.f_tilde * 8.0 < math.pi


@pytest.mark.parametrize("code, alpha, l", [("DD", 1.0, 3.0), ("ND", 6.5, 3.0), ("DN", 0.5, 3.0)])
def test_h2_relations(code, alpha, l):
    lay = ZoneLayout(L, alpha, l)
    g = h2_growth(lay, BCS[code])
    res = principal_eigenvalue(lay, BCS[code], g)
    assert res.case_tag == CaseTag.H2
    rep = verify_transcendental(res, lay, BCS[code])
    assert len(rep) == 1 and abs(next(iter(rep.values()))) <= 1e-6


@pytest.mark.parametrize("code, alpha", [("DD", 0.0), ("ND", 7.5), ("DN", 0.0)])
def test_h3_relations(code, alpha):
    lay = ZoneLayout(L, alpha, 2.5)
    res = principal_eigenvalue(lay, BCS[code], FIG)
    assert res.case_tag == CaseTag.H3
    rep = verify_transcendental(res, lay, BCS[code])
    assert len(rep) == 1 and abs(next(iter(rep.values()))) <= 1e-6


def test_nn_has_no_h3_relation():
    res = principal_eigenvalue(ZoneLayout(L, 0.0, 0.3), NN, FIG)
    assert res.case_tag == CaseTag.H1


bcs = st.sampled_from(list(BCS.values())) | st.builds(
    BoundarySpec, st.floats(0.05, 20), st.floats(0.05, 20), st.floats(0.05, 20), st.floats(0.05, 20))
growths = st.tuples(st.floats(0.05, 1.0), st.floats(0.02, 0.9)).map(lambda p: GrowthPair.cubic(*p))


@st.composite
def layouts(draw, Lmax=30.0):
    Lv = draw(st.floats(1.0, Lmax))
    l = draw(st.floats(0.02, 1.0)) * Lv
    alpha = draw(st.floats(0.0, 1.0)) * (Lv - l)
    return ZoneLayout(Lv, alpha, l)


@given(layouts(), bcs, growths)
def test_bracket_and_positivity(lay, bc, g):
    assume(lay.l < lay.L)
    res = principal_eigenvalue(lay, bc, g)
    br = spectral_bracket(lay.L, bc, g)
    assert br.lo < res.lambda1 < br.hi
    assert res.lambda1 + g.fp0 > 0
    assert np.all(res.phi[1:-1] > 0)


@given(layouts(), bcs, growths, st.floats(0.05, 0.95))
def test_decreasing_in_length(lay, bc, g, frac):
    shorter = ZoneLayout(lay.L, lay.alpha, lay.l * frac)
    lam_long = principal_eigenvalue(lay, bc, g).lambda1
    lam_short = principal_eigenvalue(shorter, bc, g).lambda1
    assert lam_short > lam_long


@given(layouts(), st.sampled_from(["NN", "DD"]), growths)
def test_reflection_symmetry(lay, code, g):
    a = principal_eigenvalue(lay, BCS[code], g).lambda1
    b = principal_eigenvalue(lay.reflected(), BCS[code], g).lambda1
    assert abs(a - b) <= 1e-8


@given(layouts(), bcs, growths)
def test_mirror_boundary(lay, bc, g):
    a = principal_eigenvalue(lay, bc, g).lambda1
    b = principal_eigenvalue(lay.reflected(), bc.reflected(), g).lambda1
    assert abs(a - b) <= 1e-8


@given(layouts(), bcs, growths)
def test_piecewise_form_continuity(lay, bc, g):
    res = principal_eigenvalue(lay, bc, g)
    pieces = piecewise_form(res, lay, bc, g)
    scale = max(float(np.max(np.abs(p.value(np.linspace(p.x0, p.x1, 33))))) for p in pieces)
    for p, q in zip(pieces, pieces[1:]):
        assert abs(float(p.value(p.x1)) - float(q.value(q.x0))) <= 1e-8 * scale
        assert abs(float(p.derivative(p.x1)) - float(q.derivative(q.x0))) <= 1e-8 * scale * max(1, res.f_tilde)
    # boundary rows hold
    left, right = pieces[0], pieces[-1]
    assert abs(bc.a1 * float(left.derivative(0.0)) - bc.a2 * float(left.value(0.0))) <= 1e-8 * scale
    xr = lay.L
    assert abs(bc.b1 * float(right.derivative(xr)) + bc.b2 * float(right.value(xr))) <= 1e-7 * scale * (1 + bc.b1 + bc.b2)


def test_large_habitat_no_overflow():
    g = GrowthPair.cubic(0.5, 0.5)
    res = principal_eigenvalue(ZoneLayout(300.0, 10.0, 5.0), DD, g)
    assert math.isfinite(res.lambda1)
    assert np.all(np.isfinite(res.phi))


def test_tan_equations_keys_for_mirror():
    lay = ZoneLayout(L, 1.0, 4.0)
    res = principal_eigenvalue(lay, DN, FIG)
    assert set(tan_equations(res, lay, DN)) == {"robin_h1", "nd_h1_mirrored"}


def test_rejects_bad_tol():
    with pytest.raises(ValueError):
        principal_eigenvalue(ZoneLayout(L, 1.0, 2.0), NN, FIG, tol=0.0)
