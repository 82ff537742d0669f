"""Closed-form ``d lambda1 / d alpha`` and a finite-difference cross-check.

The closed forms are evaluated exactly as derived by implicit
differentiation of the ``tan`` characteristic relations:

* H1, any Robin pair: general formula in the tail constants ``A..D``,
  ``T1..T4`` and ``R1_hat``, ``R2_hat``; NN/DD/ND also have specialised
  versions with the exponentials written out.
* H2 and H3: only DD and ND; DN goes through the mirror identity
  ``lambda^DN(alpha) = lambda^ND(L - alpha - l)``.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Optional

from .eigen_core import PaperConstants, paper_constants, principal_eigenvalue, t_bar_dd, t_bar_nd
from .model import BoundarySpec, CaseTag, GrowthPair, NumericalError, SpectralResult, ZoneLayout

__all__ = [
    "SensitivityTerms",
    "NoFormula",
    "SingularDenominator",
    "dlambda_dalpha_closed",
    "dlambda_dalpha_specialised",
    "dlambda_dalpha_fd",
]

SINGULAR_RTOL = 1e-14


class NoFormula(NumericalError):
    pass


class SingularDenominator(NumericalError):
    pass


@dataclass(frozen=True)
class SensitivityTerms:
    constants: Optional[PaperConstants]  # None outside H1
    E_denominator: float
    dlambda_dalpha: float
    formula: str = ""
    numerator: float = float("nan")


def _finish(num: float, terms: list[float], formula: str,
            constants: Optional[PaperConstants] = None, sign: float = 1.0) -> SensitivityTerms:
    E = math.fsum(terms)
    scale = math.fsum(abs(t) for t in terms)
    if not (abs(E) > SINGULAR_RTOL * scale):
        raise SingularDenominator(f"{formula}: denominator {E:.3e} vs term scale {scale:.3e}")
    return SensitivityTerms(constants, E, sign * num / E, formula, num)


def _h1_general(f, g, lay, bc):
    L, al, l = lay.L, lay.alpha, lay.l
    pc = paper_constants(f, g, lay, bc)
    A, B, C, D = pc.A, pc.B, pc.C, pc.D
    num = f * g * g * (f * f + g * g) * pc.T1 * pc.T3
    terms = [
        -(f / (2 * g) + g / (2 * f)) * pc.T1 * pc.T4,
        f * (f * f + g * g) / 2 * pc.T1 * al * pc.T3,
        -2 * f * (A * A * f * f + C * C * g * g) * (L - l) * pc.R2,
        f * (B * B * f * f + D * D * g * g) * pc.R1_hat,
        f * (A * A * f * f + C * C * g * g) * math.exp(-2 * g * L) * pc.R2_hat,
        -l * (pc.T2 ** 2 + f * f * g * g * pc.T1 ** 2) / (2 * f),
    ]
    return _finish(num, terms, "robin_h1", pc)


def _h1_specialised(f, g, lay, code):
    """NN/DD/ND versions: hatted terms vanish and ``R2 = +-exp(-2 g L)``."""
    L, al, l = lay.L, lay.alpha, lay.l
    e2L = math.exp(-2 * g * L)
    ea, ea_m = math.exp(g * al), math.exp(-g * al)
    eb, eb_m = math.exp(g * (al + l)), math.exp(-g * (al + l))
    r1 = 1.0 if code[0] == "N" else -1.0
    r2 = e2L if code[1] == "N" else -e2L
    A, C = r1 * ea_m + ea, -r1 * ea_m + ea
    B, D = eb_m + r2 * eb, -eb_m + r2 * eb
    T1, T2, T3, T4 = B * C - A * D, f * f * A * B + g * g * C * D, B * C + A * D, A * B * f * f - C * D * g * g
    tail_sign = -1.0 if code == "NN" else 1.0
    num = f * g * g * (f * f + g * g) * T1 * T3
    terms = [
        -(f / (2 * g) + g / (2 * f)) * T1 * T4,
        f * (f * f + g * g) / 2 * T1 * al * T3,
        tail_sign * 2 * f * (A * A * f * f + C * C * g * g) * (L - l) * e2L,
        -l * (T2 ** 2 + f * f * g * g * T1 ** 2) / (2 * f),
    ]
    return _finish(num, terms, code.lower() + "_h1")


def _dd_h2(f, lay, literal=False):
    # Along alpha the eigenvalue leaves g'(0) + lambda1 = 0, so the g-dependence
    # of the tails still contributes; these are the g -> 0 limits of the H3
    # formulas. literal=True drops those contributions (g held at 0), which
    # disagrees with finite differences.
    L, al, l = lay.L, lay.alpha, lay.l
    be = L - al - l
    q = f * f * al * be - 1
    sec2 = 1 / math.cos(f * l) ** 2
    num = f * (L - l) * (-f * f * be + f * f * al)
    if literal:
        terms = [q * q * sec2 * l / (2 * f), -(L - l) * q / (2 * f), (L - l) * f * al * be]
    else:
        terms = [
            q * q * sec2 * l / (2 * f),
            f ** 3 * al * al * be * be * (al + be) / 3,
            f * (al + be) * (2 * al * al + al * be + 2 * be * be) / 6,
            (al + be) / (2 * f),
        ]
    return _finish(num, terms, "dd_h2_literal" if literal else "dd_h2")


def _nd_h2(f, lay, sign=1.0, literal=False):
    L, al, l = lay.L, lay.alpha, lay.l
    be = L - al - l
    if literal:
        terms = [f * f * l * (be / math.cos(f * l)) ** 2, be]
    else:
        # tan(f l) = 1 / (f beta) on the eigenvalue, so sec^2 beta^2 = beta^2 + 1/f^2;
        # stays finite when the zone touches the Dirichlet end (f l = pi/2, beta = 0)
        terms = [l * (f * f * be * be + 1), be, 2 * al, 2 * f * f * al * be * be, 2 * f * f * be ** 3 / 3]
    name = "nd_h2" + ("_literal" if literal else "") + ("" if sign > 0 else "_mirrored")
    return _finish(2 * f * f, terms, name, sign=sign)


def _dd_h3(f, g, lay, literal=False):
    # the sin^2(g alpha) tail term is f^3 (L-l)/2; literal=True keeps the
    # f^2 g (L-l)/2 variant, which disagrees with finite differences
    L, al, l = lay.L, lay.alpha, lay.l
    tb = t_bar_dd(f, g, lay)
    sec2 = 1 / math.cos(f * l) ** 2
    s, c = math.sin(g * (L - l)), math.cos(g * (L - l))
    s2 = math.sin(g * (L - 2 * al - l))
    num = (f * g ** 4 - f ** 3 * g * g) * s * s2
    terms = [
        tb * tb * sec2 * l / (2 * f),
        -0.5 * f * g * s * c,
        -f ** 3 / (2 * g) * s * math.sin(g * al) * math.sin(g * (L - al - l)),
        g ** 3 / (2 * f) * s * math.cos(g * al) * math.cos(g * (L - al - l)),
        0.5 * f * g * g * (L - l) * math.cos(g * al) ** 2,
        0.5 * (f * f * g if literal else f ** 3) * (L - l) * math.sin(g * al) ** 2,
        0.5 * (f ** 3 - f * g * g) * al * s * s2,
    ]
    return _finish(num, terms, "dd_h3_literal" if literal else "dd_h3")


def _nd_h3(f, g, lay, sign=1.0):
    L, al, l = lay.L, lay.alpha, lay.l
    tb = t_bar_nd(f, g, lay)
    sec2 = 1 / math.cos(f * l) ** 2
    s, c = math.sin(g * (L - l)), math.cos(g * (L - l))
    c2 = math.cos(g * (L - 2 * al - l))
    num = c * c2 * (f ** 3 * g * g - f * g ** 4)
    terms = [
        tb * tb * sec2 * l / (2 * f),
        0.5 * f * g * c * s,
        -f ** 3 / (2 * g) * c * math.cos(g * al) * math.sin(g * (L - al - l)),
        -g ** 3 / (2 * f) * c * math.sin(g * al) * math.cos(g * (L - al - l)),
        0.5 * f ** 3 * (L - l) * math.cos(g * al) ** 2,
        0.5 * f * g * g * (L - l) * math.sin(g * al) ** 2,
        -0.5 * (f ** 3 - f * g * g) * al * c * c2,
    ]
    return _finish(num, terms, "nd_h3" if sign > 0 else "nd_h3_mirrored", sign=sign)


def dlambda_dalpha_closed(result: SpectralResult, layout: ZoneLayout, bc: BoundarySpec,
                          growth: GrowthPair | None = None,
                          literal: bool = False) -> SensitivityTerms:
    """Closed-form derivative for the (case, boundary) pair of ``result``.

    ``literal=True`` selects the uncorrected DD/ND H2 denominators and the
    uncorrected DD H3 ``sin^2`` term (kept for comparison only).
    """
    f, g = result.f_tilde, result.g_tilde
    code = bc.code
    if result.case_tag == CaseTag.H1:
        return _h1_general(f, g, layout, bc)
    if code == "DD":
        if result.case_tag == CaseTag.H2:
            return _dd_h2(f, layout, literal)
        return _dd_h3(f, g, layout, literal)
    if code == "ND":
        if result.case_tag == CaseTag.H2:
            return _nd_h2(f, layout, literal=literal)
        return _nd_h3(f, g, layout)
    if code == "DN":
        mirror = layout.reflected()
        if result.case_tag == CaseTag.H2:
            return _nd_h2(f, mirror, sign=-1.0, literal=literal)
        return _nd_h3(f, g, mirror, sign=-1.0)
    raise NoFormula(f"no closed-form derivative for boundary pair {code} under {result.case_tag.value}")


def dlambda_dalpha_specialised(result: SpectralResult, layout: ZoneLayout,
                               bc: BoundarySpec) -> SensitivityTerms:
    """H1 NN/DD/ND derivative from the boundary-specific formulas (DN via the mirror)."""
    if result.case_tag != CaseTag.H1:
        raise NoFormula("specialised H1 formulas need case H1")
    code = bc.code
    if code in ("NN", "DD", "ND"):
        return _h1_specialised(result.f_tilde, result.g_tilde, layout, code)
    if code == "DN":
        t = _h1_specialised(result.f_tilde, result.g_tilde, layout.reflected(), "ND")
        return SensitivityTerms(None, t.E_denominator, -t.dlambda_dalpha, "nd_h1_mirrored", t.numerator)
    raise NoFormula(f"no specialised formula for {code}")


def dlambda_dalpha_fd(layout: ZoneLayout, bc: BoundarySpec, growth: GrowthPair,
                      step: float | None = None, richardson: bool = True) -> float:
    """Centred difference of ``lambda1`` in ``alpha`` (one-sided at the ends).

    Default step ``1e-4 L``. With ``richardson`` the step-``h`` and
    step-``h/2`` estimates are combined to cancel the leading error term.
    """
    L, al, l = layout.L, layout.alpha, layout.l
    amax = L - l
    h = 1e-4 * L if step is None else float(step)
    if not (h > 0):
        raise ValueError("step must be positive")
    tol = min(h ** 3, 1e-15)

    def lam(a):
        a = min(max(a, 0.0), amax)
        return principal_eigenvalue(layout.with_alpha(a), bc, growth, tol=tol).lambda1

    def diff(hh):
        if al - hh >= 0 and al + hh <= amax:
            return (lam(al + hh) - lam(al - hh)) / (2 * hh)
        if al + 2 * hh <= amax:
            return (-3 * lam(al) + 4 * lam(al + hh) - lam(al + 2 * hh)) / (2 * hh)
        if al - 2 * hh >= 0:
            return (3 * lam(al) - 4 * lam(al - hh) + lam(al - 2 * hh)) / (2 * hh)
        raise ValueError("step too large for the feasible alpha range")

    d1 = diff(h)
    if not richardson:
        return d1
    d2 = diff(h / 2)
    return d2 + (d2 - d1) / 3.0
