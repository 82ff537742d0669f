"""Principal eigenvalue of ``-phi'' + H(x) phi = lambda phi`` with piecewise-constant ``H``.

``H = -f'(0)`` on the zone and ``-g'(0)`` elsewhere. On each constant
segment the pair ``(phi, phi')`` is propagated exactly by a 2x2 matrix, so
the boundary functional at ``x = L`` is a smooth function of lambda whose
zeros are the eigenvalues. The ``tan``-form characteristic equations for
the H1/H2/H3 regimes are kept only as an after-the-fact check
(:func:`verify_transcendental`).
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from .baseline import bisect, lambda0, spectral_bracket
from .model import (
    BCKind,
    BoundarySpec,
    CaseTag,
    GrowthPair,
    NumericalError,
    SpectralResult,
    ZoneLayout,
    classify_case,
)

__all__ = [
    "TransferMatrix",
    "PaperConstants",
    "NoSignChange",
    "NodeCountNonzero",
    "ResidualTooLarge",
    "segment_transfer",
    "characteristic_residual",
    "principal_eigenvalue",
    "eigenfunction",
    "piecewise_form",
    "paper_constants",
    "tan_equations",
    "verify_transcendental",
]

N_SCAN_PANELS = 256
N_NODE_SAMPLES = 512
RESIDUAL_LIMIT = 1e-6
_SERIES_LIMIT = 1e-2   # |q| len^2 below this uses the Taylor series of cos/sinc
_SCALE_LIMIT = 30.0    # kappa len above this factors out exp(kappa len)


class NoSignChange(NumericalError):
    pass


class NodeCountNonzero(NumericalError):
    pass


class ResidualTooLarge(NumericalError):
    pass


@dataclass(frozen=True)
class TransferMatrix:
    """Maps ``(phi, phi')`` at a segment's left end to its right end.

    The true propagator is ``exp(log_scale) * [[m11, m12], [m21, m22]]``;
    ``log_scale`` is nonzero only for long hyperbolic segments.
    """

    m11: float
    m12: float
    m21: float
    m22: float
    log_scale: float = 0.0

    def __matmul__(self, other: "TransferMatrix") -> "TransferMatrix":
        # (self @ other) applies `other` first
        return TransferMatrix(
            self.m11 * other.m11 + self.m12 * other.m21,
            self.m11 * other.m12 + self.m12 * other.m22,
            self.m21 * other.m11 + self.m22 * other.m21,
            self.m21 * other.m12 + self.m22 * other.m22,
            self.log_scale + other.log_scale,
        )

    def apply(self, phi: float, dphi: float) -> tuple[float, float]:
        return self.m11 * phi + self.m12 * dphi, self.m21 * phi + self.m22 * dphi

    @property
    def determinant(self) -> float:
        d = self.m11 * self.m22 - self.m12 * self.m21
        return d * math.exp(2 * self.log_scale) if self.log_scale else d

    def as_array(self) -> np.ndarray:
        s = math.exp(self.log_scale) if self.log_scale else 1.0
        return s * np.array([[self.m11, self.m12], [self.m21, self.m22]])


IDENTITY = TransferMatrix(1.0, 0.0, 0.0, 1.0)


def _cos_sinc(z: float) -> tuple[float, float, float]:
    """``(cos sqrt(z), sin sqrt(z)/sqrt(z), log_scale)`` continued to ``z <= 0``."""
    if abs(z) < _SERIES_LIMIT:
        c, s, term_c, term_s = 0.0, 0.0, 1.0, 1.0
        for n in range(8):
            c += term_c
            s += term_s
            term_c *= -z / ((2 * n + 1) * (2 * n + 2))
            term_s *= -z / ((2 * n + 2) * (2 * n + 3))
        return c, s, 0.0
    if z > 0:
        w = math.sqrt(z)
        return math.cos(w), math.sin(w) / w, 0.0
    w = math.sqrt(-z)
    if w > _SCALE_LIMIT:
        e = math.exp(-2 * w)
        return 0.5 * (1 + e), 0.5 * (1 - e) / w, w
    return math.cosh(w), math.sinh(w) / w, 0.0


def segment_transfer(lam: float, potential: float, length: float) -> TransferMatrix:
    """Exact propagator of ``phi'' = (potential - lam) phi`` over ``length``."""
    if length < 0:
        raise ValueError("segment length must be nonnegative")
    if length == 0:
        return IDENTITY
    q = lam - potential
    c, s, log_scale = _cos_sinc(q * length * length)
    return TransferMatrix(c, length * s, -q * length * s, c, log_scale)


def _potentials(growth: GrowthPair) -> tuple[float, float, float]:
    return -growth.gp0, -growth.fp0, -growth.gp0


def total_transfer(lam: float, layout: ZoneLayout, growth: GrowthPair) -> TransferMatrix:
    m = IDENTITY
    for pot, length in zip(_potentials(growth), layout.segments):
        m = segment_transfer(lam, pot, length) @ m
    return m


def characteristic_residual(lam: float, layout: ZoneLayout, bc: BoundarySpec,
                            growth: GrowthPair) -> float:
    """Right boundary functional of the solution started at ``(phi, phi') = (a1, a2)``.

    Any overflow-guarding scale factor is dropped; it is positive, so the
    sign and the zero set are unaffected.
    """
    m = total_transfer(lam, layout, growth)
    phi, dphi = m.apply(bc.a1, bc.a2)
    return bc.b1 * dphi + bc.b2 * phi


def _cos_sinc_array(z: np.ndarray) -> tuple[np.ndarray, np.ndarray, np.ndarray]:
    """Vectorised :func:`_cos_sinc`."""
    c = np.empty_like(z)
    s = np.empty_like(z)
    log_scale = np.zeros_like(z)
    small = np.abs(z) < _SERIES_LIMIT
    if np.any(small):
        zs = z[small]
        cc, ss = np.zeros_like(zs), np.zeros_like(zs)
        tc, ts = np.ones_like(zs), np.ones_like(zs)
        for n in range(8):
            cc += tc
            ss += ts
            tc = tc * (-zs / ((2 * n + 1) * (2 * n + 2)))
            ts = ts * (-zs / ((2 * n + 2) * (2 * n + 3)))
        c[small], s[small] = cc, ss
    pos = ~small & (z > 0)
    if np.any(pos):
        w = np.sqrt(z[pos])
        c[pos], s[pos] = np.cos(w), np.sin(w) / w
    neg = ~small & (z < 0)
    if np.any(neg):
        w = np.sqrt(-z[neg])
        e = np.exp(-2 * w)
        c[neg], s[neg] = 0.5 * (1 + e), 0.5 * (1 - e) / w
        log_scale[neg] = w
    return c, s, log_scale


def _sample_phi(lam: float, layout: ZoneLayout, bc: BoundarySpec, growth: GrowthPair,
                x: np.ndarray) -> tuple[np.ndarray, np.ndarray]:
    """``phi`` and ``phi'`` at sorted points ``x``.

    The left tail and the zone are propagated forward from ``x = 0``. The
    right tail is propagated backward from ``x = L`` and matched in value at
    the zone edge: forward propagation through a decaying tail amplifies the
    rounding error in ``lam`` by ``exp(kappa * len)``.
    """
    x = np.asarray(x, dtype=float)
    phi = np.empty_like(x)
    dphi = np.empty_like(x)
    state = np.array([bc.a1, bc.a2], dtype=float)
    log_norm = 0.0
    start = 0.0
    pots = _potentials(growth)
    for pot, end in zip(pots[:2], (layout.alpha, layout.end)):
        mask = (x >= start) & (x < end)
        if np.any(mask):
            ds = x[mask] - start
            q = lam - pot
            c, sn, ls = _cos_sinc_array(q * ds * ds)
            with np.errstate(over="ignore"):
                scale = np.exp(ls + log_norm)
            phi[mask] = scale * (c * state[0] + ds * sn * state[1])
            dphi[mask] = scale * (-q * ds * sn * state[0] + c * state[1])
        m = segment_transfer(lam, pot, end - start)
        state = np.array(m.apply(*state))
        nrm = float(np.hypot(*state))
        if nrm > 0:
            state /= nrm
            log_norm += m.log_scale + math.log(nrm)
        start = end

    mask = x >= start
    if not np.any(mask):
        return phi, dphi
    q = lam - pots[2]
    tail = layout.L - start
    # psi(y) = phi(L - y) starts from the right boundary row
    p0, dp0 = float(bc.b1), float(bc.b2)
    nrm = math.hypot(p0, dp0)
    p0, dp0 = p0 / nrm, dp0 / nrm
    ce, se, lse = _cos_sinc(q * tail * tail)
    psi_edge = ce * p0 + tail * se * dp0
    if tail == 0 or not (psi_edge != 0 and state[0] != 0):
        # degenerate match: fall back to forward propagation
        ds = x[mask] - start
        c, sn, ls = _cos_sinc_array(q * ds * ds)
        with np.errstate(over="ignore"):
            scale = np.exp(ls + log_norm)
        phi[mask] = scale * (c * state[0] + ds * sn * state[1])
        dphi[mask] = scale * (-q * ds * sn * state[0] + c * state[1])
        return phi, dphi
    y = layout.L - x[mask]
    c, sn, ls = _cos_sinc_array(q * y * y)
    with np.errstate(over="ignore"):
        scale = np.exp(ls - lse + log_norm) * (state[0] / psi_edge)
    phi[mask] = scale * (c * p0 + y * sn * dp0)
    dphi[mask] = -scale * (-q * y * sn * p0 + c * dp0)
    return phi, dphi


def _scan_roots(fun, lo: float, hi: float, n: int) -> tuple[float, float, float]:
    grid = np.linspace(lo, hi, n + 1)
    prev_x, prev_v = grid[0], fun(grid[0])
    if prev_v == 0:
        return prev_x, prev_x, prev_v
    for x in grid[1:]:
        v = fun(x)
        if v == 0 or (v < 0) != (prev_v < 0):
            return prev_x, x, prev_v
        prev_x, prev_v = x, v
    raise NoSignChange(f"no sign change of the characteristic residual on [{lo}, {hi}]")


def principal_eigenvalue(layout: ZoneLayout, bc: BoundarySpec, growth: GrowthPair,
                         tol: float = 1e-13, n_samples: int = N_NODE_SAMPLES) -> SpectralResult:
    """Smallest eigenvalue ``lambda1(alpha, l)`` and its positive eigenfunction."""
    if not (tol > 0):
        raise ValueError("tol must be positive")
    br = spectral_bracket(layout.L, bc, growth)

    def res(lam):
        return characteristic_residual(lam, layout, bc, growth)

    # tails shorter than 1e-12 L move lambda1 by less than the bisection tolerance
    fills = layout.L - layout.segments[1] <= 1e-12 * layout.L
    if fills:
        # constant potential -f'(0) on the whole habitat
        lam = br.lo
    else:
        eps = 1e-12 * br.width
        f_edge, f_eps = res(br.lo), res(br.lo + eps)
        if f_edge != 0 and (f_edge < 0) != (f_eps < 0):
            # a zone covering almost all of the habitat puts lambda1 within
            # eps of the lower bracket end
            lo, hi, flo = br.lo, br.lo + eps, f_edge
        else:
            # br.hi is the zone-free eigenvalue; a tiny zone leaves lambda1 just below it
            lo, hi, flo = _scan_roots(res, br.lo + eps, br.hi, N_SCAN_PANELS)
        lam = lo if lo == hi else bisect(res, lo, hi, flo=flo, xtol=tol)

    # equality only when the zone fills a Neumann habitat
    if not (lam + growth.fp0 > 0 or (lam + growth.fp0 == 0 and fills)):
        raise NumericalError(f"lambda1 + f'(0) = {lam + growth.fp0} is not positive")

    x = np.linspace(0.0, layout.L, n_samples)
    phi, _ = _sample_phi(lam, layout, bc, growth, x)
    if not np.all(np.isfinite(phi)):
        raise NumericalError("eigenfunction sampling overflowed")
    interior = phi[1:-1]
    if not (np.all(interior > 0) or np.all(interior < 0)):
        raise NodeCountNonzero(f"eigenfunction at lambda={lam} changes sign in (0, L)")
    phi = phi / phi[np.argmax(np.abs(phi))]

    s = growth.gp0 + lam
    return SpectralResult(
        lambda1=float(lam),
        case_tag=classify_case(lam, growth.gp0),
        f_tilde=math.sqrt(growth.fp0 + lam),
        g_tilde=math.sqrt(abs(s)),
        residual=float(res(lam)),
        phi_samples=tuple(zip(x.tolist(), phi.tolist())),
    )


def eigenfunction(result: SpectralResult, layout: ZoneLayout, bc: BoundarySpec,
                  growth: GrowthPair, n_samples: int = 512) -> list[tuple[float, float]]:
    """``n_samples`` equispaced values of the principal eigenfunction, max normalised to 1."""
    x = np.linspace(0.0, layout.L, n_samples)
    phi, _ = _sample_phi(result.lambda1, layout, bc, growth, x)
    phi = phi / phi[np.argmax(np.abs(phi))]
    return list(zip(x.tolist(), phi.tolist()))


@dataclass(frozen=True)
class Piece:
    """``phi`` on ``[x0, x1]`` in a global-``x`` basis.

    ``kind`` is ``"trig"`` (``ca cos kx + cb sin kx``), ``"exp"``
    (``ca e^{-kx} + cb e^{kx}``) or ``"linear"`` (``ca + cb x``).
    """

    x0: float
    x1: float
    kind: str
    k: float
    ca: float
    cb: float

    def value(self, x):
        x = np.asarray(x, dtype=float)
        if self.kind == "trig":
            return self.ca * np.cos(self.k * x) + self.cb * np.sin(self.k * x)
        if self.kind == "exp":
            return self.ca * np.exp(-self.k * x) + self.cb * np.exp(self.k * x)
        return self.ca + self.cb * x

    def derivative(self, x):
        x = np.asarray(x, dtype=float)
        k = self.k
        if self.kind == "trig":
            return k * (-self.ca * np.sin(k * x) + self.cb * np.cos(k * x))
        if self.kind == "exp":
            return k * (-self.ca * np.exp(-k * x) + self.cb * np.exp(k * x))
        return self.cb + 0 * x


def _piece(start: float, end: float, q: float, phi: float, dphi: float) -> Piece:
    """Segment solution through the state ``(phi, phi')`` at ``x = start``."""
    if q > 0:
        k = math.sqrt(q)
        c, s = math.cos(k * start), math.sin(k * start)
        return Piece(start, end, "trig", k, phi * c - dphi / k * s, phi * s + dphi / k * c)
    if q < 0:
        k = math.sqrt(-q)
        return Piece(start, end, "exp", k, 0.5 * (phi - dphi / k) * math.exp(k * start),
                     0.5 * (phi + dphi / k) * math.exp(-k * start))
    return Piece(start, end, "linear", 0.0, phi - dphi * start, dphi)


def piecewise_form(result: SpectralResult, layout: ZoneLayout, bc: BoundarySpec,
                   growth: GrowthPair) -> list[Piece]:
    """Closed-form representation of ``phi`` on the (up to) three segments.

    As in the sampler, the right tail is anchored at ``x = L`` and scaled to
    match the zone piece in value.
    """
    lam = result.lambda1
    pots = _potentials(growth)
    phi, dphi = float(bc.a1), float(bc.a2)
    pieces = []
    start = 0.0
    for pot, end in zip(pots[:2], (layout.alpha, layout.end)):
        if end > start:
            pieces.append(_piece(start, end, lam - pot, phi, dphi))
            phi, dphi = segment_transfer(lam, pot, end - start).apply(phi, dphi)
        start = end
    L = layout.L
    if L > start:
        q = lam - pots[2]
        back = _piece(L, L, q, float(bc.b1), -float(bc.b2))
        edge = float(back.value(start))
        if edge != 0 and phi != 0:
            r = phi / edge
            pieces.append(Piece(start, L, back.kind, back.k, back.ca * r, back.cb * r))
        else:
            pieces.append(_piece(start, L, q, phi, dphi))
    return pieces


@dataclass(frozen=True)
class PaperConstants:
    """Exponential-tail coefficients used by the H1 characteristic equation.

    ``phi = C4 (R1 e^{-g x} + e^{g x})`` left of the zone and
    ``C5 (e^{-g x} + R2 e^{g x})`` right of it, with ``g = g_tilde``.
    """

    R1: float
    R2: float
    A: float
    B: float
    C: float
    D: float
    T1: float
    T2: float
    T3: float
    T4: float
    R1_hat: float
    R2_hat: float


def paper_constants(f: float, g: float, layout: ZoneLayout, bc: BoundarySpec) -> PaperConstants:
    """Constants for ``f_tilde = f``, ``g_tilde = g`` (requires ``g > 0``)."""
    a1, a2, b1, b2 = bc.a1, bc.a2, bc.b1, bc.b2
    L, al, l = layout.L, layout.alpha, layout.l
    R1 = (a1 * g - a2) / (a1 * g + a2)
    R2 = math.exp(-2 * g * L) * (b1 * g - b2) / (b1 * g + b2)
    ea, ea_m = math.exp(g * al), math.exp(-g * al)
    eb, eb_m = math.exp(g * (al + l)), math.exp(-g * (al + l))
    A = R1 * ea_m + ea
    B = eb_m + R2 * eb
    C = -R1 * ea_m + ea
    D = -eb_m + R2 * eb
    return PaperConstants(
        R1=R1, R2=R2, A=A, B=B, C=C, D=D,
        T1=B * C - A * D,
        T2=f * f * A * B + g * g * C * D,
        T3=B * C + A * D,
        T4=A * B * f * f - C * D * g * g,
        R1_hat=2 * a1 * a2 / (a1 * g + a2) ** 2,
        R2_hat=2 * b1 * b2 / (b1 * g + b2) ** 2,
    )


# --- tan-form characteristic equations: each returns (numerator, denominator) of tan(f l)

def _robin_h1(f, g, lay, bc):
    pc = paper_constants(f, g, lay, bc)
    return f * g * pc.T1, pc.T2


def _nn_h1(f, g, lay):
    L, al, l = lay.L, lay.alpha, lay.l
    e2L = math.exp(-2 * g * L)
    num = 2 * f * g * (math.exp(-g * l) - e2L * math.exp(g * l))
    den = (f * f * (math.exp(-g * al) + math.exp(g * al))
           * (math.exp(-g * (al + l)) + e2L * math.exp(g * (al + l)))
           + g * g * (-math.exp(-g * al) + math.exp(g * al))
           * (-math.exp(-g * (al + l)) + e2L * math.exp(g * (al + l))))
    return num, den


def _dd_h1(f, g, lay):
    L, al, l = lay.L, lay.alpha, lay.l
    e2L = math.exp(-2 * g * L)
    num = 2 * f * g * (math.exp(-g * l) - e2L * math.exp(g * l))
    den = (-g * g * (math.exp(-g * al) + math.exp(g * al))
           * (math.exp(-g * (al + l)) + e2L * math.exp(g * (al + l)))
           - f * f * (-math.exp(-g * al) + math.exp(g * al))
           * (-math.exp(-g * (al + l)) + e2L * math.exp(g * (al + l))))
    return num, den


def _nd_h1(f, g, lay):
    L, al, l = lay.L, lay.alpha, lay.l
    e2L = math.exp(-2 * g * L)
    num = 2 * f * g * (math.exp(-g * l) + e2L * math.exp(g * l))
    den = (f * f * (math.exp(-g * al) + math.exp(g * al))
           * (math.exp(-g * (al + l)) - e2L * math.exp(g * (al + l)))
           + g * g * (-math.exp(-g * al) + math.exp(g * al))
           * (-math.exp(-g * (al + l)) - e2L * math.exp(g * (al + l))))
    return num, den


def _dd_h2(f, lay):
    L, al, l = lay.L, lay.alpha, lay.l
    return f * (L - l), f * f * al * (L - al - l) - 1


def _nd_h2(f, lay):
    return 1.0, f * (lay.L - lay.alpha - lay.l)


def t_bar_dd(f, g, lay):
    L, al, l = lay.L, lay.alpha, lay.l
    return f * f * math.sin(g * al) * math.sin(g * (L - al - l)) - g * g * math.cos(g * al) * math.cos(g * (L - al - l))


def t_bar_nd(f, g, lay):
    L, al, l = lay.L, lay.alpha, lay.l
    return f * f * math.cos(g * al) * math.sin(g * (L - al - l)) + g * g * math.sin(g * al) * math.cos(g * (L - al - l))


def _dd_h3(f, g, lay):
    return f * g * math.sin(g * (lay.L - lay.l)), t_bar_dd(f, g, lay)


def _nd_h3(f, g, lay):
    return f * g * math.cos(g * (lay.L - lay.l)), t_bar_nd(f, g, lay)


def _normalised(num: float, den: float, fl: float) -> float:
    # sin(fl) den - num cos(fl) over hypot(num, den) is sin(fl - atan2(num, den))
    h = math.hypot(num, den)
    return (math.sin(fl) * den - num * math.cos(fl)) / h if h > 0 else 0.0


def tan_equations(result: SpectralResult, layout: ZoneLayout,
                  bc: BoundarySpec) -> dict[str, tuple[float, float]]:
    """Applicable ``tan(f_tilde l) = num/den`` relations as ``{name: (num, den)}``.

    DN under H2/H3 has no relation of its own; the ND relation is applied
    to the mirrored layout (same eigenvalue).
    """
    f, g = result.f_tilde, result.g_tilde
    code = bc.code
    out: dict[str, tuple[float, float]] = {}
    if result.case_tag == CaseTag.H1:
        out["robin_h1"] = _robin_h1(f, g, layout, bc)
        if code == "NN":
            out["nn_h1"] = _nn_h1(f, g, layout)
        elif code == "DD":
            out["dd_h1"] = _dd_h1(f, g, layout)
        elif code == "ND":
            out["nd_h1"] = _nd_h1(f, g, layout)
        elif code == "DN":
            out["nd_h1_mirrored"] = _nd_h1(f, g, layout.reflected())
    elif result.case_tag == CaseTag.H2:
        if code == "DD":
            out["dd_h2"] = _dd_h2(f, layout)
        elif code == "ND":
            out["nd_h2"] = _nd_h2(f, layout)
        elif code == "DN":
            out["nd_h2_mirrored"] = _nd_h2(f, layout.reflected())
    else:
        if code == "DD":
            out["dd_h3"] = _dd_h3(f, g, layout)
        elif code == "ND":
            out["nd_h3"] = _nd_h3(f, g, layout)
        elif code == "DN":
            out["nd_h3_mirrored"] = _nd_h3(f, g, layout.reflected())
    return out


def verify_transcendental(result: SpectralResult, layout: ZoneLayout, bc: BoundarySpec,
                          growth: GrowthPair | None = None,
                          limit: float = RESIDUAL_LIMIT) -> dict[str, float]:
    """Normalised cross-multiplied residual of every applicable ``tan`` relation.

    Raises :class:`ResidualTooLarge` if any exceeds ``limit``.
    """
    fl = result.f_tilde * layout.l
    report = {name: _normalised(num, den, fl)
              for name, (num, den) in tan_equations(result, layout, bc).items()}
    bad = {k: v for k, v in report.items() if not abs(v) <= limit}
    if bad:
        raise ResidualTooLarge(f"tan-form residuals above {limit}: {bad}")
    return report
