"""Brute-force finite-difference oracle for the principal eigenvalue.

Cell-centred grid of ``n`` cells on ``[0, L]``. Boundary rows are folded
into the first/last diagonal entry through a ghost cell, which keeps the
matrix symmetric tridiagonal, and the smallest eigenvalue is located by
Sturm-count bisection.
"""

from __future__ import annotations

import math
from fractions import Fraction
from dataclasses import dataclass

import numpy as np
from numba import njit

from .baseline import spectral_bracket
from .model import BoundarySpec, GrowthPair, NumericalError, ZoneLayout

__all__ = ["Tridiag", "NonConvergent", "assemble", "sturm_count", "smallest_eig",
           "oracle_eigenvalue", "default_cells", "cell_potential", "ghost_ratio"]

MIN_CELLS = 16


class NonConvergent(NumericalError):
    pass


@dataclass(frozen=True)
class Tridiag:
    diag: np.ndarray
    off: np.ndarray
    h: float

    def __post_init__(self):
        if len(self.diag) < 1:
            raise ValueError("empty matrix")
        if len(self.off) != len(self.diag) - 1:
            raise ValueError("off-diagonal must have length n - 1")

    @property
    def n(self) -> int:
        return len(self.diag)

    def dense(self) -> np.ndarray:
        return np.diag(self.diag) + np.diag(self.off, 1) + np.diag(self.off, -1)


def ghost_ratio(c1: float, c2: float, h: float) -> float:
    """Ghost value over first interior value for the row ``c1 phi' = +-c2 phi`` (outward sign folded in)."""
    return (c1 - 0.5 * c2 * h) / (c1 + 0.5 * c2 * h)


def cell_potential(layout: ZoneLayout, growth: GrowthPair, n: int) -> np.ndarray:
    """Cell averages of ``H``: exact overlap of each cell with the zone."""
    h = layout.L / n
    left = np.arange(n) * h
    right = left + h
    overlap = np.clip(np.minimum(right, layout.end) - np.maximum(left, layout.alpha), 0.0, h)
    frac = overlap / h
    return -growth.fp0 * frac - growth.gp0 * (1.0 - frac)


def assemble(layout: ZoneLayout, bc: BoundarySpec, growth: GrowthPair, n: int) -> Tridiag:
    if n < MIN_CELLS:
        raise ValueError(f"n must be at least {MIN_CELLS}")
    h = layout.L / n
    ih2 = 1.0 / (h * h)
    diag = 2.0 * ih2 + cell_potential(layout, growth, n)
    diag[0] -= ghost_ratio(bc.a1, bc.a2, h) * ih2
    diag[-1] -= ghost_ratio(bc.b1, bc.b2, h) * ih2
    off = np.full(n - 1, -ih2)
    return Tridiag(diag, off, h)


@njit(cache=True)
def _sturm_count(diag, off2, x):
    # eigenvalues strictly below x, via the LDL^T pivots of T - x I
    count = 0
    d = diag[0] - x
    if d < 0.0:
        count += 1
    for i in range(1, diag.shape[0]):
        if d == 0.0:
            d = 1e-300
        d = diag[i] - x - off2[i - 1] / d
        if d < 0.0:
            count += 1
    return count


@njit(cache=True)
def _bisect_smallest(diag, off2, lo, hi, tol):
    while hi - lo > tol:
        mid = 0.5 * (lo + hi)
        if mid <= lo or mid >= hi:
            break
        if _sturm_count(diag, off2, mid) >= 1:
            hi = mid
        else:
            lo = mid
    return 0.5 * (lo + hi)


def gershgorin(t: Tridiag) -> tuple[float, float]:
    a = np.abs(t.off)
    r = np.zeros(t.n)
    r[:-1] += a
    r[1:] += a
    return float(np.min(t.diag - r)), float(np.max(t.diag + r))


def sturm_count(t: Tridiag, x: float) -> int:
    return int(_sturm_count(np.asarray(t.diag, float), np.asarray(t.off, float) ** 2, float(x)))


def smallest_eig(t: Tridiag, tol: float = 1e-13) -> float:
    if not (tol > 0):
        raise ValueError("tol must be positive")
    lo, hi = gershgorin(t)
    # widen by a hair so the Sturm counts at the ends are exactly 0 and n
    pad = 1e-12 * max(1.0, abs(lo), abs(hi))
    diag = np.asarray(t.diag, float)
    off2 = np.asarray(t.off, float) ** 2
    return float(_bisect_smallest(diag, off2, lo - pad, hi + pad, tol))


def default_cells(L: float) -> int:
    """Smallest power of two with ``h <= L / 2048`` scaled by ``L / 10`` (4096 at ``L = 10``)."""
    target = max(2048, int(math.ceil(4096 * L / 10.0)))
    return 1 << (target - 1).bit_length()


def aligned_cells(layout: ZoneLayout, minimum: int, max_denominator: int = 4096) -> int | None:
    """Smallest ``m >= minimum`` putting both zone edges on cell faces, if one exists."""
    q = 1
    for edge in (layout.alpha, layout.end):
        frac = Fraction(edge / layout.L).limit_denominator(max_denominator)
        if abs(float(frac) - edge / layout.L) > 1e-13:
            return None
        q = q * frac.denominator // math.gcd(q, frac.denominator)
    return q * max(1, -(-minimum // q))


def _edges_on_faces(layout: ZoneLayout, n: int) -> bool:
    for edge in (layout.alpha, layout.end):
        k = edge / layout.L * n
        if abs(k - round(k)) > 1e-9:
            return False
    return True


def oracle_eigenvalue(layout: ZoneLayout, bc: BoundarySpec, growth: GrowthPair,
                      tol: float = 1e-13, n: int | None = None,
                      floor: float = 1e-8) -> tuple[float, float]:
    """Richardson-extrapolated smallest eigenvalue and ``|lambda_2n - lambda_n|``.

    A coarse level ``n/2`` is also solved to check that the differences
    shrink by at least 2x; otherwise :class:`NonConvergent` is raised.
    By default the grid is chosen so that the zone edges sit on cell faces
    when ``alpha/L`` and ``(alpha+l)/L`` are simple fractions; differences
    below ``floor`` are exempt from the shrink test, and on grids where an
    edge falls inside a cell so are differences below ``jump * h^2 / L``:
    there the O(h^2) error is dominated by where the zone edges fall inside
    their cells, which does not refine monotonically.
    """
    if not (tol > 0):
        raise ValueError("tol must be positive")
    if n is None:
        base = default_cells(layout.L)
        m = aligned_cells(layout, base // 2)
        n = base if m is None else 2 * m
    vals = [smallest_eig(assemble(layout, bc, growth, m), tol) for m in (n // 2, n, 2 * n)]
    coarse, mid, fine = vals
    d_coarse, d_fine = abs(mid - coarse), abs(fine - mid)
    noise = max(floor, 1e3 * tol)
    if not _edges_on_faces(layout, n // 2):
        # an edge inside a cell gives an O(h^2) error whose constant depends on
        # the edge's position in the cell, so successive levels need not shrink
        h = layout.L / n
        noise = max(noise, (growth.fp0 - growth.gp0) * h * h / layout.L)
    if d_fine > noise and d_fine > 0.5 * d_coarse:
        raise NonConvergent(
            f"refinement differences {d_coarse:.3e} -> {d_fine:.3e} do not shrink by 2x"
        )
    value = fine + (fine - mid) / 3.0
    br = spectral_bracket(layout.L, bc, growth)
    # a zone filling the habitat puts lambda1 on br.lo; allow the oracle's own error
    slack = max(d_fine, 1e3 * tol)
    if not (br.lo - slack <= value < br.hi + slack):
        raise NumericalError(f"oracle value {value} outside the bracket ({br.lo}, {br.hi})")
    return float(min(max(value, br.lo), br.hi)), float(d_fine)
