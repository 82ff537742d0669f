"""Principal eigenvalue of ``-phi'' = lambda phi`` on ``(0, L)`` under Robin rows.

Neumann/Dirichlet combinations have closed forms. Anything involving a
proper Robin end is solved from the cross-multiplied characteristic
relation on the ``k = sqrt(lambda0)`` axis::

    k (a2 b1 + a1 b2) cos(kL) - (a1 b1 k^2 - a2 b2) sin(kL) = 0

which reduces to the tabulated ``tan`` / ``cot`` forms row by row.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from .model import BCKind, BoundarySpec, GrowthPair, NumericalError

__all__ = ["Bracket", "lambda0", "spectral_bracket", "baseline_relation", "bisect"]

_N_PANELS = 64


@dataclass(frozen=True)
class Bracket:
    lo: float  # lambda0(L) - f'(0)
    hi: float  # lambda0(L) - g'(0)

    @property
    def width(self) -> float:
        return self.hi - self.lo


def bisect(fun, lo: float, hi: float, flo: float | None = None, xtol: float = 0.0,
           maxiter: int = 200) -> float:
    """Plain bisection on a sign change; stops at ``xtol`` or when the midpoint stalls."""
    if flo is None:
        flo = fun(lo)
    if flo == 0:
        return lo
    fhi = fun(hi)
    if fhi == 0:
        return hi
    if (fhi < 0) == (flo < 0):
        raise ValueError(f"no sign change on [{lo}, {hi}]")
    for _ in range(maxiter):
        mid = 0.5 * (lo + hi)
        if mid <= lo or mid >= hi or hi - lo <= xtol:
            break
        fm = fun(mid)
        if fm == 0:
            return mid
        if (fm < 0) == (flo < 0):
            lo, flo = mid, fm
        else:
            hi = mid
    return 0.5 * (lo + hi)


def baseline_relation(k: float, L: float, bc: BoundarySpec) -> float:
    """Characteristic relation divided by ``k`` (removes the trivial root at 0)."""
    a1, a2, b1, b2 = bc.a1, bc.a2, bc.b1, bc.b2
    kl = k * L
    sin_over_k = L * np.sinc(kl / math.pi)
    return (a2 * b1 + a1 * b2) * math.cos(kl) - a1 * b1 * k * math.sin(kl) + a2 * b2 * sin_over_k


def lambda0(L: float, bc: BoundarySpec, tol: float = 1e-14) -> float:
    if not (L > 0):
        raise ValueError(f"L must be positive, got {L}")
    if not (tol > 0):
        raise ValueError("tol must be positive")
    left, right = bc.kind_left, bc.kind_right
    if left == BCKind.NEUMANN and right == BCKind.NEUMANN:
        return 0.0
    if left == BCKind.DIRICHLET and right == BCKind.DIRICHLET:
        return math.pi ** 2 / L ** 2
    if {left, right} == {BCKind.NEUMANN, BCKind.DIRICHLET}:
        return math.pi ** 2 / (4 * L ** 2)

    def rel(k):
        return baseline_relation(k, L, bc)

    k_max = 2 * math.pi / L
    ks = np.linspace(0.0, k_max, _N_PANELS + 1)
    vals = [rel(k) for k in ks]
    for i in range(_N_PANELS):
        if vals[i] == 0.0 and ks[i] > 0:
            return float(ks[i] ** 2)
        if (vals[i] < 0) != (vals[i + 1] < 0):
            # run to machine resolution in k; tol only bounds the relation residual
            k = bisect(rel, ks[i], ks[i + 1], flo=vals[i])
            return float(k * k)
    raise NumericalError(
        f"no root of the baseline relation on k in (0, {k_max}] for bc={bc.as_dict()}, L={L}"
    )


def spectral_bracket(L: float, bc: BoundarySpec, growth: GrowthPair) -> Bracket:
    lam0 = lambda0(L, bc)
    return Bracket(lam0 - growth.fp0, lam0 - growth.gp0)
