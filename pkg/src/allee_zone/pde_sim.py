"""Time integration of ``u_t = u_xx + F(x, u)`` and long-time fate classification.

``F`` is the logistic law inside the zone and the Allee law outside. The
grid is the same cell-centred grid as :mod:`allee_zone.fd_oracle` (ghost
cells for the boundary rows, length-weighted blending in the two cells that
straddle a zone edge), so the linearisation of the discrete system at
``u = 0`` is exactly the oracle matrix.
"""

from __future__ import annotations

import csv
import enum
import math
from dataclasses import dataclass, field
from typing import Callable, Optional, Sequence

import numpy as np
import scipy.sparse as sp
from scipy.integrate import solve_ivp
from scipy.sparse.linalg import factorized

from .baseline import lambda0
from .fd_oracle import ghost_ratio
from .model import (
    AlleeZoneError,
    BCKind,
    BoundarySpec,
    FateVerdict,
    GrowthPair,
    NumericalError,
    Verdict,
    ZoneLayout,
)

__all__ = [
    "Scheme",
    "SimConfig",
    "Trajectory",
    "StabilityViolation",
    "NegativeDensity",
    "BelowThreshold",
    "NotApplicable",
    "simulate",
    "classify_fate",
    "theta_f",
    "extinction_sufficient",
    "dirichlet_weight",
    "write_csv",
    "to_json_dict",
]

CLIP_LIMIT = -1e-12
WEIGHT_CLIP = 1e-6


class StabilityViolation(AlleeZoneError):
    pass


class NegativeDensity(NumericalError):
    pass


class BelowThreshold(AlleeZoneError):
    pass


class NotApplicable(AlleeZoneError):
    pass


class Scheme(str, enum.Enum):
    EXPLICIT_EULER = "ExplicitEuler"
    SEMI_IMPLICIT_CN = "SemiImplicitCN"


def dirichlet_weight(L: float, bc: BoundarySpec) -> Callable[[np.ndarray], np.ndarray]:
    """Positive interior profile vanishing at Dirichlet ends, clipped at ``1e-6``."""
    left = bc.kind_left == BCKind.DIRICHLET
    right = bc.kind_right == BCKind.DIRICHLET

    def w(x):
        x = np.asarray(x, dtype=float)
        if left and right:
            v = np.sin(np.pi * x / L)
        elif left:
            v = np.sin(np.pi * x / (2 * L))
        elif right:
            v = np.cos(np.pi * x / (2 * L))
        else:
            v = np.ones_like(x)
        return np.maximum(v, WEIGHT_CLIP)

    return w


@dataclass
class SimConfig:
    dx: float = 0.025
    dt: Optional[float] = None          # None -> dx
    t_end: float = 2000.0
    scheme: Scheme = Scheme.SEMI_IMPLICIT_CN
    persistence_floor: Optional[float] = None   # None -> a/2
    dirichlet_weight: Optional[Callable[[np.ndarray], np.ndarray]] = None
    snapshot_every: float = 1.0
    startup_steps: int = 4  # backward-Euler half steps before Crank-Nicolson

    def resolved(self, layout: ZoneLayout, bc: BoundarySpec, growth: GrowthPair) -> "SimConfig":
        dt = self.dx if self.dt is None else self.dt
        xi = 0.5 * growth.allee_a if self.persistence_floor is None else self.persistence_floor
        w = self.dirichlet_weight or dirichlet_weight(layout.L, bc)
        cfg = SimConfig(self.dx, dt, self.t_end, Scheme(self.scheme), xi, w,
                        self.snapshot_every, self.startup_steps)
        cfg.validate()
        return cfg

    def validate(self) -> None:
        if not (self.dx > 0 and self.t_end > 0 and self.snapshot_every > 0):
            raise ValueError("dx, t_end and snapshot_every must be positive")
        if self.dt is not None and not (self.dt > 0):
            raise ValueError("dt must be positive")
        if self.persistence_floor is not None and not (self.persistence_floor > 0):
            raise ValueError("persistence floor must be positive")
        if self.scheme == Scheme.EXPLICIT_EULER and self.dt is not None and self.dt > 0.5 * self.dx ** 2:
            raise StabilityViolation(f"explicit Euler needs dt <= dx^2/2 = {0.5 * self.dx ** 2}")


@dataclass(frozen=True)
class Trajectory:
    times: np.ndarray
    snapshots: np.ndarray          # shape (n_snapshots, n_cells)
    mass_floor_series: np.ndarray  # min over cells of u / weight
    x: np.ndarray
    params: dict = field(default_factory=dict)

    @property
    def t_end(self) -> float:
        return float(self.times[-1])


def _grid(L: float, dx: float) -> tuple[int, float, np.ndarray]:
    n = max(16, int(round(L / dx)))
    h = L / n
    return n, h, (np.arange(n) + 0.5) * h


def zone_fraction(layout: ZoneLayout, n: int) -> np.ndarray:
    h = layout.L / n
    left = np.arange(n) * h
    overlap = np.clip(np.minimum(left + h, layout.end) - np.maximum(left, layout.alpha), 0.0, h)
    return overlap / h


def diffusion_matrix(L: float, bc: BoundarySpec, n: int) -> sp.csc_matrix:
    """``K ~ -d^2/dx^2`` with the boundary rows folded into the corner entries."""
    h = L / n
    ih2 = 1.0 / (h * h)
    main = np.full(n, 2.0 * ih2)
    main[0] -= ghost_ratio(bc.a1, bc.a2, h) * ih2
    main[-1] -= ghost_ratio(bc.b1, bc.b2, h) * ih2
    off = np.full(n - 1, -ih2)
    return sp.diags([off, main, off], [-1, 0, 1], format="csc")


def simulate(layout: ZoneLayout, bc: BoundarySpec, growth: GrowthPair,
             u0: float | Sequence[float] | Callable[[np.ndarray], np.ndarray],
             cfg: SimConfig | None = None, reaction: bool = True) -> Trajectory:
    """Integrate from ``u0`` (constant, array on the cell centres, or callable of x).

    ``reaction=False`` switches the growth terms off (pure diffusion).
    """
    cfg = (cfg or SimConfig()).resolved(layout, bc, growth)
    n, h, x = _grid(layout.L, cfg.dx)
    dt = cfg.dt
    if cfg.scheme == Scheme.EXPLICIT_EULER and dt > 0.5 * h * h:
        raise StabilityViolation(f"explicit Euler needs dt <= h^2/2 = {0.5 * h * h}")

    if callable(u0):
        u = np.asarray(u0(x), dtype=float).copy()
    else:
        u = np.broadcast_to(np.asarray(u0, dtype=float), (n,)).copy()
    if u.shape != (n,):
        raise ValueError(f"u0 must have {n} entries")
    if np.any(u < 0) or not np.all(np.isfinite(u)):
        raise ValueError("u0 must be finite and nonnegative")

    w_zone = zone_fraction(layout, n)
    f_eval, g_eval = growth.f_eval, growth.g_eval

    def F(v):
        if not reaction:
            return np.zeros_like(v)
        return w_zone * f_eval(v) + (1.0 - w_zone) * g_eval(v)

    K = diffusion_matrix(layout.L, bc, n)
    eye = sp.identity(n, format="csc")
    if cfg.scheme == Scheme.SEMI_IMPLICIT_CN:
        # backward Euler over dt/2 shares the Crank-Nicolson left-hand matrix
        solve_cn = factorized((eye + 0.5 * dt * K).tocsc())
        rhs_cn = (eye - 0.5 * dt * K).tocsr()

    weight = cfg.dirichlet_weight(x)
    n_steps = int(math.ceil(cfg.t_end / dt - 1e-9))
    snap_stride = max(1, int(round(cfg.snapshot_every / dt)))
    times, snaps, floors = [0.0], [u.copy()], [float(np.min(u / weight))]
    t = 0.0
    startup = cfg.startup_steps if cfg.scheme == Scheme.SEMI_IMPLICIT_CN else 0

    for step in range(1, n_steps + 1):
        if cfg.scheme == Scheme.EXPLICIT_EULER:
            u = u + dt * (-(K @ u) + F(u))
        elif step <= startup:
            # two backward-Euler half steps damp the stiff modes excited by u0
            for _ in range(2):
                u = solve_cn(u + 0.5 * dt * F(u))
        else:
            u = solve_cn(rhs_cn @ u + dt * F(u))
        t = step * dt
        lo = u.min()
        if lo < 0:
            if lo < CLIP_LIMIT:
                raise NegativeDensity(f"u = {lo:.3e} < {CLIP_LIMIT} at t = {t}")
            np.maximum(u, 0.0, out=u)
        if not np.all(np.isfinite(u)):
            raise NumericalError(f"non-finite density at t = {t}")
        if step % snap_stride == 0 or step == n_steps:
            times.append(t)
            snaps.append(u.copy())
            floors.append(float(np.min(u / weight)))

    params = {"layout": layout.as_dict(), "bc": bc.as_dict(), "growth": growth.as_dict(),
              "dx": h, "dt": dt, "t_end": cfg.t_end, "scheme": cfg.scheme.value,
              "persistence_floor": cfg.persistence_floor}
    return Trajectory(np.array(times), np.array(snaps), np.array(floors), x, params)


def classify_fate(traj: Trajectory, bc: BoundarySpec, xi: float,
                  window: float | None = None) -> FateVerdict:
    """Fate from the final ``window`` of the run (default: last quarter).

    Persist when the weighted floor stays at or above ``xi`` throughout the
    window. Extinct when the max density ends below ``xi/10`` and does not
    increase over the window. Otherwise, or when the run is shorter than the
    window, Undecided.
    """
    if not (xi > 0):
        raise ValueError("xi must be positive")
    t_final = traj.t_end
    if window is None:
        window = 0.25 * t_final
    if not (window > 0) or window > t_final or len(traj.times) < 3:
        return FateVerdict(Verdict.UNDECIDED, note="run shorter than the classification window")
    sel = traj.times >= t_final - window
    floor = float(np.min(traj.mass_floor_series[sel]))
    maxima = traj.snapshots[sel].max(axis=1)
    if floor >= xi:
        return FateVerdict(Verdict.PERSIST, sim_floor=floor, note=f"weighted floor >= {xi}")
    decreasing = bool(np.all(np.diff(maxima) <= 1e-14 * np.maximum(maxima[:-1], 1e-300)))
    if maxima[-1] < xi / 10 and decreasing:
        return FateVerdict(Verdict.EXTINCT, sim_floor=max(floor, 0.0),
                           note=f"max density {maxima[-1]:.3e} decreasing below {xi / 10}")
    return FateVerdict(Verdict.UNDECIDED, sim_floor=max(floor, 0.0), note="no clear trend in window")


def _half_length(p: float, f_eval, rtol: float) -> float:
    """Distance from the crest ``u = p, u' = 0`` of ``u'' = -f(u)`` to the first zero of ``u``."""

    def rhs(_, y):
        return [y[1], -float(f_eval(y[0]))]

    def hit_zero(_, y):
        return y[0]

    hit_zero.terminal = True
    hit_zero.direction = -1
    span = 50.0
    while span < 1e7:
        sol = solve_ivp(rhs, (0.0, span), [p, 0.0], method="RK45", rtol=rtol, atol=1e-14,
                        events=hit_zero)
        if sol.t_events[0].size:
            return float(sol.t_events[0][0])
        span *= 4
    return math.inf


def _crest_profile(p: float, f_eval, s: np.ndarray, rtol: float) -> np.ndarray:
    """``u`` at distances ``s`` (sorted, >= 0) from the crest."""
    sol = solve_ivp(lambda _, y: [y[1], -float(f_eval(y[0]))], (0.0, float(s[-1]) if s[-1] > 0 else 1e-12),
                    [p, 0.0], method="RK45", rtol=rtol, atol=1e-14, dense_output=True)
    return sol.sol(s)[0]


def theta_f(l: float, growth: GrowthPair, tol: float = 1e-10,
            n_points: int = 401) -> tuple[np.ndarray, np.ndarray]:
    """Positive solution of ``u'' + f(u) = 0`` on ``(0, l)`` with ``u(0) = u(l) = 0``.

    Shoots from the midpoint on the crest value ``p``: the half-length
    ``d(p)`` to the first zero grows with ``p``, and ``d(p) = l/2`` is solved
    by bisection. For very long zones the crest is indistinguishable from 1;
    the profile is then a boundary layer on each side of a flat top.
    Returns ``(x, theta)`` on ``n_points`` points, symmetric by construction.
    """
    if not (l > 0):
        raise ValueError("l must be positive")
    if growth.fp0 <= math.pi ** 2 / l ** 2:
        raise BelowThreshold(f"f'(0) = {growth.fp0} <= pi^2/l^2 = {math.pi ** 2 / l ** 2}")
    f_eval = growth.f_eval
    rtol = max(min(tol, 1e-6), 1e-12)
    half = 0.5 * l

    lo, hi = 0.0, 1.0 - 1e-12
    if _half_length(hi, f_eval, rtol) < half:
        p = hi  # flat top
    else:
        for _ in range(200):
            mid = 0.5 * (lo + hi)
            if hi - lo <= tol * 1e-2 or mid in (lo, hi):
                break
            if _half_length(mid, f_eval, rtol) < half:
                lo = mid
            else:
                hi = mid
        p = 0.5 * (lo + hi)

    d = _half_length(p, f_eval, rtol)
    x = np.linspace(0.0, l, n_points)
    dist_to_edge = np.minimum(x, l - x)
    # measure from the crest of the shot profile; the flat top absorbs any excess length
    s = np.maximum(d - dist_to_edge, 0.0)
    order = np.argsort(s)
    vals = np.empty_like(s)
    vals[order] = _crest_profile(p, f_eval, s[order], rtol)
    vals = np.clip(vals, 0.0, None)
    vals[0] = vals[-1] = 0.0
    theta = 0.5 * (vals + vals[::-1])
    return x, theta


def extinction_sufficient(growth: GrowthPair, bc: BoundarySpec, L: float) -> bool:
    """``lambda0(L) > f'(0)``: every nonnegative initial state then dies out."""
    if bc.code == "NN":
        raise NotApplicable("criterion is vacuous for Neumann conditions at both ends")
    u = np.linspace(1e-6, 1.0, 1001)
    if np.any(growth.f_eval(u) / u > growth.fp0 * (1 + 1e-12) + 1e-15):
        raise NotApplicable("f(u)/u <= f'(0) fails")
    return lambda0(L, bc) > growth.fp0


def write_csv(traj: Trajectory, fh, comments: Sequence[str] = ()) -> None:
    """Long-format ``t, x, u`` rows preceded by ``#`` comment lines."""
    for c in comments:
        fh.write(f"# {c}\n")
    w = csv.writer(fh, lineterminator="\n")
    w.writerow(["t", "x", "u"])
    for t, row in zip(traj.times, traj.snapshots):
        for xi, ui in zip(traj.x, row):
            w.writerow([repr(float(t)), repr(float(xi)), repr(float(ui))])


def to_json_dict(traj: Trajectory) -> dict:
    return {"params": traj.params, "x": traj.x.tolist(), "times": traj.times.tolist(),
            "snapshots": traj.snapshots.tolist(), "floor": traj.mass_floor_series.tolist()}
