"""Domain types shared by the eigenvalue, simulation and design modules.

Diffusion is fixed at 1 throughout (the reaction-diffusion equation is
``u_t = u_xx + F(u)`` with no diffusion coefficient).
"""

from __future__ import annotations

import enum
import math
from dataclasses import dataclass, field
from typing import Callable

import numpy as np

__all__ = [
    "AlleeZoneError",
    "NumericalError",
    "CaseTag",
    "BCKind",
    "Verdict",
    "GrowthPair",
    "BoundarySpec",
    "ZoneLayout",
    "SpectralResult",
    "FateVerdict",
    "classify_case",
    "H2_TOL",
]

# |g'(0) + lambda| at or below this is treated as the borderline case H2.
H2_TOL = 1e-9


class AlleeZoneError(Exception):
    """Base class for failures raised by this package."""


class NumericalError(AlleeZoneError):
    """A numerical routine failed to meet its contract (bracketing, convergence, ...)."""


class CaseTag(str, enum.Enum):
    H1 = "H1"  # g'(0) + lambda1 < 0: exponential tails outside the zone
    H2 = "H2"  # g'(0) + lambda1 = 0: linear tails
    H3 = "H3"  # g'(0) + lambda1 > 0: oscillatory tails


class BCKind(str, enum.Enum):
    NEUMANN = "Neumann"
    DIRICHLET = "Dirichlet"
    ROBIN = "Robin"


class Verdict(str, enum.Enum):
    PERSIST = "Persist"
    EXTINCT = "Extinct"
    UNDECIDED = "Undecided"


def classify_case(lam: float, gp0: float, tol: float = H2_TOL) -> CaseTag:
    """Tag the sign of ``gp0 + lam`` with a tolerance band around zero."""
    if tol <= 0:
        raise ValueError("tol must be positive")
    s = gp0 + lam
    if s < -tol:
        return CaseTag.H1
    if s > tol:
        return CaseTag.H3
    return CaseTag.H2


def _cubic_allee(r: float, a: float) -> Callable[[np.ndarray], np.ndarray]:
    def g(u):
        return r * u * (1.0 - u) * (u - a)

    return g


def _logistic(r: float) -> Callable[[np.ndarray], np.ndarray]:
    def f(u):
        return r * u * (1.0 - u)

    return f


@dataclass(frozen=True)
class GrowthPair:
    """Logistic law ``f`` inside the zone, strong-Allee law ``g`` outside.

    The eigenvalue code only reads the slopes ``fp0 = f'(0)`` and
    ``gp0 = g'(0)``; the simulator evaluates ``f_eval``/``g_eval``.
    Build the standard pair with :meth:`cubic`.
    """

    fp0: float
    gp0: float
    allee_a: float
    rate_r: float
    f_eval: Callable[[np.ndarray], np.ndarray] = field(compare=False, repr=False)
    g_eval: Callable[[np.ndarray], np.ndarray] = field(compare=False, repr=False)

    def __post_init__(self):
        if not (self.fp0 > 0):
            raise ValueError(f"f'(0) must be positive, got {self.fp0}")
        if not (self.gp0 < 0):
            raise ValueError(f"g'(0) must be negative, got {self.gp0}")
        if not (0 < self.allee_a < 1):
            raise ValueError(f"Allee threshold must lie in (0, 1), got {self.allee_a}")
        if not (self.rate_r > 0):
            raise ValueError(f"growth rate must be positive, got {self.rate_r}")
        if self.fp0 < -self.gp0:
            raise ValueError(
                f"subhomogeneity requires f'(0) >= -g'(0); got f'(0)={self.fp0}, g'(0)={self.gp0}"
            )

    @classmethod
    def cubic(cls, r: float, a: float) -> "GrowthPair":
        """``f(u) = r u (1-u)`` and ``g(u) = r u (1-u)(u-a)``."""
        return cls(
            fp0=float(r),
            gp0=-float(r) * float(a),
            allee_a=float(a),
            rate_r=float(r),
            f_eval=_logistic(r),
            g_eval=_cubic_allee(r, a),
        )

    @classmethod
    def from_slopes(cls, fp0: float, gp0: float) -> "GrowthPair":
        """Pair with prescribed linearisations.

        Uses ``f(u) = fp0 u (1-u)`` and ``g(u) = (-gp0/a) u (1-u)(u-a)``
        with ``a = -gp0/fp0`` so that both slopes are matched exactly and
        the cubic shape is kept.
        """
        fp0 = float(fp0)
        gp0 = float(gp0)
        a = -gp0 / fp0
        if not (0 < a < 1):
            raise ValueError(f"need 0 < -g'(0) < f'(0); got f'(0)={fp0}, g'(0)={gp0}")
        return cls(fp0=fp0, gp0=gp0, allee_a=a, rate_r=fp0,
                   f_eval=_logistic(fp0), g_eval=_cubic_allee(fp0, a))

    def as_dict(self) -> dict:
        return {"fp0": self.fp0, "gp0": self.gp0, "a": self.allee_a, "r": self.rate_r}


_KIND_LETTER = {"N": BCKind.NEUMANN, "D": BCKind.DIRICHLET, "R": BCKind.ROBIN}


@dataclass(frozen=True)
class BoundarySpec:
    """Robin rows ``a1 u'(0) - a2 u(0) = 0`` and ``b1 u'(L) + b2 u(L) = 0``."""

    a1: float
    a2: float
    b1: float
    b2: float

    def __post_init__(self):
        for name in ("a1", "a2", "b1", "b2"):
            v = getattr(self, name)
            if not (v >= 0) or not math.isfinite(v):
                raise ValueError(f"{name} must be finite and nonnegative, got {v}")
        if self.a1 == 0 and self.a2 == 0:
            raise ValueError("left boundary coefficients cannot both vanish")
        if self.b1 == 0 and self.b2 == 0:
            raise ValueError("right boundary coefficients cannot both vanish")

    @staticmethod
    def _kind(c1: float, c2: float) -> BCKind:
        if c2 == 0:
            return BCKind.NEUMANN
        if c1 == 0:
            return BCKind.DIRICHLET
        return BCKind.ROBIN

    @property
    def kind_left(self) -> BCKind:
        return self._kind(self.a1, self.a2)

    @property
    def kind_right(self) -> BCKind:
        return self._kind(self.b1, self.b2)

    @property
    def code(self) -> str:
        """Two-letter code such as ``"ND"`` (``R`` marks a proper Robin end)."""
        return self.kind_left.value[0] + self.kind_right.value[0]

    @classmethod
    def from_keyword(cls, code: str) -> "BoundarySpec":
        code = code.strip().upper()
        if len(code) != 2 or any(c not in "ND" for c in code):
            raise ValueError(f"boundary keyword must be one of NN, ND, DN, DD; got {code!r}")
        left = (1.0, 0.0) if code[0] == "N" else (0.0, 1.0)
        right = (1.0, 0.0) if code[1] == "N" else (0.0, 1.0)
        return cls(*left, *right)

    @classmethod
    def parse_raw(cls, text: str) -> "BoundarySpec":
        parts = [p for p in text.replace(" ", "").split(",") if p]
        if len(parts) != 4:
            raise ValueError(f"expected a1,a2,b1,b2; got {text!r}")
        return cls(*(float(p) for p in parts))

    def reflected(self) -> "BoundarySpec":
        """Boundary rows after the substitution ``x -> L - x``."""
        return BoundarySpec(self.b1, self.b2, self.a1, self.a2)

    def as_dict(self) -> dict:
        return {"a1": self.a1, "a2": self.a2, "b1": self.b1, "b2": self.b2, "code": self.code}


@dataclass(frozen=True)
class ZoneLayout:
    """Habitat ``[0, L]`` with protection zone ``[alpha, alpha + l]``."""

    L: float
    alpha: float
    l: float

    def __post_init__(self):
        if not (self.L > 0):
            raise ValueError(f"L must be positive, got {self.L}")
        if not (self.alpha >= 0):
            raise ValueError(f"alpha must be nonnegative, got {self.alpha}")
        if not (self.l > 0):
            raise ValueError(f"zone length must be positive, got {self.l}")
        # a few ulps of slack so that alpha = L - l computed in floating point is accepted
        if self.alpha + self.l > self.L * (1 + 4e-15):
            raise ValueError(f"zone [{self.alpha}, {self.alpha + self.l}] exceeds habitat [0, {self.L}]")

    @property
    def end(self) -> float:
        return min(self.alpha + self.l, self.L)

    @property
    def segments(self) -> tuple[float, float, float]:
        """Lengths of the left tail, the zone and the right tail."""
        return self.alpha, self.end - self.alpha, max(self.L - self.end, 0.0)

    def reflected(self) -> "ZoneLayout":
        return ZoneLayout(self.L, max(self.L - self.alpha - self.l, 0.0), self.l)

    def with_alpha(self, alpha: float) -> "ZoneLayout":
        return ZoneLayout(self.L, alpha, self.l)

    def as_dict(self) -> dict:
        return {"L": self.L, "alpha": self.alpha, "l": self.l}


@dataclass(frozen=True)
class SpectralResult:
    lambda1: float
    case_tag: CaseTag
    f_tilde: float
    g_tilde: float
    residual: float
    phi_samples: tuple = field(repr=False, default=())

    @property
    def x(self) -> np.ndarray:
        return np.array([p[0] for p in self.phi_samples])

    @property
    def phi(self) -> np.ndarray:
        return np.array([p[1] for p in self.phi_samples])


@dataclass(frozen=True)
class FateVerdict:
    verdict: Verdict
    lambda1: float = float("nan")
    sim_floor: float = float("nan")
    note: str = ""

    def as_dict(self) -> dict:
        return {"verdict": self.verdict.value, "lambda1": self.lambda1,
                "sim_floor": self.sim_floor, "note": self.note}


def verdict_from_sign(lambda1: float, band: float = 0.0, note: str = "") -> FateVerdict:
    """Linearised verdict: persist when ``lambda1 < -band``, extinct when ``> band``."""
    if lambda1 < -band:
        v = Verdict.PERSIST
    elif lambda1 > band:
        v = Verdict.EXTINCT
    else:
        v = Verdict.UNDECIDED
    return FateVerdict(v, lambda1=lambda1, note=note)


__all__.append("verdict_from_sign")
