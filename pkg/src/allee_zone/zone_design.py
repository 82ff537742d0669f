"""Design answers built on lambda1: where to put a zone of length l, and how long it must be.

For Neumann/Dirichlet ends the optimal start is known from the sign of
``d lambda1 / d alpha`` (NN: either end, DD: centred, ND: left end, DN: right
end). Robin ends are handled numerically. Every verdict in a report comes
from an actual lambda1 evaluation at the recommended layout.
"""

from __future__ import annotations

import math
import os
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass, field
from typing import Sequence, Union

import numpy as np
from scipy.optimize import brentq, minimize_scalar

from .eigen_core import principal_eigenvalue
from .model import BoundarySpec, FateVerdict, GrowthPair, Verdict, ZoneLayout, verdict_from_sign

__all__ = [
    "DesignReport",
    "SweepTable",
    "lambda1_at",
    "optimal_alpha",
    "critical_lengths",
    "design_report",
    "sweep",
    "worker_count",
]

AlphaStar = Union[float, str]  # numeric start, "anywhere" or "none"

_CITATIONS = {
    "NN": "Neumann at both ends: lambda1 increases in alpha up to the midpoint and decreases after, "
          "so a zone touching either end is best; f'(0) >= pi^2/(4 l^2) guarantees persistence anywhere",
    "DD": "Dirichlet at both ends: lambda1 decreases in alpha up to the midpoint and increases after, "
          "so the centred zone is best; f'(0) >= pi^2/l^2 guarantees persistence anywhere; "
          "f'(0) <= pi^2/L^2 forces extinction",
    "ND": "Neumann at x=0, Dirichlet at x=L: lambda1 increases in alpha, so the zone [0, l] is best; "
          "f'(0) >= pi^2/l^2 guarantees persistence anywhere; f'(0) <= pi^2/(4L^2) forces extinction",
    "DN": "Dirichlet at x=0, Neumann at x=L: lambda1 decreases in alpha, so the zone [L-l, L] is best; "
          "f'(0) >= pi^2/l^2 guarantees persistence anywhere; f'(0) <= pi^2/(4L^2) forces extinction",
    "robin": "Robin end(s): classified from direct lambda1 evaluations; as the Robin ratio tends to 0 "
             "or infinity the behaviour approaches the Neumann or Dirichlet case",
}


def lambda1_at(L: float, alpha: float, l: float, bc: BoundarySpec, growth: GrowthPair,
               tol: float = 1e-13) -> float:
    alpha = min(max(alpha, 0.0), max(L - l, 0.0))
    return principal_eigenvalue(ZoneLayout(L, alpha, min(l, L)), bc, growth, tol=tol).lambda1


def _is_keyword(bc: BoundarySpec) -> bool:
    return "R" not in bc.code


def optimal_alpha(l: float, L: float, bc: BoundarySpec, growth: GrowthPair) -> tuple[float, ...]:
    """Minimisers of ``alpha -> lambda1(alpha, l)`` on ``[0, L-l]`` (NN returns both ends)."""
    if not (0 < l <= L):
        raise ValueError("need 0 < l <= L")
    span = L - l
    code = bc.code
    if code == "NN":
        return (0.0, span) if span > 0 else (0.0,)
    if code == "DD":
        return (0.5 * span,)
    if code == "ND":
        return (0.0,)
    if code == "DN":
        return (span,)
    if span == 0:
        return (0.0,)

    def lam(a):
        return lambda1_at(L, a, l, bc, growth)

    # restarts on both halves plus the ends and the midpoint, which are the
    # answers for the Neumann/Dirichlet limits
    cands = {0.0: lam(0.0), span: lam(span), 0.5 * span: lam(0.5 * span)}
    for lo, hi in ((0.0, 0.5 * span), (0.5 * span, span)):
        res = minimize_scalar(lam, bounds=(lo, hi), method="bounded",
                              options={"xatol": 1e-6 * L})
        cands[float(res.x)] = float(res.fun)
    best = min(cands, key=cands.get)
    return (best,)


def _lambda_opt(l: float, L: float, bc: BoundarySpec, growth: GrowthPair) -> float:
    return lambda1_at(L, optimal_alpha(l, L, bc, growth)[0], l, bc, growth)


def _root_in_l(fun, lo: float, hi: float, tol: float) -> float | None:
    """Root of a function decreasing in ``l`` on ``(lo, hi]``; None if no sign change."""
    flo, fhi = fun(lo), fun(hi)
    if not (flo > 0 and fhi < 0):
        return None
    return float(brentq(fun, lo, hi, xtol=tol, rtol=4 * np.finfo(float).eps))


def critical_lengths(bc: BoundarySpec, growth: GrowthPair, L: float,
                     tol: float = 1e-10) -> dict[str, float]:
    """Threshold zone lengths.

    Keys: ``l1``, ``l2``, ``l3``, ``l_tilde`` where the corresponding
    threshold exists in ``(0, L)``, plus ``l_star``, the sharp length at which
    the optimally placed zone has ``lambda1 = 0`` (bracketed root solve in ``l``).
    """
    if not (tol > 0):
        raise ValueError("tol must be positive")
    fp = growth.fp0
    full = math.pi / math.sqrt(fp)      # pi^2 / l^2 = f'(0)
    quarter = 0.5 * full                 # pi^2 / (4 l^2) = f'(0)
    lmin = 1e-9 * L
    code = bc.code
    out: dict[str, float] = {}

    def lam_opt(l):
        return _lambda_opt(l, L, bc, growth)

    if code == "NN":
        if quarter < L:
            out["l1"] = quarter
            if lam_opt(quarter) < 0:
                r = _root_in_l(lam_opt, lmin, quarter, tol)
                if r is not None:
                    out["l2"] = r
        else:
            r = _root_in_l(lam_opt, lmin, L, tol)
            if r is not None:
                out["l_tilde"] = r
    elif code == "DD":
        if full < L:
            out["l1"] = full
            if lam_opt(full) < 0:
                r = _root_in_l(lam_opt, lmin, full, tol)
                if r is not None:
                    out["l2"] = r
    elif code in ("ND", "DN"):
        if full < L:
            out["l1"] = full
        if quarter < L:
            out["l2"] = quarter
            if lam_opt(quarter) < 0:
                r = _root_in_l(lam_opt, lmin, quarter, tol)
                if r is not None:
                    out["l3"] = r

    # sharp threshold for the optimally placed zone, any boundary pair
    hi = L
    if lam_opt(hi) < 0:
        r = _root_in_l(lam_opt, lmin, hi, tol)
        if r is not None:
            out["l_star"] = r
    return out


@dataclass(frozen=True)
class DesignReport:
    regime: str
    l_bars: dict
    alpha_star: AlphaStar
    verdict_at_optimum: FateVerdict
    theorem_citation: str
    L: float
    l: float | None
    bc_code: str
    alpha_alternatives: tuple = ()
    lambda_worst: float = float("nan")
    notes: tuple = field(default_factory=tuple)

    def as_dict(self) -> dict:
        return {
            "regime": self.regime,
            "bc": self.bc_code,
            "L": self.L,
            "l": self.l,
            "l_bars": dict(self.l_bars),
            "alpha_star": self.alpha_star,
            "alpha_alternatives": list(self.alpha_alternatives),
            "verdict_at_optimum": self.verdict_at_optimum.as_dict(),
            "lambda_worst": self.lambda_worst,
            "theorem_citation": self.theorem_citation,
            "notes": list(self.notes),
        }


def _branch_keyword(code: str, fp: float, L: float, l: float, bars: dict,
                    lam_at_bar) -> tuple[str, str]:
    """Theorem branch label and the kind of recommendation it makes.

    The recommendation is ``"anywhere"``, ``"optimum"`` or ``"extinct"``.
    """
    if code == "NN":
        if fp > math.pi ** 2 / (4 * L * L):
            l1 = bars["l1"]
            if l > l1:
                return "NN(i)(a)", "anywhere"
            if lam_at_bar(l1) < 0:
                l2 = bars.get("l2", 0.0)
                return ("NN(i)(b-1)", "optimum") if l > l2 else ("NN(i)(b-2)", "extinct")
            return "NN(i)(c)", "extinct"
        lt = bars.get("l_tilde", L)
        return ("NN(ii)(a)", "optimum") if l > lt else ("NN(ii)(b)", "extinct")
    if code == "DD":
        if fp <= math.pi ** 2 / (L * L):
            return "DD(ii)", "extinct"
        l1 = bars["l1"]
        if l > l1:
            return "DD(i)(a)", "anywhere"
        if lam_at_bar(l1) < 0:
            l2 = bars.get("l2", 0.0)
            return ("DD(i)(b-1)", "optimum") if l > l2 else ("DD(i)(b-2)", "extinct")
        return "DD(i)(c)", "extinct"
    # ND and DN share the branch structure
    if fp <= math.pi ** 2 / (4 * L * L):
        return f"{code}(iii)", "extinct"
    top = "(i)" if fp > math.pi ** 2 / (L * L) else "(ii)"
    l1 = bars.get("l1", L)
    if top == "(i)" and l >= l1:
        return f"{code}(i)(a)", "anywhere"
    l2 = bars["l2"]
    if l > l2:
        return f"{code}{top}(b)", "optimum"
    if lam_at_bar(l2) < 0:
        l3 = bars.get("l3", 0.0)
        return (f"{code}{top}(c-1)", "optimum") if l > l3 else (f"{code}{top}(c-2)", "extinct")
    return f"{code}{top}(d)", "extinct"


def _worst_lambda(L, l, bc, growth, n=50) -> float:
    span = L - l
    if span <= 0:
        return lambda1_at(L, 0.0, l, bc, growth)
    return max(lambda1_at(L, a, l, bc, growth) for a in np.linspace(0.0, span, n))


def design_report(L: float, bc: BoundarySpec, growth: GrowthPair,
                  l: float | None = None, tol: float = 1e-10) -> DesignReport:
    """Classify ``(L, bc, growth[, l])`` into a design branch and verify it by direct evaluation."""
    bars = critical_lengths(bc, growth, L, tol)
    code = bc.code
    citation = _CITATIONS.get(code, _CITATIONS["robin"])
    if l is None:
        return DesignReport(regime=f"{code}(thresholds)", l_bars=bars, alpha_star="none",
                            verdict_at_optimum=FateVerdict(Verdict.UNDECIDED, note="no zone length given"),
                            theorem_citation=citation, L=L, l=None, bc_code=code)
    if not (0 < l <= L):
        raise ValueError("need 0 < l <= L")

    alphas = optimal_alpha(l, L, bc, growth)
    lam_opt = lambda1_at(L, alphas[0], l, bc, growth)
    notes = []
    if _is_keyword(bc):
        regime, kind = _branch_keyword(code, growth.fp0, L, l, bars,
                                       lambda ll: _lambda_opt(ll, L, bc, growth))
    else:
        regime, kind = f"{code}(direct)", ""

    worst = _worst_lambda(L, l, bc, growth)
    if kind == "":
        kind = "anywhere" if worst < 0 else ("optimum" if lam_opt < 0 else "extinct")
    verdict = verdict_from_sign(lam_opt, note=f"lambda1 at alpha={alphas[0]:.12g}")

    # cross-check the branch against the computed signs
    if kind == "anywhere" and not worst < 0:
        notes.append(f"branch promises persistence anywhere but max lambda1 over alpha is {worst:.3e}")
    if kind == "optimum" and not lam_opt < 0:
        notes.append(f"branch promises persistence at the optimum but lambda1 = {lam_opt:.3e}")
    if kind == "extinct" and not lam_opt > 0:
        notes.append(f"branch promises extinction but lambda1 at the optimum is {lam_opt:.3e}")

    if kind == "anywhere":
        alpha_star: AlphaStar = "anywhere"
    elif kind == "extinct":
        alpha_star = "none"
    else:
        alpha_star = float(alphas[0])
    return DesignReport(regime=regime, l_bars=bars, alpha_star=alpha_star, verdict_at_optimum=verdict,
                        theorem_citation=citation, L=L, l=l, bc_code=code,
                        alpha_alternatives=tuple(float(a) for a in alphas),
                        lambda_worst=worst, notes=tuple(notes))


@dataclass(frozen=True)
class SweepTable:
    alpha: np.ndarray
    l: np.ndarray
    values: np.ndarray  # shape (len(l), len(alpha)); NaN where alpha + l > L

    def rows(self):
        for i, ll in enumerate(self.l):
            for j, a in enumerate(self.alpha):
                v = self.values[i, j]
                yield float(a), float(ll), (None if np.isnan(v) else float(v))


def worker_count() -> int:
    cores = os.cpu_count() or 1
    env = os.environ.get("ALLEE_ZONE_THREADS")
    if env:
        try:
            return max(1, min(cores, int(env)))
        except ValueError:
            pass
    return cores


def _sweep_row(args) -> list[float]:
    L, l, alphas, coeffs, fp0, gp0 = args
    bc = BoundarySpec(*coeffs)
    growth = GrowthPair.from_slopes(fp0, gp0)  # only the slopes enter lambda1
    out = []
    for a in alphas:
        if a < 0 or a + l > L * (1 + 4e-15):
            out.append(float("nan"))
        else:
            out.append(principal_eigenvalue(ZoneLayout(L, a, l), bc, growth).lambda1)
    return out


def sweep(L: float, bc: BoundarySpec, growth: GrowthPair, alpha_grid: Sequence[float],
          l_grid: Sequence[float], workers: int | None = None) -> SweepTable:
    """``lambda1`` on the ``l x alpha`` grid; rows are farmed out to worker processes."""
    alphas = np.asarray(alpha_grid, dtype=float)
    ls = np.asarray(l_grid, dtype=float)
    jobs = [(L, float(l), alphas.tolist(), (bc.a1, bc.a2, bc.b1, bc.b2), growth.fp0, growth.gp0)
            for l in ls]
    workers = worker_count() if workers is None else max(1, workers)
    if workers == 1 or len(jobs) < 2:
        rows = [_sweep_row(j) for j in jobs]
    else:
        with ProcessPoolExecutor(max_workers=min(workers, len(jobs))) as ex:
            rows = list(ex.map(_sweep_row, jobs))
    return SweepTable(alphas, ls, np.array(rows, dtype=float).reshape(len(ls), len(alphas)))
