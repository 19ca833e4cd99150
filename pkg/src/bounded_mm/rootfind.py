"""Bracketed, safeguarded Newton iteration for monotone scalar equations."""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Callable, Tuple

from .errors import InvalidParameter, SolverFailure


@dataclass(frozen=True)
class SolverConfig:
    rel_tol: float = 1e-12
    abs_tol: float = 1e-12
    max_iter: int = 200
    bracket_growth: float = 2.0

    def __post_init__(self):
        if not (self.rel_tol > 0 and self.abs_tol > 0):
            raise InvalidParameter("solver tolerances must be positive")
        if self.max_iter < 1:
            raise InvalidParameter("max_iter must be at least 1")
        if not self.bracket_growth > 1:
            raise InvalidParameter("bracket_growth must exceed 1")

    def to_dict(self) -> dict:
        return {"rel_tol": repr(self.rel_tol), "abs_tol": repr(self.abs_tol),
                "max_iter": self.max_iter, "bracket_growth": repr(self.bracket_growth)}

    @classmethod
    def from_dict(cls, d: dict) -> "SolverConfig":
        return cls(float(d["rel_tol"]), float(d["abs_tol"]), int(d["max_iter"]),
                   float(d["bracket_growth"]))


DEFAULT_CONFIG = SolverConfig()

FuncAndDeriv = Callable[[float], Tuple[float, float]]


def newton_bisect(func: FuncAndDeriv, lo: float, hi: float, cfg: SolverConfig = DEFAULT_CONFIG,
                  x0: float | None = None, f_lo: float | None = None,
                  f_hi: float | None = None) -> float:
    """Root of ``func`` on ``[lo, hi]`` where ``func`` changes sign.

    ``func(x)`` returns ``(f(x), f'(x))``.  Newton steps are taken when they
    stay inside the current bracket and shrink it fast enough; otherwise the
    bracket is bisected.  Endpoint values may be passed in when the caller
    knows them (e.g. limits at a domain boundary where ``func`` cannot be
    evaluated).
    """
    if not lo < hi:
        raise SolverFailure(f"empty bracket [{lo}, {hi}]")
    if f_lo is None:
        f_lo = func(lo)[0]
    if f_hi is None:
        f_hi = func(hi)[0]
    if f_lo == 0:
        return lo
    if f_hi == 0:
        return hi
    if (f_lo > 0) == (f_hi > 0):
        raise SolverFailure(f"no sign change on [{lo}, {hi}]: f={f_lo}, {f_hi}")
    # orient so that f(a) < 0 < f(b)
    a, b = (lo, hi) if f_lo < 0 else (hi, lo)

    x = 0.5 * (lo + hi) if x0 is None or not (min(a, b) < x0 < max(a, b)) else x0
    dx_old = abs(hi - lo)
    dx = dx_old
    for _ in range(cfg.max_iter):
        f, df = func(x)
        if f == 0:
            return x
        if f < 0:
            a = x
        else:
            b = x
        tol = cfg.abs_tol + cfg.rel_tol * abs(x)
        newton_ok = (
            math.isfinite(df) and df != 0 and math.isfinite(f)
            and ((x - b) * df - f) * ((x - a) * df - f) < 0
            and abs(2.0 * f) <= abs(dx_old * df)
        )
        dx_old = dx
        if newton_ok:
            dx = f / df
            x_new = x - dx
        else:
            x_new = 0.5 * (a + b)
            dx = x - x_new
        if abs(dx) <= tol or abs(b - a) <= tol:
            return x_new
        x = x_new
    raise SolverFailure(f"no convergence in {cfg.max_iter} iterations (bracket [{a}, {b}])")


def expand_bracket(f: Callable[[float], float], start: float, step: float, direction: float,
                   want_positive: bool, cfg: SolverConfig = DEFAULT_CONFIG) -> float:
    """Step geometrically from ``start`` until the sign of ``f`` is as wanted."""
    x = start
    step = abs(step) if step else 1.0
    for _ in range(cfg.max_iter):
        val = f(x)
        if (val > 0) == want_positive and val != 0:
            return x
        x = x + direction * step
        step *= cfg.bracket_growth
    raise SolverFailure("bracket expansion budget exhausted")
