"""Liquidity and worst-case loss of cost-function makers.

Worst-case loss of a symmetric maker is the area between the single-security
price curve ``p_i(x e_i)`` and the line ``p = 1`` for ``x >= 0``.  Liquidity
is the reciprocal of the own-price slope.
"""

from __future__ import annotations

import io
import json
import math
from dataclasses import asdict, dataclass
from typing import List, Tuple

import numpy as np
from scipy.integrate import quad
from scipy.optimize import minimize_scalar

from .core import as_quantities
from .cost import CostFunction, own_price_slope
from .errors import DimensionMismatch, InvalidParameter, LossMismatch, NonSymmetric
from .rootfind import DEFAULT_CONFIG, SolverConfig
from .utility import Utility, classify_bounded_loss

# quadrature stops once the integrand and the last segment are this small
INTEGRAND_CUTOFF = 1e-10
SEGMENT_CUTOFF = 1e-9
MAX_DOUBLINGS = 120
AXIS_AGREEMENT = 1e-8
BOUND_SLACK = 1e-6


def instantaneous_liquidity(cf: CostFunction, q, i: int) -> float:
    """1 / (d p_i / d q_i) at ``q``."""
    return float(1.0 / own_price_slope(cf, q, i))


def axis_liquidity(cf: CostFunction, x: float, i: int = 0) -> float:
    q = np.zeros(cf.n)
    q[i] = x
    return instantaneous_liquidity(cf, q, i)


def _require_symmetric(cf: CostFunction):
    if not cf.symmetric:
        raise NonSymmetric(f"{cf.label} has non-uniform beliefs; the axis analysis needs symmetry")


def _axis_integral(cf: CostFunction, i: int, cfg: SolverConfig) -> Tuple[float, float]:
    f = lambda x: cf.axis_complement(x, i)  # noqa: E731
    end = cf.axis_saturation(i)
    if math.isfinite(end):
        val, err = quad(f, 0.0, end, epsabs=1e-13, epsrel=1e-13, limit=200)
        return val, err

    total, err_sum = 0.0, 0.0
    previous = math.inf
    lo, hi = 0.0, float(cf.scale)
    for _ in range(MAX_DOUBLINGS):
        seg, seg_err = quad(f, lo, hi, epsabs=1e-13, epsrel=1e-12, limit=200)
        total += seg
        err_sum += seg_err
        edge_val = f(hi)
        tail = _power_tail(f(0.5 * hi), edge_val, hi)
        estimate = total + tail
        if edge_val < INTEGRAND_CUTOFF and abs(estimate - previous) < SEGMENT_CUTOFF:
            return estimate, err_sum + abs(estimate - previous) + edge_val * hi
        previous = estimate
        lo, hi = hi, hi * cfg.bracket_growth
    return math.inf, math.inf


def _power_tail(mid_val: float, edge_val: float, edge: float) -> float:
    """Integral beyond ``edge`` of c x^-k fitted through (edge/2, edge)."""
    if not (edge_val > 0 and mid_val > edge_val):
        return 0.0
    decay = math.log2(mid_val / edge_val)
    if decay <= 1.0:
        return math.inf
    return edge_val * edge / (decay - 1.0)


def worst_case_loss(cf: CostFunction, cfg: SolverConfig = DEFAULT_CONFIG) -> Tuple[float, float]:
    """(L_max, error estimate); L_max is inf when the loss is unbounded.

    The integral is taken along the first and the last axis; the two must agree.
    """
    _require_symmetric(cf)
    view = cf.utility_view()
    if view is not None and not classify_bounded_loss(view[0]).bounded:
        return math.inf, 0.0
    first, err_first = _axis_integral(cf, 0, cfg)
    last, err_last = _axis_integral(cf, cf.n - 1, cfg)
    if math.isinf(first) or math.isinf(last):
        return math.inf, math.inf
    if abs(first - last) > AXIS_AGREEMENT * max(1.0, abs(first)):
        raise NonSymmetric(f"axis integrals disagree: {first} vs {last}")
    return 0.5 * (first + last), max(err_first, err_last) + abs(first - last)


def utility_loss_bound(u: Utility, pi, k: float) -> float:
    """Loss cap of a utility maker: the wealth it may fall to in its worst outcome.

    Over all trades, maker wealth in outcome j cannot fall below the level at
    which every other outcome already holds the top of the utility range.
    """
    pi = np.asarray(pi, dtype=float)
    if not classify_bounded_loss(u).bounded:
        return math.inf
    worst = -math.inf
    for j in range(pi.size):
        rest = 1.0 - pi[j]
        need = (k - rest * u.range_upper) / pi[j]
        floor = float(u.inverse(need)) if need > u.range_lower else u.domain_lower
        worst = max(worst, -floor)
    return worst


# -- loss against liquidity ----------------------------------------------------

@dataclass(frozen=True)
class LossLiquidityReport:
    worst_case_loss: float
    min_liquidity: float
    loss_floor: float
    bound_satisfied: bool
    integration_error_estimate: float

    def to_json(self) -> str:
        return json.dumps({k: (repr(v) if isinstance(v, float) else v)
                           for k, v in asdict(self).items()})


def _price_grid(samples: int, lo: float = 0.0, hi: float = 1.0) -> np.ndarray:
    return lo + (hi - lo) * (np.arange(samples) + 0.5) / samples


def liquidity_at_price(cf: CostFunction, p: float, i: int = 0) -> float:
    return axis_liquidity(cf, cf.axis_position(p, i), i)


def min_axis_liquidity(cf: CostFunction, i: int = 0, samples: int = 400) -> Tuple[float, float]:
    """(minimum liquidity, price where it occurs) along the axis of outcome i."""
    grid = _price_grid(samples)
    rho = np.array([liquidity_at_price(cf, p, i) for p in grid])
    j = int(np.argmin(rho))
    lo = grid[max(j - 1, 0)] if j > 0 else grid[0] * 0.5
    hi = grid[min(j + 1, samples - 1)] if j < samples - 1 else 0.5 * (1.0 + grid[-1])
    res = minimize_scalar(lambda p: liquidity_at_price(cf, p, i), bounds=(lo, hi),
                          method="bounded", options={"xatol": 1e-12})
    if res.success and res.fun < rho[j]:
        return float(res.fun), float(res.x)
    return float(rho[j]), float(grid[j])


def loss_floor(n: int, rho: float) -> float:
    """Smallest worst-case loss compatible with liquidity at least ``rho``."""
    return (n - 1) ** 2 * rho / (2 * n * n)


def check_loss_liquidity(cf: CostFunction, cfg: SolverConfig = DEFAULT_CONFIG) -> LossLiquidityReport:
    loss, err = worst_case_loss(cf, cfg)
    rho, _ = min_axis_liquidity(cf)
    bound = loss_floor(cf.n, rho)
    return LossLiquidityReport(float(loss), rho, bound, bool(loss >= bound - BOUND_SLACK), float(err))


def off_axis_min_liquidity(cf: CostFunction, samples: int = 1000, seed: int = 0,
                           floor: float = 0.01) -> float:
    """Smallest liquidity over random interior price points (all outcomes)."""
    rng = np.random.default_rng(seed)
    targets = floor + (1.0 - cf.n * floor) * rng.dirichlet(np.ones(cf.n), size=samples)
    zero = np.zeros(cf.n)
    best = math.inf
    for r in targets:
        q = cf.belief_quantities(zero, r)
        for i in range(cf.n):
            best = min(best, instantaneous_liquidity(cf, q, i))
    return best


# -- dominance between two equal-loss makers ----------------------------------

@dataclass(frozen=True)
class DominanceScan:
    prices: Tuple[float, ...]
    liquidity_a: Tuple[float, ...]
    liquidity_b: Tuple[float, ...]
    intervals: Tuple[Tuple[float, float, str], ...]
    crossings: Tuple[float, ...]

    def winner_at(self, p: float) -> str:
        for lo, hi, who in self.intervals:
            if lo <= p <= hi:
                return who
        raise InvalidParameter(f"price {p} outside the scanned range")


def liquidity_dominance_scan(a: CostFunction, b: CostFunction, samples: int = 1000,
                             price_range: Tuple[float, float] = (0.0, 1.0),
                             loss_tol: float = 1e-3, i: int = 0) -> DominanceScan:
    """Where along the price axis each maker offers more liquidity."""
    if a.n != b.n:
        raise DimensionMismatch("makers differ in number of outcomes")
    _require_symmetric(a)
    _require_symmetric(b)
    la, _ = worst_case_loss(a)
    lb, _ = worst_case_loss(b)
    if not (abs(la - lb) <= loss_tol or la == lb):
        raise LossMismatch(f"worst-case losses differ: {la} vs {lb}")
    grid = _price_grid(samples, *price_range)
    ra = np.array([liquidity_at_price(a, p, i) for p in grid])
    rb = np.array([liquidity_at_price(b, p, i) for p in grid])
    tie = np.abs(ra - rb) <= 1e-9 * np.maximum(np.abs(ra), np.abs(rb))
    winner = np.where(tie, "tie", np.where(ra > rb, "a", "b"))

    bounds = np.concatenate([[price_range[0]], 0.5 * (grid[1:] + grid[:-1]), [price_range[1]]])
    intervals: List[Tuple[float, float, str]] = []
    start = 0
    for j in range(1, samples + 1):
        if j == samples or winner[j] != winner[start]:
            intervals.append((float(bounds[start]), float(bounds[j]), str(winner[start])))
            start = j
    crossings = []
    strict = [(lo, hi, w) for lo, hi, w in intervals if w != "tie"]
    for (lo0, hi0, w0), (lo1, _, w1) in zip(strict, strict[1:]):
        if w0 != w1:
            crossings.append(0.5 * (hi0 + lo1))
    return DominanceScan(tuple(grid.tolist()), tuple(ra.tolist()), tuple(rb.tolist()),
                         tuple(intervals), tuple(crossings))


# -- single-security price curve ----------------------------------------------

@dataclass(frozen=True)
class LiquidityCurve:
    samples: Tuple[Tuple[float, float, float], ...]

    def to_csv(self) -> str:
        out = io.StringIO()
        out.write("q1,price,liquidity\n")
        for q1, p, rho in self.samples:
            out.write(f"{float(q1)!r},{float(p)!r},{float(rho)!r}\n")
        return out.getvalue()


def axis_price_curve(cf: CostFunction, q_max: float, samples: int = 101) -> LiquidityCurve:
    """Tabulate (q1, p1, liquidity) along the first axis of a two-outcome maker."""
    if cf.n != 2:
        raise DimensionMismatch("the price curve is defined for two-outcome makers")
    _require_symmetric(cf)
    if samples < 2:
        raise InvalidParameter("need at least two samples")
    rows = []
    for x in np.linspace(0.0, q_max, samples):
        q = as_quantities([x, 0.0])
        rows.append((float(x), float(cf.prices(q)[0]), instantaneous_liquidity(cf, q, 0)))
    return LiquidityCurve(tuple(rows))


def loss_against_bound(cf: CostFunction) -> float:
    """Worst-case loss, or the utility cap for makers with non-uniform beliefs."""
    if cf.symmetric:
        return worst_case_loss(cf)[0]
    view = cf.utility_view()
    if view is None:
        raise NonSymmetric(f"no loss bound available for {cf.label}")
    u, pi, k = view
    return utility_loss_bound(u, pi, k)


__all__ = [
    "DominanceScan",
    "LiquidityCurve",
    "LossLiquidityReport",
    "axis_liquidity",
    "axis_price_curve",
    "instantaneous_liquidity",
    "liquidity_at_price",
    "liquidity_dominance_scan",
    "loss_against_bound",
    "min_axis_liquidity",
    "off_axis_min_liquidity",
    "loss_floor",
    "check_loss_liquidity",
    "utility_loss_bound",
    "worst_case_loss",
]
