"""Cost-function market makers.

A cost function ``C(q)`` records the money traders have paid as a function of
outstanding shares ``q``; prices are its gradient, and a trade ``q -> q'``
costs ``C(q') - C(q)``.  Every cost function here is normalized so that
``C(0) = 0``; ``raw_cost`` gives the un-normalized formula value.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from typing import Optional, Tuple

import numpy as np
from scipy.special import expit, logsumexp

from .core import (
    MarketState,
    TradeRecord,
    as_quantities,
    decode_vector,
    encode_vector,
    uniform,
    validate_prob_vector,
)
from .errors import (
    DegenerateSlope,
    DimensionMismatch,
    DomainViolation,
    InvalidParameter,
    MarketResolved,
    PriceOutOfRange,
    RangeViolation,
    SolverFailure,
    Unattainable,
)
from .rootfind import DEFAULT_CONFIG, SolverConfig, expand_bracket, newton_bisect
from .utility import LogShift, NegExp, Utility, softmax_weighted, utility_from_dict

# prices reached by move_to_belief must match the target this closely
BELIEF_TOL = 1e-8


class CostFunction:
    """Interface shared by all cost-function kinds."""

    kind = "abstract"
    n: int

    # -- values ---------------------------------------------------------
    def raw_cost(self, q: np.ndarray) -> float:
        raise NotImplementedError

    @property
    def offset(self) -> float:
        """raw_cost(0): subtracted so that cost(0) = 0."""
        raise NotImplementedError

    def cost(self, q) -> float:
        return self.raw_cost(self._q(q)) - self.offset

    def prices(self, q) -> np.ndarray:
        raise NotImplementedError

    def cost_and_prices(self, q) -> Tuple[float, np.ndarray]:
        return self.cost(q), self.prices(q)

    def own_price_slope(self, q, i: int) -> float:
        """d p_i / d q_i."""
        raise NotImplementedError

    def belief_quantities(self, q: np.ndarray, r: np.ndarray) -> np.ndarray:
        """Quantity vector at which prices equal ``r`` (one canonical choice)."""
        raise NotImplementedError

    # -- single-security axis (used by the loss/liquidity analysis) ------
    def axis_price(self, x: float, i: int = 0) -> float:
        q = np.zeros(self.n)
        q[i] = x
        return float(self.prices(q)[i])

    def axis_complement(self, x: float, i: int = 0) -> float:
        """1 - p_i(x e_i), computed without cancellation, clamped at 0."""
        q = np.zeros(self.n)
        q[i] = x
        p = self.prices(q)
        return float(np.sum(np.delete(p, i)))

    def axis_position(self, p: float, i: int = 0) -> float:
        """Axis coordinate x with p_i(x e_i) = p (symmetric makers)."""
        r = np.full(self.n, (1.0 - p) / (self.n - 1))
        r[i] = p
        bq = self.belief_quantities(np.zeros(self.n), r)
        return float(bq[i] - bq[(i + 1) % self.n])

    def axis_saturation(self, i: int = 0) -> float:
        """Axis coordinate where p_i first reaches 1 (inf if never)."""
        return math.inf

    # -- metadata -------------------------------------------------------
    @property
    def symmetric(self) -> bool:
        return True

    @property
    def scale(self) -> float:
        return 1.0

    def utility_view(self) -> Optional[Tuple[Utility, np.ndarray, float]]:
        """(u, pi, k) such that sum_j pi_j u(raw_cost(q) - q_j) = k, if any."""
        return None

    @property
    def label(self) -> str:
        return self.kind

    def to_dict(self) -> dict:
        raise NotImplementedError

    def _q(self, q) -> np.ndarray:
        return as_quantities(q, self.n)


@dataclass(frozen=True)
class LMSR(CostFunction):
    """C(q) = b log sum_j exp(q_j / b)."""

    b: float
    n: int = 2

    kind = "lmsr"

    def __post_init__(self):
        _positive("b", self.b)
        _outcomes(self.n)

    def raw_cost(self, q):
        return float(self.b * logsumexp(np.asarray(q) / self.b))

    @property
    def offset(self):
        return self.b * math.log(self.n)

    def prices(self, q):
        return softmax_weighted(self._q(q) / self.b)

    def own_price_slope(self, q, i):
        p = self.prices(q)[i]
        return p * (1.0 - p) / self.b

    def belief_quantities(self, q, r):
        return q + self.b * (np.log(r) - np.log(self.prices(q)))

    def axis_price(self, x, i=0):
        return float(expit(x / self.b - math.log(self.n - 1)))

    def axis_complement(self, x, i=0):
        return float(expit(math.log(self.n - 1) - x / self.b))

    def axis_position(self, p, i=0):
        return self.b * (math.log(p) - math.log1p(-p) + math.log(self.n - 1))

    @property
    def scale(self):
        return self.b

    def utility_view(self):
        # level of the raw formula; the normalized cost sits at level -1
        return NegExp(1.0 / self.b), uniform(self.n), -1.0 / self.n

    @property
    def label(self):
        return f"lmsr(b={self.b!r}, n={self.n})"

    def to_dict(self):
        return {"kind": self.kind, "b": repr(float(self.b)), "n": self.n}


@dataclass(frozen=True)
class QuadraticCost(CostFunction):
    """Cost function of the quadratic scoring rule.

    Prices are linear in ``q`` and leave [0, 1] outside a bounded region;
    states there are rejected with PriceOutOfRange.
    """

    b: float
    n: int = 2

    kind = "quadratic"

    def __post_init__(self):
        _positive("b", self.b)
        _outcomes(self.n)

    def raw_cost(self, q):
        q = np.asarray(q, dtype=float)
        n, b = self.n, self.b
        s = q.sum()
        return float(s / n + np.dot(q, q) / (4 * b) - s * s / (4 * n * b) - b / n)

    @property
    def offset(self):
        return -self.b / self.n

    def unchecked_prices(self, q) -> np.ndarray:
        q = self._q(q)
        return 1.0 / self.n + (q - q.mean()) / (2 * self.b)

    def prices(self, q):
        p = self.unchecked_prices(q)
        if np.any(p < 0) or np.any(p > 1):
            raise PriceOutOfRange(f"prices {p.tolist()} leave [0, 1]")
        return p

    def own_price_slope(self, q, i):
        self.prices(q)
        return (self.n - 1) / (2 * self.n * self.b)

    def belief_quantities(self, q, r):
        d = 2 * self.b * (r - 1.0 / self.n)
        return d + (q[-1] - d[-1])

    def axis_price(self, x, i=0):
        return 1.0 / self.n + x * (self.n - 1) / (2 * self.n * self.b)

    def axis_complement(self, x, i=0):
        n = self.n
        val = (n - 1) / n - x * (n - 1) / (2 * n * self.b)
        return float(min(1.0, max(0.0, val)))

    def axis_position(self, p, i=0):
        return (p - 1.0 / self.n) * 2 * self.n * self.b / (self.n - 1)

    def axis_saturation(self, i=0):
        return self.saturation

    @property
    def saturation(self) -> float:
        """Axis position where p_i reaches 1."""
        return 2 * self.b

    @property
    def scale(self):
        return self.b

    @property
    def label(self):
        return f"quadratic(b={self.b!r}, n={self.n})"

    def to_dict(self):
        return {"kind": self.kind, "b": repr(float(self.b)), "n": self.n}


@dataclass(frozen=True)
class LogUtility2(CostFunction):
    """Two-outcome log-utility maker with uniform beliefs, in closed form:

    C(q) = -b + (q1 + q2)/2 + sqrt(4 b^2 + (q1 - q2)^2) / 2
    """

    b: float

    kind = "log_utility_2"
    n = 2

    def __post_init__(self):
        _positive("b", self.b)

    def raw_cost(self, q):
        q1, q2 = np.asarray(q, dtype=float)
        return float(-self.b + 0.5 * (q1 + q2) + 0.5 * math.hypot(2 * self.b, q1 - q2))

    @property
    def offset(self):
        return 0.0

    def _split(self, d: float) -> Tuple[float, float]:
        # (price of the leading side, price of the lagging side) for |d|
        s = math.hypot(2 * self.b, d)
        small = 2 * self.b * self.b / (s * (s + abs(d)))
        return 1.0 - small, small

    def prices(self, q):
        q1, q2 = self._q(q)
        big, small = self._split(q1 - q2)
        return np.array([big, small]) if q1 >= q2 else np.array([small, big])

    def own_price_slope(self, q, i):
        q1, q2 = self._q(q)
        s = math.hypot(2 * self.b, q1 - q2)
        return 2 * self.b * self.b / s ** 3

    def belief_quantities(self, q, r):
        r1, r2 = r
        d = self.b * (r1 - r2) / math.sqrt(r1 * r2)
        return np.array([q[1] + d, q[1]])

    def axis_price(self, x, i=0):
        big, small = self._split(x)
        return big if x >= 0 else small

    def axis_complement(self, x, i=0):
        big, small = self._split(x)
        return small if x >= 0 else big

    def axis_position(self, p, i=0):
        return self.b * (2 * p - 1) / math.sqrt(p * (1 - p))

    @property
    def scale(self):
        return self.b

    def utility_view(self):
        return LogShift(self.b), uniform(2), math.log(self.b)

    @property
    def label(self):
        return f"log_utility_2(b={self.b!r})"

    def to_dict(self):
        return {"kind": self.kind, "b": repr(float(self.b))}


@dataclass(frozen=True)
class ExpUtilityCost(CostFunction):
    """Negative-exponential-utility maker: C(q) = (1/alpha) log sum_j pi_j e^(alpha q_j)."""

    alpha: float
    weights: tuple

    kind = "exp_utility"

    def __post_init__(self):
        _positive("alpha", self.alpha)
        w = validate_prob_vector(self.weights, strict=True)
        object.__setattr__(self, "weights", tuple(float(x) for x in w))

    @property
    def n(self):
        return len(self.weights)

    @property
    def _logw(self):
        return np.log(np.array(self.weights))

    def raw_cost(self, q):
        return float(logsumexp(self.alpha * np.asarray(q), b=np.array(self.weights)) / self.alpha)

    @property
    def offset(self):
        return 0.0

    def prices(self, q):
        return softmax_weighted(self._logw + self.alpha * self._q(q))

    def own_price_slope(self, q, i):
        p = self.prices(q)[i]
        return self.alpha * p * (1.0 - p)

    def belief_quantities(self, q, r):
        return q + (np.log(r) - np.log(self.prices(q))) / self.alpha

    def axis_price(self, x, i=0):
        w = self.weights[i]
        return float(expit(self.alpha * x + math.log(w) - math.log1p(-w)))

    def axis_complement(self, x, i=0):
        w = self.weights[i]
        return float(expit(-(self.alpha * x + math.log(w) - math.log1p(-w))))

    @property
    def symmetric(self):
        return _is_uniform(self.weights)

    @property
    def scale(self):
        return 1.0 / self.alpha

    def utility_view(self):
        return NegExp(self.alpha), np.array(self.weights), -1.0

    @property
    def label(self):
        return f"exp_utility(alpha={self.alpha!r}, weights={list(self.weights)})"

    def to_dict(self):
        return {"kind": self.kind, "alpha": repr(float(self.alpha)),
                "weights": encode_vector(self.weights)}


@dataclass(frozen=True)
class ImplicitCost(CostFunction):
    """Utility-based maker: C(q) is the root of sum_j pi_j u(C - q_j) = k."""

    utility: Utility
    weights: tuple
    k: float
    config: SolverConfig = field(default=DEFAULT_CONFIG)

    kind = "implicit"

    def __post_init__(self):
        w = validate_prob_vector(self.weights, strict=True)
        object.__setattr__(self, "weights", tuple(float(x) for x in w))
        if self.utility.degenerate:
            raise InvalidParameter("utility with domain bounded above cannot run a market")
        if not (self.utility.range_lower < self.k < self.utility.range_upper):
            raise DomainViolation(f"expected-utility level k={self.k} is not attainable")

    @property
    def n(self):
        return len(self.weights)

    @property
    def _w(self):
        return np.array(self.weights)

    def raw_cost(self, q):
        return implicit_cost_solve(self.utility, self._w, self.k, q, self.config)

    @property
    def offset(self):
        return float(self.utility.inverse(self.k))

    def _solve(self, q) -> Tuple[float, np.ndarray]:
        return implicit_wealth_solve(self.utility, self._w, self.k, self._q(q), self.config)

    def _prices_at(self, wealth: np.ndarray) -> np.ndarray:
        return softmax_weighted(np.log(self._w) + self.utility.log_prime(wealth))

    def prices(self, q):
        return self._prices_at(self._solve(q)[1])

    def cost_and_prices(self, q):
        c, m = self._solve(q)
        return c - self.offset, self._prices_at(m)

    def own_price_slope(self, q, i):
        _, m = self._solve(q)
        p = self._prices_at(m)
        a = self.utility.ara(m)
        # d p_i / d q_i = p_i [ p_i sum_k p_k A_k - A_i (2 p_i - 1) ],  A = -u''/u'
        return float(p[i] * (p[i] * np.dot(p, a) - a[i] * (2 * p[i] - 1)))

    def belief_quantities(self, q, r):
        m = belief_wealth(self.utility, self._w, self.k, r, self.config)
        c_new = q[-1] + m[-1]
        out = c_new - m
        out[-1] = q[-1]
        return out

    def axis_saturation(self, i=0):
        # wealth in outcome i pinned at the domain edge: remaining outcomes
        # carry the rest of the level k
        u, w = self.utility, self.weights[i]
        edge = u.domain_lower
        if not math.isfinite(edge):
            return math.inf
        with np.errstate(divide="ignore", invalid="ignore"):
            u_edge = float(u.value(edge))
        if not math.isfinite(u_edge):
            return math.inf
        need = (self.k - w * u_edge) / (1.0 - w)
        if need >= u.range_upper:
            return math.inf
        return float(u.inverse(need)) - edge

    @property
    def symmetric(self):
        return _is_uniform(self.weights)

    @property
    def scale(self):
        return self.utility.scale

    def utility_view(self):
        return self.utility, self._w, self.k

    @property
    def label(self):
        return f"implicit({self.utility!r}, weights={list(self.weights)}, k={self.k!r})"

    def to_dict(self):
        return {"kind": self.kind, "utility": self.utility.to_dict(),
                "weights": encode_vector(self.weights), "k": repr(float(self.k)),
                "config": self.config.to_dict()}


def cost_function_from_dict(d: dict) -> CostFunction:
    kind = d.get("kind")
    if kind == "lmsr":
        return LMSR(float(d["b"]), int(d["n"]))
    if kind == "quadratic":
        return QuadraticCost(float(d["b"]), int(d["n"]))
    if kind == "log_utility_2":
        return LogUtility2(float(d["b"]))
    if kind == "exp_utility":
        return ExpUtilityCost(float(d["alpha"]), decode_vector(d["weights"]))
    if kind == "implicit":
        cfg = SolverConfig.from_dict(d["config"]) if "config" in d else DEFAULT_CONFIG
        return ImplicitCost(utility_from_dict(d["utility"]), decode_vector(d["weights"]),
                            float(d["k"]), cfg)
    raise InvalidParameter(f"unknown cost function kind {kind!r}")


def _positive(name, x):
    if not (x > 0 and math.isfinite(x)):
        raise InvalidParameter(f"{name} must be positive and finite, got {x}")


def _outcomes(n):
    if int(n) != n or n < 2:
        raise InvalidParameter(f"need at least 2 outcomes, got {n}")


def _is_uniform(w) -> bool:
    w = np.asarray(w)
    return bool(np.all(np.abs(w - 1.0 / w.size) <= 1e-15))


# -- numerical core for utility-defined makers ------------------------------

def initial_k(u: Utility, pi, initial_wealth) -> float:
    """Expected-utility level of a maker starting from ``initial_wealth``."""
    pi = validate_prob_vector(pi, strict=True)
    m = np.asarray(initial_wealth, dtype=float)
    if m.shape != pi.shape:
        raise DimensionMismatch("wealth and probability vectors differ in length")
    if not np.all(u.in_domain(m)):
        raise DomainViolation(f"initial wealth {m.tolist()} outside the utility domain")
    return float(np.dot(pi, u.value(m)))


def implicit_wealth_solve(u: Utility, pi, k: float, q,
                          cfg: SolverConfig = DEFAULT_CONFIG) -> Tuple[float, np.ndarray]:
    """(C, wealth) with wealth = C - q and sum_j pi_j u(wealth_j) = k.

    The unknown is the wealth s = C - max(q) of the leading outcome, so the
    smallest wealth entry carries full relative precision even when C is
    large.  The left side is increasing in s; Jensen's inequality brackets
    the root between u^-1(k) - E_pi[max(q) - q] and u^-1(k), with geometric
    expansion as the fallback.
    """
    pi = np.asarray(pi, dtype=float)
    q = np.asarray(q, dtype=float)
    try:
        v = float(u.inverse(k))
    except RangeViolation as exc:
        raise DomainViolation(f"k={k} outside the utility range") from exc

    q_max = float(q.max())
    gap = q_max - q
    hi = v
    lo = v - float(np.dot(pi, gap))
    if hi <= lo:
        return q_max + hi, hi + gap

    def f(s):
        with np.errstate(divide="ignore", invalid="ignore", over="ignore"):
            return float(np.dot(pi, u.value(s + gap))) - k

    def fd(s):
        m = s + gap
        with np.errstate(divide="ignore", invalid="ignore", over="ignore"):
            return (float(np.dot(pi, u.value(m))) - k, float(np.dot(pi, np.exp(u.log_prime(m)))))

    edge = u.domain_lower
    if math.isfinite(edge) and lo <= edge:
        lo = edge
    f_lo = f(lo)
    if math.isnan(f_lo):
        raise DomainViolation("cost equation undefined at the lower bracket")
    if f_lo > 0:
        if math.isfinite(edge):
            raise DomainViolation(f"no cost keeps wealth in the utility domain at k={k}")
        lo = expand_bracket(f, lo, max(1.0, hi - lo), -1.0, want_positive=False, cfg=cfg)
        f_lo = f(lo)
    f_hi = f(hi)
    if f_hi < 0:
        hi = expand_bracket(f, hi, max(1.0, hi - lo), 1.0, want_positive=True, cfg=cfg)
        f_hi = f(hi)
    x0 = lo if math.isfinite(f_lo) else None
    s_root = newton_bisect(fd, lo, hi, cfg, x0=x0, f_lo=f_lo, f_hi=f_hi)
    return q_max + s_root, s_root + gap


def implicit_cost_solve(u: Utility, pi, k: float, q, cfg: SolverConfig = DEFAULT_CONFIG) -> float:
    """The unique C with sum_j pi_j u(C - q_j) = k."""
    return implicit_wealth_solve(u, pi, k, q, cfg)[0]


def belief_wealth(u: Utility, pi, k: float, r, cfg: SolverConfig = DEFAULT_CONFIG) -> np.ndarray:
    """Maker wealth vector at which risk-neutral prices equal ``r`` on level ``k``.

    Prices equal r iff log u'(m_i) = t + log(r_i / pi_i) for a common t; the
    level constraint then pins t through a monotone scalar equation.
    """
    pi = np.asarray(pi, dtype=float)
    r = np.asarray(r, dtype=float)
    if u.is_linear:
        if np.allclose(r, pi, rtol=0, atol=1e-12):
            return np.full(pi.size, float(u.inverse(k)))
        raise Unattainable("a risk-neutral maker only quotes its own beliefs")
    shift = np.log(r) - np.log(pi)

    def wealth(t):
        return u.log_prime_inverse(t + shift)

    def h(t):
        with np.errstate(over="ignore", invalid="ignore", divide="ignore"):
            return k - float(np.dot(pi, u.value(wealth(t))))

    def hd(t):
        m = wealth(t)
        with np.errstate(over="ignore", invalid="ignore", divide="ignore"):
            val = k - float(np.dot(pi, u.value(m)))
            deriv = float(np.dot(pi, np.exp(u.log_prime(m)) / u.ara(m)))
        return val, deriv

    t0 = float(u.log_prime(u.inverse(k)))
    lo = expand_bracket(h, t0, 1.0, -1.0, want_positive=False, cfg=cfg)
    hi = expand_bracket(h, t0, 1.0, 1.0, want_positive=True, cfg=cfg)
    if lo == hi:
        return wealth(lo)
    t = newton_bisect(hd, lo, hi, cfg)
    return wealth(t)


def expected_utility(cf: CostFunction, q) -> float:
    """sum_j pi_j u(raw_cost(q) - q_j) for utility-backed cost functions."""
    view = cf.utility_view()
    if view is None:
        raise InvalidParameter(f"{cf.label} has no utility representation")
    u, pi, _ = view
    q = as_quantities(q, cf.n)
    c_raw = cf.cost(q) + cf.offset
    return float(np.dot(pi, u.value(c_raw - q)))


# -- public operations -------------------------------------------------------

def cost(cf: CostFunction, q) -> float:
    return cf.cost(q)


def prices(cf: CostFunction, q) -> np.ndarray:
    return cf.prices(q)


def trade(cf: CostFunction, state: MarketState, delta) -> Tuple[MarketState, TradeRecord]:
    """Apply a share bundle ``delta``; the trader pays C(q + delta) - C(q).

    The state is never modified; a rejected trade raises before anything is
    built.
    """
    if state.resolved_outcome is not None:
        raise MarketResolved(f"market resolved to outcome {state.resolved_outcome}")
    delta = as_quantities(delta, cf.n)
    if state.n != cf.n:
        raise DimensionMismatch("state and cost function differ in number of outcomes")
    q_old = state.q
    q_new = q_old + delta
    prices_before = cf.prices(q_old)
    c_new, prices_after = cf.cost_and_prices(q_new)
    payment = c_new - state.collected
    record = TradeRecord(
        delta=tuple(float(x) for x in delta),
        payment=float(payment),
        prices_before=tuple(float(x) for x in prices_before),
        prices_after=tuple(float(x) for x in prices_after),
        seq=state.next_seq,
    )
    return state.with_trade(q_new, c_new, record), record


def move_to_belief(cf: CostFunction, state: MarketState, r) -> Tuple[MarketState, TradeRecord]:
    """Trade a risk-neutral trader with belief ``r`` makes: move prices to ``r``."""
    r = validate_prob_vector(r, strict=True)
    if r.size != cf.n:
        raise DimensionMismatch(f"belief has {r.size} entries, market has {cf.n}")
    q = state.q
    try:
        target = cf.belief_quantities(q, r)
    except (DomainViolation, SolverFailure) as exc:
        if isinstance(exc, Unattainable):
            raise
        raise Unattainable(f"cannot reach prices {r.tolist()}: {exc}") from exc
    new_state, record = trade(cf, state, target - q)
    reached = np.array(record.prices_after)
    if np.max(np.abs(reached - r)) > BELIEF_TOL:
        raise SolverFailure(f"prices {reached.tolist()} miss target {r.tolist()}")
    return new_state, record


def own_price_slope(cf: CostFunction, q, i: int) -> float:
    s = cf.own_price_slope(as_quantities(q, cf.n), i)
    if not s > 0:
        raise DegenerateSlope(f"own-price slope {s} is not positive")
    return float(s)
