"""Utility functions of money, risk-neutral prices and the bounded-loss test.

All utilities are members (or affine images of members) of the HARA family

    u(m) = (gamma (M + alpha m / gamma)^(1 - gamma) - 1) / (1 - gamma)

with three special values of ``gamma`` acting as tags for closed forms:
``1.0`` (logarithmic, ``log(M + alpha m)``), ``+-inf`` (negative exponential,
``-exp(-alpha m)``) and ``0.0`` (linear, ``alpha m - 1``).  Values too close to
a tag to be evaluated reliably from the generic formula are refused.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import NamedTuple

import numpy as np

from .core import validate_prob_vector
from .errors import DomainViolation, InvalidParameter, RangeViolation

GAMMA_NEAR_ONE = 1e-6
GAMMA_MAX = 1e6
# slack so that e.g. 1 + 1e-6, whose float difference from 1 is a hair under
# 1e-6, is still accepted
_EDGE = 1.0 - 1e-6

INF = math.inf


def _is_log_tag(g: float) -> bool:
    return g == 1.0


def _is_exp_tag(g: float) -> bool:
    return math.isinf(g)


class Utility:
    """Common interface.  Subclasses provide :attr:`hara` or override methods.

    Methods here are vectorized and do not check the domain; the module-level
    functions (``u_eval`` and friends) are the checked public surface.
    """

    family = "abstract"

    @property
    def hara(self) -> "Hara":
        raise NotImplementedError

    # value and derivatives
    def value(self, m):
        return self.hara.value(m)

    def log_prime(self, m):
        return self.hara.log_prime(m)

    def prime(self, m):
        return np.exp(self.log_prime(m))

    def ara(self, m):
        """Absolute risk aversion ``-u''/u'``."""
        return self.hara.ara(m)

    def second(self, m):
        return -self.ara(m) * self.prime(m)

    def inverse(self, v):
        return self.hara.inverse(v)

    def log_prime_inverse(self, y):
        """Wealth at which ``log u'(m) = y``."""
        return self.hara.log_prime_inverse(y)

    # metadata
    @property
    def domain_lower(self) -> float:
        return self.hara.domain_lower

    @property
    def domain_upper(self) -> float:
        return self.hara.domain_upper

    @property
    def range_lower(self) -> float:
        return self.hara.range_lower

    @property
    def range_upper(self) -> float:
        return self.hara.range_upper

    @property
    def is_linear(self) -> bool:
        return self.hara.is_linear

    @property
    def degenerate(self) -> bool:
        """True for utilities whose domain is bounded above (no non-satiation)."""
        return self.hara.degenerate

    @property
    def scale(self) -> float:
        """Characteristic money scale: risk tolerance at zero wealth, or 1."""
        try:
            t = 1.0 / float(self.ara(0.0))
        except ZeroDivisionError:
            return 1.0
        return t if math.isfinite(t) and t > 0 else 1.0

    def in_domain(self, m) -> np.ndarray:
        m = np.asarray(m, dtype=float)
        return (m > self.domain_lower) & (m < self.domain_upper)

    def to_dict(self) -> dict:
        raise NotImplementedError


@dataclass(frozen=True)
class Hara(Utility):
    gamma: float
    alpha: float = 1.0
    M: float = 1.0

    family = "hara"

    def __post_init__(self):
        g = float(self.gamma)
        if not (self.alpha > 0 and math.isfinite(self.alpha)):
            raise InvalidParameter(f"alpha must be positive, got {self.alpha}")
        if not math.isfinite(self.M):
            raise InvalidParameter("M must be finite")
        if math.isnan(g):
            raise InvalidParameter("gamma is NaN")
        if g in (0.0, 1.0) or math.isinf(g):
            return
        if abs(g - 1.0) < GAMMA_NEAR_ONE * _EDGE:
            raise InvalidParameter(f"gamma={g!r} too close to 1; use the log tag gamma=1")
        if abs(g) > GAMMA_MAX:
            raise InvalidParameter(f"|gamma|={abs(g)!r} too large; use the gamma=inf tag")

    @property
    def hara(self) -> "Hara":
        return self

    @property
    def is_linear(self) -> bool:
        return self.gamma == 0.0

    @property
    def degenerate(self) -> bool:
        g = self.gamma
        return g < 0 and not math.isinf(g)

    def _log_x(self, m):
        """log(M + alpha m / gamma) for finite, non-tag gamma (and the log tag)."""
        m = np.asarray(m, dtype=float)
        g = 1.0 if _is_log_tag(self.gamma) else self.gamma
        with np.errstate(divide="ignore", invalid="ignore"):
            if self.M > 0:
                z = self.alpha * m / (g * self.M)
                out = math.log(self.M) + np.log1p(np.maximum(z, -1.0))
            else:
                out = np.log(np.maximum(self.M + self.alpha * m / g, 0.0))
        return out

    def value(self, m):
        g = self.gamma
        m = np.asarray(m, dtype=float)
        if g == 0.0:
            return self.alpha * m - 1.0
        if _is_exp_tag(g):
            return -np.exp(-self.alpha * m)
        lx = self._log_x(m)
        if _is_log_tag(g):
            return lx
        with np.errstate(over="ignore", invalid="ignore"):
            return -g * np.expm1((1.0 - g) * lx) / (g - 1.0) - 1.0

    def log_prime(self, m):
        g = self.gamma
        m = np.asarray(m, dtype=float)
        la = math.log(self.alpha)
        if g == 0.0:
            return np.full_like(m, la)
        if _is_exp_tag(g):
            return la - self.alpha * m
        gg = 1.0 if _is_log_tag(g) else g
        return la - gg * self._log_x(m)

    def ara(self, m):
        g = self.gamma
        m = np.asarray(m, dtype=float)
        if g == 0.0:
            return np.zeros_like(m)
        if _is_exp_tag(g):
            return np.full_like(m, self.alpha)
        with np.errstate(divide="ignore", over="ignore"):
            return self.alpha * np.exp(-self._log_x(m))

    def _m_from_log_x(self, lx):
        g = 1.0 if _is_log_tag(self.gamma) else self.gamma
        with np.errstate(over="ignore", invalid="ignore"):
            if self.M > 0:
                return (g * self.M / self.alpha) * np.expm1(lx - math.log(self.M))
            return (np.exp(lx) - self.M) * g / self.alpha

    def inverse(self, v):
        g = self.gamma
        v = np.asarray(v, dtype=float)
        if np.any(v <= self.range_lower) or np.any(v >= self.range_upper):
            raise RangeViolation(f"utility level {v} outside range ({self.range_lower}, {self.range_upper})")
        if g == 0.0:
            return (v + 1.0) / self.alpha
        if _is_exp_tag(g):
            return -np.log(-v) / self.alpha
        if _is_log_tag(g):
            return self._m_from_log_x(v)
        arg = -(v + 1.0) * (g - 1.0) / g
        with np.errstate(divide="ignore", invalid="ignore"):
            lx = np.log1p(arg) / (1.0 - g)
        return self._m_from_log_x(lx)

    def log_prime_inverse(self, y):
        g = self.gamma
        y = np.asarray(y, dtype=float)
        la = math.log(self.alpha)
        if g == 0.0:
            raise DomainViolation("linear utility has constant marginal utility")
        if _is_exp_tag(g):
            return (la - y) / self.alpha
        gg = 1.0 if _is_log_tag(g) else g
        return self._m_from_log_x((la - y) / gg)

    @property
    def domain_lower(self) -> float:
        g = self.gamma
        if g == 0.0 or _is_exp_tag(g) or g < 0:
            return -INF
        gg = 1.0 if _is_log_tag(g) else g
        return -self.M * gg / self.alpha

    @property
    def domain_upper(self) -> float:
        g = self.gamma
        if g < 0 and not _is_exp_tag(g):
            return -self.M * g / self.alpha
        return INF

    @property
    def range_lower(self) -> float:
        g = self.gamma
        if 0 < g < 1:
            return -1.0 / (1.0 - g)
        return -INF

    @property
    def range_upper(self) -> float:
        g = self.gamma
        if _is_exp_tag(g):
            return 0.0
        if g > 1:
            return 1.0 / (g - 1.0)
        if g < 0:
            return -1.0 / (1.0 - g)
        return INF

    def to_dict(self) -> dict:
        return {"family": "hara", "gamma": repr(float(self.gamma)),
                "alpha": repr(float(self.alpha)), "M": repr(float(self.M))}


@dataclass(frozen=True)
class LogShift(Utility):
    """``u(m) = log(b + m)``."""

    b: float

    family = "log_shift"

    def __post_init__(self):
        if not (self.b > 0 and math.isfinite(self.b)):
            raise InvalidParameter(f"b must be positive, got {self.b}")

    @property
    def hara(self) -> Hara:
        return Hara(1.0, 1.0, self.b)

    def to_dict(self) -> dict:
        return {"family": "log_shift", "b": repr(float(self.b))}


@dataclass(frozen=True)
class NegExp(Utility):
    """``u(m) = -exp(-alpha m)``."""

    alpha: float

    family = "neg_exp"

    def __post_init__(self):
        if not (self.alpha > 0 and math.isfinite(self.alpha)):
            raise InvalidParameter(f"alpha must be positive, got {self.alpha}")

    @property
    def hara(self) -> Hara:
        return Hara(INF, self.alpha, 1.0)

    def to_dict(self) -> dict:
        return {"family": "neg_exp", "alpha": repr(float(self.alpha))}


@dataclass(frozen=True)
class Linear(Utility):
    """``u(m) = alpha m - 1``; risk neutral, loss unbounded."""

    alpha: float = 1.0

    family = "linear"

    def __post_init__(self):
        if not (self.alpha > 0 and math.isfinite(self.alpha)):
            raise InvalidParameter(f"alpha must be positive, got {self.alpha}")

    @property
    def hara(self) -> Hara:
        return Hara(0.0, self.alpha, 1.0)

    def to_dict(self) -> dict:
        return {"family": "linear", "alpha": repr(float(self.alpha))}


@dataclass(frozen=True)
class AffineUtility(Utility):
    """``scale * base(m) + shift``: economically the same agent as ``base``."""

    base: Utility
    scale: float = 1.0
    shift: float = 0.0

    family = "affine"

    def __post_init__(self):
        if not (self.scale > 0 and math.isfinite(self.scale)):
            raise InvalidParameter("affine scale must be positive")
        if not math.isfinite(self.shift):
            raise InvalidParameter("affine shift must be finite")

    @property
    def hara(self) -> Hara:
        return self.base.hara

    def value(self, m):
        return self.scale * self.base.value(m) + self.shift

    def log_prime(self, m):
        return self.base.log_prime(m) + math.log(self.scale)

    def ara(self, m):
        return self.base.ara(m)

    def inverse(self, v):
        return self.base.inverse((np.asarray(v, dtype=float) - self.shift) / self.scale)

    def log_prime_inverse(self, y):
        return self.base.log_prime_inverse(np.asarray(y, dtype=float) - math.log(self.scale))

    @property
    def range_lower(self) -> float:
        return self.scale * self.base.range_lower + self.shift

    @property
    def range_upper(self) -> float:
        return self.scale * self.base.range_upper + self.shift

    def to_dict(self) -> dict:
        return {"family": "affine", "base": self.base.to_dict(),
                "scale": repr(float(self.scale)), "shift": repr(float(self.shift))}


def utility_from_dict(d: dict) -> Utility:
    fam = d.get("family")
    if fam == "hara":
        return Hara(float(d["gamma"]), float(d["alpha"]), float(d["M"]))
    if fam == "log_shift":
        return LogShift(float(d["b"]))
    if fam == "neg_exp":
        return NegExp(float(d["alpha"]))
    if fam == "linear":
        return Linear(float(d["alpha"]))
    if fam == "affine":
        return AffineUtility(utility_from_dict(d["base"]), float(d["scale"]), float(d["shift"]))
    raise InvalidParameter(f"unknown utility family {fam!r}")


# -- checked public operations ---------------------------------------------

def _check_domain(u: Utility, m):
    if not np.all(u.in_domain(m)):
        raise DomainViolation(
            f"wealth {np.asarray(m).tolist()} outside domain ({u.domain_lower}, {u.domain_upper})")


def u_eval(u: Utility, m):
    _check_domain(u, m)
    out = u.value(m)
    return float(out) if np.ndim(out) == 0 else out


def u_prime(u: Utility, m):
    _check_domain(u, m)
    out = u.prime(m)
    return float(out) if np.ndim(out) == 0 else out


def u_second(u: Utility, m):
    _check_domain(u, m)
    out = u.second(m)
    return float(out) if np.ndim(out) == 0 else out


def u_inverse(u: Utility, v):
    out = u.inverse(v)
    return float(out) if np.ndim(out) == 0 else out


def risk_tolerance(u: Utility, m) -> float:
    """``-u'(m)/u''(m)``; infinite for the linear utility."""
    _check_domain(u, m)
    a = float(u.ara(m))
    return INF if a == 0 else 1.0 / a


def risk_neutral_prices(u: Utility, pi, m) -> np.ndarray:
    """Subjective probabilities reweighted by marginal utility, normalized."""
    pi = validate_prob_vector(pi, strict=True)
    m = np.asarray(m, dtype=float)
    if m.shape != pi.shape:
        raise DomainViolation("wealth and probability vectors differ in length")
    _check_domain(u, m)
    return softmax_weighted(np.log(pi) + u.log_prime(m))


def softmax_weighted(logw: np.ndarray) -> np.ndarray:
    z = np.exp(logw - np.max(logw))
    return z / z.sum()


class BoundednessVerdict(NamedTuple):
    bounded: bool
    satisfied_condition: str  # domain_bounded_below | range_bounded_above_not_below | none


def classify_bounded_loss(u: Utility) -> BoundednessVerdict:
    """Bounded loss iff the domain is bounded below, or the range is bounded
    above but not below."""
    if math.isfinite(u.domain_lower):
        return BoundednessVerdict(True, "domain_bounded_below")
    if math.isfinite(u.range_upper) and not math.isfinite(u.range_lower):
        return BoundednessVerdict(True, "range_bounded_above_not_below")
    return BoundednessVerdict(False, "none")
