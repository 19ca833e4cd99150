"""Proper scoring rules and market-scoring-rule (MSR) payment mechanics.

Three kinds are supported:

* ``logarithmic``  s_i(r) = b log r_i
* ``quadratic``    s_i(r) = 2 b r_i - b sum_j r_j^2
* ``pseudospherical`` (weighted by a base-line estimate ``weights``)

      s_i(r) = a_i + b/(beta-1) [ (rho_i / ||rho||_beta)^(beta-1) - 1 ],
      rho_j = r_j / w_j,  ||rho||_beta = (sum_j w_j rho_j^beta)^(1/beta)

  with ``beta == 1`` the weighted log rule ``a_i + b log(r_i / w_i)`` and
  ``beta == 0`` the limit rule ``a_i - b (w_i / r_i) exp(sum_j w_j log(r_j/w_j))``.

Scores are extended reals: ``-inf`` is a legitimate value (e.g. the log rule
at a zero entry).
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Optional

import numpy as np
from scipy.special import logsumexp

from .core import decode_vector, encode_vector, uniform, validate_prob_vector
from .errors import DimensionMismatch, InvalidParameter, UndefinedScore

KINDS = ("logarithmic", "quadratic", "pseudospherical")


@dataclass(frozen=True)
class ScoringRule:
    kind: str
    b: float = 1.0
    beta: Optional[float] = None
    weights: Optional[tuple] = None
    offsets: Optional[tuple] = None

    def __post_init__(self):
        if self.kind not in KINDS:
            raise InvalidParameter(f"unknown scoring rule kind {self.kind!r}")
        if not (self.b > 0 and math.isfinite(self.b)):
            raise InvalidParameter(f"b must be positive, got {self.b}")
        if self.kind == "pseudospherical":
            if self.beta is None or math.isnan(self.beta):
                raise InvalidParameter("pseudospherical rule needs beta")
            if math.isinf(self.beta):
                raise InvalidParameter("beta must be finite")
            if self.weights is None:
                raise InvalidParameter("pseudospherical rule needs weights")
            w = validate_prob_vector(self.weights, strict=True)
            object.__setattr__(self, "weights", tuple(float(x) for x in w))
        if self.offsets is not None:
            object.__setattr__(self, "offsets", tuple(float(x) for x in self.offsets))
            if self.weights is not None and len(self.offsets) != len(self.weights):
                raise DimensionMismatch("offsets and weights differ in length")

    @property
    def n(self) -> Optional[int]:
        if self.weights is not None:
            return len(self.weights)
        if self.offsets is not None:
            return len(self.offsets)
        return None

    def base_estimate(self, n: Optional[int] = None) -> np.ndarray:
        """Estimate the MSR starts from: the weights, or uniform."""
        if self.weights is not None:
            return np.array(self.weights)
        n = n or self.n
        if n is None:
            raise DimensionMismatch("number of outcomes unknown for an unweighted rule")
        return uniform(n)

    def to_dict(self) -> dict:
        d = {"kind": self.kind, "b": repr(float(self.b))}
        if self.beta is not None:
            d["beta"] = repr(float(self.beta))
        if self.weights is not None:
            d["weights"] = encode_vector(self.weights)
        if self.offsets is not None:
            d["offsets"] = encode_vector(self.offsets)
        return d

    @classmethod
    def from_dict(cls, d: dict) -> "ScoringRule":
        return cls(
            kind=d["kind"],
            b=float(d["b"]),
            beta=float(d["beta"]) if "beta" in d else None,
            weights=decode_vector(d["weights"]) if "weights" in d else None,
            offsets=decode_vector(d["offsets"]) if "offsets" in d else None,
        )


def logarithmic(b: float) -> ScoringRule:
    return ScoringRule("logarithmic", b)


def quadratic(b: float) -> ScoringRule:
    return ScoringRule("quadratic", b)


def pseudospherical(beta: float, b: float, weights, offsets=None) -> ScoringRule:
    return ScoringRule("pseudospherical", b, beta=float(beta), weights=tuple(weights),
                       offsets=None if offsets is None else tuple(offsets))


def weighted_log(b: float, weights, offsets=None) -> ScoringRule:
    return pseudospherical(1.0, b, weights, offsets)


def _pseudospherical_scores(r: np.ndarray, w: np.ndarray, beta: float, b: float) -> np.ndarray:
    with np.errstate(divide="ignore", invalid="ignore", over="ignore"):
        log_rho = np.log(r) - np.log(w)
        if beta == 1.0:
            return b * log_rho
        if beta == 0.0:
            log_g = float(np.sum(w * log_rho)) if np.all(r > 0) else -math.inf
            return -b * np.exp(log_g - log_rho)
        # log of the weighted beta-norm of rho; -inf entries drop out for
        # beta > 0 and dominate (norm -> 0) for beta < 0
        if beta > 0:
            log_norm = logsumexp(beta * log_rho, b=w) / beta
        else:
            log_norm = -math.inf if np.any(r == 0) else logsumexp(beta * log_rho, b=w) / beta
        t = (beta - 1.0) * (log_rho - log_norm)
        return b * np.expm1(t) / (beta - 1.0)


def _raw_scores(s: ScoringRule, r: np.ndarray) -> np.ndarray:
    """Scores with NaN marking entries that are undefined at ``r``."""
    n = r.size
    if s.n is not None and s.n != n:
        raise DimensionMismatch(f"rule has {s.n} outcomes, estimate has {n}")
    if s.kind == "logarithmic":
        with np.errstate(divide="ignore"):
            out = s.b * np.log(r)
    elif s.kind == "quadratic":
        out = 2.0 * s.b * r - s.b * float(np.dot(r, r))
    else:
        out = _pseudospherical_scores(r, np.array(s.weights), s.beta, s.b)
    if s.offsets is not None:
        out = out + np.array(s.offsets)
    return out


def score(s: ScoringRule, r) -> np.ndarray:
    """Score vector: entry i is paid if outcome i occurs."""
    r = validate_prob_vector(r)
    out = _raw_scores(s, r)
    if np.any(np.isnan(out)):
        raise UndefinedScore(f"score undefined at r={r.tolist()} for {s.kind} beta={s.beta}")
    return out


def expected_score(s: ScoringRule, r_report, r_true) -> float:
    r_true = validate_prob_vector(r_true)
    sc = score(s, r_report)
    # 0 * -inf contributes nothing: an impossible outcome is never scored
    mask = r_true > 0
    return float(np.dot(r_true[mask], sc[mask]))


def msr_payment(s: ScoringRule, r_old, r_new) -> np.ndarray:
    """Per-outcome payment to a trader who moves the estimate r_old -> r_new."""
    new = score(s, r_new)
    old = score(s, r_old)
    with np.errstate(invalid="ignore"):
        out = new - old
    if np.any(np.isnan(out)):
        raise UndefinedScore("payment undefined (infinite score on both sides)")
    return out


def vertex_scores(s: ScoringRule, n: Optional[int] = None) -> np.ndarray:
    """s_j(e_j) for every j: the score for reporting certainty in the truth."""
    n = n or s.n
    if n is None:
        raise DimensionMismatch("number of outcomes unknown")
    out = np.empty(n)
    for j in range(n):
        e = np.zeros(n)
        e[j] = 1.0
        # other entries may be undefined at a vertex (beta <= 0); only the
        # true outcome's entry is needed and it is always finite for beta > -inf
        out[j] = _raw_scores(s, e)[j]
    return out


def msr_worst_case_loss(s: ScoringRule, r0) -> float:
    """max_j s_j(e_j) - s_j(r0); may be +inf for rules unbounded at vertices."""
    r0 = validate_prob_vector(r0, strict=True)
    start = score(s, r0)
    return float(np.max(vertex_scores(s, r0.size) - start))
