"""Parameter maps between the utility, scoring-rule and cost formulations.

A HARA utility maker with risk parameter gamma corresponds to a weighted
pseudospherical scoring rule with beta = 1 - 1/gamma and the maker's beliefs as
weights.  Starting from zero wealth, the rule's scale is b = M / alpha
(b = 1 / alpha for the negative exponential tag).
"""

from __future__ import annotations

import math
from typing import Optional, Tuple

import numpy as np

from .core import uniform, validate_prob_vector
from .cost import LMSR, CostFunction, ExpUtilityCost, ImplicitCost, QuadraticCost, initial_k
from .errors import DimensionMismatch, NoCorrespondence
from .scoring import ScoringRule, pseudospherical
from .utility import Hara, Utility


def gamma_to_beta(gamma: float) -> float:
    if gamma == 0:
        raise NoCorrespondence("linear utility has no corresponding scoring rule")
    if math.isinf(gamma):
        return 1.0
    if gamma == 1.0:
        return 0.0
    return 1.0 - 1.0 / gamma


def beta_to_gamma(beta: float) -> float:
    if beta == 1.0:
        return math.inf
    if beta == 0.0:
        return 1.0
    return 1.0 / (1.0 - beta)


def scoring_scale(u: Utility) -> float:
    h = u.hara
    if math.isinf(h.gamma):
        return 1.0 / h.alpha
    return h.M / h.alpha


def scoring_from_utility(u: Utility, pi) -> ScoringRule:
    """Weighted pseudospherical rule behaviourally equal to the utility maker."""
    pi = validate_prob_vector(pi, strict=True)
    h = u.hara
    if h.is_linear:
        raise NoCorrespondence("linear utility has no corresponding scoring rule")
    if h.degenerate:
        raise NoCorrespondence("utilities with domain bounded above are not supported")
    b = scoring_scale(u)
    if not b > 0:
        raise NoCorrespondence(f"scale M/alpha={b} is not positive")
    return pseudospherical(gamma_to_beta(h.gamma), b, pi)


def utility_from_scoring(s: ScoringRule, n: Optional[int] = None) -> Tuple[Hara, np.ndarray]:
    """Inverse of :func:`scoring_from_utility` with the canonical M = 1."""
    if s.kind == "quadratic":
        raise NoCorrespondence("the quadratic rule is not a weighted pseudospherical rule")
    if s.kind == "logarithmic":
        n = n or s.n
        if n is None:
            raise DimensionMismatch("number of outcomes needed for the unweighted log rule")
        return Hara(math.inf, 1.0 / s.b, 1.0), uniform(n)
    return Hara(beta_to_gamma(s.beta), 1.0 / s.b, 1.0), np.array(s.weights)


def cost_from_scoring(s: ScoringRule, n: Optional[int] = None) -> CostFunction:
    n = n or s.n
    if s.kind == "logarithmic":
        if n is None:
            raise DimensionMismatch("number of outcomes needed for the log rule")
        return LMSR(s.b, n)
    if s.kind == "quadratic":
        if n is None:
            raise DimensionMismatch("number of outcomes needed for the quadratic rule")
        return QuadraticCost(s.b, n)
    if s.beta == 1.0:
        return ExpUtilityCost(1.0 / s.b, s.weights)
    u, pi = utility_from_scoring(s)
    return ImplicitCost(u, tuple(pi), initial_k(u, pi, np.zeros(pi.size)))
