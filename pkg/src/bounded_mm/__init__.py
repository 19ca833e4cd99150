"""Bounded-loss automated market makers.

Utility-based makers, market scoring rules and cost-function makers, the
parameter maps between them, and tools for their worst-case loss and
liquidity.
"""

from .analysis import (
    LiquidityCurve,
    LossLiquidityReport,
    axis_price_curve,
    check_loss_liquidity,
    instantaneous_liquidity,
    liquidity_dominance_scan,
    worst_case_loss,
)
from .core import MarketState, TradeRecord, validate_prob_vector, wealth_from_state
from .cost import (
    LMSR,
    CostFunction,
    ExpUtilityCost,
    ImplicitCost,
    LogUtility2,
    QuadraticCost,
    move_to_belief,
    own_price_slope,
    trade,
)
from .equivalence import EquivalenceReport, verify_behavioral_equivalence
from .errors import MarketError
from .makers import MarketMakerSpec, build_cost_function, state_load, state_save
from .scoring import ScoringRule, msr_payment, msr_worst_case_loss
from .simulate import SimConfig, SimResult
from .translate import (
    beta_to_gamma,
    cost_from_scoring,
    gamma_to_beta,
    scoring_from_utility,
    utility_from_scoring,
)
from .utility import Hara, Linear, LogShift, NegExp, classify_bounded_loss

__all__ = [name for name, obj in list(globals().items())
           if not name.startswith("_") and not isinstance(obj, type(__import__("sys")))]
