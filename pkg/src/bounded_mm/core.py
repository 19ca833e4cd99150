"""Shared value types: probability vectors, market state and trade records."""

from __future__ import annotations

from dataclasses import dataclass, field, replace
from typing import Optional, Sequence

import numpy as np

from .errors import (
    DimensionMismatch,
    MalformedDocument,
    NegativeEntry,
    NotNormalized,
    ValidationError,
    ZeroEntryInStrictMode,
)

PROB_TOL = 1e-9


def validate_prob_vector(v: Sequence[float], strict: bool = False) -> np.ndarray:
    """Return ``v`` as a read-only float array after checking it is a distribution.

    Normalization is checked, never repaired.  ``strict`` additionally requires
    every entry to be positive (needed wherever the vector is a subjective or
    base-line estimate).
    """
    arr = np.array(v, dtype=float)
    if arr.ndim != 1 or arr.size < 2:
        raise DimensionMismatch(f"probability vector needs at least 2 entries, got {arr.shape}")
    if not np.all(np.isfinite(arr)):
        raise NotNormalized("probability vector has non-finite entries")
    if np.any(arr < 0):
        raise NegativeEntry(f"negative probability entry in {arr.tolist()}")
    total = float(arr.sum())
    if abs(total - 1.0) > PROB_TOL:
        raise NotNormalized(f"entries sum to {total!r}, not 1")
    if strict and np.any(arr == 0):
        raise ZeroEntryInStrictMode(f"zero entry in {arr.tolist()}")
    arr.setflags(write=False)
    return arr


def as_quantities(q: Sequence[float], n: Optional[int] = None) -> np.ndarray:
    arr = np.array(q, dtype=float)
    if arr.ndim != 1:
        raise DimensionMismatch("quantity vector must be one-dimensional")
    if n is not None and arr.size != n:
        raise DimensionMismatch(f"expected {n} entries, got {arr.size}")
    if not np.all(np.isfinite(arr)):
        raise ValidationError("quantity vector has non-finite entries")
    return arr


def uniform(n: int) -> np.ndarray:
    return np.full(n, 1.0 / n)


@dataclass(frozen=True)
class TradeRecord:
    delta: tuple
    payment: float
    prices_before: tuple
    prices_after: tuple
    seq: int

    def to_dict(self) -> dict:
        return {
            "delta": encode_vector(self.delta),
            "payment": encode_float(self.payment),
            "prices_before": encode_vector(self.prices_before),
            "prices_after": encode_vector(self.prices_after),
            "seq": self.seq,
        }

    @classmethod
    def from_dict(cls, d: dict) -> "TradeRecord":
        return cls(
            delta=decode_vector(d["delta"]),
            payment=decode_float(d["payment"]),
            prices_before=decode_vector(d["prices_before"]),
            prices_after=decode_vector(d["prices_after"]),
            seq=int(d["seq"]),
        )


@dataclass(frozen=True)
class MarketState:
    """Immutable snapshot of a market.

    ``collected`` is the running value of the normalized cost, i.e. the total
    money traders have paid in.  ``k`` is the expected-utility level for
    utility-backed makers and ``None`` otherwise.
    """

    quantities: tuple
    collected: float = 0.0
    k: Optional[float] = None
    trade_log: tuple = field(default_factory=tuple)
    resolved_outcome: Optional[int] = None

    @classmethod
    def initial(cls, n: int, k: Optional[float] = None) -> "MarketState":
        return cls(quantities=(0.0,) * n, collected=0.0, k=k)

    @property
    def n(self) -> int:
        return len(self.quantities)

    @property
    def q(self) -> np.ndarray:
        return np.array(self.quantities, dtype=float)

    @property
    def next_seq(self) -> int:
        return self.trade_log[-1].seq + 1 if self.trade_log else 0

    def with_trade(self, q_new: np.ndarray, collected: float, record: TradeRecord) -> "MarketState":
        return replace(
            self,
            quantities=tuple(float(x) for x in q_new),
            collected=float(collected),
            trade_log=self.trade_log + (record,),
        )


def wealth_from_state(state: MarketState) -> np.ndarray:
    """Maker's wealth per outcome: money collected minus the payout owed."""
    return state.collected - state.q


# -- exact float text encoding ---------------------------------------------

def encode_float(x: Optional[float]) -> Optional[str]:
    # repr gives the shortest string that round-trips to the same double
    return None if x is None else repr(float(x))


def decode_float(s) -> Optional[float]:
    if s is None:
        return None
    if not isinstance(s, str):
        raise MalformedDocument(f"expected a decimal string, got {type(s).__name__}")
    try:
        return float(s)
    except ValueError as exc:
        raise MalformedDocument(f"bad real {s!r}") from exc


def encode_vector(v) -> list:
    return [encode_float(x) for x in v]


def decode_vector(v) -> tuple:
    if not isinstance(v, list):
        raise MalformedDocument("expected a list of decimal strings")
    return tuple(decode_float(x) for x in v)
