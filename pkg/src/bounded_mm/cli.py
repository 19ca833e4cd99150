"""Command-line front end: ``bounded-mm <command> ...``.

Documents go to stdout as JSON (CSV for ``curve``).  Failures print an error
document to stderr and exit with 2 (validation), 3 (domain or solver) or
4 (I/O).  Outcomes are numbered from 1 on the command line.
"""

from __future__ import annotations

import argparse
import contextlib
import fcntl
import json
import math
import os
import sys
import tempfile
from dataclasses import replace
from typing import Dict, List, Optional

import numpy as np

from . import scoring as sr
from .analysis import axis_price_curve, check_loss_liquidity, instantaneous_liquidity, worst_case_loss
from .core import MarketState, encode_float, encode_vector, uniform, wealth_from_state
from .cost import (
    LMSR,
    ExpUtilityCost,
    LogUtility2,
    QuadraticCost,
    move_to_belief,
    trade,
)
from .equivalence import verify_behavioral_equivalence
from .errors import InvalidParameter, MalformedDocument, MarketError, MarketResolved
from .makers import MarketMakerSpec, build_cost_function, initial_state, state_load, state_save
from .simulate import SimConfig, simulate
from .utility import Hara, Linear, LogShift, NegExp

IO_EXIT = 4
STATE_ENV = "MM_STATE"


# -- maker strings -----------------------------------------------------------

def _parse_pairs(tokens: List[str]) -> Dict[str, str]:
    out = {}
    for tok in tokens:
        key, sep, val = tok.partition("=")
        if not sep or not key:
            raise InvalidParameter(f"expected key=value, got {tok!r}")
        out[key.strip().lower()] = val.strip()
    return out


def _real(params, key, default=None) -> float:
    if key not in params:
        if default is None:
            raise InvalidParameter(f"missing parameter {key}")
        return default
    try:
        return float(params.pop(key))
    except ValueError as exc:
        raise InvalidParameter(f"{key} is not a number") from exc


def _count(params, default=2) -> int:
    try:
        return int(params.pop("n", default))
    except ValueError as exc:
        raise InvalidParameter("n is not an integer") from exc


def _weights(params) -> tuple:
    if "weights" in params:
        w = parse_vector(params.pop("weights"))
        params.pop("n", None)
        return tuple(w)
    return tuple(uniform(_count(params)))


def parse_maker(text: str) -> MarketMakerSpec:
    """Build a maker from e.g. ``"lmsr b=100 n=2"`` or ``"hara gamma=2 alpha=0.01 n=3"``."""
    tokens = text.split()
    if not tokens:
        raise InvalidParameter("empty maker description")
    kind, params = tokens[0].lower(), _parse_pairs(tokens[1:])
    spec = _build_maker(kind, params)
    if params:
        raise InvalidParameter(f"unused parameters for {kind}: {sorted(params)}")
    return spec


def _build_maker(kind: str, p: Dict[str, str]) -> MarketMakerSpec:
    cost_spec = MarketMakerSpec.from_cost
    if kind == "lmsr":
        return cost_spec(LMSR(_real(p, "b"), _count(p)))
    if kind == "quadratic":
        return cost_spec(QuadraticCost(_real(p, "b"), _count(p)))
    if kind == "log_utility_2":
        return cost_spec(LogUtility2(_real(p, "b")))
    if kind == "exp_utility":
        return cost_spec(ExpUtilityCost(_real(p, "alpha"), _weights(p)))
    if kind == "hara":
        u = Hara(_real(p, "gamma"), _real(p, "alpha", 1.0), _real(p, "m", 1.0))
        return MarketMakerSpec.from_utility(u, _weights(p))
    if kind == "log_shift":
        return MarketMakerSpec.from_utility(LogShift(_real(p, "b")), _weights(p))
    if kind == "neg_exp":
        return MarketMakerSpec.from_utility(NegExp(_real(p, "alpha")), _weights(p))
    if kind == "linear":
        return MarketMakerSpec.from_utility(Linear(_real(p, "alpha", 1.0)), _weights(p))
    if kind == "log_scoring":
        b = _real(p, "b")
        return MarketMakerSpec.from_scoring(sr.logarithmic(b), _count(p))
    if kind == "quadratic_scoring":
        b = _real(p, "b")
        return MarketMakerSpec.from_scoring(sr.quadratic(b), _count(p))
    if kind == "pseudospherical":
        beta, b = _real(p, "beta"), _real(p, "b")
        return MarketMakerSpec.from_scoring(sr.pseudospherical(beta, b, _weights(p)))
    raise InvalidParameter(f"unknown maker kind {kind!r}")


def parse_vector(text: str) -> np.ndarray:
    try:
        return np.array([float(x) for x in text.split(",")], dtype=float)
    except ValueError as exc:
        raise InvalidParameter(f"not a comma-separated list of numbers: {text!r}") from exc


def _outcome_index(value: int, n: int) -> int:
    if not 1 <= value <= n:
        raise InvalidParameter(f"outcome must be between 1 and {n}, got {value}")
    return value - 1


# -- state file --------------------------------------------------------------

def _state_path(args) -> str:
    path = args.state or os.environ.get(STATE_ENV)
    if not path:
        raise InvalidParameter(f"no state file: pass --state or set {STATE_ENV}")
    return path


@contextlib.contextmanager
def _locked(path: str, exclusive: bool, create: bool = False):
    if not create and not os.path.exists(path):
        raise FileNotFoundError(f"state file {path} not found")
    with open(path + ".lock", "a") as handle:
        fcntl.flock(handle, fcntl.LOCK_EX if exclusive else fcntl.LOCK_SH)
        try:
            yield
        finally:
            fcntl.flock(handle, fcntl.LOCK_UN)


def _read_state(path: str):
    with open(path, encoding="utf-8") as fh:
        return state_load(fh.read())


def _write_state(path: str, state: MarketState, spec: MarketMakerSpec):
    folder = os.path.dirname(os.path.abspath(path))
    fd, tmp = tempfile.mkstemp(dir=folder, prefix=".state-", suffix=".json")
    try:
        with os.fdopen(fd, "w", encoding="utf-8") as fh:
            fh.write(state_save(state, spec))
        os.replace(tmp, path)
    except BaseException:
        with contextlib.suppress(OSError):
            os.unlink(tmp)
        raise


def _maker_from(args):
    """Maker from --maker, else from the state file."""
    if getattr(args, "maker", None):
        spec = parse_maker(args.maker)
        return spec, initial_state(spec)
    path = _state_path(args)
    with _locked(path, exclusive=False):
        state, spec = _read_state(path)
    return spec, state


# -- commands ----------------------------------------------------------------

def cmd_init(args, out):
    spec = parse_maker(" ".join(args.maker_args))
    path = _state_path(args)
    if os.path.exists(path) and not args.force:
        raise FileExistsError(f"{path} exists; pass --force to overwrite")
    state = initial_state(spec)
    with _locked(path, exclusive=True, create=True):
        _write_state(path, state, spec)
    cf = build_cost_function(spec)
    _emit(out, {"maker": spec.label, "state": path,
                "prices": encode_vector(cf.prices(state.q))})


def cmd_quote(args, out):
    spec, state = _maker_from(args)
    cf = build_cost_function(spec)
    c, p = cf.cost_and_prices(state.q)
    _emit(out, {"prices": encode_vector(p), "quantities": encode_vector(state.quantities),
                "collected": encode_float(state.collected), "cost": encode_float(c),
                "resolved_outcome": None if state.resolved_outcome is None
                else state.resolved_outcome + 1})


def cmd_trade(args, out):
    path = _state_path(args)
    with _locked(path, exclusive=True):
        state, spec = _read_state(path)
        if state.resolved_outcome is not None:
            raise MarketResolved(f"market resolved to outcome {state.resolved_outcome + 1}")
        cf = build_cost_function(spec)
        if args.to_belief is not None:
            state, rec = move_to_belief(cf, state, parse_vector(args.to_belief))
        else:
            state, rec = trade(cf, state, parse_vector(args.delta))
        _write_state(path, state, spec)
    _emit(out, rec.to_dict())


def cmd_resolve(args, out):
    path = _state_path(args)
    with _locked(path, exclusive=True):
        state, spec = _read_state(path)
        if state.resolved_outcome is not None:
            raise MarketResolved(f"market already resolved to outcome {state.resolved_outcome + 1}")
        j = _outcome_index(args.outcome, state.n)
        state = replace(state, resolved_outcome=j)
        _write_state(path, state, spec)
    wealth = wealth_from_state(state)
    _emit(out, {"outcome": args.outcome, "payout_per_share": "1.0",
                "payout": encode_float(state.q[j]), "collected": encode_float(state.collected),
                "maker_pnl": encode_float(wealth[j]), "wealth": encode_vector(wealth)})


def cmd_loss(args, out):
    spec, _ = _maker_from(args)
    cf = build_cost_function(spec)
    if args.report:
        report = check_loss_liquidity(cf)
        _emit(out, json.loads(report.to_json()) | {"maker": cf.label})
        return
    value, err = worst_case_loss(cf)
    _emit(out, {"maker": cf.label, "worst_case_loss": encode_float(value),
                "error_estimate": encode_float(err), "bounded": math.isfinite(value)})


def cmd_liquidity(args, out):
    spec, state = _maker_from(args)
    cf = build_cost_function(spec)
    q = parse_vector(args.at) if args.at is not None else state.q
    i = _outcome_index(args.outcome, cf.n)
    _emit(out, {"maker": cf.label, "q": encode_vector(q), "outcome": args.outcome,
                "liquidity": encode_float(instantaneous_liquidity(cf, q, i))})


def cmd_curve(args, out):
    spec, _ = _maker_from(args)
    curve = axis_price_curve(build_cost_function(spec), args.q_max, args.samples)
    out.write(curve.to_csv())


def cmd_equiv(args, out):
    report = verify_behavioral_equivalence(parse_maker(args.a), parse_maker(args.b),
                                           samples=args.samples, tol=args.tol, seed=args.seed)
    out.write(report.to_json() + "\n")


def cmd_simulate(args, out):
    with open(args.config, encoding="utf-8") as fh:
        try:
            doc = json.load(fh)
        except json.JSONDecodeError as exc:
            raise MalformedDocument(f"config is not JSON: {exc}") from exc
    if not isinstance(doc, dict) or "maker" not in doc:
        raise MalformedDocument("config must be an object with a maker entry")
    if isinstance(doc["maker"], str):
        doc = dict(doc, maker=parse_maker(doc["maker"]).to_dict())
    try:
        cfg = SimConfig.from_dict(doc)
    except (KeyError, TypeError, ValueError) as exc:
        if isinstance(exc, MarketError):
            raise
        raise MalformedDocument(f"bad simulation config: {exc!r}") from exc
    out.write(simulate(cfg).to_json() + "\n")


def _emit(out, doc):
    out.write(json.dumps(doc) + "\n")


# -- entry point -------------------------------------------------------------

def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="bounded-mm", description=__doc__.splitlines()[0])
    parser.add_argument("--state", help=f"state file (default: ${STATE_ENV})")
    # --state is accepted after the command name as well
    common = argparse.ArgumentParser(add_help=False)
    common.add_argument("--state", default=argparse.SUPPRESS, help=argparse.SUPPRESS)
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("init", parents=[common], help="create a state file for a maker")
    p.add_argument("maker_args", nargs="+", metavar="KIND [key=value ...]")
    p.add_argument("--force", action="store_true")
    p.set_defaults(func=cmd_init)

    p = sub.add_parser("quote", parents=[common], help="print current prices")
    p.set_defaults(func=cmd_quote)

    p = sub.add_parser("trade", parents=[common], help="apply a trade")
    g = p.add_mutually_exclusive_group(required=True)
    g.add_argument("--delta", help="share bundle, e.g. 10,0")
    g.add_argument("--to-belief", help="target prices, e.g. 0.9,0.1")
    p.set_defaults(func=cmd_trade)

    p = sub.add_parser("resolve", parents=[common], help="settle the market on an outcome")
    p.add_argument("--outcome", type=int, required=True, help="winning outcome, from 1")
    p.set_defaults(func=cmd_resolve)

    p = sub.add_parser("loss", parents=[common], help="worst-case loss of the maker")
    p.add_argument("--maker", help="maker description instead of the state file")
    p.add_argument("--report", action="store_true", help="include the liquidity bound check")
    p.set_defaults(func=cmd_loss)

    p = sub.add_parser("liquidity", parents=[common], help="instantaneous liquidity")
    p.add_argument("--maker")
    p.add_argument("--at", help="quantity vector (default: current state)")
    p.add_argument("--outcome", type=int, default=1)
    p.set_defaults(func=cmd_liquidity)

    p = sub.add_parser("curve", parents=[common], help="price and liquidity along the first axis, as CSV")
    p.add_argument("--maker")
    p.add_argument("--q-max", type=float, required=True)
    p.add_argument("--samples", type=int, default=101)
    p.set_defaults(func=cmd_curve)

    p = sub.add_parser("equiv", parents=[common], help="behavioural equivalence of two makers")
    p.add_argument("--a", required=True)
    p.add_argument("--b", required=True)
    p.add_argument("--samples", type=int, default=100)
    p.add_argument("--tol", type=float, default=1e-8)
    p.add_argument("--seed", type=int, default=0)
    p.set_defaults(func=cmd_equiv)

    p = sub.add_parser("simulate", parents=[common], help="run a seeded trader population")
    p.add_argument("--config", required=True, help="JSON simulation config")
    p.set_defaults(func=cmd_simulate)
    return parser


def main(argv: Optional[List[str]] = None, out=None, err=None) -> int:
    out = out or sys.stdout
    err = err or sys.stderr
    args = build_parser().parse_args(argv)
    try:
        args.func(args, out)
    except MarketError as exc:
        err.write(json.dumps(exc.to_dict()) + "\n")
        return exc.exit_code
    except OSError as exc:
        err.write(json.dumps({"error": type(exc).__name__, "message": str(exc)}) + "\n")
        return IO_EXIT
    return 0


if __name__ == "__main__":
    sys.exit(main())
