"""Market state, initialization, and the trade engine.

A market is a struct-of-arrays over the agents (money, propensity) plus
the savings rule that governs how propensities evolve.  Trades are
applied either one at a time with :func:`step` (convenient for tests and
inspection) or in bulk with :func:`advance` (the hot path, backed by the
kernels).  Both paths consume the same buffered draw stream and the same
arithmetic, so they produce bit-identical trajectories.
"""
from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

from .errors import ConservationError, DomainError, KinexError
from .exchange import Agent, TradeDraw, cc_trade, ccm_trade
from .kernels import get_kernels
from .rng import TradeDrawStream
from .savings import (
    Constant,
    Imitation,
    MoneyDependent,
    QuenchedUniform,
    SavingsRule,
    StrategyCensus,
    Urn,
    money_dependent_lambda,
    urn_limit_ensemble,
)

__all__ = [
    "MarketState",
    "new_market",
    "select_pair",
    "step",
    "advance",
    "imitation_trade_step",
    "average_lambda",
]

# Per-trade conservation tolerance (relative to the pair's money).
TRADE_TOL = 1e-12
# Whole-run drift tolerance (relative to total money).
RUN_TOL = 1e-9

_MODEL_OF_RULE = {
    Constant: "cc",
    QuenchedUniform: "ccm",
    Urn: "polya",
    Imitation: "imitation",
}


@dataclass
class MarketState:
    """Agent population, RNG stream and trade counters of one run."""

    model: str
    rule: SavingsRule
    money: np.ndarray
    lam: np.ndarray
    draws: TradeDrawStream
    total_money: float
    trades_done: int = 0
    max_trade_err: float = 0.0
    # imitation bookkeeping: integer strategy ids and their population counts
    strategy_id: np.ndarray | None = None
    strategy_counts: np.ndarray | None = None
    consensus_trade: int | None = None
    _census: StrategyCensus | None = field(default=None, repr=False)

    @property
    def n_agents(self) -> int:
        return self.money.shape[0]

    def effective_lambdas(self) -> np.ndarray:
        """Propensities the next trade would use.

        For the money-dependent rule these are a function of current
        money; for every other rule they are the stored values.
        """
        rule = self.rule
        if isinstance(rule, MoneyDependent):
            decay = np.exp(-rule.c2 * self.money)
            return rule.c1 * (1.0 - decay) if rule.form == "increasing" else rule.c1 * decay
        return self.lam

    def agent(self, i: int) -> Agent:
        """Snapshot view of one agent."""
        return Agent(money=float(self.money[i]), lam=float(self.effective_lambdas()[i]))

    def census(self) -> StrategyCensus:
        """Current strategy census (imitation model only)."""
        if self.model != "imitation":
            raise KinexError(f"model {self.model!r} has no strategy census")
        if self._census is None:
            self._census = StrategyCensus.from_lambdas(self.lam)
        return self._census

    def check_conservation(self) -> float:
        """Relative drift of total money since initialization; raises past tolerance."""
        drift = abs(self.money.sum() - self.total_money) / self.total_money
        if drift > RUN_TOL:
            raise ConservationError(
                f"total money drifted by {drift:.3e} relative after {self.trades_done} trades"
            )
        return float(drift)


def new_market(rule: SavingsRule, n_agents: int, rng: np.random.Generator) -> MarketState:
    """Fresh market: every agent starts with money 1.0.

    Initialization draws (consumed before any trade draws): quenched
    uniform rules draw `n_agents` uniforms; the urn rule consumes its
    warm-up vectors via ``urn_limit_ensemble``; constant and
    money-dependent rules draw nothing.
    """
    if n_agents < 2:
        raise DomainError(f"need at least 2 agents, got {n_agents}")
    money = np.ones(n_agents, dtype=np.float64)
    strategy_id = None
    strategy_counts = None

    if isinstance(rule, Constant):
        lam = np.full(n_agents, rule.lam, dtype=np.float64)
        model = "cc"
    elif isinstance(rule, QuenchedUniform):
        lam = rng.random(n_agents)
        model = "ccm"
    elif isinstance(rule, MoneyDependent):
        lam = np.full(
            n_agents, money_dependent_lambda(1.0, rule.form, rule.c1, rule.c2), dtype=np.float64
        )
        model = f"selforg_{rule.form}"
    elif isinstance(rule, Urn):
        lam = urn_limit_ensemble(rule.a, rule.b, rule.warmup, n_agents, rng)
        model = "polya"
    elif isinstance(rule, Imitation):
        lam = rng.random(n_agents)
        model = "imitation"
        strategy_id = np.arange(n_agents, dtype=np.int64)
        strategy_counts = np.ones(n_agents, dtype=np.int64)
    else:
        raise DomainError(f"unknown savings rule {rule!r}")

    return MarketState(
        model=model,
        rule=rule,
        money=money,
        lam=lam,
        draws=TradeDrawStream(rng, n_agents),
        total_money=float(n_agents),
        strategy_id=strategy_id,
        strategy_counts=strategy_counts,
    )


def select_pair(state: MarketState) -> TradeDraw:
    """Draw the next trade: distinct ordered pair plus a fresh epsilon."""
    if state.n_agents < 2:
        raise DomainError(f"need at least 2 agents, got {state.n_agents}")
    i, j, eps = state.draws.next_one()
    return TradeDraw(i=i, j=j, epsilon=eps)


def _check_trade(state: MarketState, before: float, after: float) -> None:
    err = abs(after - before)
    if before > 0.0:
        err /= before
    if err > state.max_trade_err:
        state.max_trade_err = err
    if err > TRADE_TOL:
        raise ConservationError(f"trade changed pair money by {err:.3e} relative")


def step(state: MarketState) -> MarketState:
    """Apply exactly one trade, dispatching on the market's savings rule."""
    if state.model == "imitation":
        imitation_trade_step(state, state.census())
        return state

    draw = select_pair(state)
    i, j, eps = draw.i, draw.j, draw.epsilon
    m_i = float(state.money[i])
    m_j = float(state.money[j])
    rule = state.rule
    if isinstance(rule, Constant):
        mi, mj = cc_trade(m_i, m_j, rule.lam, eps)
    elif isinstance(rule, MoneyDependent):
        li = money_dependent_lambda(m_i, rule.form, rule.c1, rule.c2)
        lj = money_dependent_lambda(m_j, rule.form, rule.c1, rule.c2)
        mi, mj = ccm_trade(m_i, m_j, li, lj, eps)
    else:  # quenched and urn-frozen propensities
        mi, mj = ccm_trade(m_i, m_j, float(state.lam[i]), float(state.lam[j]), eps)
    state.money[i] = mi
    state.money[j] = mj
    state.trades_done += 1
    _check_trade(state, m_i + m_j, mi + mj)
    return state


def imitation_trade_step(
    state: MarketState, census: StrategyCensus
) -> tuple[MarketState, StrategyCensus]:
    """One imitation trade: trade, then the loser adopts the winner's propensity.

    The winner is agent i exactly when epsilon >= 0.5 (the side that
    received at least half of the pool).
    """
    draw = select_pair(state)
    i, j, eps = draw.i, draw.j, draw.epsilon
    m_i = float(state.money[i])
    m_j = float(state.money[j])
    mi, mj = ccm_trade(m_i, m_j, float(state.lam[i]), float(state.lam[j]), eps)
    state.money[i] = mi
    state.money[j] = mj

    winner, loser = (i, j) if eps >= 0.5 else (j, i)
    sid = state.strategy_id
    counts = state.strategy_counts
    if sid[loser] != sid[winner]:
        census.transfer(float(state.lam[loser]), float(state.lam[winner]))
        counts[sid[loser]] -= 1
        counts[sid[winner]] += 1
        sid[loser] = sid[winner]
        state.lam[loser] = state.lam[winner]
        if state.consensus_trade is None and counts[sid[winner]] == state.n_agents:
            state.consensus_trade = state.trades_done + 1
    if census.total() != state.n_agents:
        raise KinexError("census lost agents: total != n_agents")

    state.trades_done += 1
    _check_trade(state, m_i + m_j, mi + mj)
    return state, census


def advance(state: MarketState, n_trades: int, backend: str | None = None) -> MarketState:
    """Apply ``n_trades`` trades through the bulk kernels."""
    if n_trades < 0:
        raise DomainError(f"cannot advance by {n_trades} trades")
    kern = get_kernels(backend)
    rule = state.rule
    remaining = n_trades
    while remaining > 0:
        ii, jj, eps = state.draws.take(remaining)
        if isinstance(rule, Constant):
            err = kern.run_cc(state.money, rule.lam, ii, jj, eps)
        elif isinstance(rule, MoneyDependent):
            err = kern.run_money_dependent(
                state.money, rule.form == "increasing", rule.c1, rule.c2, ii, jj, eps
            )
        elif isinstance(rule, Imitation):
            consensus_at, err = kern.run_imitation(
                state.money,
                state.lam,
                state.strategy_id,
                state.strategy_counts,
                ii,
                jj,
                eps,
                state.trades_done,
            )
            if consensus_at >= 0 and state.consensus_trade is None:
                state.consensus_trade = int(consensus_at)
            state._census = None  # the dict view is stale after a bulk update
        else:
            err = kern.run_ccm(state.money, state.lam, ii, jj, eps)
        if err > state.max_trade_err:
            state.max_trade_err = err
        if err > TRADE_TOL:
            raise ConservationError(f"trade changed pair money by {err:.3e} relative")
        done = ii.shape[0]
        state.trades_done += done
        remaining -= done
    return state


def average_lambda(state: MarketState) -> float:
    """Arithmetic mean of the agents' current propensities."""
    if state.n_agents < 1:
        raise DomainError("market has no agents")
    return float(state.effective_lambdas().mean())
