"""Savings-propensity generation mechanisms.

Five rules determine where an agent's propensity comes from: a shared
constant, a quenched uniform draw, a function of the agent's own money,
a reinforcement (urn) process run to a frozen limit, and winner
imitation over quenched values.  The rules themselves are plain data;
the market engine interprets them.
"""
from __future__ import annotations

import math
from dataclasses import dataclass, field, replace
from typing import Union

import numpy as np

from .errors import DomainError

__all__ = [
    "Constant",
    "QuenchedUniform",
    "MoneyDependent",
    "Urn",
    "Imitation",
    "SavingsRule",
    "UrnState",
    "StrategyCensus",
    "optimal_split",
    "money_dependent_lambda",
    "urn_step",
    "urn_limit",
    "urn_limit_ensemble",
    "detect_consensus",
]

DEFAULT_URN_WARMUP = 10_000


@dataclass(frozen=True)
class Constant:
    """Every agent shares one fixed propensity."""

    lam: float

    def __post_init__(self):
        if not 0.0 <= self.lam <= 1.0:
            raise DomainError(f"constant lambda must be in [0, 1], got {self.lam!r}")


@dataclass(frozen=True)
class QuenchedUniform:
    """Per-agent propensities drawn once, uniform on [0, 1), then frozen."""


@dataclass(frozen=True)
class MoneyDependent:
    """Propensity recomputed from the agent's own money before each trade.

    form "decreasing": c1 * exp(-c2 * m); form "increasing":
    c1 * (1 - exp(-c2 * m)).  c1 < 1 keeps every propensity below 1.
    """

    form: str
    c1: float
    c2: float

    def __post_init__(self):
        if self.form not in ("decreasing", "increasing"):
            raise DomainError(f"form must be 'decreasing' or 'increasing', got {self.form!r}")
        if not 0.0 < self.c1 < 1.0:
            raise DomainError(f"c1 must be in (0, 1), got {self.c1!r}")
        if not self.c2 > 0.0:
            raise DomainError(f"c2 must be positive, got {self.c2!r}")


@dataclass(frozen=True)
class Urn:
    """Propensity frozen at the share of 'save' choices after a warm-up.

    The reinforcement makes the frozen value Beta(a, b)-distributed
    across agents, up to the O(1/sqrt(warmup)) residual of stopping at a
    finite time.
    """

    a: float
    b: float
    warmup: int = DEFAULT_URN_WARMUP

    def __post_init__(self):
        if not self.a > 0.0 or not self.b > 0.0:
            raise DomainError(f"urn weights must be positive, got a={self.a!r}, b={self.b!r}")
        if self.warmup < 1:
            raise DomainError(f"warmup must be at least 1, got {self.warmup!r}")


@dataclass(frozen=True)
class Imitation:
    """Quenched uniform start; after every trade the loser adopts the winner's value."""


SavingsRule = Union[Constant, QuenchedUniform, MoneyDependent, Urn, Imitation]


def optimal_split(m: float, lam: float) -> tuple[float, float]:
    """Allocation of ``m`` into (saved, spent) = (lam * m, (1 - lam) * m).

    This is the Cobb-Douglas optimum of the save/consume decision, which
    is what makes lam read as a savings propensity.
    """
    if not m >= 0.0:
        raise DomainError(f"money must be nonnegative, got {m!r}")
    if not 0.0 <= lam <= 1.0:
        raise DomainError(f"lambda must be in [0, 1], got {lam!r}")
    return lam * m, (1.0 - lam) * m


def money_dependent_lambda(m: float, form: str, c1: float, c2: float) -> float:
    """Propensity as a function of the agent's current money holding."""
    if not m >= 0.0:
        raise DomainError(f"money must be nonnegative, got {m!r}")
    MoneyDependent(form, c1, c2)  # reuse the parameter validation
    if form == "decreasing":
        return c1 * math.exp(-c2 * m)
    return c1 * (1.0 - math.exp(-c2 * m))


@dataclass(frozen=True)
class UrnState:
    """Reinforcement state of one agent's save/consume urn.

    The mutable part is a pair of integer win counts; the weights
    S = a + s_wins and C = b + c_wins are derived, never accumulated, so
    each step adds exactly one to exactly one counter and the identity
    S + C - t == a + b cannot drift.
    """

    a: float
    b: float
    s_wins: int = 0
    c_wins: int = 0

    @classmethod
    def fresh(cls, a: float, b: float) -> "UrnState":
        if not a > 0.0 or not b > 0.0:
            raise DomainError(f"urn seeds must be positive, got a={a!r}, b={b!r}")
        return cls(a=a, b=b)

    @property
    def S(self) -> float:
        return self.a + self.s_wins

    @property
    def C(self) -> float:
        return self.b + self.c_wins

    @property
    def t(self) -> int:
        return self.s_wins + self.c_wins

    @property
    def lam(self) -> float:
        return self.S / (self.S + self.C)


def urn_step(u: UrnState, draw: float) -> UrnState:
    """One reinforcement step: 'save' wins with probability S / (S + C)."""
    if draw < u.lam:
        return replace(u, s_wins=u.s_wins + 1)
    return replace(u, c_wins=u.c_wins + 1)


def urn_limit(a: float, b: float, warmup: int, rng: np.random.Generator) -> float:
    """Frozen propensity of one agent: run the urn ``warmup`` steps, return S/(S+C).

    Consumes one uniform draw per step.
    """
    if warmup < 1:
        raise DomainError(f"warmup must be at least 1, got {warmup!r}")
    u = UrnState.fresh(a, b)
    for _ in range(warmup):
        u = urn_step(u, rng.random())
    return u.lam


def urn_limit_ensemble(
    a: float, b: float, warmup: int, n: int, rng: np.random.Generator
) -> np.ndarray:
    """Frozen propensities of ``n`` independent urns, advanced in lockstep.

    Consumes one uniform vector of length n per step (step-major order),
    which is the draw order used when initializing a market.
    """
    if warmup < 1:
        raise DomainError(f"warmup must be at least 1, got {warmup!r}")
    UrnState.fresh(a, b)  # validate seeds
    S = np.full(n, float(a))
    C = np.full(n, float(b))
    for _ in range(warmup):
        save = rng.random(n) < S / (S + C)
        S[save] += 1.0
        C[~save] += 1.0
    return S / (S + C)


@dataclass
class StrategyCensus:
    """Counts of agents per distinct propensity value.

    Keys are compared bit-exactly; imitation only ever copies existing
    values, so no tolerance is involved.
    """

    counts: dict[float, int] = field(default_factory=dict)

    @classmethod
    def from_lambdas(cls, lams) -> "StrategyCensus":
        counts: dict[float, int] = {}
        for lam in lams:
            lam = float(lam)
            counts[lam] = counts.get(lam, 0) + 1
        return cls(counts)

    def total(self) -> int:
        return sum(self.counts.values())

    def support(self) -> set[float]:
        return {lam for lam, n in self.counts.items() if n > 0}

    def transfer(self, loser_lam: float, winner_lam: float) -> None:
        """Move one agent from the loser's strategy to the winner's."""
        if loser_lam == winner_lam:
            return
        n_loser = self.counts.get(loser_lam, 0)
        if n_loser <= 0:
            raise DomainError(f"census has no agent with lambda {loser_lam!r}")
        if winner_lam not in self.counts:
            raise DomainError(f"census has no strategy with lambda {winner_lam!r}")
        if n_loser == 1:
            del self.counts[loser_lam]
        else:
            self.counts[loser_lam] = n_loser - 1
        self.counts[winner_lam] += 1


def detect_consensus(census: StrategyCensus) -> float | None:
    """The sole surviving propensity, or None while several coexist."""
    survivors = [lam for lam, n in census.counts.items() if n > 0]
    if len(survivors) == 1:
        return survivors[0]
    return None
