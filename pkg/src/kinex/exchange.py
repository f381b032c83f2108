"""Pairwise trade rules and the market-level domain types.

Both trade rules conserve the pair's total money: each partner keeps a
savings fraction of its own holding and the remainder is pooled and
split at a random fraction epsilon.  The homogeneous rule uses one
shared propensity, the heterogeneous rule a per-agent one.
"""
from __future__ import annotations

import math
from dataclasses import dataclass

from .errors import DomainError

__all__ = [
    "Agent",
    "TradeDraw",
    "ClearingInput",
    "cc_trade",
    "ccm_trade",
    "clearing_prices",
]


@dataclass
class Agent:
    """One market participant: money plus its current savings propensity.

    ``rule_state`` carries per-agent generator state where the savings
    rule needs any (the urn rule); it stays None for constant and
    quenched propensities.
    """

    money: float
    lam: float
    rule_state: object | None = None

    def __post_init__(self):
        _check_money("money", self.money)
        _check_unit("lam", self.lam)


@dataclass(frozen=True)
class TradeDraw:
    """The randomness consumed by one trade: an ordered pair and a split."""

    i: int
    j: int
    epsilon: float

    def __post_init__(self):
        if self.i == self.j:
            raise DomainError("trade partners must be distinct")
        _check_unit("epsilon", self.epsilon)


def _check_unit(name: str, x: float) -> None:
    if not 0.0 <= x <= 1.0:
        raise DomainError(f"{name} must be in [0, 1], got {x!r}")


def _check_money(name: str, m: float) -> None:
    if not m >= 0.0:
        raise DomainError(f"{name} must be nonnegative, got {m!r}")


def cc_trade(m_i: float, m_j: float, lam: float, epsilon: float) -> tuple[float, float]:
    """Homogeneous trade: both partners share the propensity ``lam``.

    Each keeps lam times its own money; the pooled remainder
    (1 - lam) * (m_i + m_j) is split epsilon / (1 - epsilon).
    """
    _check_money("m_i", m_i)
    _check_money("m_j", m_j)
    _check_unit("lambda", lam)
    _check_unit("epsilon", epsilon)
    pool = (1.0 - lam) * (m_i + m_j)
    return lam * m_i + epsilon * pool, lam * m_j + (1.0 - epsilon) * pool


def ccm_trade(
    m_i: float, m_j: float, lam_i: float, lam_j: float, epsilon: float
) -> tuple[float, float]:
    """Heterogeneous trade: each partner withholds its own fraction first."""
    _check_money("m_i", m_i)
    _check_money("m_j", m_j)
    _check_unit("lambda_i", lam_i)
    _check_unit("lambda_j", lam_j)
    _check_unit("epsilon", epsilon)
    pool = (1.0 - lam_i) * m_i + (1.0 - lam_j) * m_j
    return lam_i * m_i + epsilon * pool, lam_j * m_j + (1.0 - epsilon) * pool


@dataclass(frozen=True)
class ClearingInput:
    """Inputs of the two-good clearing-price computation.

    The exponents are the two consumption weights and the money weight
    of the underlying utility functions and must sum to one.
    """

    m_i: float
    m_j: float
    q_i: float
    q_j: float
    alpha_i: float
    alpha_j: float
    lam: float

    def __post_init__(self):
        for name in ("m_i", "m_j", "q_i", "q_j", "alpha_i", "alpha_j", "lam"):
            value = getattr(self, name)
            if not value > 0.0:
                raise DomainError(f"{name} must be positive, got {value!r}")
        total = self.alpha_i + self.alpha_j + self.lam
        if not math.isclose(total, 1.0, rel_tol=0.0, abs_tol=1e-12):
            raise DomainError(f"exponents must sum to 1 within 1e-12, got {total!r}")


def clearing_prices(c: ClearingInput) -> tuple[float, float]:
    """Market-clearing prices of the two goods, (alpha_k / lam) * (M_i + M_j) / Q_k."""
    total = c.m_i + c.m_j
    return (c.alpha_i / c.lam) * total / c.q_i, (c.alpha_j / c.lam) * total / c.q_j
