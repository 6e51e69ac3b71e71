"""Deposit / refund / forfeit state machine for staked data submissions.

All currency is integer minor units. The ledger is closed: money only moves
between agents' free balances, escrowed stakes, the reward pool and the burned
total, so ``ledger_total`` never changes once agents are registered.
"""
from __future__ import annotations

import math
from collections import deque
from dataclasses import dataclass, field
from typing import Optional

from .model import LabeledSample

__all__ = [
    "ContractError",
    "ContractRules",
    "Ledger",
    "PendingSubmission",
    "AgentStanding",
    "ClaimOutcome",
    "IncentiveContract",
    "ledger_total",
]

DAY = 86400


class ContractError(Exception):
    """Raised when a contract call is rejected. The ledger is left untouched."""


@dataclass(frozen=True)
class ContractRules:
    submission_cost: int = 500
    refund_wait: int = 7 * DAY
    base_min_deposit: int = 1000
    base_cooldown: int = 60
    escalation_deposit_factor: float = 2.0
    escalation_cooldown_factor: float = 6.0
    reward_fraction: float = 0.05
    standing_window: int = 10
    standing_threshold: float = 0.5

    def __post_init__(self):
        for name in ("submission_cost", "refund_wait", "base_min_deposit", "base_cooldown"):
            if getattr(self, name) < 0:
                raise ValueError(f"config invalid: contract.{name}")
        for name in ("escalation_deposit_factor", "escalation_cooldown_factor"):
            if getattr(self, name) < 1:
                raise ValueError(f"config invalid: contract.{name}")
        if not 0 <= self.reward_fraction <= 1:
            raise ValueError("config invalid: contract.reward_fraction")
        if not 0 <= self.standing_threshold <= 1:
            raise ValueError("config invalid: contract.standing_threshold")
        if self.standing_window < 1:
            raise ValueError("config invalid: contract.standing_window")

    @property
    def max_required_deposit(self) -> int:
        """Largest deposit the contract can ever demand from any agent."""
        return math.ceil(self.base_min_deposit * self.escalation_deposit_factor)


@dataclass
class Ledger:
    free_balance: dict = field(default_factory=dict)
    escrow: dict = field(default_factory=dict)
    reward_pool: int = 0
    burned: int = 0

    def to_dict(self) -> dict:
        return {
            "free_balance": dict(self.free_balance),
            "escrow": {str(k): v for k, v in self.escrow.items()},
            "reward_pool": self.reward_pool,
            "burned": self.burned,
        }


def ledger_total(ledger: Ledger) -> int:
    return (
        sum(ledger.free_balance.values())
        + sum(ledger.escrow.values())
        + ledger.reward_pool
        + ledger.burned
    )


@dataclass(frozen=True)
class PendingSubmission:
    id: int
    agent: str
    sample: LabeledSample
    stake: int
    submitted_at: int
    claimable_at: int

    def to_dict(self) -> dict:
        return {
            "id": self.id,
            "agent": self.agent,
            "sample": {"features": list(self.sample.features), "label": self.sample.label},
            "stake": self.stake,
            "submitted_at": self.submitted_at,
            "claimable_at": self.claimable_at,
        }


@dataclass
class AgentStanding:
    window: int
    recent_outcomes: deque = field(init=False)
    last_submission_at: Optional[int] = None

    def __post_init__(self):
        self.recent_outcomes = deque(maxlen=self.window)

    def failure_rate(self) -> float:
        if not self.recent_outcomes:
            return 0.0
        return sum(1 for ok in self.recent_outcomes if not ok) / len(self.recent_outcomes)

    def to_dict(self) -> dict:
        return {
            "recent_outcomes": list(self.recent_outcomes),
            "last_submission_at": self.last_submission_at,
        }


@dataclass(frozen=True)
class ClaimOutcome:
    verified: bool
    paid: int


class IncentiveContract:
    """Escrow contract that refunds verified submissions and forfeits the rest.

    Verification is done by the caller: ``claim`` receives the label the
    current model predicts for the submitted features and compares it with
    the submitted label.

    Agents whose recent failure rate is at or above ``standing_threshold``
    must stake ``escalation_deposit_factor`` times the base deposit and wait
    ``escalation_cooldown_factor`` times the base cooldown.
    """

    def __init__(self, rules: ContractRules | None = None):
        self.rules = rules if rules is not None else ContractRules()
        self.ledger = Ledger()
        self.pending: dict[int, PendingSubmission] = {}
        self.standing: dict[str, AgentStanding] = {}
        self._next_id = 0
        self._last_time = None
        self._escrowed: dict[str, int] = {}
        self._open: dict[str, int] = {}

    def register(self, agent: str, start_balance: int) -> None:
        if agent in self.standing:
            raise ContractError(f"agent already registered: {agent}")
        if start_balance < 0:
            raise ContractError("negative start balance")
        self.standing[agent] = AgentStanding(self.rules.standing_window)
        self.ledger.free_balance[agent] = int(start_balance)
        self._escrowed[agent] = 0
        self._open[agent] = 0

    def _standing_of(self, agent: str) -> AgentStanding:
        try:
            return self.standing[agent]
        except KeyError:
            raise ContractError("unregistered agent") from None

    def in_bad_standing(self, agent: str) -> bool:
        st = self._standing_of(agent)
        if not st.recent_outcomes:
            return False
        return st.failure_rate() >= self.rules.standing_threshold

    def required_deposit(self, agent: str) -> int:
        base = self.rules.base_min_deposit
        if self.in_bad_standing(agent):
            return math.ceil(base * self.rules.escalation_deposit_factor)
        return base

    def required_cooldown(self, agent: str) -> int:
        base = self.rules.base_cooldown
        if self.in_bad_standing(agent):
            return math.ceil(base * self.rules.escalation_cooldown_factor)
        return base

    def _check_time(self, now: int) -> None:
        if self._last_time is not None and now < self._last_time:
            raise ContractError("time went backwards")

    def submit(self, agent: str, sample: LabeledSample, offered_deposit: int, now: int) -> int:
        st = self._standing_of(agent)
        self._check_time(now)
        offered_deposit = int(offered_deposit)
        rules = self.rules
        if offered_deposit < self.required_deposit(agent):
            raise ContractError("deposit below required minimum")
        if offered_deposit < rules.submission_cost:
            raise ContractError("deposit cannot cover submission cost")
        if self.ledger.free_balance[agent] < offered_deposit:
            raise ContractError("insufficient balance")
        if (
            st.last_submission_at is not None
            and now - st.last_submission_at < self.required_cooldown(agent)
        ):
            raise ContractError("cooldown not elapsed")

        sid = self._next_id
        self._next_id += 1
        stake = offered_deposit - rules.submission_cost
        self.ledger.free_balance[agent] -= offered_deposit
        self.ledger.burned += rules.submission_cost
        self.ledger.escrow[sid] = stake
        self.pending[sid] = PendingSubmission(
            id=sid,
            agent=agent,
            sample=sample,
            stake=stake,
            submitted_at=now,
            claimable_at=now + rules.refund_wait,
        )
        self._escrowed[agent] += stake
        self._open[agent] += 1
        st.last_submission_at = now
        self._last_time = now
        return sid

    def claim(self, agent: str, submission: int, now: int, model_prediction: int) -> ClaimOutcome:
        sub = self.pending.get(submission)
        if sub is None:
            raise ContractError("no such pending submission")
        if sub.agent != agent:
            raise ContractError("not the submitter")
        self._check_time(now)
        if now < sub.claimable_at:
            raise ContractError("refund wait not elapsed")

        st = self._standing_of(agent)
        ledger = self.ledger
        del self.pending[submission]
        stake = ledger.escrow.pop(submission)
        self._escrowed[agent] -= stake
        self._open[agent] -= 1
        self._last_time = now
        if int(model_prediction) == sub.sample.label:
            bonus = math.floor(self.rules.reward_fraction * ledger.reward_pool)
            ledger.reward_pool -= bonus
            paid = stake + bonus
            ledger.free_balance[agent] += paid
            st.recent_outcomes.append(True)
            return ClaimOutcome(verified=True, paid=paid)
        ledger.reward_pool += stake
        st.recent_outcomes.append(False)
        return ClaimOutcome(verified=False, paid=0)

    def holdings(self, agent: str) -> int:
        """Free balance plus every stake the agent still has in escrow."""
        self._standing_of(agent)
        return self.ledger.free_balance[agent] + self._escrowed[agent]

    def pending_count(self, agent: str) -> int:
        self._standing_of(agent)
        return self._open[agent]

    def to_dict(self) -> dict:
        return {
            "ledger": self.ledger.to_dict(),
            "pending": [p.to_dict() for p in self.pending.values()],
            "standing": {a: s.to_dict() for a, s in self.standing.items()},
        }
