"""Discrete-event simulation of the staked data-sharing marketplace."""
from __future__ import annotations

import heapq
import logging
import zlib
from dataclasses import dataclass, field
from typing import Optional

import numpy as np

from . import agents as ag
from ._validation import indices_to_csr
from .contract import DAY, ContractError, ContractRules, IncentiveContract, ledger_total
from .data import DatasetSource, DatasetSplit, load_source
from .model import SparsePerceptron

__all__ = [
    "ScenarioConfig",
    "Snapshot",
    "SimulationReport",
    "default_agents",
    "stream",
    "run",
    "baseline_accuracy",
    "compute_gap",
    "time_to_drain",
]

logger = logging.getLogger(__name__)

_CLAIM, _SUBMIT = 0, 1


def default_agents() -> tuple:
    return (
        ag.AgentProfile(
            id="good",
            honest=True,
            start_balance=1_000_000,
            mean_deposit=5000,
            stdev_deposit=1000.0,
            mean_update_wait=600.0,
            prob_mistake=0.0001,
        ),
        ag.AgentProfile(
            id="malicious",
            honest=False,
            start_balance=1_000_000,
            mean_deposit=10000,
            stdev_deposit=300.0,
            mean_update_wait=3600.0,
            corruption_mode="label_flip",
        ),
    )


@dataclass(frozen=True)
class ScenarioConfig:
    num_words: int = 1000
    train_size: float = 0.08
    contract: ContractRules = field(default_factory=ContractRules)
    agents: tuple = field(default_factory=default_agents)
    max_virtual_time: Optional[int] = None
    snapshot_every: int = DAY
    seed: int = 0
    dataset: DatasetSource = field(default_factory=DatasetSource)
    max_epochs: int = 50

    def __post_init__(self):
        object.__setattr__(self, "agents", tuple(self.agents))
        if self.num_words < 1:
            raise ValueError("config invalid: num_words")
        if not 0 < self.train_size < 1:
            raise ValueError("config invalid: train_size")
        if not self.agents:
            raise ValueError("config invalid: agents")
        ids = [a.id for a in self.agents]
        if len(set(ids)) != len(ids):
            raise ValueError("config invalid: agents (duplicate id)")
        if self.snapshot_every <= 0:
            raise ValueError("config invalid: snapshot_every_s")
        if self.max_virtual_time is not None and self.max_virtual_time < 0:
            raise ValueError("config invalid: max_virtual_time_s")
        if self.max_virtual_time is None and not any(a.honest for a in self.agents):
            # nothing else bounds a run made only of adversaries
            raise ValueError("config invalid: max_virtual_time_s")
        if self.max_epochs < 1:
            raise ValueError("config invalid: max_epochs")


@dataclass(frozen=True)
class Snapshot:
    t: int
    accuracy: float
    balances: dict
    pool: int
    burned: int

    def to_dict(self) -> dict:
        return {
            "t": self.t,
            "accuracy": self.accuracy,
            "balances": dict(self.balances),
            "pool": self.pool,
            "burned": self.burned,
        }


@dataclass
class SimulationReport:
    snapshots: list
    initial_accuracy: float
    final_accuracy: float
    accuracy_all: float
    gap: float
    drain_time_days: dict
    zero_at: dict
    events_processed: int
    end_time: int
    agent_ids: list
    total_supply: int
    trace: Optional[list] = None

    def to_dict(self) -> dict:
        return {
            "summary": {
                "accuracy": self.final_accuracy,
                "accuracy_all": self.accuracy_all,
                "gap": self.gap,
                "drain_time_days": dict(self.drain_time_days),
            },
            "initial_accuracy": self.initial_accuracy,
            "final_accuracy": self.final_accuracy,
            "accuracy_all": self.accuracy_all,
            "gap": self.gap,
            "drain_time_days": dict(self.drain_time_days),
            "zero_at": dict(self.zero_at),
            "events_processed": self.events_processed,
            "end_time": self.end_time,
            "agent_ids": list(self.agent_ids),
            "total_supply": self.total_supply,
            "snapshots": [s.to_dict() for s in self.snapshots],
        }


def stream(seed: int, name: str) -> np.random.Generator:
    """Independent generator for one named consumer of randomness within a run."""
    key = zlib.crc32(name.encode("utf-8"))
    return np.random.default_rng(np.random.SeedSequence(entropy=seed, spawn_key=(key,)))


def _stream_int(seed: int, name: str) -> int:
    return int(stream(seed, name).integers(2**63 - 1))


def compute_gap(accuracy_all: float, accuracy: float) -> float:
    for value in (accuracy_all, accuracy):
        if not 0 <= value <= 100:
            raise ValueError("accuracy out of range")
    return accuracy_all - accuracy


def time_to_drain(report: SimulationReport, agent: str) -> Optional[float]:
    if agent not in report.zero_at:
        raise KeyError("unknown agent")
    t = report.zero_at[agent]
    return None if t is None else t / DAY


class _TestSet:
    def __init__(self, samples, num_words):
        self.X = indices_to_csr([s.features for s in samples], num_words)
        self.y = np.fromiter((s.label for s in samples), dtype=np.int64, count=len(samples))

    def accuracy(self, model: SparsePerceptron) -> float:
        predicted = (self.X @ model.coef_ + model.intercept_) > 0
        return 100.0 * float(np.count_nonzero(predicted == self.y)) / self.y.size


def _prepare(config: ScenarioConfig):
    parts = load_source(config.dataset, config.num_words, config.train_size, _stream_int(config.seed, "data"))
    model = SparsePerceptron(config.num_words, config.max_epochs, _stream_int(config.seed, "fit"))
    model.fit([s.features for s in parts.initial_train], [s.label for s in parts.initial_train])
    return parts, model


def _baseline(parts: DatasetSplit, model: SparsePerceptron, test: _TestSet) -> float:
    clean = SparsePerceptron.from_dict(model.to_dict())
    for s in parts.submission_pool:
        clean.update(s.features, s.label)
    return test.accuracy(clean)


def baseline_accuracy(config: ScenarioConfig) -> float:
    """Test accuracy after one clean online pass over the whole submission pool."""
    parts, model = _prepare(config)
    return _baseline(parts, model, _TestSet(parts.test, config.num_words))


class _Engine:
    def __init__(self, config: ScenarioConfig, parts: DatasetSplit, model: SparsePerceptron, test: _TestSet, trace=False):
        self.config = config
        self.rules = config.contract
        self.pool = parts.submission_pool
        self.model = model
        self.test = test
        self.contract = IncentiveContract(self.rules)
        self.profiles = {p.id: p for p in config.agents}
        self.rngs = {p.id: stream(config.seed, f"agent:{p.id}") for p in config.agents}
        for p in config.agents:
            self.contract.register(p.id, p.start_balance)
        self.total_supply = sum(p.start_balance for p in config.agents)
        self.keep = max(self.rules.max_required_deposit, self.rules.submission_cost + 1)
        self.cursor = 0
        self.retired = set()
        self.queue = []
        self.seq = 0
        self.events = 0
        self.snapshots = []
        self.zero_at = {p.id: (0 if p.start_balance == 0 else None) for p in config.agents}
        self.trace = [] if trace else None

    def log(self, t, kind, agent, outcome, amount=0):
        if self.trace is not None:
            self.trace.append(
                {
                    "t": int(t),
                    "kind": kind,
                    "agent": agent,
                    "outcome": outcome,
                    "amount": int(amount),
                    "holdings": self.contract.holdings(agent),
                    "pool": self.contract.ledger.reward_pool,
                    "ledger_total": ledger_total(self.contract.ledger),
                }
            )

    def push(self, t, kind, agent, payload=None):
        heapq.heappush(self.queue, (t, kind, agent, self.seq, payload))
        self.seq += 1

    def honest_active(self) -> bool:
        if self.cursor >= len(self.pool):
            return False
        return any(p.honest and p.id not in self.retired for p in self.config.agents)

    def may_submit(self, profile) -> bool:
        if profile.id in self.retired:
            return False
        if not any(p.honest for p in self.config.agents):
            return True
        return self.honest_active()

    def snapshot(self, t):
        c = self.contract
        self.snapshots.append(
            Snapshot(
                t=int(t),
                accuracy=self.test.accuracy(self.model),
                balances={a: c.holdings(a) for a in self.profiles},
                pool=c.ledger.reward_pool,
                burned=c.ledger.burned,
            )
        )

    def note_holdings(self, agent, t):
        if self.zero_at[agent] is None and self.contract.holdings(agent) == 0:
            self.zero_at[agent] = int(t)

    def on_submit(self, t, agent):
        profile = self.profiles[agent]
        if not self.may_submit(profile):
            self.log(t, "submit", agent, "stopped")
            return
        rng = self.rngs[agent]
        if profile.honest:
            sample = ag.good_transform(self.pool[self.cursor], profile.prob_mistake, rng)
        else:
            raw = self.pool[int(rng.integers(len(self.pool)))]
            sample = ag.corrupt(raw, profile.corruption_mode, self.config.num_words, rng)
        c = self.contract
        drawn = ag.draw_deposit(profile, rng, self.rules.submission_cost)
        offer = ag.choose_offer(
            drawn,
            c.required_deposit(agent),
            c.ledger.free_balance[agent],
            self.rules.submission_cost,
            self.keep,
        )
        if offer is None:
            if c.pending_count(agent) == 0:
                logger.debug("t=%d %s retires", t, agent)
                self.retired.add(agent)
                self.log(t, "submit", agent, "retired")
                return
            self.log(t, "submit", agent, "unaffordable")
        else:
            try:
                sid = c.submit(agent, sample, offer, t)
            except ContractError as exc:
                logger.debug("t=%d %s rejected: %s", t, agent, exc)
                self.log(t, "submit", agent, str(exc), offer)
            else:
                self.log(t, "submit", agent, "accepted", offer)
                self.model.update(sample.features, sample.label)
                self.push(c.pending[sid].claimable_at, _CLAIM, agent, sid)
                if profile.honest:
                    self.cursor += 1
                self.note_holdings(agent, t)
        if self.may_submit(profile):
            self.push(t + ag.draw_wait(profile, rng), _SUBMIT, agent)

    def on_claim(self, t, agent, sid):
        sub = self.contract.pending[sid]
        prediction = self.model.predict_one(sub.sample.features)
        outcome = self.contract.claim(agent, sid, t, prediction)
        self.log(t, "claim", agent, "verified" if outcome.verified else "forfeited", outcome.paid)
        self.note_holdings(agent, t)

    def run(self) -> int:
        every = self.config.snapshot_every
        horizon = self.config.max_virtual_time
        for p in self.config.agents:
            self.push(ag.draw_wait(p, self.rngs[p.id]), _SUBMIT, p.id)
        next_snap = 0
        now = 0
        while self.queue:
            t, kind, agent, _, payload = self.queue[0]
            if horizon is not None and t > horizon:
                now = horizon
                break
            while next_snap < t:
                self.snapshot(next_snap)
                next_snap += every
            heapq.heappop(self.queue)
            now = t
            self.events += 1
            if kind == _CLAIM:
                self.on_claim(t, agent, payload)
            else:
                self.on_submit(t, agent)
        while next_snap <= now:
            self.snapshot(next_snap)
            next_snap += every
        if self.snapshots[-1].t < now:
            self.snapshot(now)
        return now


def run(config: ScenarioConfig, trace: bool = False) -> SimulationReport:
    """Simulate ``config`` and compare the final model with the clean baseline.

    With ``trace=True`` the report also carries one record per processed
    event (time, kind, agent, outcome, amount, the agent's holdings and the
    reward pool afterwards).
    """
    parts, model = _prepare(config)
    test = _TestSet(parts.test, config.num_words)
    accuracy_all = _baseline(parts, model, test)
    initial_accuracy = test.accuracy(model)

    engine = _Engine(config, parts, model, test, trace=trace)
    end_time = engine.run()
    final_accuracy = test.accuracy(model)
    malicious = [p.id for p in config.agents if not p.honest]
    drain = {a: (None if engine.zero_at[a] is None else engine.zero_at[a] / DAY) for a in malicious}
    return SimulationReport(
        snapshots=engine.snapshots,
        initial_accuracy=initial_accuracy,
        final_accuracy=final_accuracy,
        accuracy_all=accuracy_all,
        gap=compute_gap(accuracy_all, final_accuracy),
        drain_time_days=drain,
        zero_at=dict(engine.zero_at),
        events_processed=engine.events,
        end_time=end_time,
        agent_ids=[p.id for p in config.agents],
        total_supply=engine.total_supply,
        trace=engine.trace,
    )
