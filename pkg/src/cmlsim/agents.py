"""Behaviour of honest and malicious data contributors."""
from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Optional

import numpy as np

from .model import LabeledSample

__all__ = [
    "CORRUPTION_MODES",
    "AgentProfile",
    "PlannedSubmission",
    "draw_deposit",
    "draw_wait",
    "good_transform",
    "corrupt",
    "choose_offer",
]

CORRUPTION_MODES = ("label_flip", "noise")


@dataclass(frozen=True)
class AgentProfile:
    """Monetary fields are integer minor units, durations are virtual seconds."""

    id: str
    honest: bool = True
    start_balance: int = 1_000_000
    mean_deposit: int = 5000
    stdev_deposit: float = 1000.0
    mean_update_wait: float = 600.0
    prob_mistake: float = 0.0001
    corruption_mode: Optional[str] = None

    def __post_init__(self):
        where = f"agents[{self.id}]"
        if self.start_balance < 0:
            raise ValueError(f"config invalid: {where}.start_balance")
        if self.mean_deposit <= 0:
            raise ValueError(f"config invalid: {where}.mean_deposit")
        if self.stdev_deposit < 0:
            raise ValueError(f"config invalid: {where}.stdev_deposit")
        if self.mean_update_wait <= 0:
            raise ValueError(f"config invalid: {where}.mean_update_wait_s")
        if not 0 <= self.prob_mistake <= 1:
            raise ValueError(f"config invalid: {where}.prob_mistake")
        if self.honest:
            if self.corruption_mode is not None:
                raise ValueError(f"config invalid: {where}.corruption_mode")
        else:
            if self.corruption_mode is None:
                object.__setattr__(self, "corruption_mode", "label_flip")
            if self.corruption_mode not in CORRUPTION_MODES:
                raise ValueError(f"config invalid: {where}.corruption_mode")
            object.__setattr__(self, "prob_mistake", 0.0)


@dataclass(frozen=True)
class PlannedSubmission:
    at: int
    sample: LabeledSample
    offered_deposit: int


def draw_deposit(profile: AgentProfile, rng: np.random.Generator, submission_cost: int) -> int:
    """Normal draw in minor units, never below ``submission_cost + 1``."""
    value = int(round(rng.normal(profile.mean_deposit, profile.stdev_deposit)))
    return max(value, submission_cost + 1)


def draw_wait(profile: AgentProfile, rng: np.random.Generator) -> int:
    """Exponential inter-submission wait, rounded up to whole seconds (at least 1)."""
    return max(1, math.ceil(rng.exponential(profile.mean_update_wait)))


def good_transform(sample: LabeledSample, prob_mistake: float, rng: np.random.Generator) -> LabeledSample:
    # always consume one draw so the stream stays aligned whatever prob_mistake is
    if rng.random() < prob_mistake:
        return sample.flipped()
    return sample


def corrupt(sample: LabeledSample, mode: str, num_words: int, rng: np.random.Generator) -> LabeledSample:
    if mode == "label_flip":
        return sample.flipped()
    if mode == "noise":
        k = len(sample.features)
        feats = rng.choice(num_words, size=k, replace=False) if k else ()
        return LabeledSample(tuple(sorted(int(i) for i in feats)), sample.label)
    raise ValueError(f"unknown corruption mode: {mode}")


def choose_offer(drawn: int, required: int, free_balance: int, submission_cost: int, keep: int) -> Optional[int]:
    """Deposit an agent actually offers, or None when it cannot afford to submit.

    The agent offers ``max(drawn, required)``. If that exceeds its balance, or
    would leave less than ``keep`` behind (too little to ever submit again),
    it stakes the whole balance instead, provided that still meets
    ``required`` and leaves a positive stake.
    """
    offer = max(drawn, required)
    if offer > free_balance or free_balance - offer < keep:
        offer = free_balance
    if offer < required or offer <= submission_cost:
        return None
    return offer
