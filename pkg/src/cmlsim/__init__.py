"""Simulator for a staked, contract-verified collaborative training marketplace."""

from .agents import AgentProfile
from .contract import ContractError, ContractRules, IncentiveContract, Ledger, ledger_total
from .data import BagOfWordsVocabulary, DatasetSource, DatasetSplit, build_vocabulary, featurize, load_indexed, split, synthesize
from .model import LabeledSample, SparsePerceptron, evaluate
from .sim import ScenarioConfig, SimulationReport, baseline_accuracy, compute_gap, run, time_to_drain

__version__ = "0.1.0"

__all__ = [
    "AgentProfile",
    "BagOfWordsVocabulary",
    "ContractError",
    "ContractRules",
    "DatasetSource",
    "DatasetSplit",
    "IncentiveContract",
    "LabeledSample",
    "Ledger",
    "ScenarioConfig",
    "SimulationReport",
    "SparsePerceptron",
    "baseline_accuracy",
    "build_vocabulary",
    "compute_gap",
    "evaluate",
    "featurize",
    "ledger_total",
    "load_indexed",
    "run",
    "split",
    "synthesize",
    "time_to_drain",
]
