"""Scenario files: YAML documents in token units, converted to minor units on load.

Keys follow the parameter table of the marketplace (num_words, train_size,
start_balance, mean_deposit, stdev_deposit, mean_update_wait_s, prob_mistake,
submission_cost). Every monetary value is written in tokens and multiplied
by ``UNITS_PER_TOKEN`` when the scenario is built.
"""
from __future__ import annotations

import copy
import re
from pathlib import Path

import yaml

from .agents import AgentProfile
from .contract import ContractRules
from .data import DatasetSource
from .sim import ScenarioConfig

__all__ = [
    "ConfigError",
    "UNITS_PER_TOKEN",
    "DEFAULT_DOCUMENT",
    "load_document",
    "from_document",
    "to_document",
    "load_config",
    "set_path",
]

UNITS_PER_TOKEN = 100


class ConfigError(ValueError):
    pass


DEFAULT_DOCUMENT = {
    "seed": 0,
    "num_words": 1000,
    "train_size": 0.08,
    "max_epochs": 50,
    "snapshot_every_s": 86400,
    "max_virtual_time_s": None,
    "dataset": {
        "kind": "synthetic",
        "n": 25000,
        "seed": 0,
        "test_fraction": 0.5,
        "path": None,
        "test_path": None,
    },
    "contract": {
        "submission_cost": 5,
        "refund_wait_s": 7 * 86400,
        "base_min_deposit": 10,
        "base_cooldown_s": 60,
        "escalation_deposit_factor": 2,
        "escalation_cooldown_factor": 6,
        "reward_fraction": 0.05,
        "standing_window": 10,
        "standing_threshold": 0.5,
    },
    "agents": [
        {
            "id": "good",
            "honest": True,
            "start_balance": 10000,
            "mean_deposit": 50,
            "stdev_deposit": 10,
            "mean_update_wait_s": 600,
            "prob_mistake": 0.0001,
        },
        {
            "id": "malicious",
            "honest": False,
            "start_balance": 10000,
            "mean_deposit": 100,
            "stdev_deposit": 3,
            "mean_update_wait_s": 3600,
            "corruption_mode": "label_flip",
        },
    ],
}

_AGENT_DEFAULTS = {
    "honest": True,
    "start_balance": 10000,
    "mean_deposit": 50,
    "stdev_deposit": 10,
    "mean_update_wait_s": 600,
    "prob_mistake": 0.0001,
    "corruption_mode": None,
}

_NULLABLE = {"max_virtual_time_s"}


def _units(tokens, where):
    if isinstance(tokens, bool) or not isinstance(tokens, (int, float)):
        raise ConfigError(f"config invalid: {where}")
    return int(round(tokens * UNITS_PER_TOKEN))


def _tokens(units):
    value = units / UNITS_PER_TOKEN
    return int(value) if float(value).is_integer() else value


def _int(value, where):
    if isinstance(value, bool) or not isinstance(value, (int, float)) or not float(value).is_integer():
        raise ConfigError(f"config invalid: {where}")
    return int(value)


def _num(value, where):
    if isinstance(value, bool) or not isinstance(value, (int, float)):
        raise ConfigError(f"config invalid: {where}")
    return float(value)


def _merge(defaults: dict, given: dict, where: str) -> dict:
    out = copy.deepcopy(defaults)
    for key, value in given.items():
        path = f"{where}.{key}" if where else key
        if key not in defaults:
            raise ConfigError(f"config invalid: unknown key {path}")
        if isinstance(defaults[key], dict):
            if not isinstance(value, dict):
                raise ConfigError(f"config invalid: {path}")
            out[key] = _merge(defaults[key], value, path)
        else:
            out[key] = value
    return out


def _complete(doc: dict) -> dict:
    if not isinstance(doc, dict):
        raise ConfigError("config invalid: document must be a mapping")
    base = {k: v for k, v in DEFAULT_DOCUMENT.items() if k != "agents"}
    full = _merge(base, {k: v for k, v in doc.items() if k != "agents"}, "")
    agents = doc.get("agents", DEFAULT_DOCUMENT["agents"])
    if not isinstance(agents, list):
        raise ConfigError("config invalid: agents")
    full["agents"] = []
    for i, entry in enumerate(agents):
        if not isinstance(entry, dict) or "id" not in entry:
            raise ConfigError(f"config invalid: agents[{i}].id")
        full["agents"].append(_merge({"id": None, **_AGENT_DEFAULTS}, entry, f"agents[{i}]"))
    return full


def from_document(doc: dict, base_dir=None) -> ScenarioConfig:
    """Build a validated :class:`ScenarioConfig` from a (possibly partial) document."""
    d = _complete(doc)
    c = d["contract"]
    ds = d["dataset"]

    def resolve(p):
        if p is None:
            return None
        p = Path(str(p))
        if base_dir is not None and not p.is_absolute():
            p = Path(base_dir) / p
        return str(p)

    try:
        rules = ContractRules(
            submission_cost=_units(c["submission_cost"], "contract.submission_cost"),
            refund_wait=_int(c["refund_wait_s"], "contract.refund_wait_s"),
            base_min_deposit=_units(c["base_min_deposit"], "contract.base_min_deposit"),
            base_cooldown=_int(c["base_cooldown_s"], "contract.base_cooldown_s"),
            escalation_deposit_factor=_num(c["escalation_deposit_factor"], "contract.escalation_deposit_factor"),
            escalation_cooldown_factor=_num(c["escalation_cooldown_factor"], "contract.escalation_cooldown_factor"),
            reward_fraction=_num(c["reward_fraction"], "contract.reward_fraction"),
            standing_window=_int(c["standing_window"], "contract.standing_window"),
            standing_threshold=_num(c["standing_threshold"], "contract.standing_threshold"),
        )
        profiles = []
        for i, a in enumerate(d["agents"]):
            where = f"agents[{i}]"
            profiles.append(
                AgentProfile(
                    id=str(a["id"]),
                    honest=bool(a["honest"]),
                    start_balance=_units(a["start_balance"], f"{where}.start_balance"),
                    mean_deposit=_units(a["mean_deposit"], f"{where}.mean_deposit"),
                    stdev_deposit=_num(a["stdev_deposit"], f"{where}.stdev_deposit") * UNITS_PER_TOKEN,
                    mean_update_wait=_num(a["mean_update_wait_s"], f"{where}.mean_update_wait_s"),
                    prob_mistake=_num(a["prob_mistake"], f"{where}.prob_mistake"),
                    corruption_mode=a["corruption_mode"],
                )
            )
        source = DatasetSource(
            kind=str(ds["kind"]),
            path=resolve(ds["path"]),
            test_path=resolve(ds["test_path"]),
            n=_int(ds["n"], "dataset.n"),
            seed=_int(ds["seed"], "dataset.seed"),
            test_fraction=_num(ds["test_fraction"], "dataset.test_fraction"),
        )
        horizon = d["max_virtual_time_s"]
        return ScenarioConfig(
            num_words=_int(d["num_words"], "num_words"),
            train_size=_num(d["train_size"], "train_size"),
            contract=rules,
            agents=tuple(profiles),
            max_virtual_time=None if horizon is None else _int(horizon, "max_virtual_time_s"),
            snapshot_every=_int(d["snapshot_every_s"], "snapshot_every_s"),
            seed=_int(d["seed"], "seed"),
            dataset=source,
            max_epochs=_int(d["max_epochs"], "max_epochs"),
        )
    except ConfigError:
        raise
    except ValueError as exc:
        raise ConfigError(str(exc)) from None


def to_document(config: ScenarioConfig) -> dict:
    c = config.contract
    return {
        "seed": config.seed,
        "num_words": config.num_words,
        "train_size": config.train_size,
        "max_epochs": config.max_epochs,
        "snapshot_every_s": config.snapshot_every,
        "max_virtual_time_s": config.max_virtual_time,
        "dataset": {
            "kind": config.dataset.kind,
            "n": config.dataset.n,
            "seed": config.dataset.seed,
            "test_fraction": config.dataset.test_fraction,
            "path": config.dataset.path,
            "test_path": config.dataset.test_path,
        },
        "contract": {
            "submission_cost": _tokens(c.submission_cost),
            "refund_wait_s": c.refund_wait,
            "base_min_deposit": _tokens(c.base_min_deposit),
            "base_cooldown_s": c.base_cooldown,
            "escalation_deposit_factor": c.escalation_deposit_factor,
            "escalation_cooldown_factor": c.escalation_cooldown_factor,
            "reward_fraction": c.reward_fraction,
            "standing_window": c.standing_window,
            "standing_threshold": c.standing_threshold,
        },
        "agents": [
            {
                "id": a.id,
                "honest": a.honest,
                "start_balance": _tokens(a.start_balance),
                "mean_deposit": _tokens(a.mean_deposit),
                "stdev_deposit": a.stdev_deposit / UNITS_PER_TOKEN,
                "mean_update_wait_s": a.mean_update_wait,
                "prob_mistake": a.prob_mistake,
                "corruption_mode": a.corruption_mode,
            }
            for a in config.agents
        ],
    }


def load_document(path) -> dict:
    path = Path(path)
    if not path.is_file():
        raise ConfigError(f"config file not found: {path}")
    try:
        doc = yaml.safe_load(path.read_text(encoding="utf-8"))
    except yaml.YAMLError as exc:
        raise ConfigError(f"config parse error: {exc}".splitlines()[0]) from None
    return {} if doc is None else doc


def load_config(path) -> ScenarioConfig:
    return from_document(load_document(path), base_dir=Path(path).parent)


_SEGMENT = re.compile(r"^([A-Za-z_][A-Za-z0-9_]*)((?:\[\d+\])*)$")


def set_path(doc: dict, path: str, value) -> dict:
    """Return a copy of the completed ``doc`` with the numeric field at ``path`` replaced.

    Paths are dotted keys with optional list indices, e.g.
    ``contract.submission_cost`` or ``agents[0].mean_deposit``.
    """
    out = _complete(doc)
    parent, key = None, None
    node = out
    plain = []
    for seg in path.split("."):
        m = _SEGMENT.match(seg)
        if m is None:
            raise ConfigError(f"unknown parameter {path}")
        name, idx = m.group(1), m.group(2)
        if not isinstance(node, dict) or name not in node:
            raise ConfigError(f"unknown parameter {path}")
        parent, key = node, name
        node = node[name]
        plain.append(name)
        for i in re.findall(r"\[(\d+)\]", idx):
            i = int(i)
            if not isinstance(node, list) or i >= len(node):
                raise ConfigError(f"unknown parameter {path}")
            parent, key = node, i
            node = node[i]
    current = parent[key]
    nullable = ".".join(plain) in _NULLABLE
    numeric = isinstance(current, (int, float)) and not isinstance(current, bool)
    if isinstance(current, (dict, list)) or not (numeric or (nullable and current is None)):
        raise ConfigError(f"unknown parameter {path}")
    parent[key] = value
    return out
