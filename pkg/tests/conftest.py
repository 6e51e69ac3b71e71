import dataclasses

import pytest

from cmlsim.contract import ContractRules
from cmlsim.data import DatasetSource
from cmlsim.sim import ScenarioConfig, default_agents

ACCEPTANCE_LINES = []


def small_config(**overrides):
    """A few-second scenario: 3000 synthetic samples over 100 features."""
    kw = dict(
        num_words=100,
        train_size=0.08,
        dataset=DatasetSource(n=3000),
        seed=0,
    )
    kw.update(overrides)
    return ScenarioConfig(**kw)


def agents_with(**changes):
    good, bad = default_agents()
    return (
        dataclasses.replace(good, **changes.get("good", {})),
        dataclasses.replace(bad, **changes.get("malicious", {})),
    )


@pytest.fixture
def cheap_rules():
    return ContractRules(submission_cost=1)


def pytest_terminal_summary(terminalreporter):
    if ACCEPTANCE_LINES:
        terminalreporter.section("acceptance criteria")
        for line in ACCEPTANCE_LINES:
            terminalreporter.write_line(line)
