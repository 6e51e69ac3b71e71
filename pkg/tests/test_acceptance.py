"""Acceptance criteria, one test each.

Every test appends a PASS/FAIL/SKIP line to ``conftest.ACCEPTANCE_LINES``
before asserting, so the terminal summary lists all of them even when some fail.
"""

import os
import random
import time
from pathlib import Path

import numpy as np
import pytest
import yaml

from cmlsim.agents import AgentProfile
from cmlsim.cli import main
from cmlsim.contract import DAY, ContractRules
from cmlsim.data import DatasetSource, synthesize
from cmlsim.model import SparsePerceptron, evaluate
from cmlsim.sim import ScenarioConfig, baseline_accuracy, compute_gap, run, time_to_drain

from conftest import ACCEPTANCE_LINES
from test_model import dense_reference

TOKEN = 100


def days(report, agent):
    d = time_to_drain(report, agent)
    return None if d is None else round(d, 2)


def record(number, name, ok, detail):
    ACCEPTANCE_LINES.append(f"[{'PASS' if ok else 'FAIL'}] {number}. {name}: {detail}")
    return ok


def random_scenario(rnd):
    rules = ContractRules(
        submission_cost=rnd.randint(0, 300),
        refund_wait=rnd.randint(0, 3 * DAY),
        base_min_deposit=rnd.randint(0, 3000),
        base_cooldown=rnd.randint(0, 3600),
        escalation_deposit_factor=rnd.uniform(1, 4),
        escalation_cooldown_factor=rnd.uniform(1, 8),
        reward_fraction=rnd.random(),
        standing_window=rnd.randint(1, 12),
        standing_threshold=rnd.random(),
    )
    agents = []
    for i in range(rnd.randint(1, 4)):
        honest = rnd.random() < 0.5
        agents.append(
            AgentProfile(
                id=f"a{i}",
                honest=honest,
                start_balance=rnd.randint(0, 200_000),
                mean_deposit=rnd.randint(1, 20_000),
                stdev_deposit=rnd.uniform(0, 5000),
                mean_update_wait=rnd.uniform(60, 20_000),
                prob_mistake=rnd.uniform(0, 0.3) if honest else 0.0,
                corruption_mode=None if honest else rnd.choice(["label_flip", "noise"]),
            )
        )
    return ScenarioConfig(
        num_words=rnd.randint(4, 40),
        train_size=rnd.uniform(0.02, 0.5),
        contract=rules,
        agents=tuple(agents),
        max_virtual_time=rnd.randint(DAY, 10 * DAY),
        snapshot_every=rnd.choice([3600, 6 * 3600, DAY]),
        seed=rnd.randint(0, 2**31),
        dataset=DatasetSource(n=rnd.randint(60, 600), seed=rnd.randint(0, 100)),
    )


def test_1_conservation_randomized():
    rnd = random.Random(20240101)
    start = time.perf_counter()
    broken = []
    snapshots = 0
    for k in range(100):
        cfg = random_scenario(rnd)
        report = run(cfg)
        expected = sum(a.start_balance for a in cfg.agents)
        for s in report.snapshots:
            snapshots += 1
            if sum(s.balances.values()) + s.pool + s.burned != expected or report.total_supply != expected:
                broken.append((k, s.t))
    elapsed = time.perf_counter() - start
    ok = not broken and elapsed < 60
    record(1, "conservation", ok, f"100 scenarios, {snapshots} snapshots, {len(broken)} violations, {elapsed:.1f}s")
    assert not broken
    assert elapsed < 60


def test_2_gap_identity():
    rng = np.random.default_rng(2)
    pairs = rng.uniform(0, 100, size=(1000, 2))
    pairs[:50] = np.round(pairs[:50])  # include exact integers and endpoints
    pairs[0] = (0, 100)
    pairs[1] = (100, 0)
    bad_pairs = sum(compute_gap(a, b) != a - b for a, b in pairs)
    reports = [run(ScenarioConfig(num_words=50, dataset=DatasetSource(n=1500), seed=s)) for s in range(3)]
    bad_reports = sum(r.gap != r.accuracy_all - r.final_accuracy for r in reports)
    ok = bad_pairs == 0 and bad_reports == 0
    record(2, "gap identity", ok, f"{bad_pairs}/1000 pairs and {bad_reports}/3 reports off")
    assert ok


def test_3_perceptron_oracle():
    rnd = random.Random(3)
    mismatches = 0
    for _ in range(200):
        num_words = rnd.randint(1, 50)
        sequence = [
            (sorted(rnd.sample(range(num_words), rnd.randint(0, num_words))), rnd.randint(0, 1))
            for _ in range(rnd.randint(0, 200))
        ]
        m = SparsePerceptron(num_words)
        m._init_weights()
        for features, label in sequence:
            m.update(features, label)
        w, b = dense_reference(num_words, sequence)
        mismatches += m.coef_.tolist() != w or m.intercept_ != b
    ok = mismatches == 0
    record(3, "perceptron oracle", ok, f"{mismatches}/200 instances differ from the dense reference")
    assert ok


def test_4_separable_convergence():
    train = synthesize(2000, 200, seed=0)
    test = synthesize(2000, 200, seed=1)
    model = SparsePerceptron(200, max_epochs=50, random_state=0)
    model.fit([s.features for s in train], [s.label for s in train])
    train_acc = evaluate(model, train)
    test_acc = evaluate(model, test)
    base = baseline_accuracy(ScenarioConfig(num_words=200, dataset=DatasetSource(n=2000)))
    # context only: the same baseline on the full-size synthetic corpus
    base_full = baseline_accuracy(ScenarioConfig(num_words=200))
    fit_ok = train_acc == 100.0 and model.n_epochs_ <= 50 and test_acc >= 95
    record(
        4,
        "separable convergence",
        fit_ok and base >= 95,
        f"train {train_acc:.2f}% after {model.n_epochs_} epochs, test {test_acc:.2f}%, "
        f"baseline {base:.2f}% (n=2000), {base_full:.2f}% (n=25000)",
    )
    assert fit_ok
    assert base >= 95


def test_5_poisoning_neutralized():
    cfg = ScenarioConfig(contract=ContractRules(submission_cost=5 * TOKEN))
    start = time.perf_counter()
    report = run(cfg)
    elapsed = time.perf_counter() - start
    good, bad = cfg.agents
    last = report.snapshots[-1]
    drained = report.zero_at[bad.id] is not None and report.zero_at[bad.id] <= report.end_time
    good_pct = 100 * last.balances[good.id] / good.start_balance
    ok = drained and last.balances[bad.id] == 0 and good_pct >= 120 and abs(report.gap) <= 2 and elapsed < 120
    record(
        5,
        "poisoning neutralized",
        ok,
        f"malicious drained at {days(report, bad.id)} days, good ends at {good_pct:.2f}% of start, "
        f"gap {report.gap:.2f} pp, {elapsed:.1f}s",
    )
    assert drained and last.balances[bad.id] == 0
    assert good_pct >= 120
    assert abs(report.gap) <= 2
    assert elapsed < 120


def test_6_submission_cost_trend():
    reports = {c: run(ScenarioConfig(contract=ContractRules(submission_cost=c * TOKEN))) for c in (1, 5, 25)}
    drains = [time_to_drain(reports[c], "malicious") for c in (1, 5, 25)]
    accs = [reports[c].final_accuracy for c in (1, 5, 25)]
    drain_ok = None not in drains and drains[0] >= drains[1] >= drains[2]
    acc_ok = accs[2] >= accs[0] - 1.0
    record(
        6,
        "submission-cost trend",
        drain_ok and acc_ok,
        f"drain days {[days(reports[c], 'malicious') for c in (1, 5, 25)]}, final accuracy {[round(a, 2) for a in accs]}",
    )
    assert drain_ok
    assert acc_ok


def test_7_train_size_trend():
    sizes = (0.01, 0.08, 0.32)
    reports = [run(ScenarioConfig(train_size=s)) for s in sizes]
    acc_all = [r.accuracy_all for r in reports]
    drains = [time_to_drain(r, "malicious") for r in reports]
    acc_ok = all(b >= a - 0.5 for a, b in zip(acc_all, acc_all[1:]))
    drain_ok = None not in (drains[0], drains[2]) and drains[2] <= drains[0]
    record(
        7,
        "train_size trend",
        acc_ok and drain_ok,
        f"accuracy_all {[round(a, 2) for a in acc_all]}, drain days {[days(r, 'malicious') for r in reports]}",
    )
    assert acc_ok
    assert drain_ok


def test_8_cli_determinism(tmp_path, capsys):
    cfg = tmp_path / "scenario.yaml"
    cfg.write_text(yaml.safe_dump({"num_words": 80, "dataset": {"kind": "synthetic", "n": 2000}}))
    outputs = {}
    for attempt in ("a", "b"):
        main(["run", str(cfg), "--out", str(tmp_path / f"run_{attempt}"), "--seed", "11"])
        main(["sweep", str(cfg), "--param", "contract.submission_cost", "--values", "1,5", "--out", str(tmp_path / f"sweep_{attempt}")])
        main(["baseline", str(cfg)])
        outputs[attempt] = capsys.readouterr().out
    files = ["run_{}/report.json", "run_{}/timeline.csv", "sweep_{}/sweep.csv"]
    same = [(tmp_path / f.format("a")).read_bytes() == (tmp_path / f.format("b")).read_bytes() for f in files]
    ok = all(same) and outputs["a"] == outputs["b"]
    record(8, "determinism", ok, f"report.json, timeline.csv, sweep.csv identical: {same}; stdout identical: {outputs['a'] == outputs['b']}")
    assert ok


def test_9_num_words_direction(tmp_path):
    root = os.environ.get("CMLSIM_IMDB_DIR")
    train = Path(root or ".") / "train.tsv"
    test = Path(root or ".") / "test.tsv"
    if not root or not train.exists() or not test.exists():
        ACCEPTANCE_LINES.append("[SKIP] 9. num_words direction: set CMLSIM_IMDB_DIR to a folder with indexed train.tsv and test.tsv")
        pytest.skip("IMDB files not available")
    source = DatasetSource(kind="indexed", path=str(train), test_path=str(test))
    accs = {n: run(ScenarioConfig(num_words=n, dataset=source)).final_accuracy for n in (100, 400, 800)}
    ok = accs[400] > accs[100] and accs[800] >= max(accs.values()) - 2
    record(9, "num_words direction", ok, f"final accuracy {accs}")
    assert ok
