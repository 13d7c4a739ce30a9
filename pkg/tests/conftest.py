import sys
from pathlib import Path

import hypothesis
import numpy as np
import pytest

sys.path.insert(0, str(Path(__file__).parent))

np.seterr(all="raise", under="ignore")

hypothesis.settings.register_profile("default", max_examples=100, deadline=None)
hypothesis.settings.register_profile("fast", max_examples=10, deadline=None)
hypothesis.settings.load_profile("default")

DATA = Path(__file__).parent / "data"

_acceptance: list[tuple[str, str]] = []


@pytest.fixture
def data_dir():
    return DATA


def pytest_runtest_logreport(report):
    if "test_acceptance.py" in report.nodeid and report.when == "call":
        _acceptance.append((report.nodeid.split("::")[-1], report.outcome))
    elif "test_acceptance.py" in report.nodeid and report.when == "setup" and report.outcome != "passed":
        _acceptance.append((report.nodeid.split("::")[-1], report.outcome))


def pytest_terminal_summary(terminalreporter):
    if not _acceptance:
        return
    terminalreporter.section("acceptance criteria")
    for name, outcome in _acceptance:
        terminalreporter.write_line(f"{'PASS' if outcome == 'passed' else 'FAIL'}  {name}")


@pytest.fixture(scope="session")
def copy_task_run():
    """One desk-scale training run on the first-sentence copy task, shared across tests."""
    import time

    from dialsumm.pointer_gen import ModelConfig, PointerGenerator, TrainConfig, build_vocab, train
    from dialsumm.synthetic import generate_copy_task

    pairs = generate_copy_task(200, seed=1)
    vocab = build_vocab([s for s, _ in pairs] + [t for _, t in pairs], 5000)
    model = PointerGenerator(vocab, ModelConfig(d_e=32, d_h=64, seed=0))
    losses: list[float] = []
    # coverage loss switches on after step 500, past the window the smoothed-loss check inspects
    cfg = TrainConfig(steps=625, batch_size=8, learning_rate=0.005, seed=0, coverage_start=0.8)
    start = time.perf_counter()
    model = train(model, pairs, cfg, callback=lambda step, loss: losses.append(loss))
    return model, losses, time.perf_counter() - start
