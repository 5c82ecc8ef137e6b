from dataclasses import dataclass

import pytest

from opinion_pool.config import RunConfig
from opinion_pool.evaluation import EvaluationReport, evaluate
from opinion_pool.modalities import train_classifiers
from opinion_pool.scenario import Dataset, generate_dataset, split_dataset


@dataclass
class Pipeline:
    cfg: RunConfig
    train: Dataset
    test: Dataset
    classifiers: dict
    report: EvaluationReport


def run_pipeline(cfg: RunConfig) -> Pipeline:
    data = generate_dataset(cfg.scenario)
    train, test = split_dataset(data, cfg.train_fraction, cfg.seed)
    classifiers = train_classifiers(train, cfg.scenario.layout, cfg.basis, cfg.linear, cfg.gaze_window)
    report = evaluate(classifiers, list(test.examples), train.intentions)
    return Pipeline(cfg, train, test, classifiers, report)


@pytest.fixture(scope="session")
def default_run() -> Pipeline:
    return run_pipeline(RunConfig())


# -- acceptance summary ------------------------------------------------------------

_ACCEPTANCE: dict[str, str] = {}


def pytest_configure(config):
    config.addinivalue_line("markers", "acceptance: top-level acceptance criterion")


@pytest.hookimpl(hookwrapper=True)
def pytest_runtest_makereport(item, call):
    outcome = yield
    report = outcome.get_result()
    if item.get_closest_marker("acceptance") is None:
        return
    doc = (item.function.__doc__ or item.name).strip().splitlines()[0]
    if report.when == "call" or report.failed:
        _ACCEPTANCE[doc] = "PASS" if report.passed and _ACCEPTANCE.get(doc, "PASS") == "PASS" else "FAIL"


def pytest_terminal_summary(terminalreporter):
    if not _ACCEPTANCE:
        return
    terminalreporter.section("acceptance criteria")
    for doc, status in _ACCEPTANCE.items():
        terminalreporter.write_line(f"{status}  {doc}")
