"""Session fixtures: a small five-category cohort and its trained report.

The cohort is a reduced-count draw from the reference cluster geometry so
fitting cost is amortized across every test file that needs real fitted
records or a trained separator.
"""

from __future__ import annotations

import dataclasses

import pytest

from ogtt_indices import (
    REFERENCE_CLUSTERS,
    TrainMode,
    reference_cohort,
    run_pipeline,
)

MINI_COUNTS = (14, 6, 8, 6, 8)


@pytest.fixture(scope="session")
def mini_pairs():
    clusters = [dataclasses.replace(c, count=n)
                for c, n in zip(REFERENCE_CLUSTERS, MINI_COUNTS)]
    return reference_cohort(seed=0, clusters=clusters)


@pytest.fixture(scope="session")
def mini_records(mini_pairs):
    return [record for record, _ in mini_pairs]


@pytest.fixture(scope="session")
def mini_report(mini_records):
    return run_pipeline(mini_records, svm_mode=TrainMode(),
                        input_digest="fixture-digest")


@pytest.fixture(scope="session")
def mini_model(mini_report):
    return mini_report.model


# --- acceptance-criteria reporting ------------------------------------
#
# Tests in test_acceptance.py declare which numbered criterion they
# verify; the terminal summary then shows one PASS/FAIL line per
# criterion even when everything passes (pytest hides captured stdout
# of passing tests, so plain prints would be invisible).


@pytest.hookimpl(tryfirst=True, hookwrapper=True)
def pytest_runtest_makereport(item, call):
    outcome = yield
    rep = outcome.get_result()
    setattr(item, "rep_" + rep.when, rep)


class _CriterionRecorder:
    def __init__(self):
        self.number = None
        self.title = None
        self.detail = ""

    def declare(self, number: int, title: str) -> None:
        self.number = number
        self.title = title

    def note(self, detail: str) -> None:
        self.detail = detail


@pytest.fixture
def criterion(request):
    rec = _CriterionRecorder()
    yield rec
    if rec.number is None:
        return
    rep = getattr(request.node, "rep_call", None)
    passed = rep is not None and rep.passed
    line = f"criterion {rec.number} ({rec.title}): " \
           f"{'PASS' if passed else 'FAIL'}"
    if passed and rec.detail:
        line += f" — {rec.detail}"
    lines = getattr(request.config, "_acceptance_lines", [])
    lines.append((rec.number, line))
    request.config._acceptance_lines = lines


def pytest_terminal_summary(terminalreporter, exitstatus, config):
    lines = getattr(config, "_acceptance_lines", None)
    if not lines:
        return
    terminalreporter.section("acceptance criteria")
    for _, line in sorted(lines):
        terminalreporter.write_line(line)
