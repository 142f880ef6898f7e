"""The acceptance suite, run end to end through the command line.

The suite runs twice with seed 42, once on one worker and once on eight.
Criteria 1 to 10 are read from the first run's ``reports.json``. Criterion 11
requires both runs to produce byte-identical JSON and CSV reports.
"""
import json

import pytest

from median_bm import cli

SEED = "42"


@pytest.fixture(scope="session")
def suite_runs(tmp_path_factory):
    dirs, codes = [], []
    for workers in ("1", "8"):
        out = tmp_path_factory.mktemp(f"acceptance_w{workers}")
        codes.append(cli.run(["--workers", workers, "verify", "--suite", "acceptance",
                              "--seed", SEED, "--out", str(out)]))
        dirs.append(out)
    return dirs, codes


@pytest.fixture(scope="session")
def criteria(suite_runs):
    doc = json.loads((suite_runs[0][0] / "reports.json").read_text())
    return {c["number"]: c for c in doc["criteria"]}


def _line(number, name, passed, detail):
    return f"criterion {number:2d} [{'PASS' if passed else 'FAIL'}] {name} ({detail})"


@pytest.mark.parametrize("number", range(1, 11))
def test_criterion(number, criteria, acceptance_summary):
    crit = criteria[number]
    reps = crit["reports"]
    bad = [r for r in reps if not r["passed"]]
    line = _line(number, crit["name"], crit["passed"], f"{len(reps) - len(bad)}/{len(reps)} checks")
    acceptance_summary.append(line)
    print(line)
    assert crit["passed"], "\n".join(
        f"{r['claim_id']}: lhs={r['lhs']!r} rhs={r['rhs']!r} margin={r['margin']!r}" for r in bad
    )


def test_criterion_11_worker_invariance(suite_runs, acceptance_summary):
    (one, eight), codes = suite_runs
    same = {name: (one / name).read_bytes() == (eight / name).read_bytes()
            for name in ("reports.json", "reports.csv")}
    passed = all(same.values()) and codes[0] == codes[1]
    line = _line(11, "reports identical on 1 and 8 workers", passed,
                 ", ".join(f"{k} {'same' if v else 'differs'}" for k, v in same.items()))
    acceptance_summary.append(line)
    print(line)
    assert passed
