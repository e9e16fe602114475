import functools
from pathlib import Path

import pytest

from deltaspec.minilang import parse_unit
from deltaspec.pipeline import RunOptions, experiment_inputs, load_commit, run_pipeline

CORPUS = Path(__file__).resolve().parents[1] / "src" / "deltaspec" / "corpus"
CASES = ("sum_fix", "support_bound", "linf_norm", "is_any_empty", "refactor_iterator")


def case_dir(case: str) -> Path:
    return CORPUS / case


def load_side(case: str, side: str):
    (f,) = sorted((CORPUS / case / side).glob("*.dl"))
    return parse_unit(f.read_text())


@functools.lru_cache(maxsize=None)
def pipeline(case: str, seed: int = 1):
    """One cached full run per (case, seed) for the whole session."""
    return run_pipeline(load_commit(CORPUS / case), RunOptions(seed=seed))


@functools.lru_cache(maxsize=None)
def experiments(case: str, seed: int = 1):
    return experiment_inputs(pipeline(case, seed))


SUM_SRC = """
class Sum {
  field n: int;
  field value: real;
  init() {
    n := 0;
    value := 0.0;
  }
  method increment(d: real) {
    value := value + d;
    n := n + 1;
  }
  method getResult(): real {
    return value;
  }
}
"""


@pytest.fixture
def sum_post():
    return parse_unit(SUM_SRC)


def pytest_terminal_summary(terminalreporter):
    try:
        from test_acceptance import RESULTS
    except ImportError:
        return
    if RESULTS:
        terminalreporter.section("acceptance criteria")
        for line in RESULTS:
            terminalreporter.write_line(line)
