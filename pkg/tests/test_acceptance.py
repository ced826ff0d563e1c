"""Acceptance criteria at the default configuration (a=4, H=0.01, Dirac kernel).

Each criterion prints one PASS/FAIL line.  Run directly with
``python tests/test_acceptance.py`` for the bare report.
"""
import pytest

from lvhopf.config import RunConfig
from lvhopf.validation import CRITERIA, TITLES, ValidationContext


@pytest.fixture(scope="module")
def ctx():
    return ValidationContext(RunConfig())


@pytest.mark.parametrize("index", range(len(CRITERIA)), ids=[f"{i + 1:02d}" for i in range(len(CRITERIA))])
def test_criterion(ctx, index):
    result = CRITERIA[index](ctx)
    print(result.line())
    assert result.number == index + 1 and result.title == TITLES[index + 1]
    assert result.passed, result.line()


def test_coarse_step_surfaces_as_failure():
    from lvhopf.config import parse_config
    from lvhopf.validation import criterion_degenerate_reductions

    cfg = parse_config("sim.dt = 0.1\nkernel.expectation = 0.2\n")
    result = criterion_degenerate_reductions(ValidationContext(cfg))
    assert result.status == "fail" and "StepTooCoarse" in result.detail


if __name__ == "__main__":
    import sys

    from lvhopf.validation import run_all

    results = run_all(RunConfig(), echo=print)
    sys.exit(0 if all(r.passed for r in results) else 1)
