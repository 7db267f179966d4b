"""Shared fixtures and the acceptance-criteria summary reporter."""
import numpy as np
import pytest

from d2dnet import ParamBounds

# Filled in by tests/test_acceptance.py; printed after the run so that the
# one-line-per-criterion verdicts survive pytest's output capture.
ACCEPTANCE_RESULTS: dict[int, tuple[bool, str]] = {}


def record_criterion(number: int, ok: bool, detail: str) -> None:
    ACCEPTANCE_RESULTS[number] = (bool(ok), detail)
    print(f"criterion {number}: {'PASS' if ok else 'FAIL'} — {detail}")


def pytest_terminal_summary(terminalreporter, exitstatus, config):
    if not ACCEPTANCE_RESULTS:
        return
    terminalreporter.section("acceptance criteria")
    for number in sorted(ACCEPTANCE_RESULTS):
        ok, detail = ACCEPTANCE_RESULTS[number]
        terminalreporter.write_line(
            f"criterion {number}: {'PASS' if ok else 'FAIL'} — {detail}"
        )


@pytest.fixture
def section_v_bounds() -> ParamBounds:
    """Parameter box used by both mission case studies."""
    return ParamBounds(
        p_min=0.0, p_max=0.4,
        lambda_min=1.0, lambda_max=15.0,
        r1_min=0.1, r1_max=2.0,
        r2_min=0.01, r2_max=0.8,
    )


@pytest.fixture
def rng() -> np.random.Generator:
    return np.random.default_rng(20260823)
