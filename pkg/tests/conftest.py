import numpy as np
import pytest
from hypothesis import settings

settings.register_profile("default", max_examples=50, deadline=None)
settings.load_profile("default")

# criterion number -> (passed, detail); filled by test_acceptance
ACCEPTANCE: dict = {}


def record(criterion: int, passed: bool, detail: str) -> None:
    prev = ACCEPTANCE.get(criterion)
    if prev is not None:
        passed = passed and prev[0]
        detail = prev[1] + "; " + detail
    ACCEPTANCE[criterion] = (passed, detail)


def pytest_terminal_summary(terminalreporter):
    if not ACCEPTANCE:
        return
    terminalreporter.section("acceptance criteria")
    for k in sorted(ACCEPTANCE):
        ok, detail = ACCEPTANCE[k]
        terminalreporter.write_line(f"criterion {k:2d}: {'PASS' if ok else 'FAIL'}  {detail}")


@pytest.fixture
def rng():
    return np.random.default_rng(1234)


@pytest.fixture(scope="session")
def curriculum():
    """Full 300 s curriculum with the default settings (about two minutes)."""
    from aerodock.learning.curriculum import run_curriculum
    from aerodock.sim.collect import SimEnv
    return run_curriculum(SimEnv())


@pytest.fixture(scope="session")
def model(curriculum):
    return curriculum.model


@pytest.fixture(scope="session")
def small_model():
    """Untrained, small-weight network for plumbing tests."""
    from aerodock.learning.network import MlpModel
    m = MlpModel.initialized(0)
    m.params *= 0.1
    return m
