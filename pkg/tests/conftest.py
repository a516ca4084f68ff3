import numpy as np
import pytest
from hypothesis import HealthCheck, settings

settings.register_profile(
    "default", deadline=None, max_examples=40, suppress_health_check=[HealthCheck.too_slow]
)
settings.load_profile("default")

# acceptance results: criterion number -> list of (label, passed, detail)
CRITERIA = {}


def record_criterion(number, label, passed, detail):
    CRITERIA.setdefault(number, []).append((label, bool(passed), detail))
    line = f"criterion {number:>2} [{label}] {'PASS' if passed else 'FAIL'}: {detail}"
    print(line)
    return line


def pytest_terminal_summary(terminalreporter):
    if not CRITERIA:
        return
    terminalreporter.section("acceptance criteria")
    for number in sorted(CRITERIA):
        parts = CRITERIA[number]
        ok = all(p for _, p, _ in parts)
        detail = "; ".join(f"{label} {'pass' if p else 'FAIL'} ({d})" for label, p, d in parts)
        terminalreporter.write_line(f"criterion {number:>2}: {'PASS' if ok else 'FAIL'} - {detail}")


@pytest.fixture
def rng():
    return np.random.default_rng(12345)
