import numpy as np
import pytest

from hpwl.dataset import DataMatrix, standardize


@pytest.fixture
def rng():
    return np.random.default_rng(12345)


def random_data(rng, n, d):
    return standardize(DataMatrix(rng.normal(size=(n, d)))).values


def pytest_terminal_summary(terminalreporter):
    import sys

    module = sys.modules.get("test_acceptance")
    results = getattr(module, "RESULTS", None)
    if not results:
        return
    terminalreporter.section("acceptance criteria")
    for criterion in sorted(results):
        parts = results[criterion]
        verdict = "PASS" if all(ok for _, ok, _ in parts) else "FAIL"
        detail = "; ".join(f"{name}: {'ok' if ok else 'failed'}, {info}" for name, ok, info in parts)
        terminalreporter.write_line(f"criterion {criterion}: {verdict} | {detail}")
