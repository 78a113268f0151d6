import numpy as np
import pytest

from holderlab.kernels import load_or_build_table


@pytest.fixture(scope="session")
def table_cache(tmp_path_factory):
    return tmp_path_factory.mktemp("kernel-cache")


@pytest.fixture(scope="session")
def tables(table_cache):
    """Memoised default-grid kernel tables keyed by ``(alpha, k)``."""
    built = {}

    def get(alpha, k=1):
        key = (float(alpha), int(k))
        if key not in built:
            built[key] = load_or_build_table(alpha, k, cache_dir=table_cache)[0]
        return built[key]

    return get


@pytest.fixture
def rng():
    return np.random.default_rng(20240611)


ACCEPTANCE_LINES = []


def pytest_terminal_summary(terminalreporter):
    if ACCEPTANCE_LINES:
        terminalreporter.section("acceptance criteria")
        for line in ACCEPTANCE_LINES:
            terminalreporter.write_line(line)
