import numpy as np
import pytest
from hypothesis import HealthCheck, settings
from hypothesis import strategies as st

from blockspec import MatrixSymbol

settings.register_profile(
    "default", deadline=None, max_examples=40,
    suppress_health_check=[HealthCheck.too_slow],
)
settings.load_profile("default")


@pytest.fixture
def rng():
    return np.random.default_rng(12345)


seeds = st.integers(min_value=0, max_value=2**32 - 1)


def random_symbol(seed, max_blocks=6, max_dim=4, max_mult=1):
    from blockspec.sampling import random_explicit_symbol
    return random_explicit_symbol(np.random.default_rng(seed), max_blocks, max_dim, max_mult)


def dense(s: MatrixSymbol, with_multiplicity=True):
    """Block-diagonal matrix of a finite symbol, repeating blocks by multiplicity."""
    from scipy.linalg import block_diag
    mats = []
    for l in range(s.partition.size):
        reps = s.multiplicity(l) if with_multiplicity else 1
        mats.extend([s.block(l)] * reps)
    return block_diag(*mats)


ACCEPTANCE_LINES = []


def report(number, ok, detail):
    line = f"CRITERION {number:>2}: {'PASS' if ok else 'FAIL'}  {detail}"
    ACCEPTANCE_LINES.append(line)
    print(line)
    return ok


def pytest_terminal_summary(terminalreporter):
    if ACCEPTANCE_LINES:
        terminalreporter.section("acceptance criteria")
        for line in sorted(ACCEPTANCE_LINES, key=lambda s: int(s.split(":")[0].split()[1])):
            terminalreporter.write_line(line)
