import numpy as np
import pytest

ACCEPTANCE_LINES = []


@pytest.fixture
def record():
    """Collect one summary line per acceptance criterion."""

    def _record(line):
        ACCEPTANCE_LINES.append(line)
        print(line)

    return _record


@pytest.fixture
def rng():
    return np.random.default_rng(20240611)


def pytest_terminal_summary(terminalreporter):
    if ACCEPTANCE_LINES:
        terminalreporter.section("acceptance criteria")
        for line in ACCEPTANCE_LINES:
            terminalreporter.write_line(line)


def random_flat(rng, d, n=None, offset_scale=1.0):
    from gaussradon.flats import make_flat

    if n is None:
        n = int(rng.integers(0, d + 1))
    N = rng.standard_normal((n, d))
    flat0 = make_flat(list(N), dim=d)
    p = offset_scale * rng.standard_normal(n) @ flat0.normals if n else np.zeros(d)
    return make_flat(flat0.normals, p, dim=d)
