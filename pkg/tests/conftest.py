import numpy as np
import pytest

from feastlab.matmodel import (
    SpectrumLayout,
    assemble_matrix,
    decomposition_from_values,
    generate_spectrum,
)


def small_problem(n=40, m=6, outer=(1.05, 8.0), interval=(-1.0, 1.0), seed=0):
    """Matrix with ``m`` eigenvalues at cell midpoints of ``interval``."""
    layout = SpectrumLayout(
        n=n,
        inside_interval=interval,
        inside_count=m,
        outside_interval=outer,
        outside_count=n - m,
        inside_placement="midpoint",
        seed=seed,
    )
    decomp = generate_spectrum(layout)
    return assemble_matrix(decomp).entries, decomp


def random_symmetric(n, seed):
    rng = np.random.default_rng(seed)
    values = np.sort(rng.uniform(-3.0, 3.0, n))
    decomp = decomposition_from_values(values, seed)
    return assemble_matrix(decomp).entries, decomp


@pytest.fixture
def problem():
    return small_problem()


_VERDICTS = pytest.StashKey[list]()


def pytest_configure(config):
    config.stash[_VERDICTS] = []


@pytest.fixture
def verdict(request):
    """Record one acceptance criterion outcome and fail the test if it failed."""

    def record(number, title, ok, detail):
        line = f"criterion {number:>2} {'PASS' if ok else 'FAIL'}  {title}: {detail}"
        request.config.stash[_VERDICTS].append((number, line))
        print(line)
        assert ok, line

    return record


def pytest_terminal_summary(terminalreporter, config):
    verdicts = sorted(config.stash.get(_VERDICTS, []))
    if verdicts:
        terminalreporter.section("acceptance criteria")
        for _, line in verdicts:
            terminalreporter.write_line(line)
