import numpy as np
import pytest

from tailfit import EventLog

# criterion number -> (passed, detail), filled in by test_acceptance
ACCEPTANCE: dict = {}


def record(number: int, passed: bool, detail: str):
    ACCEPTANCE[number] = (bool(passed), detail)
    line = f"ACCEPTANCE {number:2d}: {'PASS' if passed else 'FAIL'}  {detail}"
    print(line)
    return passed


def pytest_terminal_summary(terminalreporter):
    if not ACCEPTANCE:
        return
    terminalreporter.section("acceptance criteria")
    for number in sorted(ACCEPTANCE):
        passed, detail = ACCEPTANCE[number]
        terminalreporter.write_line(
            f"criterion {number:2d}: {'PASS' if passed else 'FAIL'}  {detail}"
        )


def simulate_linear_attachment(n_authors=10_000, years=20, rate=0.3, seed=0, start=1990):
    """Event log where an author holding k articles publishes Poisson(rate*k)
    articles the next year. Every author starts with one article in the
    first year."""
    rng = np.random.default_rng(seed)
    counts = np.ones(n_authors, dtype=np.int64)
    ids = np.array([f"a{i}" for i in range(n_authors)], dtype=object)
    authors, yrs = [ids], [np.full(n_authors, start)]
    for t in range(start + 1, start + years):
        new = rng.poisson(rate * counts)
        authors.append(np.repeat(ids, new))
        yrs.append(np.full(int(new.sum()), t))
        counts += new
    return EventLog(np.concatenate(authors), np.concatenate(yrs), "simulated")


@pytest.fixture
def sim_log():
    return simulate_linear_attachment()
