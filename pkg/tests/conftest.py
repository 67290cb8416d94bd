import numpy as np
import pytest

_ACCEPTANCE = []


def random_psd(rng, n, rank=None, scale=1.0):
    rank = n if rank is None else rank
    A = rng.standard_normal((n, rank))
    return scale * (A @ A.T) / rank


def random_pd(rng, n, floor=0.1):
    return random_psd(rng, n) + floor * np.eye(n)


def record_criterion(number, title, ok, detail=""):
    _ACCEPTANCE.append((number, title, bool(ok), detail))


@pytest.fixture
def rng():
    return np.random.default_rng(12345)


def pytest_terminal_summary(terminalreporter):
    if not _ACCEPTANCE:
        return
    terminalreporter.section("acceptance criteria")
    for number, title, ok, detail in sorted(_ACCEPTANCE, key=lambda r: r[0]):
        status = "PASS" if ok else "FAIL"
        line = f"[{status}] criterion {number}: {title}"
        if detail:
            line += f" ({detail})"
        terminalreporter.write_line(line)
