import numpy as np
import pytest
from hypothesis import settings

settings.register_profile("repo", deadline=None, max_examples=40, derandomize=True)
settings.load_profile("repo")


@pytest.fixture
def rng():
    return np.random.default_rng(20240611)


# Acceptance verdicts, keyed by criterion number; a criterion fails if any of
# its checks fails.
ACCEPTANCE = {}


class _Recorder:
    def __init__(self, number, title):
        self.number, self.title = number, title

    def __enter__(self):
        return self

    def __exit__(self, exc_type, exc, tb):
        ok, detail = ACCEPTANCE.get(self.number, (True, []))
        if exc_type is not None:
            ok = False
            detail = detail + [str(exc).splitlines()[0] if str(exc) else exc_type.__name__]
        ACCEPTANCE[self.number] = (ok, detail)
        return False

    def note(self, text):
        ok, detail = ACCEPTANCE.get(self.number, (True, []))
        ACCEPTANCE[self.number] = (ok, detail + [text])


@pytest.fixture
def criterion():
    """``with criterion(n, title) as c:`` records a PASS/FAIL line for criterion ``n``."""
    return _Recorder


def pytest_terminal_summary(terminalreporter):
    if not ACCEPTANCE:
        return
    terminalreporter.section("acceptance criteria")
    for number in sorted(ACCEPTANCE):
        ok, detail = ACCEPTANCE[number]
        line = f"criterion {number:2d}: {'PASS' if ok else 'FAIL'}"
        if detail:
            line += "  (" + "; ".join(detail) + ")"
        terminalreporter.write_line(line)
