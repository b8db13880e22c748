import contextlib

import pytest

# (criterion, passed, detail) in the order the acceptance tests ran
ACCEPTANCE = []


class Outcome:
    def __init__(self):
        self.detail = ""


@pytest.fixture
def criterion():
    """Record one acceptance criterion; failures are recorded and re-raised."""

    @contextlib.contextmanager
    def record(name):
        out = Outcome()
        try:
            yield out
        except BaseException as e:
            ACCEPTANCE.append((name, False, out.detail or "%s: %s" % (type(e).__name__, e)))
            raise
        ACCEPTANCE.append((name, True, out.detail))

    return record


def pytest_terminal_summary(terminalreporter):
    if not ACCEPTANCE:
        return
    tr = terminalreporter
    tr.section("acceptance criteria")
    for name, ok, detail in ACCEPTANCE:
        line = "%s  %s" % ("PASS" if ok else "FAIL", name)
        tr.write_line(line + ("  (%s)" % detail if detail else ""))
    tr.write_line("%d/%d criteria passed" % (sum(ok for _, ok, _ in ACCEPTANCE), len(ACCEPTANCE)))
