import contextlib
import time

import pytest

ACCEPTANCE = []


class _Record:
    detail = ""


@pytest.fixture
def criterion():
    """Context manager that logs a pass/fail line for an acceptance criterion."""

    @contextlib.contextmanager
    def run(name):
        rec = _Record()
        start = time.perf_counter()
        try:
            yield rec
        except BaseException as exc:
            msg = rec.detail or (str(exc).splitlines() or [""])[0]
            ACCEPTANCE.append(("FAIL", name, msg, time.perf_counter() - start))
            raise
        ACCEPTANCE.append(("PASS", name, rec.detail, time.perf_counter() - start))

    return run


def pytest_terminal_summary(terminalreporter):
    if not ACCEPTANCE:
        return
    terminalreporter.write_sep("=", "acceptance criteria")
    for status, name, detail, secs in ACCEPTANCE:
        terminalreporter.write_line(f"[{status}] {name} ({secs:.1f}s): {detail}")
