import contextlib
import time

# criterion number -> (passed, detail); filled by test_acceptance.py
CRITERIA: dict = {}


@contextlib.contextmanager
def criterion(number: int, limit: float):
    """Time a criterion body, record PASS/FAIL and enforce the time limit."""
    notes: list = []
    start = time.perf_counter()
    try:
        yield notes
    except BaseException as exc:
        CRITERIA[number] = (False, f"{type(exc).__name__}: {exc}".splitlines()[0][:160])
        raise
    elapsed = time.perf_counter() - start
    detail = "; ".join(notes + [f"{elapsed:.1f}s of {limit:.0f}s"])
    ok = elapsed < limit
    CRITERIA[number] = (ok, detail)
    assert ok, f"criterion {number} took {elapsed:.1f}s, limit {limit}s"


def pytest_terminal_summary(terminalreporter):
    if not CRITERIA:
        return
    terminalreporter.section("acceptance criteria")
    for n in sorted(CRITERIA):
        ok, detail = CRITERIA[n]
        terminalreporter.write_line(f"criterion {n}: {'PASS' if ok else 'FAIL'} ({detail})")
