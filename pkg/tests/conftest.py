import pytest

from vishik.normal_form import vishik_normal_form
from vishik.randomized import conjugation_suite

from helpers import ACCEPTANCE


def pytest_terminal_summary(terminalreporter):
    if not ACCEPTANCE:
        return
    terminalreporter.section("acceptance criteria")
    for n in sorted(ACCEPTANCE):
        ok, detail = ACCEPTANCE[n]
        terminalreporter.write_line(f"criterion {n}: {'PASS' if ok else 'FAIL'}  {detail}")


@pytest.fixture(scope="session")
def suite():
    """The 100-case conjugation suite (seed 0, N = 6) with its normal forms and timing."""
    import time

    t0 = time.perf_counter()
    cases = conjugation_suite(seed=0, per_shape=20, order=6)
    results = []
    for c in cases:
        try:
            results.append(vishik_normal_form(c.X, c.h))
        except Exception as exc:  # recorded and reported by the acceptance tests
            results.append(exc)
    return cases, results, time.perf_counter() - t0

