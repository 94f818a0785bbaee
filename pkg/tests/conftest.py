import os

import pytest
from hypothesis import HealthCheck, settings

settings.register_profile(
    "soblab", deadline=None, max_examples=int(os.environ.get("SOBLAB_EXAMPLES", "200")),
    suppress_health_check=[HealthCheck.too_slow])
settings.load_profile("soblab")

_ACCEPTANCE_LINES: list = []


@pytest.fixture
def acceptance_line():
    """Record one ``PASS``/``FAIL`` line per acceptance criterion."""
    def record(number: int, title: str, ok: bool, detail: str = ""):
        line = f"criterion {number:2d} {'PASS' if ok else 'FAIL'} {title}"
        if detail:
            line += f" | {detail}"
        _ACCEPTANCE_LINES.append((number, line))
        print(line)
        return ok
    return record


def pytest_terminal_summary(terminalreporter):
    if not _ACCEPTANCE_LINES:
        return
    terminalreporter.section("acceptance criteria")
    for _, line in sorted(_ACCEPTANCE_LINES):
        terminalreporter.write_line(line)
