import time

import pytest

_LINES: list[str] = []


class Verdict:
    """Collects one acceptance line; printed in the terminal summary."""

    def __init__(self, number: int, title: str):
        self.number, self.title = number, title
        self.t0 = time.perf_counter()

    def record(self, ok: bool, detail: str) -> None:
        dt = time.perf_counter() - self.t0
        status = "PASS" if ok else "FAIL"
        _LINES.append(f"[{status}] criterion {self.number} {self.title}: {detail} ({dt:.1f} s)")


@pytest.fixture
def verdict(request):
    marker = request.node.get_closest_marker("criterion")
    number, title = marker.args
    return Verdict(number, title)


def pytest_configure(config):
    config.addinivalue_line("markers", "criterion(number, title): acceptance criterion")


def pytest_terminal_summary(terminalreporter):
    if _LINES:
        terminalreporter.section("acceptance criteria")
        for line in sorted(_LINES, key=lambda s: int(s.split("criterion ")[1].split()[0])):
            terminalreporter.write_line(line)
