import pytest

from kljnlab import AmplifierModel, ChannelModel, NoiseSpec, ResistorPair

ACCEPTANCE_LINES: list[str] = []


@pytest.fixture
def spec():
    return NoiseSpec()


@pytest.fixture
def pair():
    return ResistorPair(1e3, 1e4)


@pytest.fixture
def identity():
    return AmplifierModel(), ChannelModel()


@pytest.fixture
def report():
    """Record one acceptance line; printed in the terminal summary."""

    def _report(criterion: str, ok: bool, detail: str):
        line = f"[{'PASS' if ok else 'FAIL'}] {criterion}: {detail}"
        ACCEPTANCE_LINES.append(line)
        print(line)
        return ok

    return _report


def pytest_terminal_summary(terminalreporter):
    if ACCEPTANCE_LINES:
        terminalreporter.section("acceptance criteria")
        for line in ACCEPTANCE_LINES:
            terminalreporter.write_line(line)
