import numpy as np
import pytest

from ftqec.noise import LehmerBatch, TrialContext, trial_seeds

# Codeword lists as printed for |0_L> and |1_L>.
ZERO_L_LISTED = (
    "0000000", "0001111", "0110011", "0111100",
    "1010101", "1011010", "1100110", "1101001",
)
ONE_L_LISTED = (
    "1111111", "1110000", "1001100", "1000011",
    "0101010", "0100101", "0011001", "0010110",
)


def make_ctx(n, seed=1, start=0, multiplier=16807):
    rng = LehmerBatch(trial_seeds(seed, start, n), multiplier)
    return TrialContext(np.arange(start, start + n), rng)


@pytest.fixture
def ctx_factory():
    return make_ctx


ACCEPTANCE_LINES: list[str] = []


@pytest.fixture
def verdict():
    """Record one PASS/FAIL line for an acceptance criterion, then assert."""

    def record(number: int, ok: bool, detail: str) -> None:
        line = f"criterion {number}: {'PASS' if ok else 'FAIL'} - {detail}"
        ACCEPTANCE_LINES.append(line)
        print(line)
        assert ok, line

    return record


def pytest_terminal_summary(terminalreporter):
    if ACCEPTANCE_LINES:
        terminalreporter.section("acceptance criteria")
        for line in sorted(ACCEPTANCE_LINES, key=lambda s: int(s.split()[1].rstrip(":"))):
            terminalreporter.write_line(line)
