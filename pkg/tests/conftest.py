import math

import numpy as np
import pytest

from multiramsey import SpinRotationSpec, osrs_protocol

CHI_STAR = 0.2774 * math.pi


@pytest.fixture
def spin1_protocol():
    """Spin-1 rotation protocol: input and reference |F=1, m=0>."""
    return osrs_protocol(SpinRotationSpec(1, CHI_STAR, 0, 0))


@pytest.fixture
def rng():
    return np.random.default_rng(20240611)


ACCEPTANCE_LINES: list[str] = []


@pytest.fixture
def report():
    """Record one PASS/FAIL line per acceptance criterion."""

    def emit(number, ok, detail, seconds):
        line = f"criterion {number}: {'PASS' if ok else 'FAIL'} ({seconds:.2f} s) {detail}"
        ACCEPTANCE_LINES.append(line)
        print(line)
        return ok

    return emit


def pytest_terminal_summary(terminalreporter):
    if ACCEPTANCE_LINES:
        terminalreporter.section("acceptance criteria")
        for line in ACCEPTANCE_LINES:
            terminalreporter.write_line(line)
