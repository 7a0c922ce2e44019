import numpy as np
import pytest

from glyphnet.persistence import LETTERS
from glyphnet.synthgen import reference_glyph


def to_gray(bits):
    return np.where(np.asarray(bits) == 1, 0, 255).astype(np.uint8)


@pytest.fixture(scope="session")
def template_grays():
    return {letter: to_gray(reference_glyph(letter)) for letter in LETTERS}


# Criterion verdicts collected by test_acceptance.py, one line each.
CRITERIA: list[str] = []


def pytest_terminal_summary(terminalreporter):
    if CRITERIA:
        terminalreporter.section("acceptance criteria")
        for line in CRITERIA:
            terminalreporter.write_line(line)
