import sys
from pathlib import Path

import numpy as np
import pytest

sys.path.insert(0, str(Path(__file__).parent))  # make `oracles` importable

import pilotwave as pw


@pytest.fixture(scope="session")
def canonical_params() -> pw.ModelParams:
    return pw.ModelParams()


@pytest.fixture(scope="session")
def orbit_solution(canonical_params):
    sols = pw.solve_orbit(canonical_params)
    assert len(sols) == 1
    return sols[0]


def count_modes(pdf, smooth: int = 5, floor_frac: float = 0.1) -> int:
    """Local maxima of the lightly smoothed density above a noise floor."""
    sm = np.convolve(pdf.density, np.ones(smooth) / smooth, mode="same")
    thr = floor_frac * sm.max()
    cnt = 0
    for i in range(1, len(sm) - 1):
        if sm[i] > thr and sm[i] >= sm[i - 1] and sm[i] > sm[i + 1]:
            cnt += 1
    return cnt


_criterion_lines: list[str] = []


def record_criterion(num: int, ok: bool, detail: str) -> None:
    """Collect one pass/fail line per acceptance criterion; the lines are
    echoed in the terminal summary so they survive output capture."""
    line = f"criterion {num:2d}: {'PASS' if ok else 'FAIL'}  {detail}"
    _criterion_lines.append(line)
    print(line)


def pytest_terminal_summary(terminalreporter, exitstatus, config):
    if _criterion_lines:
        terminalreporter.section("acceptance criteria")
        for line in sorted(_criterion_lines):
            terminalreporter.write_line(line)
