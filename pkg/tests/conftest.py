import math
import sys
from pathlib import Path

import pytest

from caqrp.context import EnergyState, KinematicState, PeerProfile, QueryVector, QueueState

sys.path.insert(0, str(Path(__file__).parent))

REPO_ROOT = Path(__file__).resolve().parent.parent

# Worked example: five neighbors scored on
# (Psim, Stability s, Rengy J, Load).
WORKED_X = [
    [0.9, 12, 90, 0.2],
    [1.0, 40, 85, 0.1],
    [0.5, 34, 60, 0.7],
    [0.1, 60, 70, 0.6],
    [0.3, 50, 10, 0.8],
]
WORKED_R = [
    [0.612, 0.469, 0.582, 0.161],
    [0.680, 0.375, 0.550, 0.081],
    [0.340, 0.319, 0.388, 0.564],
    [0.068, 0.563, 0.453, 0.483],
    [0.204, 0.469, 0.065, 0.645],
]
WORKED_V = [
    [0.144, 0.258, 0.057, 0.019],
    [0.160, 0.206, 0.054, 0.009],
    [0.080, 0.175, 0.038, 0.066],
    [0.016, 0.310, 0.044, 0.057],
    [0.048, 0.258, 0.006, 0.075],
]
WORKED_A = [
    [1, 1 / 5, 3, 3],
    [5, 1, 5, 3],
    [1 / 3, 1 / 5, 1, 1],
    [1 / 3, 1 / 3, 1, 1],
]
WORKED_W = (0.235, 0.55, 0.098, 0.117)
WORKED_KINDS = ("benefit", "benefit", "benefit", "cost")
NEIGHBORS = ("n1", "n2", "n3", "n4", "n5")


@pytest.fixture
def canonical_path():
    return REPO_ROOT / "scenarios" / "canonical.ini"


def worked_neighbors():
    """Five neighbors whose features reproduce the worked-example matrix."""
    q = QueryVector({"a": 1.0}, qid="probe")
    profile = PeerProfile()
    for i, psim in enumerate(c[0] for c in WORKED_X):
        # one stored query at cosine ``psim`` to q
        profile.record_answer(f"n{i + 1}", QueryVector({"a": psim, "z": math.sqrt(1 - psim**2)}, qid=i))
    # receding radially from the origin: (R - d) / v seconds of link left
    geometry = [(40, 5), (20, 2), (32, 2), (40, 1), (50, 1)]
    loads = [(10, 50), (5, 50), (35, 50), (30, 50), (40, 50)]
    neighbors = []
    for i, ((d, v), (n, s), row) in enumerate(zip(geometry, loads, WORKED_X)):
        neighbors.append(
            (f"n{i + 1}", profile, KinematicState(d, 0, v, 0), EnergyState(row[2], 100.0), QueueState(n, s))
        )
    return q, neighbors


# (number, passed, detail) for each acceptance criterion, filled in by
# test_acceptance.py and printed after the run.
ACCEPTANCE_RESULTS: list[tuple[int, bool, str]] = []


def pytest_terminal_summary(terminalreporter):
    if not ACCEPTANCE_RESULTS:
        return
    terminalreporter.section("acceptance criteria")
    for number, passed, detail in sorted(ACCEPTANCE_RESULTS):
        terminalreporter.write_line(f"criterion {number:2d}: {'PASS' if passed else 'FAIL'}  {detail}")
