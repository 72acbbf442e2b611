import json

import pytest

from ilssumm.instance import Instance, Shot


def make_instance(features, durations, budget, name="A", metric="euclidean"):
    shots = tuple(
        Shot(f"s{k}", float(t), tuple(float(v) for v in f))
        for k, (f, t) in enumerate(zip(features, durations))
    )
    return Instance(name, shots, budget, metric)


@pytest.fixture
def instance_a():
    """4 shots on a line at 0, 1, 4, 5 with durations 2, 3, 2, 3 and budget 5."""
    return make_instance([[0], [1], [4], [5]], [2, 3, 2, 3], 5.0)


@pytest.fixture
def instance_a_file(tmp_path):
    doc = {
        "name": "A",
        "budget_seconds": 5.0,
        "shots": [
            {"id": f"s{k}", "duration_seconds": t, "features": [x]}
            for k, (x, t) in enumerate(zip([0, 1, 4, 5], [2, 3, 2, 3]))
        ],
    }
    path = tmp_path / "A.json"
    path.write_text(json.dumps(doc))
    return path


# one line per acceptance criterion, repeated in the terminal summary
ACCEPTANCE_LINES: list[str] = []


def pytest_terminal_summary(terminalreporter):
    if ACCEPTANCE_LINES:
        terminalreporter.section("acceptance criteria")
        for line in sorted(ACCEPTANCE_LINES, key=lambda s: int(s.split()[2].rstrip(":"))):
            terminalreporter.write_line(line)
