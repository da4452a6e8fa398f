import pytest

SWARM_CFG = """\
seed = 1
scenario.kind = swarm
scenario.num_frames = 12
scenario.num_targets = 4
scenario.spacing = 40
filter.clutter_rate = 2
filter.num_particles = 100
"""


@pytest.fixture
def swarm_cfg(tmp_path):
    p = tmp_path / "swarm.cfg"
    p.write_text(SWARM_CFG)
    return p


# acceptance criteria report one line each at the end of the run
ACCEPTANCE: dict[int, tuple[bool, str]] = {}


@pytest.fixture
def criterion(request):
    """Record ``(passed, detail)`` for an acceptance criterion number."""

    def record(number: int, passed: bool, detail: str) -> None:
        ACCEPTANCE[number] = (passed, detail)
        print(f"criterion {number}: {'PASS' if passed else 'FAIL'} - {detail}")

    return record


def pytest_terminal_summary(terminalreporter):
    if not ACCEPTANCE:
        return
    terminalreporter.section("acceptance criteria")
    for n in sorted(ACCEPTANCE):
        passed, detail = ACCEPTANCE[n]
        terminalreporter.write_line(f"criterion {n}: {'PASS' if passed else 'FAIL'} - {detail}")
