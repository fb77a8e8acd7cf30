from pathlib import Path

import pytest

from lscsim.corpus import read_corpus

DATA = Path(__file__).parent / "data"

# Table 2/3 sentences as they should appear after extraction, keyed by fixture sentence id.
PLANT_LINES = {
    "plant.1": "this reduce the number of expensive plant shutdown and startup",
    "plant.2": "the pilot plant was equip with a 3 hp turbine aerator figure 2",
    "plant.3": "remove about half the branch from each plant leave only the strong with the largest bud",
    "plant.4": "on the side toward the horizon the southern hemisphere it be spring plant are being teach to grow",
    "plant.5": "can you share medical facility and staff with neighboring plant",
}


@pytest.fixture
def plant_path():
    return DATA / "plant.tsv"


@pytest.fixture
def plant(plant_path):
    return read_corpus(plant_path)


# -- acceptance reporting -----------------------------------------------------

_ACCEPTANCE: list[tuple[str, str, str]] = []


def pytest_configure(config):
    config.addinivalue_line("markers", "criterion(name): acceptance criterion reported in the summary")


@pytest.hookimpl(hookwrapper=True)
def pytest_runtest_makereport(item, call):
    outcome = yield
    report = outcome.get_result()
    marker = item.get_closest_marker("criterion")
    if marker is None:
        return
    if report.when == "call" or (report.when == "setup" and report.outcome != "passed"):
        detail = ""
        if report.failed:
            detail = str(report.longrepr.reprcrash.message).splitlines()[0] if hasattr(report.longrepr, "reprcrash") else "error"
        _ACCEPTANCE.append((marker.args[0], "PASS" if report.passed else ("SKIP" if report.skipped else "FAIL"), detail))


def pytest_terminal_summary(terminalreporter):
    if not _ACCEPTANCE:
        return
    terminalreporter.section("acceptance criteria")
    for name, status, detail in _ACCEPTANCE:
        terminalreporter.write_line(f"{status}  {name}" + (f"  ({detail})" if detail else ""))
