import shutil
from pathlib import Path

import pytest

SAMPLE_DIR = Path(__file__).resolve().parents[1] / "src" / "ricalign" / "data" / "sample"

_acceptance: list[tuple[str, str]] = []


@pytest.fixture
def sample_dir(tmp_path) -> Path:
    """A private copy of the bundled sample, so caches and reports land in tmp."""
    dst = tmp_path / "sample"
    shutil.copytree(SAMPLE_DIR, dst, ignore=shutil.ignore_patterns("work", "report"))
    return dst


def pytest_runtest_logreport(report):
    if report.when != "call" and not (report.when == "setup" and report.failed):
        return
    if "test_acceptance.py" not in report.nodeid:
        return
    _acceptance.append((report.nodeid.split("::")[-1], "PASS" if report.passed else "FAIL"))


def pytest_terminal_summary(terminalreporter):
    if not _acceptance:
        return
    terminalreporter.section("acceptance criteria")
    for name, outcome in _acceptance:
        terminalreporter.write_line(f"[{outcome}] {name}")
