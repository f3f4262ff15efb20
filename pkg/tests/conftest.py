import re
import sys
from pathlib import Path

sys.path.insert(0, str(Path(__file__).parent))

_CRITERIA = {}


def pytest_configure(config):
    config.addinivalue_line("markers", "criterion(label): acceptance criterion covered by this test")


def pytest_runtest_logreport(report):
    if report.when != "call" and not (report.when == "setup" and report.outcome != "passed"):
        return
    label = dict(report.user_properties).get("criterion")
    if label is None:
        m = re.search(r"test_criterion_(\d+)", report.nodeid)
        if m is None:
            return
        label = m.group(1)
    parts = dict(report.user_properties).get("parts", "")
    _CRITERIA[label] = ("PASS" if report.passed else "FAIL", parts)


def pytest_terminal_summary(terminalreporter):
    if not _CRITERIA:
        return
    terminalreporter.section("acceptance criteria")
    for label in sorted(_CRITERIA, key=lambda s: int(s)):
        status, parts = _CRITERIA[label]
        terminalreporter.write_line(f"criterion {label}: {status}" + (f"  ({parts})" if parts else ""))
