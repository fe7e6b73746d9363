import re
from collections import OrderedDict

CRITERIA = OrderedDict([
    ("ac1", "XX completeness, L=6 and 8"),
    ("ac2", "critical number boundary at XX"),
    ("ac3", "real/complex counts, k=1,2,3, L=12"),
    ("ac4", "single RealToShifted jump near pi/4, k=2"),
    ("ac5", "particle-hole duality, L=8"),
    ("ac6", "XXX limit, k=1, L=8"),
    ("ac7", "dispersion, L=64 and 128"),
    ("ac8", "null state at the XXX point"),
    ("ac9", "property suites"),
])

_results: dict = {}


def pytest_runtest_logreport(report):
    if "test_acceptance.py" not in report.nodeid:
        return
    m = re.search(r"::test_(ac\d)_", report.nodeid)
    if not m:
        return
    key = m.group(1)
    failed = report.failed
    passed = report.passed and report.when == "call"
    rec = _results.setdefault(key, {"passed": 0, "failed": 0})
    if failed:
        rec["failed"] += 1
    elif passed:
        rec["passed"] += 1


def pytest_terminal_summary(terminalreporter):
    if not _results:
        return
    tr = terminalreporter
    tr.section("acceptance criteria")
    for key, label in CRITERIA.items():
        rec = _results.get(key)
        if rec is None:
            tr.write_line(f"{key.upper():<4} NOT RUN  {label}")
            continue
        status = "FAIL" if rec["failed"] else "PASS"
        n = rec["passed"] + rec["failed"]
        tr.write_line(f"{key.upper():<4} {status:<8} {label} ({rec['passed']}/{n} cases)")
