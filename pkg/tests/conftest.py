import os
import re

import pytest
from hypothesis import HealthCheck, settings

from somekawa.localfield import FieldDesc

settings.register_profile("default", max_examples=60, deadline=None, suppress_health_check=[HealthCheck.too_slow])
settings.register_profile("ci", max_examples=200, deadline=None, suppress_health_check=[HealthCheck.too_slow])
settings.load_profile(os.environ.get("HYPOTHESIS_PROFILE", "default"))

FIELDS = [
    FieldDesc(7),
    FieldDesc(7, 2, 1),
    FieldDesc(7, 2, -1),
    FieldDesc(11, 2, -1),
    FieldDesc(23, 2, 1, precision=16),
]


@pytest.fixture(params=FIELDS, ids=lambda fd: fd.describe())
def fd(request):
    return request.param


def pytest_collection_modifyitems(config, items):
    for item in items:
        mark = item.get_closest_marker("criterion")
        if mark is not None:
            item.user_properties.append(("criterion", mark.args[0]))
    if os.environ.get("SOMEKAWA_EXTENDED") == "1":
        return
    skip = pytest.mark.skip(reason="set SOMEKAWA_EXTENDED=1 to run hours-long table reproductions")
    for item in items:
        if "extended" in item.keywords:
            item.add_marker(skip)


_criteria: dict[str, list] = {}


def pytest_runtest_logreport(report):
    label = dict(report.user_properties).get("criterion")
    if label is None:
        return
    entry = _criteria.setdefault(label, [None, 0.0])
    entry[1] += report.duration
    if report.when != "call" and report.passed:
        return
    status = "SKIP" if report.skipped else ("PASS" if report.passed else "FAIL")
    if entry[0] != "FAIL":
        entry[0] = status


def pytest_terminal_summary(terminalreporter):
    if not _criteria:
        return
    terminalreporter.section("acceptance criteria")
    for label in sorted(_criteria, key=lambda s: (int(re.match(r"\d+", s).group()), s)):
        status, seconds = _criteria[label]
        terminalreporter.write_line(f"{status or 'FAIL'}  criterion {label}  ({seconds:.1f}s)")
