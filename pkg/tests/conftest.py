"""Shared fixtures plus a terminal summary for acceptance-marked tests."""

import pytest

from changerisk.ingest import parse_change_requests, parse_revision_log

_ACCEPTANCE_RESULTS = []


@pytest.hookimpl(hookwrapper=True)
def pytest_runtest_makereport(item, call):
    outcome = yield
    rep = outcome.get_result()
    marker = item.get_closest_marker("acceptance")
    if marker and rep.when == "call":
        label = marker.kwargs.get("label", item.name)
        _ACCEPTANCE_RESULTS.append((label, rep.passed))


def pytest_terminal_summary(terminalreporter, exitstatus):
    if not _ACCEPTANCE_RESULTS:
        return
    terminalreporter.section("acceptance criteria")
    for label, passed in _ACCEPTANCE_RESULTS:
        terminalreporter.write_line(
            f"{'PASS' if passed else 'FAIL'}  {label}")


CR_LINES = b"""\
{"id": "CR-1", "short": "Fix crash in parser", "long": "segfault on empty input"}
{"id": "CR-2", "short": "Add support for themes", "long": "new feature for the ui module"}
{"id": "CR-3", "short": "Refactor renaming of config module", "long": ""}
{"id": "CR-4", "short": "Fix error in import of library", "long": "dependency resolution bug"}
{"id": "CR-5", "short": "Port build to new compiler", "long": "upgrade toolchain", "kind_hint": "bug"}
"""

REV_LINES = b"""\
{"rev": "r1", "block": "src/parser.c", "ts": "2015-03-01T10:00:00Z", "msg": "work on CR-1", "crs": ["CR-1"]}
{"rev": "r2", "block": "src/parser.c", "ts": "2015-03-02T10:00:00Z", "msg": "more work on CR-1", "crs": ["CR-1"]}
{"rev": "r3", "block": "src/ui.c", "ts": "2015-03-03T10:00:00Z", "msg": "theme support for CR-2", "crs": ["CR-2"]}
{"rev": "r4", "block": "src/config.c", "ts": "2015-03-04T10:00:00Z", "msg": "rename pass, CR-3", "crs": ["CR-3"]}
{"rev": "r5", "block": "src/config.c", "ts": "2015-03-05T10:00:00Z", "msg": "second rename pass, CR-3", "crs": ["CR-3"]}
{"rev": "r6", "block": "src/deps.c", "ts": "2015-03-06T10:00:00Z", "msg": "CR-4 loader fix", "crs": ["CR-4"]}
{"rev": "r7", "block": "src/deps.c", "ts": "2015-03-07T10:00:00Z", "msg": "CR-4 cleanup", "crs": ["CR-4"]}
{"rev": "r8", "block": "src/build.c", "ts": "2015-03-08T10:00:00Z", "msg": "toolchain work CR-5", "crs": ["CR-5"]}
{"rev": "r9", "block": "src/parser.c", "ts": "2015-03-09T10:00:00Z", "msg": "shared fix CR-1 and CR-4", "crs": ["CR-1", "CR-4"]}
"""


@pytest.fixture
def small_requests():
    return parse_change_requests(CR_LINES)


@pytest.fixture
def small_revisions():
    return parse_revision_log(REV_LINES)
