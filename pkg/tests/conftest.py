import os

from hypothesis import HealthCheck, settings

settings.register_profile("default", deadline=None, max_examples=60,
                          suppress_health_check=[HealthCheck.too_slow])
settings.register_profile("thorough", deadline=None, max_examples=500)
settings.load_profile(os.environ.get("HYPOTHESIS_PROFILE", "default"))


# --- acceptance summary ---------------------------------------------------
# Tests marked ``criterion(n, text)`` get one PASS/FAIL line in the terminal
# summary; details recorded with ``record_property("detail", ...)`` are appended.

_criteria: dict[str, tuple] = {}
_results: dict[str, tuple[str, str]] = {}


def pytest_collection_modifyitems(items):
    for item in items:
        mark = item.get_closest_marker("criterion")
        if mark:
            _criteria[item.nodeid] = mark.args


def pytest_runtest_logreport(report):
    if report.nodeid not in _criteria:
        return
    detail = dict(report.user_properties).get("detail", "")
    if report.failed:
        _results[report.nodeid] = ("FAIL", detail)
    elif report.skipped:
        _results[report.nodeid] = ("SKIP", detail)
    elif report.when == "call" and report.nodeid not in _results:
        _results[report.nodeid] = ("PASS", detail)


def pytest_terminal_summary(terminalreporter):
    if not _results:
        return
    terminalreporter.section("acceptance criteria")
    for nodeid, (number, text) in sorted(_criteria.items(), key=lambda kv: kv[1][0]):
        if nodeid in _results:
            status, detail = _results[nodeid]
            line = f"criterion {number:2d}: {status}  {text}"
            terminalreporter.write_line(line + (f"  [{detail}]" if detail else ""))
