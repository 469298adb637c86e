import os

from hypothesis import HealthCheck, settings

settings.register_profile("frlab", derandomize=True, max_examples=60, deadline=None, suppress_health_check=[HealthCheck.too_slow])
settings.load_profile(os.environ.get("HYPOTHESIS_PROFILE", "frlab"))

_ACCEPTANCE: dict[str, tuple[str, float, str]] = {}


def pytest_runtest_logreport(report):
    if "test_acceptance.py::test_criterion_" not in report.nodeid:
        return
    if report.when == "call" or (report.when == "setup" and report.outcome != "passed"):
        msg = ""
        if report.failed:
            msg = str(getattr(report.longrepr, "reprcrash", None) and report.longrepr.reprcrash.message or "").splitlines()[0][:120]
        _ACCEPTANCE[report.nodeid] = ("PASS" if report.passed else "FAIL", report.duration, msg)


def pytest_terminal_summary(terminalreporter):
    if not _ACCEPTANCE:
        return
    terminalreporter.section("acceptance criteria")
    for nodeid in sorted(_ACCEPTANCE):
        verdict, secs, msg = _ACCEPTANCE[nodeid]
        name = nodeid.rsplit("::", 1)[1][len("test_criterion_"):]
        line = f"criterion {name[:2]} {verdict} [{secs:.1f}s] {name[3:].replace('_', ' ')}"
        terminalreporter.write_line(line + (f" :: {msg}" if msg else ""))
