import pytest

from wtparse.profile import builtin_profile_path, load_profile


@pytest.fixture(scope="session")
def hebrew():
    return load_profile(builtin_profile_path("hebrew"))


@pytest.fixture(scope="session")
def translit():
    return load_profile(builtin_profile_path("translit"))


def pytest_terminal_summary(terminalreporter, exitstatus, config):
    """Print one PASS/FAIL line per acceptance criterion at the end."""
    lines = []
    for outcome in ("passed", "failed", "error"):
        for report in terminalreporter.stats.get(outcome, []):
            if getattr(report, "when", "call") != "call":
                continue
            marker = report.keywords.get("acceptance")
            if not marker and "test_acceptance" not in report.nodeid:
                continue
            name = None
            for prop_name, prop_value in getattr(report, "user_properties", []):
                if prop_name == "criterion":
                    name = prop_value
            if name is None:
                continue
            verdict = "PASS" if outcome == "passed" else "FAIL"
            lines.append((name, verdict))
    if lines:
        terminalreporter.section("acceptance criteria")
        for name, verdict in lines:
            terminalreporter.write_line(f"{verdict}  {name}")
