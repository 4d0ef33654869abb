import os

from hypothesis import HealthCheck, settings

settings.register_profile("default", deadline=None, suppress_health_check=[HealthCheck.too_slow])
settings.register_profile("ci", max_examples=200, deadline=None, suppress_health_check=[HealthCheck.too_slow])
settings.load_profile(os.environ.get("HYPOTHESIS_PROFILE", "default"))

# criterion number -> list of (check name, passed, detail); filled by test_acceptance
ACCEPTANCE: dict[int, list[tuple[str, bool, str]]] = {}


def pytest_terminal_summary(terminalreporter):
    if not ACCEPTANCE:
        return
    terminalreporter.section("acceptance criteria")
    for n in sorted(ACCEPTANCE):
        checks = ACCEPTANCE[n]
        ok = all(passed for _, passed, _ in checks)
        failed = [f"{name}: {detail}" for name, passed, detail in checks if not passed]
        summary = "; ".join(failed) if failed else ", ".join(name for name, _, _ in checks)
        terminalreporter.write_line(f"criterion {n:2d}: {'PASS' if ok else 'FAIL'}  {summary}")
