"""Prints one PASS/FAIL line per acceptance criterion at the end of the run."""

import re

_CRITERION = re.compile(r"test_acceptance\.py::test_criterion_(\d+)_(\w+)")


def pytest_terminal_summary(terminalreporter):
    rows = []
    for outcome in ("passed", "failed", "error"):
        for rep in terminalreporter.stats.get(outcome, []):
            m = _CRITERION.search(getattr(rep, "nodeid", ""))
            if m and rep.when == "call":
                detail = dict(rep.user_properties).get("detail", "")
                rows.append((int(m.group(1)), m.group(2), outcome == "passed", detail))
    if not rows:
        return
    terminalreporter.section("acceptance criteria")
    for num, name, ok, detail in sorted(rows):
        line = f"[{'PASS' if ok else 'FAIL'}] criterion {num:2d} {name.replace('_', ' ')}"
        terminalreporter.write_line(f"{line}  {detail}" if detail else line)
