"""Shared test configuration.

The terminal-summary hook prints one PASS/FAIL line per acceptance
criterion (tests named test_criterion_* in test_acceptance.py), plus any
measurement notes the criteria recorded.
"""

ACCEPTANCE_NOTES = {}


def record_note(criterion, text):
    ACCEPTANCE_NOTES[criterion] = text


def pytest_terminal_summary(terminalreporter, exitstatus, config):
    entries = {}
    for outcome in ("passed", "failed", "error"):
        for report in terminalreporter.stats.get(outcome, []):
            if getattr(report, "when", "call") != "call":
                continue
            nodeid = report.nodeid
            if "test_acceptance.py" not in nodeid or "test_criterion" not in nodeid:
                continue
            name = nodeid.split("::")[-1]
            entries[name] = "PASS" if outcome == "passed" else "FAIL"
    if not entries:
        return
    terminalreporter.write_sep("-", "acceptance criteria")
    for name in sorted(entries):
        line = f"{entries[name]}  {name}"
        note = ACCEPTANCE_NOTES.get(name)
        if note:
            line += f"  [{note}]"
        terminalreporter.write_line(line)
