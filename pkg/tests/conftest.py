def pytest_terminal_summary(terminalreporter):
    lines = []
    for key in ("passed", "failed"):
        for rep in terminalreporter.stats.get(key, []):
            if rep.when != "call":
                continue
            props = dict(rep.user_properties)
            if "criterion" in props:
                lines.append((props["criterion"], key, props))
    if not lines:
        return
    terminalreporter.section("acceptance criteria")
    for n, outcome, props in sorted(lines):
        status = "PASS" if outcome == "passed" else "FAIL"
        terminalreporter.write_line(
            f"criterion {n:2d}: {status}  {props['title']}  "
            f"({props.get('elapsed', float('nan')):.1f} s, budget {props['budget']} s)")
