import json

import pytest

from hurwitz_lab.cli import main

# filled by the acceptance tests, printed at the end of the session
CRITERION_LINES: dict = {}


@pytest.fixture(scope="session")
def validate_run(tmp_path_factory):
    """One full `hurwitz-lab validate` run (criterion 12 reruns the suite inside it)."""
    d = tmp_path_factory.mktemp("validate")
    report, js, timings = d / "report.txt", d / "results.json", d / "timings.json"
    code = main(["validate", "--cache-dir", str(d / "cache"), "-o", str(report), "--json", str(js),
                 "--timings", str(timings)])
    rows = {r["id"]: r for r in json.loads(js.read_text())}
    return {"exit_code": code, "rows": rows, "timings": json.loads(timings.read_text()),
            "report": report.read_text()}


def pytest_runtest_logreport(report):
    if report.when != "call":
        return
    props = dict(report.user_properties)
    if "criterion" in props:
        status = "PASS" if report.passed else "FAIL"
        CRITERION_LINES[props["criterion"]] = f"criterion {props['criterion']:>3}: {status}  {props.get('detail', '')}"


def pytest_terminal_summary(terminalreporter):
    if not CRITERION_LINES:
        return
    terminalreporter.section("acceptance criteria")
    order = ["1", "2", "3", "4", "5", "6", "6g", "7", "8", "9", "10", "11", "12"]
    for cid in sorted(CRITERION_LINES, key=lambda c: order.index(c) if c in order else len(order)):
        terminalreporter.write_line(CRITERION_LINES[cid])
