import re
import time
from pathlib import Path

import pytest

from aquaduct.scenario import load_config, run_scenario

REFERENCE_CONFIG = Path(__file__).resolve().parent.parent / "scenarios" / "reference.yaml"


@pytest.fixture(scope="session")
def reference_run(tmp_path_factory):
    """One full reference-scenario pipeline shared by the acceptance tests."""
    outdir = tmp_path_factory.mktemp("reference_run")
    config = load_config(REFERENCE_CONFIG)
    start = time.monotonic()
    report = run_scenario(config, outdir)
    elapsed = time.monotonic() - start
    return {"config": config, "report": report, "outdir": outdir, "elapsed": elapsed}


def pytest_terminal_summary(terminalreporter, exitstatus, config):
    """One visible pass/fail line per acceptance criterion."""
    results = {}
    for outcome in ("passed", "failed", "error"):
        for report in terminalreporter.stats.get(outcome, []):
            nodeid = getattr(report, "nodeid", "")
            match = re.search(r"test_acceptance\.py::test_criterion_(\d+)", nodeid)
            if match and getattr(report, "when", "call") == "call":
                n = int(match.group(1))
                results[n] = "PASS" if outcome == "passed" else "FAIL"
    if results:
        terminalreporter.write_sep("-", "acceptance criteria")
        for n in sorted(results):
            terminalreporter.write_line(f"criterion {n}: {results[n]}")
