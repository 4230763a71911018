import re
import sys
from pathlib import Path

import pytest

sys.path.insert(0, str(Path(__file__).parent))

from gkminer.graph import graph_from_text  # noqa: E402
from gkminer.synth import FIG1_NT, FIG3_NT  # noqa: E402


@pytest.fixture(scope="session")
def g1():
    return graph_from_text(FIG1_NT)


@pytest.fixture(scope="session")
def fig3():
    return graph_from_text(FIG3_NT)


@pytest.fixture
def n(g1):
    """Name -> node id lookup on G1."""
    return g1.node


# -- acceptance report: one line per criterion ------------------------------

_AC = re.compile(r"test_ac(\d+)_")
_results: dict[int, list[tuple[str, str]]] = {}


def pytest_runtest_logreport(report):
    m = _AC.search(report.nodeid)
    if not m or "test_acceptance" not in report.nodeid:
        return
    if report.when == "call" or (report.when == "setup" and report.outcome != "passed"):
        if hasattr(report, "wasxfail"):
            outcome = "xfail"
        else:
            outcome = report.outcome
        _results.setdefault(int(m.group(1)), []).append((report.nodeid.split("::")[-1], outcome))


def pytest_terminal_summary(terminalreporter):
    if not _results:
        return
    tr = terminalreporter
    tr.section("acceptance criteria")
    for ac in sorted(_results):
        outcomes = _results[ac]
        failed = [name for name, o in outcomes if o in ("failed", "xfail")]
        skipped = [name for name, o in outcomes if o == "skipped"]
        if failed:
            status = "FAIL"
        elif skipped:
            status = "SKIP"
        else:
            status = "PASS"
        detail = f"{len(outcomes)} test(s)"
        if failed:
            detail += "; not met: " + ", ".join(failed)
        tr.write_line(f"AC{ac}: {status} ({detail})")
