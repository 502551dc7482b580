"""One test per acceptance criterion; each prints a single PASS/FAIL line."""
import os
import subprocess
import sys
import tempfile

import pytest

from riemann_kdv import acceptance


def _run(n):
    result = acceptance.CHECKS[n]()
    print(result.line())
    assert result.passed, result.line()


@pytest.mark.parametrize("n", range(1, 13), ids=lambda n: f"{n:02d}-{acceptance.TITLES[n].replace(' ', '_')}")
def test_criterion(n):
    _run(n)


def test_criterion_13_reproducible_check_reports():
    # two concurrent processes, each writing its own report
    with tempfile.TemporaryDirectory() as a, tempfile.TemporaryDirectory() as b:
        env = dict(os.environ)
        procs = [subprocess.Popen([sys.executable, "-m", "riemann_kdv", "check", "--output-dir", d],
                                  stdout=subprocess.DEVNULL, stderr=subprocess.PIPE, env=env)
                 for d in (a, b)]
        codes = [p.wait() for p in procs]
        reports = []
        for d in (a, b):
            with open(os.path.join(d, "check_report.json"), "rb") as fh:
                reports.append(fh.read())
    result = acceptance.compare_reports(*reports)
    result.metrics["exit_codes"] = codes
    print(result.line())
    assert result.passed and codes == [0, 0], result.line()
