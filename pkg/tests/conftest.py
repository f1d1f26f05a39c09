"""Shared test configuration and the acceptance-criterion summary.

Tests named ``test_criterion_NN_*`` (in ``test_acceptance.py``) are tracked
individually; after the run, one PASS/FAIL line per numbered criterion is
printed with the accumulated runtime, so the acceptance status is readable
at a glance.
"""

from __future__ import annotations

import re

CRITERIA = {
    1: "symmetric-unitary entry fourth moments at d=2 and d=5 (1e6 draws, 5 sem)",
    2: "symmetric-unitary order-1 twirl closed form at d=3 (1e5 draws, 5 sem)",
    3: "channel-weight fits for all seven quotient families (1e6 draws, 5 sem)",
    4: "sector eigenvalue identities (d<=64) and spectrum vs superoperator (1e-10)",
    5: "exact channel equivariance under 100 signed symmetries + negative control",
    6: "sampled-moment subgroup equivariance, AI d=3 and AIII d=4 (1e5, 5 sem)",
    7: "estimator unbiasedness for every family at d=4 (1e5 shots, 5 sem)",
    8: "closed-form second moment vs empirical variance at d=8 (5%)",
    9: "variance advantage at d=32 and the group-variance ratio window",
    10: "pair-partition counts equal (2k-1)!! for k<=6",
    11: "degenerate block collapse: identity ensemble and exact dephasing",
    12: "d=2 point clouds: uniform for the group, non-uniform for the quotient",
}

_PATTERN = re.compile(r"test_criterion_(\d+)")
_tracker: dict[int, dict] = {}


def pytest_runtest_logreport(report):
    match = _PATTERN.search(report.nodeid)
    if match is None:
        return
    num = int(match.group(1))
    record = _tracker.setdefault(num, {"failed": False, "skipped": False, "duration": 0.0})
    record["duration"] += getattr(report, "duration", 0.0)
    if report.failed:
        record["failed"] = True
    if report.skipped:
        record["skipped"] = True


def pytest_terminal_summary(terminalreporter, exitstatus, config):
    if not _tracker:
        return
    terminalreporter.section("acceptance criteria")
    for num in sorted(_tracker):
        record = _tracker[num]
        if record["failed"]:
            status = "FAIL"
        elif record["skipped"]:
            status = "SKIP"
        else:
            status = "PASS"
        title = CRITERIA.get(num, "")
        terminalreporter.write_line(
            f"[{status}] criterion {num:02d}: {title} ({record['duration']:.1f}s)"
        )
