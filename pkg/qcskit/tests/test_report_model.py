import numpy as np
import pytest

from qcskit.models.herm_model import diag
from qcskit.models.report_model import AuditReport, CheckResult, max_abs


@pytest.fixture
def report():
    """Fixture providing a report with one passing check and one passing child.

    """
    report = AuditReport("outer")
    report.add(CheckResult("first", True, residual=1e-15))
    child = AuditReport("inner")
    child.add(CheckResult("nested", True))
    report.children.append(child)
    return report


def test_status_pass(report):
    assert report.passed
    assert report.status == "pass"


def test_failure_in_child_fails_parent(report):
    report.child_named("inner").add(CheckResult("broken", False))
    assert not report.passed
    assert report.status == "fail"


def test_unresolved_only_when_nothing_failed(report):
    """Tests that an undecided check marks the report unresolved unless another check failed."""
    report.add(CheckResult("undecided", False, unresolved=True))
    assert report.status == "unresolved"
    report.add(CheckResult("broken", False))
    assert report.status == "fail"


def test_lookup_errors(report):
    with pytest.raises(KeyError, match="No check named"):
        report.check_named("missing")
    with pytest.raises(KeyError, match="No sub-report named"):
        report.child_named("missing")


def test_to_dict_layout(report):
    report.add(CheckResult("with-witness", False, residual=2.0, witness=diag(1, -1), point=diag(0, 1),
                           notes=["pairing -1"]))
    data = report.to_dict()
    assert data["report"] == "outer"
    assert data["status"] == "fail"
    check = data["checks"][1]
    assert check == {
        "check": "with-witness",
        "pass": False,
        "residual": 2.0,
        "witness": {"n": 2, "entries": [[[1.0, 0.0], [0.0, 0.0]], [[0.0, 0.0], [-1.0, 0.0]]]},
        "notes": ["pairing -1"],
        "point": {"n": 2, "entries": [[[0.0, 0.0], [0.0, 0.0]], [[0.0, 0.0], [1.0, 0.0]]]},
    }
    assert data["children"][0]["report"] == "inner"


def test_max_abs():
    assert max_abs(np.array([[1.0, -3.0]])) == 3.0
    assert max_abs(np.zeros(0)) == 0.0
