"""Built-in property suites and their reporting."""

import pytest

from k3heights import GramLattice
from k3heights.errors import InputError
from k3heights.verify import (
    SUITE_NAMES,
    first_failure,
    report_json,
    run_suites,
)


def test_all_suites_pass():
    results = run_suites(SUITE_NAMES)
    assert set(results) == set(SUITE_NAMES)
    assert first_failure(results) is None
    for checks in results.values():
        assert checks
        for c in checks:
            assert c.passed, f"{c.name}: {c.detail}"


def test_report_json_shape():
    results = run_suites(("lattice",))
    data = report_json(results)
    assert data["passed"] is True
    names = [c["name"] for c in data["suites"]["lattice"]]
    assert "generator-isometry" in names
    for c in data["suites"]["lattice"]:
        assert set(c) == {"name", "passed", "detail", "seconds"}


def test_broken_lattice_is_caught():
    # perturbing one Gram entry keeps the signature but breaks the
    # generators' isometry property
    broken = GramLattice(((0, 2, 2), (2, 0, 2), (2, 2, 1)))
    results = run_suites(("lattice",), lattice=broken)
    failure = first_failure(results)
    assert failure is not None
    suite, check = failure
    assert suite == "lattice" and check.name == "generator-isometry"
    assert not report_json(results)["passed"]


def test_unknown_suite_rejected():
    with pytest.raises(InputError):
        run_suites(("nonsense",))
