from __future__ import annotations

import pytest

from equicorr.scenarios import build_scenario

_acceptance_lines: list[str] = []


@pytest.fixture(scope="session")
def acceptance():
    """Recorder for the acceptance suite: one pass/fail line per criterion."""

    def record(criterion: str, passed: bool, detail: str = "") -> None:
        status = "PASS" if passed else "FAIL"
        suffix = f"  ({detail})" if detail else ""
        _acceptance_lines.append(f"{status}  {criterion}{suffix}")
        assert passed, f"{criterion}: {detail}"

    return record


def pytest_terminal_summary(terminalreporter, exitstatus, config):
    if _acceptance_lines:
        terminalreporter.section("acceptance criteria")
        for line in _acceptance_lines:
            terminalreporter.write_line(line)


@pytest.fixture(scope="session")
def dihedral4():
    return build_scenario("dihedral(4)")


@pytest.fixture(scope="session")
def dihedral4_sign():
    return build_scenario("dihedral(4, bundle=sign)")


@pytest.fixture(scope="session")
def cyclic8():
    return build_scenario("cyclic(8)")


@pytest.fixture(scope="session")
def torus8():
    return build_scenario("torus(8)")


@pytest.fixture(scope="session")
def bands16():
    return build_scenario("torus-bands(16)")
