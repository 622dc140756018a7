import math

import pytest

from qcert.gausspoly import build_fock_superposition, build_fock_wigner, build_gaussian, mix

_ACCEPTANCE_LINES = []


@pytest.fixture
def acceptance_report():
    """Record one summary line per acceptance criterion."""

    def report(criterion, passed, detail):
        status = "PASS" if passed else "FAIL"
        _ACCEPTANCE_LINES.append(f"[{status}] criterion {criterion}: {detail}")

    return report


def pytest_terminal_summary(terminalreporter):
    if _ACCEPTANCE_LINES:
        terminalreporter.section("acceptance criteria")
        for line in _ACCEPTANCE_LINES:
            terminalreporter.write_line(line)


@pytest.fixture
def vacuum():
    return build_fock_wigner(0)


@pytest.fixture
def fock1():
    return build_fock_wigner(1)


def probe_states():
    """States used by the oracle-equivalence checks."""
    states = {f"fock{n}": build_fock_wigner(n) for n in range(6)}
    states["squeezed_0.25"] = build_gaussian(0.25, 4.0)
    states["superposition"] = build_fock_superposition([1 / math.sqrt(2), 1 / math.sqrt(2)])
    return states


def vacuum_fock_mixture(eps):
    return mix([(build_fock_wigner(0), 1.0 - eps), (build_fock_wigner(1), eps)])
