from fractions import Fraction

import pytest

from blasius_cert import inner as ic
from blasius_cert import quasi, report


@pytest.fixture(scope="session")
def base_inner():
    return quasi.build_inner(0)


@pytest.fixture(scope="session")
def base_residual(base_inner):
    return ic.residual_poly(base_inner)


@pytest.fixture(scope="session")
def base_cert(base_inner):
    return ic.certify_inner_base(base_inner)


@pytest.fixture(scope="session")
def base_report():
    return report.certify(0, continuity=True)


@pytest.fixture(scope="session")
def family_cert():
    """Bounds valid uniformly over alpha; the slowest stage of the suite."""
    return ic.certify_inner_family()


@pytest.fixture(scope="session")
def family_report(family_cert):
    # family_uniform reuses the cached per-cell work behind family_cert
    return report.family_uniform()


@pytest.fixture(scope="session")
def alpha_edge():
    return Fraction(3, 50)


_VERDICTS = pytest.StashKey[dict]()


@pytest.fixture
def verdict(request, capsys):
    """Record and print one PASS/FAIL line for an acceptance criterion."""
    store = request.config.stash.setdefault(_VERDICTS, {})

    def record(n: int, title: str, ok: bool, detail: str = "") -> bool:
        line = f"criterion {n:2d} {'PASS' if ok else 'FAIL'}  {title}" + (f"  [{detail}]" if detail else "")
        store[n] = line
        with capsys.disabled():
            print("\n" + line)
        return ok

    return record


def pytest_terminal_summary(terminalreporter, exitstatus, config):
    store = config.stash.get(_VERDICTS, {})
    if store:
        terminalreporter.section("acceptance criteria")
        for n in sorted(store):
            terminalreporter.write_line(store[n])
