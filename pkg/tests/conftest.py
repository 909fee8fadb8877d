import pytest

from chowcalc.cache import Cache
from chowcalc.chowring import ChowRing

_REPORT = []


def report(number, ok, detail=""):
    """Record one acceptance line; printed again in the terminal summary."""
    line = f"ACCEPTANCE {number}: {'PASS' if ok else 'FAIL'}" + (f"  {detail}" if detail else "")
    _REPORT.append(line)
    print(line)
    return ok


def pytest_terminal_summary(terminalreporter):
    if _REPORT:
        terminalreporter.section("acceptance criteria")
        for line in sorted(_REPORT):
            terminalreporter.write_line(line)


@pytest.fixture(scope="session")
def cache(tmp_path_factory):
    return Cache(tmp_path_factory.mktemp("chowcalc-cache"))


def _ring(cache, spec, parabolic, **kw):
    return ChowRing(spec, parabolic, cache=cache, **kw)


@pytest.fixture(scope="session")
def f4p1(cache):
    return _ring(cache, "F4", "P1")


@pytest.fixture(scope="session")
def f4p4(cache):
    return _ring(cache, "F4", "P4")


@pytest.fixture(scope="session")
def e6p1(cache):
    return _ring(cache, "E6", "P1")


@pytest.fixture(scope="session")
def e7p7(cache):
    return _ring(cache, "E7", "P7")


@pytest.fixture(scope="session")
def e8p8(cache):
    return _ring(cache, "E8", "P8")
