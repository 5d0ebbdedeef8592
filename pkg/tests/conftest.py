import pytest

from georev.spheroid import solve_for_geodesic

_CACHE = {}


def solved_case(N, eps):
    """Session-wide memoized spheroid solves (solution, surface, trace)."""
    key = (N, eps)
    if key not in _CACHE:
        _CACHE[key] = solve_for_geodesic(N, eps)
    return _CACHE[key]


@pytest.fixture(scope="session")
def case_n3_e02():
    return solved_case(3, 0.2)


@pytest.fixture(scope="session")
def case_n3_e01():
    return solved_case(3, 0.1)


@pytest.fixture(scope="session")
def case_n4_e02():
    return solved_case(4, 0.2)


@pytest.fixture(scope="session")
def case_n4_e01():
    return solved_case(4, 0.1)
