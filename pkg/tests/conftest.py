import pytest

from orbitile.substitution import make_system


@pytest.fixture(scope="session")
def unit2():
    return make_system("bin", {"0": "00"})


@pytest.fixture(scope="session")
def unit3():
    return make_system("tri", {"0": "000"})


@pytest.fixture(scope="session")
def unit4():
    return make_system("quad", {"0": "0000"})


@pytest.fixture(scope="session")
def fib():
    return make_system("fib", {"a": "ab", "b": "a"})


@pytest.fixture(scope="session")
def abaab():
    return make_system("abaab", {"A": "AB", "B": "AAB"})


@pytest.fixture(scope="session")
def abb():
    # variant with the other figure-caption growth rate, (3+sqrt 5)/2
    return make_system("abb", {"A": "AB", "B": "ABB"})


@pytest.fixture(scope="session")
def pq55():
    from orbitile.pq import pq_substitution

    return pq_substitution(5, 5)
