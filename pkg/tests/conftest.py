import pytest

from boxpoints.forms import parse_form


@pytest.fixture
def conic():
    return parse_form("x1^2 + x2^2 - x3^2")


@pytest.fixture
def cusp():
    return parse_form("x1^2*x3 - x2^3")
