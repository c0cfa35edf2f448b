import pytest

from polypath.parser import parse_input_file

CIRCLES = """
vars x, y;
f1 = x^2 + y^2 - 1;
f2 = (x - 1)^2 + y^2 - 1;
"""

CIRCLE_LINE = """
vars x, y;
f1 = x^2 + y^2 - 1;
f2 = x - y;
"""

FAMILY = """
vars x, y;
params a, b, c;
f1 = a*x^2 + b*y^2 - c;
f2 = y;
"""

SPHERE_LINE = """
vars x, y, z;
f1 = (y^2 + x^2 + z^2 - 1)*x;
f2 = (y^2 + x^2 + z^2 - 1)*y;
"""

QUADRICS = """
vars x, y, z;
projective;
f1 = y^2 - 4*z^2;
f2 = 16*x^2 - y^2;
"""

CONIC_POINT = """
vars x, y, z;
projective;
f1 = (x^2 + y^2 - z^2)*(z - x);
f2 = (x^2 + y^2 - z^2)*(z + y);
"""

XY_LINES = """
vars x, y;
f1 = x*y;
"""


def _system(text):
    return parse_input_file(text).system


@pytest.fixture(scope="session")
def circles():
    return _system(CIRCLES)


@pytest.fixture(scope="session")
def circle_line():
    return _system(CIRCLE_LINE)


@pytest.fixture(scope="session")
def family():
    return _system(FAMILY)


@pytest.fixture(scope="session")
def sphere_line():
    return _system(SPHERE_LINE)


@pytest.fixture(scope="session")
def quadrics():
    return _system(QUADRICS)


@pytest.fixture(scope="session")
def conic_point():
    return _system(CONIC_POINT)


@pytest.fixture(scope="session")
def xy_lines():
    return _system(XY_LINES)
