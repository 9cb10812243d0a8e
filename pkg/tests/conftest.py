import pytest

from traverse_lab.acceptance import Context
from traverse_lab.field_expr import VectorField
from traverse_lab.flow_sim import Domain2D, strata


@pytest.fixture(scope="session")
def ctx():
    c = Context(seed=0)
    c.warm()  # boundary tracing is shared setup, not part of any criterion's budget
    return c


@pytest.fixture(scope="session")
def disk():
    d = Domain2D("1 - x^2 - y^2", (-1.5, 1.5, -1.5, 1.5), name="disk")
    v = VectorField("1", "0")
    return d, v, strata(d, v)


@pytest.fixture(scope="session")
def annulus():
    d = Domain2D("(4 - x^2 - y^2)*(x^2 + y^2 - 1)", (-2.5, 2.5, -2.5, 2.5), name="annulus")
    v = VectorField("1", "0")
    return d, v, strata(d, v)
