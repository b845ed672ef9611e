import os
import sys
from fractions import Fraction as F

import numpy as np
import pytest

sys.path.insert(0, os.path.join(os.path.dirname(__file__), "..", "src"))

from lkq import polytope as poly  # noqa: E402

FIXTURES = os.path.join(os.path.dirname(__file__), "..", "fixtures")


def fixture_path(name):
    return os.path.join(FIXTURES, name)


def square():
    return poly.box([1, 1])


def trapezoid():
    return poly.LabelledPolytope([
        poly.AffineFunction(F(0), (F(1), F(0))),
        poly.AffineFunction(F(1), (F(-1), F(0))),
        poly.AffineFunction(F(0), (F(0), F(1))),
        poly.AffineFunction(F(2), (F(-1), F(-1))),
    ], grouping=((0, 1), (2, 3)))


def simplex2():
    return poly.product_of_simplices([2])


def interval():
    return poly.box([1])


@pytest.fixture
def rng():
    return np.random.default_rng(0)
