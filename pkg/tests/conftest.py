import math

import numpy as np
import pytest

from solgeo.frame import CoordVector, Point, SQRT2


@pytest.fixture
def rng():
    return np.random.default_rng(20240811)


def horizontal_velocity(p: Point, theta: float) -> CoordVector:
    """Unit horizontal vector cos(theta) X + sin(theta) Y at p, in coordinates."""
    return CoordVector(
        -math.sin(theta) * math.exp(p.z) / SQRT2,
        math.sin(theta) * math.exp(-p.z) / SQRT2,
        math.cos(theta),
    )


def random_point(rng, scale=1.5) -> Point:
    x, y, z = rng.uniform(-scale, scale, 3)
    return Point(float(x), float(y), float(z))
