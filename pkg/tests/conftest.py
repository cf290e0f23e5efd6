import numpy as np
import pytest

from kobakit.domains import (
    ConvexSupport,
    Egg,
    Intersection,
    Polydisk,
    PsiSupported,
    UnitBall,
    UnitDisk,
)


@pytest.fixture(scope="session")
def disk():
    return UnitDisk()


@pytest.fixture(scope="session")
def ball2():
    return UnitBall(2)


@pytest.fixture(scope="session")
def ball3():
    return UnitBall(3)


@pytest.fixture(scope="session")
def polydisk2():
    return Polydisk([1.0, 1.0])


@pytest.fixture(scope="session")
def egg12():
    return Egg([1.0, 2.0])


@pytest.fixture(scope="session")
def ball2_as_convex():
    return ConvexSupport(2, ball=(np.zeros(2), 1.0))


@pytest.fixture(scope="session")
def ball_lens():
    a = ConvexSupport(2, ball=(np.array([-0.3, 0.0]), 1.0))
    b = ConvexSupport(2, ball=(np.array([0.3, 0.0]), 1.0))
    return Intersection(a, b, witness=np.zeros(2))


@pytest.fixture(scope="session")
def psi05():
    return PsiSupported(0.5)


def random_disk_points(rng, n, rmax=0.95):
    r = rng.uniform(0.0, rmax, n)
    phi = rng.uniform(0.0, 2 * np.pi, n)
    return (r * np.exp(1j * phi))[:, None]


def random_ball_points(rng, n, d=2, rmax=0.95):
    raw = rng.standard_normal((n, 2 * d))
    raw /= np.linalg.norm(raw, axis=1, keepdims=True)
    radii = rmax * rng.uniform(0.0, 1.0, n) ** (1.0 / (2 * d))
    pts = raw * radii[:, None]
    return pts[:, :d] + 1j * pts[:, d:]


def random_directions(rng, n, d=1):
    raw = rng.standard_normal((n, 2 * d))
    raw /= np.linalg.norm(raw, axis=1, keepdims=True)
    return raw[:, :d] + 1j * raw[:, d:]
