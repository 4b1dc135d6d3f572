import numpy as np
import pytest

from ridgekit.geometry import builtin


@pytest.fixture
def rng():
    return np.random.default_rng(12345)


@pytest.fixture(scope="session")
def specs():
    return {
        "disc": builtin("disc"),
        "ellipse": builtin("ellipse"),
        "disc_halfplane": builtin("disc_halfplane"),
        "graph_power": builtin("graph_power"),
        "parabola": builtin("graph_piecewise_parabola"),
        "polyline": builtin("polyline"),
    }


def circle_samples(n, R=1.0):
    th = 2 * np.pi * np.arange(n) / n
    return R * np.stack([np.cos(th), np.sin(th)], axis=1)
