"""Shared fixtures: curves and band sets are immutable, so build them once."""

import numpy as np
import pytest

from loopspec import (
    EllipseProfile,
    FourierProfile,
    band,
    build_boundary,
    cosine_profile,
)


@pytest.fixture(scope="session")
def disk():
    return build_boundary(FourierProfile(cos=[0.0]), tau=0.0)


@pytest.fixture(scope="session")
def ellipse01():
    return build_boundary(EllipseProfile(0.1))


@pytest.fixture(scope="session")
def ellipse005():
    return build_boundary(EllipseProfile(0.05))


@pytest.fixture(scope="session")
def ellipse002():
    return build_boundary(EllipseProfile(0.02))


@pytest.fixture(scope="session")
def cos3_curve():
    """Resonant 3-mode deformation, well inside the perturbative regime."""
    return build_boundary(cosine_profile(3, 0.01), tau=1.0)


@pytest.fixture(scope="session")
def cos5_quarter():
    """5-mode deformation at a quarter of its family size."""
    return build_boundary(cosine_profile(5, 0.02), tau=0.25)


@pytest.fixture(scope="session")
def ellipse_bands(ellipse01, ellipse005, ellipse002):
    """Bands q = 2..26 for the three test ellipses, keyed by eccentricity."""
    curves = {0.1: ellipse01, 0.05: ellipse005, 0.02: ellipse002}
    return {
        ecc: [band(curve, q) for q in range(2, 27)]
        for ecc, curve in curves.items()
    }


@pytest.fixture(scope="session")
def cos5_quarter_bands(cos5_quarter):
    return [band(cos5_quarter, q) for q in range(2, 8)]


def grid_norm(values, reference):
    return float(np.max(np.abs(np.asarray(values) - reference)))
