from __future__ import annotations

import math

import pytest

from flux_catastrophe.potential import gaussian_bump_with_flux, zero_potential


@pytest.fixture(scope="session")
def bump_quarter_pi():
    """Gaussian bump whose total flux is exactly pi/4 (so delta = pi/4, n = 0)."""
    return gaussian_bump_with_flux(math.pi / 4)


@pytest.fixture(scope="session")
def zero_pot():
    return zero_potential()
