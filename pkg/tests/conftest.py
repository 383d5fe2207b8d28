from functools import lru_cache

import pytest

from predissoc.model import (Interaction, SemiclassicalConfig, build_grids,
                             make_quadratic_pair, make_reference_pair)
from predissoc.scalar import scalar_solutions


@lru_cache(maxsize=None)
def reference_pair(x_star=-1.0, tau1=1.0, tau2=1.0):
    return make_reference_pair(x_star, tau1, tau2)


@lru_cache(maxsize=None)
def config(h):
    return SemiclassicalConfig(h=h)


@lru_cache(maxsize=None)
def grids(h, x_star=-1.0, tau1=1.0, tau2=1.0):
    return build_grids(reference_pair(x_star, tau1, tau2), config(h))


@lru_cache(maxsize=None)
def solutions(h, E=0.0, x_star=-1.0, tau1=1.0, tau2=1.0):
    pair = reference_pair(x_star, tau1, tau2)
    return scalar_solutions(pair, E, config(h), grids(h, x_star, tau1, tau2))


@pytest.fixture
def pair():
    return reference_pair()


@pytest.fixture
def quadratic():
    return make_quadratic_pair(-1.0)


@pytest.fixture
def unit_coupling():
    return Interaction.constant(1.0)


@pytest.fixture
def no_coupling():
    return Interaction.constant(0.0)
