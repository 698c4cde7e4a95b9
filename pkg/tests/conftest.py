import numpy as np
import pytest

import puccilab as pl

PI = np.pi


@pytest.fixture(scope="session")
def canonical_domain():
    return pl.Interval(0.0, PI)


@pytest.fixture(scope="session")
def canonical_bounds(canonical_domain):
    return pl.BoundFields(canonical_domain, pl.ScalarField.constant(2.0),
                          pl.ScalarField.constant(8.0))


@pytest.fixture(scope="session")
def grid2000(canonical_domain):
    return pl.make_grid(canonical_domain, 2000)


@pytest.fixture(scope="session")
def star_pair(canonical_bounds, grid2000):
    return pl.principal_eig_pucci(canonical_bounds, grid2000)


@pytest.fixture(scope="session")
def c_theta():
    return pl.CovarianceField.scalar(pl.ScalarField.constant(2.0))


@pytest.fixture(scope="session")
def linear_pair(c_theta, grid2000):
    return pl.principal_eig_linear(c_theta, grid2000)
