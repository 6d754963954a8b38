import numpy as np
import pytest

from spinqudit import DimerParams, SingleIonParams

# Fitted parameter sets used across the suite (Kelvin, dimensionless g).
LAGD = SingleIonParams(d_zfs=0.096, e_zfs=-0.032, g=1.99, s=3.5)
GDLU = SingleIonParams(d_zfs=0.115, e_zfs=0.038, g=1.99, s=3.5)
GD2 = DimerParams(site1=LAGD, site2=GDLU, j_exchange=-0.02)

DIAGONAL = tuple(np.array([1.0, 1.0, 1.0]) / np.sqrt(3.0))
DRIVE = tuple(np.array([1.0, -1.0, 0.0]) / np.sqrt(2.0))


@pytest.fixture
def lagd():
    return LAGD


@pytest.fixture
def gdlu():
    return GDLU


@pytest.fixture
def gd2():
    return GD2
