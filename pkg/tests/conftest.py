import random

import pytest

from superspecial import cm_uniformization as cm
from superspecial import quaternion_core as qc


@pytest.fixture(scope="session")
def order():
    return qc.build_maximal_order()


@pytest.fixture(scope="session")
def table_poly():
    """P_D from the bundled table (recomputed if missing)."""
    return lambda D: cm.get_heegner_poly(D, 60, use_table=True, max_doublings=5)


@pytest.fixture
def rng():
    return random.Random(20240601)
