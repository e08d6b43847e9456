import numpy as np
import pytest

from sneakpath.ira import IraProfile, build_graph
from sneakpath.tables import TABLE1


def table_profile(name, **kw):
    row = TABLE1[name]
    return IraProfile(row.rate, row.dc, row.degrees, lam=row.lam, **kw)


@pytest.fixture(scope="session")
def row1_profile():
    return table_profile("table1-row1")


@pytest.fixture(scope="session")
def row1_graph(row1_profile):
    return build_graph(row1_profile, 128 * 128, seed=0)


@pytest.fixture
def rng():
    return np.random.default_rng(12345)
