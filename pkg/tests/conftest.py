import numpy as np
import pytest

from epp_susy import acceptance
from epp_susy import reference_model as ref


@pytest.fixture
def model4():
    return ref.ChannelModel(acceptance.REF_A)


@pytest.fixture
def spec4():
    return acceptance.reference_spec(4.5j)


@pytest.fixture
def rng():
    return np.random.default_rng(12345)
