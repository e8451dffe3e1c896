import numpy as np
import pytest

from paraqd import EncoderModel, StubProvider, analyze, default_lexicon
from paraqd.augment import OpContext

Q0_TEXT = ("Alex travelled 100 km from New York at a constant speed of "
           "20 kmph. How many hours did it take him in total?")


@pytest.fixture(scope="session")
def lexicon():
    return default_lexicon()


@pytest.fixture(scope="session")
def q0(lexicon):
    return analyze(Q0_TEXT, lexicon)


@pytest.fixture()
def stub():
    return StubProvider()


@pytest.fixture()
def toy_encoder():
    return EncoderModel.init(d=32, n_buckets=1 << 12, seed=7)


@pytest.fixture()
def ctx(stub, toy_encoder):
    return OpContext(provider=stub, encoder=toy_encoder, seed=11)


@pytest.fixture()
def rng():
    return np.random.default_rng(0)
