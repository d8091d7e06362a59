import sys
from pathlib import Path

import pytest

from mwrc.distribution import identical, independent_bits, xor_triple
from mwrc.rates import ChannelSpec

sys.path.insert(0, str(Path(__file__).parent))

PROBLEMS = Path(__file__).resolve().parent.parent / "problems"


@pytest.fixture
def xor():
    return xor_triple()


@pytest.fixture
def ident():
    return identical(3)


@pytest.fixture
def indep():
    return independent_bits(3)


@pytest.fixture
def gf2():
    return ChannelSpec.noiseless(2, 3)


@pytest.fixture
def problems_dir():
    return PROBLEMS
