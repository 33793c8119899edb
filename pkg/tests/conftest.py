import sys
from pathlib import Path

import pytest

sys.path.insert(0, str(Path(__file__).parent))

from helpers import example_set  # noqa: E402

from uncoreset.ranges import HalfLine  # noqa: E402


@pytest.fixture
def example_P():
    return example_set()


@pytest.fixture
def example_T(example_P):
    return example_P.subset([1, 3, 5, 7, 9])


@pytest.fixture
def example_r():
    # holds p_{5,2} (rank 13) and everything smaller, not p_{10,2} (rank 14)
    return HalfLine(13.5)
