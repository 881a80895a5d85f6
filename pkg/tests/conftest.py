import pytest

from topicforge.linkindex import build_index

from helpers import TOY_EDGES


@pytest.fixture(scope="session")
def toy_index():
    return build_index(TOY_EDGES)
