import pytest
from hypothesis import settings

from treecocycle import RegularTree

settings.register_profile("default", max_examples=60, deadline=None)
settings.load_profile("default")


@pytest.fixture(params=[2, 3, 4], ids=lambda q: f"q{q}")
def tree(request):
    return RegularTree(request.param)


@pytest.fixture
def t2():
    return RegularTree(2)


@pytest.fixture
def t3():
    return RegularTree(3)
