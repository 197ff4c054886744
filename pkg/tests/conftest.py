import pytest

from helpers import CC


@pytest.fixture
def cc_available():
    if CC is None:
        pytest.skip("no C compiler available")
    return CC
