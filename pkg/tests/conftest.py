import pytest

from gasadapt.network import GasParameters, Pipe


@pytest.fixture
def gas():
    return GasParameters()


@pytest.fixture
def test_pipe():
    # the canonical smooth subsonic test pipe used throughout the suite
    return Pipe(
        id="t",
        from_node="a",
        to_node="b",
        length=10000.0,
        diameter=0.6,
        friction=0.01,
    )
