import pytest


@pytest.fixture
def anyio_backend() -> str:
    # trio is not installed.
    return "asyncio"
