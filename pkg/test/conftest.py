import os
from unittest import mock

import pytest

from vpgen.main import VPGEN_OUT_KEY


@pytest.fixture(scope="function", autouse=True)
def clear_output_override():
    """Keep a shell-level VPGEN_OUT from redirecting test outputs."""
    with mock.patch.dict(os.environ):
        os.environ.pop(VPGEN_OUT_KEY, None)
        yield
