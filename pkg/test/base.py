__all__ = [
    "BaseTest",
    "does_not_raise",
]

from contextlib import nullcontext as does_not_raise

import numpy as np
from aibs_informatics_test_resources import BaseTest as _BaseTest


class BaseTest(_BaseTest):
    maxDiff: int | None = None

    def assertAllClose(self, actual, expected, rtol: float = 1e-7, atol: float = 0.0):
        np.testing.assert_allclose(actual, expected, rtol=rtol, atol=atol)
