import pathlib
import sys

import numpy as np
import numpy.typing as npt

if sys.version_info < (3, 11):
    from typing_extensions import *  # noqa: F403
else:
    from typing import *  # noqa: F403


PathLike = TypeVar('PathLike', str, pathlib.Path)
"""
Type hint for path-like objects.
"""

Seed = int
"""
A 64-bit unsigned integer seed of a :class:`szt.core.RandomSource`.
"""

RealArray = npt.NDArray[np.float64]
"""
Array of double-precision reals (weights, gradients, activations).
"""

CodeArray = npt.NDArray[np.uint8]
"""
Array of 2-bit code word patterns, one pattern per element (see :class:`szt.core.TernaryCode`).
"""

ArrayLike = npt.ArrayLike
"""
Anything that :func:`numpy.asarray` accepts.
"""
