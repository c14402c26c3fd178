from dataclasses import dataclass
from typing import Optional

import numpy as np

from tfbm import settings
from tfbm.covariance import ProcessSpec
from tfbm.errors import InsufficientSampleError, ParameterError


@dataclass(frozen=True, eq=False)
class QuantileLines:
    probs: np.ndarray
    # lines[j, i] is the probs[j] quantile of the paths at time index i
    lines: np.ndarray
    spec: Optional[ProcessSpec] = None
    seed: Optional[int] = None
    dt: float = 1.0

    @property
    def times(self):
        return self.dt * np.arange(1, self.lines.shape[1] + 1)


def check_probs(probs):
    probs = np.asarray(probs, dtype=float)
    if probs.ndim != 1 or probs.size == 0:
        raise ParameterError('quantile levels must be a non-empty list')
    if np.any(probs <= 0) or np.any(probs >= 1):
        raise ParameterError(f'quantile levels must lie in (0, 1), got {probs.tolist()}')
    if np.any(np.diff(probs) <= 0):
        raise ParameterError(f'quantile levels must be strictly increasing, got {probs.tolist()}')
    return probs


def quantile_lines(batch, probs=settings.DEFAULT_PROBS):
    probs = check_probs(probs)
    if batch.m < settings.MIN_QUANTILE_PATHS:
        raise InsufficientSampleError(
            f'quantile lines need at least {settings.MIN_QUANTILE_PATHS} paths, got m={batch.m}')
    lines = np.quantile(batch.values, probs, axis=0)
    # interpolation rounding can break ties the wrong way
    lines = np.maximum.accumulate(lines, axis=0)
    return QuantileLines(probs, lines, batch.spec, batch.seed, batch.dt)
