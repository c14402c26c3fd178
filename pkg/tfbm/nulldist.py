"""Weighted chi-square null law of a Gaussian quadratic form.

If X ~ N(0, Sigma) then X A X^T has the law of sum_i lambda_i U_i with
U_i iid chi-square(1) and lambda_i the eigenvalues of
Sigma^{1/2} A Sigma^{1/2}.
"""
from dataclasses import dataclass
from typing import Any, Optional

import numpy as np

from tfbm import settings
from tfbm.errors import NumericalDegeneracyError, ParameterError
from tfbm.simulate import rng_stream

logger = settings.logger


@dataclass(frozen=True, eq=False)
class NullSpectrum:
    eigenvalues: np.ndarray
    # (ProcessSpec, StatisticSpec, n) the spectrum was built for, if known
    source: Optional[Any] = None

    @property
    def mean(self):
        return float(self.eigenvalues.sum())

    @property
    def variance(self):
        return float(2 * np.square(self.eigenvalues).sum())


@dataclass(frozen=True)
class AcceptanceRegion:
    lower: float
    upper: float
    significance: float
    sample_count: int

    def contains(self, value):
        return self.lower <= value <= self.upper

    def scaled(self, factor):
        return AcceptanceRegion(self.lower * factor, self.upper * factor, self.significance, self.sample_count)


def _entries(m):
    return np.asarray(getattr(m, 'entries', m), dtype=float)


def psd_sqrt(sigma):
    """Symmetric PSD square root through an eigendecomposition."""
    w, v = np.linalg.eigh(sigma)
    if w[0] < -settings.PSD_TOL * max(w[-1], 0.0):
        raise NumericalDegeneracyError(
            f'null covariance is not positive semidefinite: smallest eigenvalue {w[0]:.3e}, largest {w[-1]:.3e}')
    return (v * np.sqrt(np.clip(w, 0.0, None))) @ v.T


def qf_eigenvalues(sigma, a, source=None):
    """Spectrum of Sigma^{1/2} A Sigma^{1/2}, largest first."""
    sigma, a = _entries(sigma), _entries(a)
    if sigma.shape != a.shape or sigma.shape[0] != sigma.shape[1]:
        raise ParameterError(f'covariance {sigma.shape} and statistic matrix {a.shape} do not match')
    root = psd_sqrt(sigma)
    b = root @ a @ root
    eigenvalues = np.linalg.eigvalsh(0.5 * (b + b.T))[::-1]
    return NullSpectrum(eigenvalues.copy(), source)


def sample_null(spectrum, draws, seed, key=()):
    """`draws` samples of sum_i lambda_i Z_i^2, drawn in fixed-size keyed blocks."""
    if draws < 1:
        raise ParameterError(f'number of null draws must be positive, got {draws}')
    weights = np.asarray(spectrum.eigenvalues, dtype=float)
    block = settings.NULL_BLOCK_SIZE
    out = np.empty(draws)
    for b, start in enumerate(range(0, draws, block)):
        stop = min(start + block, draws)
        z = rng_stream(seed, *key, b).standard_normal((block, weights.size))[:stop - start]
        out[start:stop] = np.square(z) @ weights
    return out


def acceptance_region(samples, c):
    """[Q_{c/2}, Q_{1-c/2}] by linear interpolation between order statistics."""
    if not 0 < c < 1:
        raise ParameterError(f'significance must lie in (0, 1), got c={c}')
    samples = np.asarray(samples, dtype=float)
    if samples.size == 0:
        raise ParameterError('acceptance region needs at least one null sample')
    lower, upper = np.quantile(samples, [c / 2, 1 - c / 2])
    return AcceptanceRegion(float(lower), float(upper), float(c), int(samples.size))
