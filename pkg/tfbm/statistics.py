"""ACVF, DMA and TAMSD statistics and their quadratic-form matrices.

Each statistic takes a single path of length N or an (M, N) batch and
returns a float or an array of M values. The matrices satisfy
x A x^T == statistic(x) exactly; DMA acts on the detrended vector.
"""
from dataclasses import dataclass
from enum import Enum

import numpy as np
from numpy.lib.stride_tricks import sliding_window_view

from tfbm import settings
from tfbm.covariance import CovarianceMatrix, Meaning
from tfbm.errors import ParameterError


class StatisticKind(str, Enum):
    ACVF = 'acvf'
    DMA = 'dma'
    TAMSD = 'tamsd'


@dataclass(frozen=True)
class StatisticSpec:
    kind: StatisticKind
    tau: int = None

    def __post_init__(self):
        try:
            kind = StatisticKind(self.kind)
        except ValueError:
            raise ParameterError(f'unknown statistic {self.kind!r}') from None
        object.__setattr__(self, 'kind', kind)
        tau = settings.DEFAULT_TAU[kind.value] if self.tau is None else self.tau
        if int(tau) != tau:
            raise ParameterError(f'lag must be an integer, got tau={tau}')
        object.__setattr__(self, 'tau', int(tau))
        self.validate()

    def lag_range(self, n=None):
        if self.kind is StatisticKind.ACVF:
            return 0, None if n is None else n - 1
        if self.kind is StatisticKind.TAMSD:
            return 1, None if n is None else n - 1
        return 2, n

    def validate(self, n=None):
        lo, hi = self.lag_range(n)
        if self.tau < lo or (hi is not None and self.tau > hi):
            bound = f'{lo} <= tau' if hi is None else f'{lo} <= tau <= {hi}'
            raise ParameterError(f'{self.kind.value.upper()} lag out of range: need {bound}, got tau={self.tau}')
        return self

    def __str__(self):
        return f'{self.kind.value}(tau={self.tau})'


@dataclass(frozen=True, eq=False)
class QuadraticFormMatrix:
    entries: np.ndarray
    statistic: StatisticSpec

    @property
    def n_effective(self):
        return self.entries.shape[0]


def _as_batch(x):
    x = np.asarray(x, dtype=float)
    if x.ndim not in (1, 2):
        raise ParameterError(f'expected a path or a batch of paths, got an array of shape {x.shape}')
    return np.atleast_2d(x), x.ndim == 1


def _finish(values, single):
    return float(values[0]) if single else values


def acvf_stat(x, tau):
    xs, single = _as_batch(x)
    n = xs.shape[1]
    StatisticSpec(StatisticKind.ACVF, tau).validate(n)
    values = np.einsum('ij,ij->i', xs[:, tau:], xs[:, :n - tau]) / (n - tau)
    return _finish(values, single)


def acvf_matrix(n, tau):
    stat = StatisticSpec(StatisticKind.ACVF, tau).validate(n)
    if tau == 0:
        return QuadraticFormMatrix(np.eye(n) / n, stat)
    entries = 0.5 / (n - tau) * (np.eye(n, k=tau) + np.eye(n, k=-tau))
    return QuadraticFormMatrix(entries, stat)


def tamsd_stat(x, tau):
    xs, single = _as_batch(x)
    n = xs.shape[1]
    StatisticSpec(StatisticKind.TAMSD, tau).validate(n)
    disp = xs[:, tau:] - xs[:, :n - tau]
    return _finish(np.einsum('ij,ij->i', disp, disp) / (n - tau), single)


def displacement_operator(n, tau):
    """(N - tau) x N matrix D with (D x)(i) = x(i + tau) - x(i)."""
    return np.eye(n - tau, n, k=tau) - np.eye(n - tau, n)


def tamsd_matrix(n, tau):
    stat = StatisticSpec(StatisticKind.TAMSD, tau).validate(n)
    d = displacement_operator(n, tau)
    # diagonal counts how often x(j)^2 enters the displacement sum
    return QuadraticFormMatrix(d.T @ d / (n - tau), stat)


def detrend_operator(n, tau):
    """(N - tau + 1) x N matrix T with Y = T x the detrended path."""
    StatisticSpec(StatisticKind.DMA, tau).validate(n)
    rows = n - tau + 1
    window = sum(np.eye(rows, n, k=j) for j in range(tau))
    return np.eye(rows, n, k=tau - 1) - window / tau


def detrend(x, tau):
    """Y(i) = x(i + tau - 1) minus the trailing mean over x(i..i + tau - 1)."""
    xs, single = _as_batch(x)
    StatisticSpec(StatisticKind.DMA, tau).validate(xs.shape[1])
    windows = sliding_window_view(xs, tau, axis=1)
    y = windows[..., -1] - windows.mean(axis=-1)
    return y[0] if single else y


def dma_stat(x, tau):
    xs, single = _as_batch(x)
    y = detrend(xs, tau)
    return _finish(np.einsum('ij,ij->i', y, y) / y.shape[1], single)


def dma_matrix(n, tau):
    stat = StatisticSpec(StatisticKind.DMA, tau).validate(n)
    rows = n - tau + 1
    return QuadraticFormMatrix(np.eye(rows) / rows, stat)


def detrended_covariance(sigma, tau):
    """T Sigma T^T for a process-levels covariance."""
    if sigma.meaning is not Meaning.PROCESS_LEVELS:
        raise ParameterError(f'detrending needs a process-levels covariance, got {sigma.meaning.value}')
    t = detrend_operator(sigma.n, tau)
    entries = t @ sigma.entries @ t.T
    entries = 0.5 * (entries + entries.T)
    return CovarianceMatrix(entries, Meaning.DETRENDED, sigma.spec, sigma.dt)


_STATISTICS = {
    StatisticKind.ACVF: (acvf_stat, acvf_matrix),
    StatisticKind.DMA: (dma_stat, dma_matrix),
    StatisticKind.TAMSD: (tamsd_stat, tamsd_matrix),
}


def statistic_matrix(stat, n):
    return _STATISTICS[stat.kind][1](n, stat.tau)


def evaluate(stat, x):
    return _STATISTICS[stat.kind][0](x, stat.tau)
