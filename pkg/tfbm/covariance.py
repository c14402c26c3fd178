"""Variance scales, covariance functions and covariance matrices of the
three tempered fractional Brownian motions and of plain FBM.

All kinds share Var(t) = process_variance(spec, t) and stationary
increments, so every covariance below is assembled from Var alone:

    Cov(s, t) = (Var(t) + Var(s) - Var(t - s)) / 2
"""
from dataclasses import dataclass, replace
from enum import Enum
from functools import lru_cache
import math
from typing import Optional

import mpmath
import numpy as np
from scipy.linalg import toeplitz

from tfbm import settings
from tfbm import specfun
from tfbm.errors import DomainError, NumericalDegeneracyError, ParameterError, PoleError

logger = settings.logger


class ProcessKind(str, Enum):
    TFBM_I = 'tfbm1'
    TFBM_II = 'tfbm2'
    TFBM_III = 'tfbm3'
    FBM = 'fbm'

    @property
    def label(self):
        return {
            'tfbm1': 'TFBM I',
            'tfbm2': 'TFBM II',
            'tfbm3': 'TFBM III',
            'fbm': 'FBM',
        }[self.value]


class Meaning(str, Enum):
    PROCESS_LEVELS = 'process_levels'
    INCREMENT_NOISE = 'increment_noise'
    DETRENDED = 'detrended'


@dataclass(frozen=True)
class ProcessSpec:
    kind: ProcessKind
    hurst: float
    lam: float = 0.0
    # kind III only: read lam as the crossover time tau* instead of its inverse
    lambda_is_tau_star: bool = False

    def __post_init__(self):
        try:
            kind = ProcessKind(self.kind)
        except ValueError:
            choices = ', '.join(k.value for k in ProcessKind)
            raise ParameterError(f'unknown process kind {self.kind!r} (choose from {choices})') from None
        object.__setattr__(self, 'kind', kind)
        object.__setattr__(self, 'hurst', float(self.hurst))
        object.__setattr__(self, 'lam', float(self.lam))

        H, lam = self.hurst, self.lam
        if not math.isfinite(H) or not math.isfinite(lam):
            raise ParameterError(f'{kind.label}: parameters must be finite')
        if kind is ProcessKind.FBM:
            if not 0 < H < 1:
                raise ParameterError(f'FBM requires 0 < H < 1, got H={H}')
            return
        if not lam > 0:
            raise ParameterError(f'{kind.label} requires lambda > 0, got lambda={lam}')
        if kind is ProcessKind.TFBM_III:
            if not 0.5 < H < 1:
                raise ParameterError(f'TFBM III requires 0.5 < H < 1, got H={H}')
        elif not H > 0:
            raise ParameterError(f'{kind.label} requires H > 0, got H={H}')

    @property
    def rate(self):
        """Tempering rate entering the covariance (0 for FBM)."""
        if self.kind is ProcessKind.FBM:
            return 0.0
        if self.kind is ProcessKind.TFBM_III and self.lambda_is_tau_star:
            return 1.0 / self.lam
        return self.lam

    def with_hurst(self, hurst):
        return replace(self, hurst=hurst)

    def with_lambda(self, lam):
        return replace(self, lam=lam)

    def describe(self):
        if self.kind is ProcessKind.FBM:
            return f'FBM(H={self.hurst:g})'
        return f'{self.kind.label}(H={self.hurst:g}, lambda={self.lam:g})'


@dataclass(frozen=True, eq=False)
class CovarianceMatrix:
    entries: np.ndarray
    meaning: Meaning
    spec: Optional[ProcessSpec] = None
    dt: float = 1.0

    @property
    def n(self):
        return self.entries.shape[0]


def _scale_tfbm1(H, x):
    if x < settings.TFBM1_SERIES_SWITCH and abs(math.sin(math.pi * H)) > settings.TFBM1_SINE_FLOOR:
        return specfun.tempered_bessel_series(H, x)
    return (2 * specfun.gamma_fn(2 * H) / (2 * x) ** (2 * H)
            - 2 * specfun.gamma_fn(H + 0.5) / math.sqrt(math.pi)
            * specfun.bessel_k(H, x) / (2 * x) ** H)


def _scale_tfbm2(H, x):
    if x > settings.TFBM2_LINEAR_SWITCH:
        # large-time form; the dropped remainder decays like exp(-x)
        g = specfun.gamma_fn(H + 0.5)
        return x ** (-2 * H) * (g * g * x - (2 * H - 1) * g * specfun.gamma_fn(H) / math.sqrt(math.pi))
    if x > settings.TFBM2_SERIES_SWITCH:
        return _scale_tfbm2_extended(H, x)

    z = x * x / 4
    g = specfun.gamma_fn(H + 0.5) / math.sqrt(math.pi)
    # 1 - 2F3(...) is summed as minus the series tail
    first = -(1 - 2 * H) * g * specfun.gamma_fn(H) * x ** (-2 * H) \
        * specfun.hyp_2f3_tail(1, -0.5, 1 - H, 0.5, 1, z)
    second = specfun.gamma_fn(1 - H) * g / (H * 2 ** (2 * H)) \
        * specfun.hyp_2f3(1, H - 0.5, 1, H + 1, H + 0.5, z)
    return first + second


def _scale_tfbm2_extended(H, x):
    # both 2F3 terms grow like exp(x) and cancel down to O(x^{1-2H})
    digits = settings.EXTRA_DIGITS + int(x / math.log(10)) + 1
    with mpmath.workdps(digits):
        H = mpmath.mpf(H)
        x = mpmath.mpf(x)
        z = x * x / 4
        half = mpmath.mpf(1) / 2
        g = mpmath.gamma(H + half) / mpmath.sqrt(mpmath.pi)
        first = (1 - 2 * H) * g * mpmath.gamma(H) * x ** (-2 * H) \
            * (1 - mpmath.hyp2f3(1, -half, 1 - H, half, 1, z))
        second = mpmath.gamma(1 - H) * g / (H * 2 ** (2 * H)) \
            * mpmath.hyp2f3(1, H - half, 1, H + 1, H + half, z)
        return float(first + second)


def _scale_tfbm3(H, rate, t):
    return 2 * t ** (2 - 2 * H) * specfun.mittag_leffler_3p(1, 3 - 2 * H, 1 - 2 * H, -rate * t)


def variance_scale(spec, t):
    """C^2_t of the spec's kind.

    Kinds I and II depend on t through x = lambda|t| only and are undefined
    at t = 0; kind III already carries the full time dependence.
    """
    kind, H = spec.kind, spec.hurst
    if kind is ProcessKind.FBM:
        return 1.0
    if kind is ProcessKind.TFBM_III:
        if t < 0:
            raise DomainError(f'TFBM III variance scale requires t >= 0, got t={t}')
        return _scale_tfbm3(H, spec.rate, float(t))
    if t == 0:
        raise DomainError(f'{kind.label} variance scale is undefined at t=0')
    x = spec.rate * abs(t)
    if kind is ProcessKind.TFBM_I:
        return _scale_tfbm1(H, x)
    if float(H).is_integer():
        raise PoleError(f'TFBM II variance scale has a pole at integer H={H}')
    return _scale_tfbm2(H, x)


@lru_cache(maxsize=1 << 16)
def _variance(spec, t):
    if t == 0:
        return 0.0
    if spec.kind is ProcessKind.TFBM_III:
        return variance_scale(spec, t)
    return t ** (2 * spec.hurst) * variance_scale(spec, t)


def process_variance(spec, t):
    """E[X(t)^2]; 0 at t = 0."""
    return _variance(spec, abs(float(t)))


def process_covariance(spec, s, t):
    return 0.5 * (process_variance(spec, t) + process_variance(spec, s) - process_variance(spec, t - s))


def increment_acvf(spec, k):
    """Autocovariance at lag k of the unit-step increment noise."""
    k = abs(int(k))
    return 0.5 * (process_variance(spec, k + 1) - 2 * process_variance(spec, k) + process_variance(spec, k - 1))


def velocity_acf_iii(tau, H, lam):
    """Velocity autocorrelation tau^{2H-2} e^{-lam tau} / Gamma(2H-1) behind kind III."""
    if not tau > 0:
        raise DomainError(f'velocity autocorrelation requires tau > 0, got tau={tau}')
    if not 0.5 < H < 1 or not lam > 0:
        raise ParameterError(f'velocity autocorrelation requires 0.5 < H < 1 and lambda > 0, got H={H}, lambda={lam}')
    return tau ** (2 * H - 2) * math.exp(-lam * tau) / specfun.gamma_fn(2 * H - 1)


def variance_grid(spec, n, dt=1.0):
    """Var(k dt) for k = 0..n."""
    if spec.kind is ProcessKind.FBM:
        return (np.arange(n + 1) * dt) ** (2 * spec.hurst)
    return np.array([process_variance(spec, k * dt) for k in range(n + 1)])


def increment_acvf_sequence(spec, n, dt=1.0):
    """gamma(k) for k = 0..n of the increments on a grid of step dt."""
    v = variance_grid(spec, n + 1, dt)
    prev = np.concatenate(([v[1]], v[:n]))
    return 0.5 * (v[1:n + 2] - 2 * v[:n + 1] + prev)


def check_psd(entries, what='covariance matrix'):
    w = np.linalg.eigvalsh(entries)
    if w[0] < -settings.PSD_TOL * max(w[-1], 0.0):
        raise NumericalDegeneracyError(
            f'{what} is not positive semidefinite: smallest eigenvalue {w[0]:.3e}, largest {w[-1]:.3e}')
    return w


def covariance_matrix(spec, n, meaning=Meaning.PROCESS_LEVELS, dt=1.0, check=True):
    """Covariance of X(1..n) (process levels) or of its unit increments."""
    if n < 2:
        raise ParameterError(f'covariance matrix needs n >= 2, got n={n}')
    meaning = Meaning(meaning)
    if meaning is Meaning.PROCESS_LEVELS:
        v = variance_grid(spec, n, dt)
        idx = np.arange(1, n + 1)
        entries = 0.5 * (v[idx][:, None] + v[idx][None, :] - v[np.abs(idx[:, None] - idx[None, :])])
    elif meaning is Meaning.INCREMENT_NOISE:
        entries = toeplitz(increment_acvf_sequence(spec, n - 1, dt))
    else:
        raise ParameterError('detrended covariances are built by statistics.detrended_covariance')

    if check:
        check_psd(entries, f'{spec.describe()} {meaning.value} covariance (n={n})')
    return CovarianceMatrix(entries, meaning, spec, dt)
