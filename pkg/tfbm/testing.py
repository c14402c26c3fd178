"""Two-sided goodness-of-fit test for a fully specified null process and the
Monte Carlo power study built on it.
"""
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field
import math
from typing import Dict, List, Optional

import numpy as np

from tfbm import settings
from tfbm.covariance import Meaning, ProcessSpec, covariance_matrix
from tfbm.errors import NumericalError, ParameterError
from tfbm.nulldist import AcceptanceRegion, NullSpectrum, acceptance_region, qf_eigenvalues, sample_null
from tfbm.simulate import Method, simulate_process
from tfbm.statistics import (
    StatisticKind,
    StatisticSpec,
    detrended_covariance,
    evaluate,
    statistic_matrix,
)

logger = settings.logger

# RNG key prefixes: null draws and alternative paths never share a stream
NULL_KEY = 0
ALTERNATIVE_KEY = 1


def default_tau(kind):
    return settings.DEFAULT_TAU[StatisticKind(kind).value]


@dataclass(frozen=True)
class TestConfig:
    __test__ = False

    null_spec: ProcessSpec
    statistic: StatisticSpec
    n: int
    significance: float = settings.SIGNIFICANCE
    null_draws: int = settings.NULL_DRAWS
    seed: int = 0
    method: Method = Method.AUTO
    # sampling step: paths are observed at t = dt, 2 dt, ..., n dt
    dt: float = 1.0

    def __post_init__(self):
        if not (math.isfinite(self.dt) and self.dt > 0):
            raise ParameterError(f'time step must be positive, got dt={self.dt}')
        if not 0 < self.significance < 1:
            raise ParameterError(f'significance must lie in (0, 1), got c={self.significance}')
        if self.n < self.statistic.tau + 2:
            raise ParameterError(f'sample length n={self.n} too short for {self.statistic}: need n >= tau + 2')
        if self.null_draws < 1:
            raise ParameterError(f'number of null draws must be positive, got {self.null_draws}')
        self.statistic.validate(self.n)
        object.__setattr__(self, 'method', Method(self.method))


@dataclass(frozen=True)
class TestOutcome:
    __test__ = False

    statistic_value: float
    region: AcceptanceRegion
    rejected: bool
    statistic: StatisticSpec

    @property
    def decision(self):
        return 'reject' if self.rejected else 'accept'


@dataclass
class PowerCurve:
    alternatives: List[ProcessSpec]
    powers: np.ndarray
    config: TestConfig
    replicates: int
    # alternative index -> failure message; the power there is NaN
    failures: Dict[int, str] = field(default_factory=dict)


class NullModel:
    """Null covariance, spectrum and acceptance region of one TestConfig.

    Depends on the null only, so it is built once and shared by every
    replicate and alternative of a power run.
    """

    def __init__(self, config):
        self.config = config
        stat, n = config.statistic, config.n
        if stat.kind is StatisticKind.ACVF:
            # the ACVF test runs on the increments
            sigma = covariance_matrix(config.null_spec, n, Meaning.INCREMENT_NOISE, config.dt)
        else:
            sigma = covariance_matrix(config.null_spec, n, Meaning.PROCESS_LEVELS, config.dt)
            if stat.kind is StatisticKind.DMA:
                sigma = detrended_covariance(sigma, stat.tau)
        self.sigma = sigma
        self.matrix = statistic_matrix(stat, n)
        self.spectrum = qf_eigenvalues(sigma, self.matrix, source=(config.null_spec, stat, n))
        self.null_samples = sample_null(self.spectrum, config.null_draws, config.seed, key=(NULL_KEY,))
        self.region = acceptance_region(self.null_samples, config.significance)
        logger.debug('null model %s %s n=%d: region [%.6g, %.6g]',
                     config.null_spec.describe(), stat, n, self.region.lower, self.region.upper)

    @property
    def uses_increments(self):
        return self.config.statistic.kind is StatisticKind.ACVF

    def statistic(self, observed):
        """Statistic of one path or an (M, N) batch of process levels."""
        observed = np.asarray(observed, dtype=float)
        if observed.shape[-1] != self.config.n:
            raise ParameterError(f'observed path has length {observed.shape[-1]}, expected n={self.config.n}')
        if self.uses_increments:
            observed = np.diff(observed, axis=-1, prepend=0.0)
        return evaluate(self.config.statistic, observed)

    def decide(self, values):
        values = np.asarray(values, dtype=float)
        return (values < self.region.lower) | (values > self.region.upper)

    def test(self, observed):
        value = self.statistic(observed)
        return TestOutcome(value, self.region, not self.region.contains(value), self.config.statistic)


def build_null_model(config):
    return NullModel(config)


def run_test(observed, config, null_model=None):
    observed = np.asarray(observed, dtype=float)
    if observed.ndim != 1:
        raise ParameterError(f'run_test takes a single path, got an array of shape {observed.shape}')
    model = null_model or NullModel(config)
    return model.test(observed)


def _alternative_power(model, index, alternative, replicates, seed):
    config = model.config
    batch = simulate_process(alternative, config.n, replicates, config.method, seed,
                             key=(ALTERNATIVE_KEY, index), dt=config.dt)
    rejected = model.decide(model.statistic(batch.values))
    return float(rejected.mean())


def power_study(config, alternatives, replicates=settings.REPLICATES, seed=None, null_model=None, workers=None):
    """Rejection rate of the config's test against each alternative.

    Alternatives that fail numerically get NaN power and a failure entry;
    the rest of the curve is still computed.
    """
    if replicates < 1:
        raise ParameterError(f'number of replicates must be positive, got M={replicates}')
    alternatives = list(alternatives)
    seed = config.seed if seed is None else seed
    model = null_model or NullModel(config)
    workers = workers or settings.NUM_WORKERS

    def run(item):
        index, alternative = item
        try:
            power = _alternative_power(model, index, alternative, replicates, seed)
        except NumericalError as exc:
            logger.warning('%s failed: %s', alternative.describe(), exc)
            return np.nan, str(exc)
        logger.info('%s vs %s %s: power %.4f', alternative.describe(), config.null_spec.describe(),
                    config.statistic, power)
        return power, None

    with ThreadPoolExecutor(max_workers=max(1, workers)) as pool:
        results = list(pool.map(run, enumerate(alternatives)))

    powers = np.array([power for power, _ in results])
    failures = {i: message for i, (_, message) in enumerate(results) if message is not None}
    return PowerCurve(alternatives, powers, config, replicates, failures)
