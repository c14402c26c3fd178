"""Exact Gaussian samplers: Cholesky and Davies-Harte circulant embedding.

Every path draws its normals from its own Philox stream keyed by
(seed, *key, path index), so a batch does not depend on how its paths were
chunked or scheduled.
"""
from dataclasses import dataclass
from enum import Enum
from typing import Optional

import numpy as np
from scipy import linalg

from tfbm import settings
from tfbm.covariance import (
    CovarianceMatrix,
    Meaning,
    ProcessSpec,
    covariance_matrix,
    increment_acvf_sequence,
)
from tfbm.errors import EmbeddingError, FactorizationError, ParameterError

logger = settings.logger

# paths generated per matrix product; bounds the normal buffer, not the output
CHUNK_SIZE = 1_000


class Method(str, Enum):
    AUTO = 'auto'
    CHOLESKY = 'cholesky'
    DAVIES_HARTE = 'davies_harte'


@dataclass(frozen=True, eq=False)
class TrajectoryBatch:
    values: np.ndarray
    spec: Optional[ProcessSpec]
    seed: int
    method_used: Method
    dt: float = 1.0

    @property
    def m(self):
        return self.values.shape[0]

    @property
    def n(self):
        return self.values.shape[1]

    def increments(self):
        """Increment noise of every path, B(0) = 0 included as the origin."""
        return np.diff(self.values, axis=1, prepend=0.0)


def rng_stream(seed, *key):
    return np.random.Generator(np.random.Philox(np.random.SeedSequence(seed, spawn_key=tuple(key))))


def standard_normals(seed, key, start, stop, size):
    """Rows start..stop-1 of the per-path standard normal draws."""
    out = np.empty((stop - start, size))
    for row, path in enumerate(range(start, stop)):
        out[row] = rng_stream(seed, *key, path).standard_normal(size)
    return out


def _check_request(m, seed):
    if m < 1:
        raise ParameterError(f'number of paths must be positive, got m={m}')
    if seed is None or seed < 0:
        raise ParameterError(f'seed must be a non-negative integer, got {seed}')


def cholesky_factor(entries):
    """Lower Cholesky factor, retrying with diagonal jitter up to the cap."""
    n = entries.shape[0]
    try:
        return linalg.cholesky(entries, lower=True)
    except linalg.LinAlgError:
        pass
    cap = settings.CHOLESKY_JITTER * np.trace(entries) / n
    jitter = cap * 1e-4
    while jitter <= cap:
        try:
            factor = linalg.cholesky(entries + jitter * np.eye(n), lower=True)
            logger.debug('Cholesky succeeded with diagonal jitter %.3e', jitter)
            return factor
        except linalg.LinAlgError:
            jitter *= 10
    raise FactorizationError(f'Cholesky factorization failed with diagonal jitter up to {cap:.3e}')


def cholesky_sample(cov, m, seed, key=()):
    """m paths of N(0, cov) as rows of an (m, n) array."""
    _check_request(m, seed)
    entries = cov.entries if isinstance(cov, CovarianceMatrix) else np.atleast_2d(np.asarray(cov, dtype=float))
    factor = cholesky_factor(entries)
    n = entries.shape[0]

    out = np.empty((m, n))
    for start in range(0, m, CHUNK_SIZE):
        stop = min(start + CHUNK_SIZE, m)
        out[start:stop] = standard_normals(seed, key, start, stop, n) @ factor.T
    return out


def circulant_eigenvalues(acvf):
    """Eigenvalues of the circulant embedding of gamma(0..n)."""
    acvf = np.asarray(acvf, dtype=float)
    row = np.concatenate((acvf, acvf[-2:0:-1]))
    eig = np.fft.fft(row).real
    lo, hi = eig.min(), eig.max()
    if lo < -settings.EMBEDDING_TOL * hi:
        raise EmbeddingError(lo, hi)
    return np.clip(eig, 0.0, None)


def davies_harte_sample(acvf, m, seed, key=()):
    """m stationary paths of length n with autocovariance gamma(0..n).

    `acvf` carries n + 1 values; the last one closes the even circulant
    extension of length 2n.
    """
    _check_request(m, seed)
    acvf = np.asarray(acvf, dtype=float)
    n = acvf.shape[0] - 1
    if n < 1:
        raise ParameterError('Davies-Harte needs at least gamma(0) and gamma(1)')
    weights = np.sqrt(circulant_eigenvalues(acvf))
    size = 2 * n

    out = np.empty((m, n))
    for start in range(0, m, CHUNK_SIZE):
        stop = min(start + CHUNK_SIZE, m)
        z = standard_normals(seed, key, start, stop, 2 * size)
        w = weights * (z[:, :size] + 1j * z[:, size:])
        out[start:stop] = np.fft.ifft(w, axis=1).real[:, :n] * np.sqrt(size)
    return out


def simulate_process(spec, n, m, method=Method.AUTO, seed=0, key=(), dt=1.0,
                     target=Meaning.INCREMENT_NOISE):
    """Simulate m paths of the process at t = dt, 2 dt, ..., n dt.

    The stationary increments are sampled and cumulated; with
    method=CHOLESKY and target=PROCESS_LEVELS the level covariance is
    factorized directly instead.
    """
    if n < 2:
        raise ParameterError(f'path length must be at least 2, got n={n}')
    method = Method(method)
    target = Meaning(target)

    if target is Meaning.PROCESS_LEVELS:
        if method is Method.DAVIES_HARTE:
            raise ParameterError('Davies-Harte samples stationary increments only')
        values = cholesky_sample(covariance_matrix(spec, n, Meaning.PROCESS_LEVELS, dt), m, seed, key)
        return TrajectoryBatch(values, spec, seed, Method.CHOLESKY, dt)

    acvf = increment_acvf_sequence(spec, n, dt)
    used = method
    if method is Method.CHOLESKY:
        noise = cholesky_sample(linalg.toeplitz(acvf[:n]), m, seed, key)
    else:
        try:
            noise = davies_harte_sample(acvf, m, seed, key)
            used = Method.DAVIES_HARTE
        except EmbeddingError as exc:
            if method is Method.DAVIES_HARTE:
                raise
            logger.warning('%s, n=%d: %s; falling back to Cholesky', spec.describe(), n, exc)
            noise = cholesky_sample(linalg.toeplitz(acvf[:n]), m, seed, key)
            used = Method.CHOLESKY

    return TrajectoryBatch(np.cumsum(noise, axis=1), spec, seed, used, dt)
