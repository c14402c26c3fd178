"""Named power-study configurations, one per null of the standard study grid.

Preset ids read ``fig-<kind>-H<h0>-l<lambda0>`` for alternatives of every
kind over the Hurst grid, with a ``-lambda`` suffix for alternatives of the
null's own kind over the tempering grid. H0 and lambda0 are written without
the decimal point: ``H03`` is 0.3, ``l2`` is 2. A leading ``paper-`` is
accepted and dropped. Presets observe paths on a fixed horizon, so the time
step shrinks as N grows.
"""
from dataclasses import dataclass
import re
from typing import Tuple

from tfbm import settings
from tfbm.covariance import ProcessKind, ProcessSpec
from tfbm.errors import ParameterError
from tfbm.statistics import StatisticKind

NULL_HURST = {
    ProcessKind.TFBM_I: (0.3, 0.7),
    ProcessKind.TFBM_II: (0.3, 0.7),
    ProcessKind.TFBM_III: (0.7, 0.9),
}
NULL_LAMBDA = (0.3, 2.0)

_NAME = re.compile(r'^(?:paper-)?(fig-(tfbm[123])-H(\d+)-l(\d+)(-lambda)?)$')


@dataclass(frozen=True)
class PowerPreset:
    name: str
    null_spec: ProcessSpec
    alternatives: Tuple[ProcessSpec, ...]
    statistics: Tuple[StatisticKind, ...] = tuple(StatisticKind)
    sample_lengths: Tuple[int, ...] = settings.SAMPLE_LENGTHS
    varying: str = 'hurst'
    horizon: float = settings.PRESET_HORIZON

    def describe(self):
        return (f'{self.null_spec.describe()} null against {len(self.alternatives)} alternatives '
                f'varying {self.varying}, N in {list(self.sample_lengths)}, t in [0, {self.horizon:g}]')

    def dt(self, n):
        return self.horizon / n


def _code(value):
    return f'{value:g}'.replace('.', '')


def _decode(digits):
    # '03' -> 0.3, '2' -> 2.0, '09' -> 0.9
    if len(digits) > 1 and digits.startswith('0'):
        return float(f'0.{digits[1:]}')
    return float(digits)


def preset_name(kind, hurst, lam, varying='hurst'):
    suffix = '-lambda' if varying == 'lambda' else ''
    return f'fig-{ProcessKind(kind).value}-H{_code(hurst)}-l{_code(lam)}{suffix}'


def _admissible(kind, hurst):
    if kind is ProcessKind.TFBM_III:
        return 0.5 < hurst < 1
    return True


def hurst_alternatives(lam):
    return tuple(
        ProcessSpec(kind, hurst, lam if kind is not ProcessKind.FBM else 0.0)
        for kind in ProcessKind
        for hurst in settings.HURST_GRID
        if _admissible(kind, hurst)
    )


def lambda_alternatives(kind, hurst):
    return tuple(ProcessSpec(kind, hurst, lam) for lam in settings.LAMBDA_GRID)


def figure_preset(name):
    match = _NAME.match(name)
    if match is None:
        raise ParameterError(f'unknown preset {name!r}; known presets: {", ".join(list_presets())}')
    canonical = match.group(1)
    kind = ProcessKind(match.group(2))
    hurst, lam = _decode(match.group(3)), _decode(match.group(4))
    if hurst not in NULL_HURST[kind] or lam not in NULL_LAMBDA:
        raise ParameterError(f'unknown preset {name!r}; known presets: {", ".join(list_presets())}')

    null_spec = ProcessSpec(kind, hurst, lam)
    if match.group(5):
        return PowerPreset(canonical, null_spec, lambda_alternatives(kind, hurst), varying='lambda')
    return PowerPreset(canonical, null_spec, hurst_alternatives(lam))


def list_presets():
    return [
        preset_name(kind, hurst, lam, varying)
        for kind, hursts in NULL_HURST.items()
        for hurst in hursts
        for lam in NULL_LAMBDA
        for varying in ('hurst', 'lambda')
    ]
