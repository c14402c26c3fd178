"""CSV and manifest persistence, and matplotlib figures.

Every CSV starts with ``#`` metadata lines of the form ``# key: value``,
followed by the payload. Floats are written with %.17g so that reading a
file back reproduces the arrays exactly.
"""
import csv
from dataclasses import asdict, dataclass, field
import json
from pathlib import Path
import platform
import time
from typing import Dict, List

import matplotlib
matplotlib.use('Agg')
from matplotlib import pyplot as plt
import mpmath
import numpy as np
import scipy

from tfbm import __version__, settings
from tfbm.covariance import ProcessKind, ProcessSpec
from tfbm.errors import DataFormatError
from tfbm.simulate import Method, TrajectoryBatch

logger = settings.logger

FLOAT_FORMAT = '%.17g'


def ensure_dir(path):
    path = Path(path)
    path.mkdir(parents=True, exist_ok=True)
    return path


def _header_lines(meta):
    return [f'# {key}: {value}' for key, value in meta.items()]


def _write_lines(path, lines):
    path = Path(path)
    ensure_dir(path.parent)
    with open(path, 'w', newline='') as f:
        f.write('\n'.join(lines) + '\n')
    logger.info('Wrote %s', path)
    return path


def read_metadata(path):
    meta = {}
    try:
        with open(path) as f:
            for line in f:
                if not line.startswith('#'):
                    break
                key, sep, value = line[1:].strip().partition(':')
                if sep:
                    meta[key.strip()] = value.strip()
    except OSError as exc:
        raise DataFormatError(f'cannot read {path}: {exc}') from None
    return meta


def spec_metadata(spec):
    return {
        'kind': spec.kind.value,
        'hurst': repr(spec.hurst),
        'lambda': repr(spec.lam),
        'lambda_is_tau_star': str(spec.lambda_is_tau_star).lower(),
    }


def spec_from_metadata(meta):
    try:
        return ProcessSpec(
            ProcessKind(meta['kind']),
            float(meta['hurst']),
            float(meta.get('lambda', 0.0)),
            meta.get('lambda_is_tau_star', 'false') == 'true',
        )
    except (KeyError, ValueError) as exc:
        raise DataFormatError(f'incomplete process metadata: {exc}') from None


def _array_lines(array):
    return [','.join(FLOAT_FORMAT % v for v in row) for row in np.atleast_2d(array)]


def write_trajectories(path, batch, extra=None):
    meta = {
        **spec_metadata(batch.spec),
        'seed': batch.seed,
        'method_used': batch.method_used.value,
        'dt': repr(batch.dt),
        'm': batch.m,
        'n': batch.n,
        **(extra or {}),
    }
    return _write_lines(path, _header_lines(meta) + _array_lines(batch.values))


def _load_array(path):
    try:
        values = np.loadtxt(path, delimiter=',', comments='#', ndmin=2)
    except (OSError, ValueError) as exc:
        raise DataFormatError(f'cannot read {path}: {exc}') from None
    if values.size == 0:
        raise DataFormatError(f'{path} holds no data rows')
    if not np.all(np.isfinite(values)):
        raise DataFormatError(f'{path} contains non-finite values')
    return values


def read_trajectories(path):
    """Trajectory CSV back into a batch; plain CSVs without metadata load with spec=None."""
    meta = read_metadata(path)
    values = _load_array(path)
    spec = spec_from_metadata(meta) if 'kind' in meta else None
    try:
        seed = int(meta.get('seed', 0))
        method = Method(meta.get('method_used', Method.CHOLESKY.value))
        dt = float(meta.get('dt', 1.0))
    except ValueError as exc:
        raise DataFormatError(f'bad metadata in {path}: {exc}') from None
    return TrajectoryBatch(values, spec, seed, method, dt)


def write_covariance(path, cov):
    spec = cov.spec
    header = '# kind,H,lambda,n,meaning'
    row = f'# {spec.kind.value},{spec.hurst!r},{spec.lam!r},{cov.n},{cov.meaning.value}'
    return _write_lines(path, [header, row] + _array_lines(cov.entries))


def read_covariance(path):
    values = _load_array(path)
    if values.shape[0] != values.shape[1]:
        raise DataFormatError(f'{path}: covariance must be square, got {values.shape}')
    return values


def _write_table(path, meta, columns, rows):
    path = Path(path)
    ensure_dir(path.parent)
    with open(path, 'w', newline='') as f:
        for line in _header_lines(meta):
            f.write(line + '\n')
        writer = csv.writer(f, lineterminator='\n')
        writer.writerow(columns)
        writer.writerows(rows)
    logger.info('Wrote %s', path)
    return path


def _fmt(value):
    if isinstance(value, float):
        return FLOAT_FORMAT % value
    return value


def write_outcomes(path, outcomes, config, source=''):
    """One row per tested path."""
    meta = {**spec_metadata(config.null_spec), 'n': config.n, 'significance': config.significance,
            'null_draws': config.null_draws, 'seed': config.seed, 'dt': repr(config.dt),
            'source': source}
    columns = ['path', 'statistic', 'tau', 'value', 'lower', 'upper', 'decision']
    rows = [
        [i, o.statistic.kind.value, o.statistic.tau, _fmt(o.statistic_value),
         _fmt(o.region.lower), _fmt(o.region.upper), o.decision]
        for i, o in enumerate(outcomes)
    ]
    return _write_table(path, meta, columns, rows)


def write_spectrum(path, spectrum, region=None, meta=None):
    meta = dict(meta or {})
    if region is not None:
        meta.update(lower=_fmt(region.lower), upper=_fmt(region.upper),
                    significance=region.significance, sample_count=region.sample_count)
    rows = [[i, _fmt(float(v))] for i, v in enumerate(spectrum.eigenvalues)]
    return _write_table(path, meta, ['index', 'eigenvalue'], rows)


POWER_COLUMNS = ['alt_kind', 'alt_H', 'alt_lambda', 'statistic', 'tau', 'N', 'dt', 'M', 'power', 'failure']


def power_rows(curve):
    stat = curve.config.statistic
    for i, (alt, power) in enumerate(zip(curve.alternatives, curve.powers)):
        yield [alt.kind.value, _fmt(alt.hurst), _fmt(alt.lam), stat.kind.value, stat.tau,
               curve.config.n, _fmt(float(curve.config.dt)), curve.replicates, _fmt(float(power)),
               curve.failures.get(i, '')]


def write_power(path, curves, meta=None):
    rows = [row for curve in curves for row in power_rows(curve)]
    return _write_table(path, meta or {}, POWER_COLUMNS, rows)


def read_power(path):
    with open(path, newline='') as f:
        rows = [row for row in csv.DictReader(line for line in f if not line.startswith('#'))]
    for row in rows:
        row['power'] = float(row['power'])
    return rows


def write_quantile_lines(path, qlines, meta=None):
    meta = {**(spec_metadata(qlines.spec) if qlines.spec else {}), 'seed': qlines.seed,
            'dt': repr(qlines.dt), **(meta or {})}
    rows = [
        [i + 1, _fmt(float(t)), _fmt(float(p)), _fmt(float(q))]
        for j, p in enumerate(qlines.probs)
        for i, (t, q) in enumerate(zip(qlines.times, qlines.lines[j]))
    ]
    return _write_table(path, meta, ['n', 't', 'p', 'q'], rows)


def library_versions():
    return {
        'tfbm': __version__,
        'python': platform.python_version(),
        'numpy': np.__version__,
        'scipy': scipy.__version__,
        'mpmath': mpmath.__version__,
        'matplotlib': matplotlib.__version__,
    }


@dataclass
class RunManifest:
    command: str
    parameters: Dict
    seed: int
    versions: Dict = field(default_factory=library_versions)
    outputs: List[str] = field(default_factory=list)
    duration: float = 0.0
    started: float = field(default_factory=time.time)

    def add_output(self, path):
        self.outputs.append(str(path))
        return path

    def finish(self):
        self.duration = time.time() - self.started
        return self

    def save(self, path):
        path = Path(path)
        ensure_dir(path.parent)
        with open(path, 'w') as f:
            json.dump(asdict(self), f, indent=2, sort_keys=True)
        logger.info('Wrote manifest %s', path)
        return path

    @classmethod
    def load(cls, path):
        try:
            with open(path) as f:
                data = json.load(f)
            return cls(**data)
        except (OSError, ValueError, TypeError) as exc:
            raise DataFormatError(f'cannot read manifest {path}: {exc}') from None


def plot_power_curves(path, curves, axis='hurst', title=None):
    """One panel per alternative kind, one line per statistic and sample length."""
    kinds = []
    for curve in curves:
        for alt in curve.alternatives:
            if alt.kind not in kinds:
                kinds.append(alt.kind)

    fig, axes = plt.subplots(1, len(kinds), figsize=(4 * len(kinds), 3.5), squeeze=False, sharey=True)
    for ax, kind in zip(axes[0], kinds):
        for curve in curves:
            points = [(alt.hurst if axis == 'hurst' else alt.lam, power)
                      for alt, power in zip(curve.alternatives, curve.powers) if alt.kind is kind]
            if not points:
                continue
            x, y = zip(*points)
            ax.plot(x, y, marker='o', markersize=3,
                    label=f'{curve.config.statistic.kind.value.upper()}, N={curve.config.n}')
        ax.axhline(curves[0].config.significance, color='grey', linestyle=':', linewidth=1)
        ax.set_title(kind.label)
        ax.set_xlabel('H' if axis == 'hurst' else 'lambda')
        ax.set_ylim(-0.02, 1.02)
    axes[0][0].set_ylabel('power')
    axes[0][-1].legend(fontsize='small')
    if title:
        fig.suptitle(title)
    fig.tight_layout()
    return _save_figure(fig, path)


def plot_quantile_lines(path, qlines, title=None):
    fig, ax = plt.subplots(figsize=(6, 4))
    for p, line in zip(qlines.probs, qlines.lines):
        ax.plot(qlines.times, line, linewidth=1, label=f'p={p:g}')
    ax.set_xlabel('t')
    ax.set_ylabel('quantile')
    ax.legend(fontsize='small')
    ax.set_title(title or (qlines.spec.describe() if qlines.spec else 'quantile lines'))
    fig.tight_layout()
    return _save_figure(fig, path)


def _save_figure(fig, path):
    path = Path(path)
    ensure_dir(path.parent)
    fig.savefig(path, format='svg', metadata={'Date': None})
    plt.close(fig)
    logger.info('Wrote %s', path)
    return path
