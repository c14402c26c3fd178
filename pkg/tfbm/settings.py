from pathlib import Path
import logging
import os

# Test settings
SIGNIFICANCE = 0.05
NULL_DRAWS = 10_000
NULL_BLOCK_SIZE = 1_000
REPLICATES = 500
DEFAULT_TAU = {
    'acvf': 1,
    'dma': 2,
    'tamsd': 1,
}

# Simulation settings
PSD_TOL = 1e-8
EMBEDDING_TOL = 1e-10
CHOLESKY_JITTER = 1e-10

# Special function settings
SERIES_TOL = 1e-16
SERIES_WINDOW = 50
SERIES_MAX_TERMS = 100_000
ML_Z_SWITCH = 30.0
# Kind II closed form: plain double series up to this λ|t|, extended precision
# up to TFBM2_LINEAR_SWITCH, large-time form beyond it
TFBM2_SERIES_SWITCH = 8.0
TFBM2_LINEAR_SWITCH = 45.0
# Kind I closed form: power series below this λ|t| unless H is within
# TFBM1_SINE_FLOOR of an integer (there the series coefficients blow up)
TFBM1_SERIES_SWITCH = 1.0
TFBM1_SINE_FLOOR = 1e-3
EXTRA_DIGITS = 30

# Quantile lines
DEFAULT_PROBS = (0.05, 0.25, 0.5, 0.75, 0.95)
MIN_QUANTILE_PATHS = 100

# Power study grids
HURST_GRID = tuple(round(0.1 * i, 1) for i in range(1, 10))
LAMBDA_GRID = (0.1,) + tuple(round(0.25 * i, 2) for i in range(1, 13))
SAMPLE_LENGTHS = (200, 1000)
# presets observe every path on [0, PRESET_HORIZON], so dt = PRESET_HORIZON / N
PRESET_HORIZON = 10.0

logger = logging.getLogger('tfbm')
logger.setLevel(logging.INFO)
ch = logging.StreamHandler()
ch.setLevel(logging.DEBUG)
formatter = logging.Formatter('%(asctime)s - %(levelname)s - %(message)s')
ch.setFormatter(formatter)
logger.addHandler(ch)


def env_int(name, default):
    raw = os.environ.get(name)
    if raw is None:
        return default
    try:
        return int(raw)
    except ValueError:
        logger.warning('Ignoring %s=%r, expected an integer; using %d', name, raw, default)
        return default


# Output
ENV_PREFIX = 'TFBM_'
OUTPUT_DIR = Path(os.environ.get(ENV_PREFIX + 'OUT', './runs'))
# worker threads for the alternatives of a power run;
# FFT and LAPACK calls release the GIL
NUM_WORKERS = env_int(ENV_PREFIX + 'THREADS', 1)
