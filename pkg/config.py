"""Configuration constants for RankSpike."""
import os
from pathlib import Path

try:
    from dotenv import load_dotenv
    _env_path = Path(__file__).parent / '.env'
    if _env_path.exists():
        load_dotenv(_env_path)
except ImportError:
    pass  # python-dotenv not installed, use environment variables

# Sieve
SIEVE_WINDOW = 1 << 20
SIEVE_MAX_BYTES = 1 << 30

# Point Counting
BSGS_THRESHOLD = 10_000
BSGS_MAX_POINTS = 8
AP_CHUNK_PRIMES = 2_000
AP_CACHE_VERSION = 1

# Euler-Maclaurin
ZETA_TOLERANCE = 1e-13
ZETA_MAX_HEIGHT = 1e6
ZETA_MAX_BERNOULLI = 40

# Incomplete Gamma
INC_GAMMA_MAX_ITERATIONS = 5_000
INC_GAMMA_ACCURACY = 1e-15

# Approximate Functional Equation
AFE_TOLERANCE = 1e-12
AFE_CANCELLATION_DIGITS = 4.0
AFE_MAX_TERMS = 5_000_000
AFE_PROBE_MODULUS = 1.25
HARDY_Z_RESIDUE_TOLERANCE = 1e-8
ZETA_RESIDUE_TOLERANCE = 1e-10
ROOT_NUMBER_PROBES = (1.7, 3.1, 4.9, 6.3)
MAX_AFE_CONDUCTOR = 10 ** 12
VANISHING_MAX_RADIUS = 0.4

# Zero Finding
ZERO_GRID_FRACTION = 0.25
ZETA_ZERO_TOLERANCE = 1e-10
L_ZERO_TOLERANCE = 1e-9
ZERO_MAX_REFINEMENTS = 6
ZERO_WINDOW_ZEROS = 40
ARG_START_SIGMA = 4.0
ZERO_SCAN_START = 1e-3

# Euler Products
EULER_PRIME_CUTOFF = 100_000
EULER_MAX_CUTOFF = 6_400_000
EULER_TAIL_TARGET = 1e-10
SINGULAR_GUARD = 1e-3

# Statistics
DENSITY_BIN_WIDTH = 1 / 20
PAIRCORR_BIN_WIDTH = 1 / 40
CHECKPOINT_RATIO = 1.1
SIGNIFICANCE_LEVEL = 0.01

# Extended Runs
EXTENDED_MAX_X = 10 ** 7
EXTENDED_MAX_ZEROS = 20_000
EXTENDED_MAX_FAMILY = 5_000

# I/O
CACHE_DIR = Path(os.environ.get('RANKSPIKE_CACHE_DIR', Path.home() / '.cache' / 'rankspike'))
HISTORY_FILE = "run_history.json"
HISTORY_LIMIT = 50
PROGRESS_MIN_ITEMS = 50_000
DEFAULT_PARALLELISM = 1
