"""
Constants

File containing the global constants used by the decision engine, the numeric evaluators and the command line.

Any constant in the overridable sections can be changed without editing this file by setting an environment variable
named FDQE_<CONSTANT NAME> (for example FDQE_DEFAULT_RESTARTS=64), either in the shell or in a .env file in the
working directory.
"""

import os as _os

from dotenv import load_dotenv as _load_dotenv

from fdqe.errors import ConfigurationError as _ConfigurationError

_load_dotenv()

ENV_PREFIX = "FDQE_"


def _override(name: str, default):
    """
    Returns the environment override for the given constant if one is set, otherwise the default. The override is
    converted to the type of the default value.
    """
    raw = _os.environ.get(ENV_PREFIX + name)
    if raw is None: return default
    try:
        return type(default)(raw)
    except ValueError:
        raise _ConfigurationError(f"Invalid value for {ENV_PREFIX + name}: {raw!r} (expected {type(default).__name__})")


# Languages
LANGUAGES = ("base", "min", "sim", "star")                              # Language variants, in order of expansion
DEFAULT_LANGUAGE = _override("DEFAULT_LANGUAGE", "star")                # Language used when --lang is not given

# Optimizer defaults
DEFAULT_RESTARTS = _override("DEFAULT_RESTARTS", 32)                    # Random restarts per local optimization
DEFAULT_MAX_ITERATIONS = _override("DEFAULT_MAX_ITERATIONS", 500)       # Iteration cap for each local optimization
DEFAULT_STEP_TOLERANCE = _override("DEFAULT_STEP_TOLERANCE", 1e-10)     # Parameter change below which a run has converged
DEFAULT_VALUE_TOLERANCE = _override("DEFAULT_VALUE_TOLERANCE", 1e-6)    # Objective change below which a run has converged
DEFAULT_SEED = _override("DEFAULT_SEED", 0)                             # Seed used when none is given

# Numeric tolerances
NORM_TOLERANCE = 1e-9               # Accuracy of operator norm evaluation
HERMITIAN_TOLERANCE = 1e-9          # Max ||x - x*|| for an element to count as Hermitian
PROJECTION_TOLERANCE = 1e-9         # Max ||p^2 - p|| for an element to count as a projection

# Sampling
SAMPLE_NORM_BOUND = 2.0             # Operator norm bound for sampled Hermitian elements
DEFAULT_SAMPLES = _override("DEFAULT_SAMPLES", 50)                      # Preservation check sample count

# Enumeration
SIM_FILTER_CACHE_SIZE = 4096        # Matrices whose conjugacy-reflection verdict is memoized
COLUMN_CACHE_SIZE = 1024            # Memoized column option lists for the embedding enumeration

# Sweeps
DEFAULT_SWEEP_WORKERS = _override("DEFAULT_SWEEP_WORKERS", 1)           # Processes used by sweep (1 = in-process)

# Logging
TRACE = 5
LOGS_DIRECTORY = _override("LOGS_DIRECTORY", "")                        # Log file directory, empty for console only
PRIMARY_LOG_FILENAME = "latest.log"
DEBUG_LOG_FILENAME = "debug.log"
LOG_FORMAT = "%(asctime)s [%(levelname)s] %(message)s"
LOG_DATE_FORMAT = "%d-%m-%Y %I:%M:%S %p"
