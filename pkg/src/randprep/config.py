"""Configuration: worker threads, ensemble memory cap, and T-count price from environment."""

from __future__ import annotations

import logging
import os

from randprep.constants import DEFAULT_MAX_DENSE_MEMBERS, DEFAULT_T_PER_BIT

logger = logging.getLogger(__name__)

# Env var overrides with sensible defaults.
THREADS_ENV = 'RANDPREP_THREADS'
MAX_MEMBERS_ENV = 'RANDPREP_MAX_MEMBERS'
T_PER_BIT_ENV = 'RANDPREP_T_PER_BIT'
LOG_ENV = 'RANDPREP_LOG'

DEFAULT_THREADS = min(4, os.cpu_count() or 1)


def _positive_from_env(name: str, default: float, cast: type[int] | type[float]) -> float:
    raw = os.environ.get(name, '').strip()
    if not raw:
        return default
    try:
        value = cast(raw)
    except ValueError:
        logger.warning('Invalid %s=%r (not a number); using %s', name, raw, default)
        return default
    if value <= 0:
        logger.warning('Invalid %s=%r (must be positive); using %s', name, raw, default)
        return default
    return value


def get_thread_count() -> int:
    """Return the worker-thread cap (RANDPREP_THREADS env var or default).

    Returns:
        Positive integer number of threads for sweeps and sampler workers.
    """
    return int(_positive_from_env(THREADS_ENV, DEFAULT_THREADS, int))


def get_max_dense_members() -> int:
    """Return the largest tail size for which ensembles store member states eagerly.

    Returns:
        RANDPREP_MAX_MEMBERS or 4096.
    """
    return int(_positive_from_env(MAX_MEMBERS_ENV, DEFAULT_MAX_DENSE_MEMBERS, int))


def get_t_gates_per_bit() -> float:
    """Return T gates charged per bit of rotation precision (RANDPREP_T_PER_BIT or 3.0).

    The constant is a modeling choice; only ratios between schemes are meaningful.

    Returns:
        Positive float.
    """
    return float(_positive_from_env(T_PER_BIT_ENV, DEFAULT_T_PER_BIT, float))
