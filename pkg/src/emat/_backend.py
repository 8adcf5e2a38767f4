"""Array backend selection.

Field evaluators are traced by jax (double precision is switched on at import),
small dense algebra runs in numpy, and a handful of batch kernels are compiled
with numba unless ``EMAT_DISABLE_NUMBA`` is set.
"""

from __future__ import annotations

import os

import jax

jax.config.update("jax_enable_x64", True)

import jax.numpy as jnp  # noqa: E402
import numpy as np  # noqa: E402

try:  # numba is optional at runtime, the numpy path is always available
    import numba  # noqa: F401

    HAS_NUMBA = True
except ImportError:  # pragma: no cover - exercised only without numba
    HAS_NUMBA = False


def numba_enabled() -> bool:
    """True when compiled kernels should be used (read on every call)."""
    flag = os.environ.get("EMAT_DISABLE_NUMBA", "").strip().lower()
    return HAS_NUMBA and flag not in ("1", "true", "yes", "on")


def is_jax(*arrays) -> bool:
    return any(isinstance(a, jax.Array) for a in arrays)


def xp_of(*arrays):
    """numpy for concrete numpy inputs, jax.numpy as soon as one input is a jax array."""
    return jnp if is_jax(*arrays) else np


def to_numpy(tree):
    """Convert every jax array in a (nested) container to a float numpy array."""
    return jax.tree_util.tree_map(lambda a: np.asarray(a, dtype=float) if _arraylike(a) else a, tree)


def _arraylike(a) -> bool:
    return isinstance(a, (jax.Array, np.ndarray, float, int, np.floating))


def enable_compile_cache(path: str | None = None) -> str | None:
    """Point jax's persistent compilation cache at ``path``.

    The directory defaults to ``EMAT_JAX_CACHE`` or ``~/.cache/emat/jax``; setting
    the variable to ``0``/``off`` leaves the cache disabled.  Tracing is not
    cached, only XLA compilation.
    """
    env = os.environ.get("EMAT_JAX_CACHE", "").strip()
    if env.lower() in ("0", "off", "false", "no"):
        return None
    path = path or env or os.path.join(os.path.expanduser("~"), ".cache", "emat", "jax")
    try:
        os.makedirs(path, exist_ok=True)
    except OSError:
        return None
    jax.config.update("jax_compilation_cache_dir", path)
    jax.config.update("jax_persistent_cache_min_compile_time_secs", 0.5)
    return path
