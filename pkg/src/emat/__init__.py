"""Pointwise governing-equation kernels for coupled magneto-electro-thermo-elasticity."""

from . import _backend  # noqa: F401  (switches jax to double precision)

__version__ = "0.1.0"
