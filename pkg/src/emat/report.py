"""Residual containers and the compiled-kernel runner shared by the evaluator modules."""

from __future__ import annotations

import functools
import json
from dataclasses import dataclass, field

import jax
import numpy as np

from .kinematics import DiffConfig

SCHEMA_VERSION = "1.0"


@dataclass(frozen=True)
class Residual:
    """One equation: labeled signed terms, their sum, its norm and a characteristic scale."""

    name: str
    terms: dict
    value: np.ndarray
    norm: float
    scale: float
    flagged: bool = False

    @classmethod
    def from_terms(cls, name: str, terms: dict, flagged: bool = False) -> "Residual":
        terms = {k: np.asarray(v, dtype=float) for k, v in terms.items()}
        if not terms:
            raise ValueError(f"residual {name!r} has no terms")
        value = sum(terms.values())
        scale = max(float(np.linalg.norm(v)) for v in terms.values())
        return cls(name, terms, np.asarray(value, dtype=float), float(np.linalg.norm(value)), scale, flagged)

    @property
    def relative(self) -> float:
        return self.norm / self.scale if self.scale > 0.0 else self.norm

    def to_dict(self, with_terms: bool = False) -> dict:
        out = {
            "residual": np.atleast_1d(self.value).tolist(),
            "norm": self.norm,
            "scale": self.scale,
            "relative": self.relative,
        }
        if self.flagged:
            out["flagged"] = True
        if with_terms:
            out["terms"] = {k: np.atleast_1d(v).tolist() for k, v in self.terms.items()}
        return out


@dataclass
class ResidualReport:
    """Named residual entries evaluated at one point and time."""

    tag: str
    point: np.ndarray
    time: float
    entries: dict = field(default_factory=dict)
    notes: list = field(default_factory=list)

    def __getitem__(self, name: str) -> Residual:
        return self.entries[name]

    def __iter__(self):
        return iter(self.entries.values())

    def names(self):
        return list(self.entries)

    def max_relative(self) -> float:
        return max((r.relative for r in self.entries.values()), default=0.0)

    def check_finite(self) -> None:
        for r in self.entries.values():
            if not (np.all(np.isfinite(r.value)) and all(np.all(np.isfinite(v)) for v in r.terms.values())):
                raise FloatingPointError(f"non-finite entry in residual {r.name!r}")

    def to_dict(self, with_terms: bool = False) -> dict:
        return {
            "schema_version": SCHEMA_VERSION,
            "tag": self.tag,
            "point": np.asarray(self.point, dtype=float).tolist(),
            "time": float(self.time),
            "entries": {k: r.to_dict(with_terms) for k, r in self.entries.items()},
            "notes": list(self.notes),
        }

    def to_json(self, with_terms: bool = False, **kw) -> str:
        return json.dumps(self.to_dict(with_terms), sort_keys=True, **kw)


def make_report(tag: str, raw: dict, X, t, flagged=(), notes=()) -> ResidualReport:
    raw = jax.tree_util.tree_map(lambda a: np.asarray(a, dtype=float), raw)
    entries = {name: Residual.from_terms(name, terms, name in flagged) for name, terms in raw.items()}
    rep = ResidualReport(tag, np.asarray(X, dtype=float), float(t), entries, list(notes))
    rep.check_finite()
    return rep


@functools.lru_cache(maxsize=None)
def _compiled(kernel, config, static):
    from .fields import Frame

    kw = dict(static)

    def run(sc, X, t, params):
        return kernel(Frame(sc, config), X, t, params, **kw)

    return jax.jit(run)


def run_kernel(kernel, sc, X, t, config: DiffConfig | None = None, params: dict | None = None, **static):
    """Evaluate a jax kernel(frame, X, t, params, **static) with compilation cached by structure."""
    fn = _compiled(kernel, config or DiffConfig(), tuple(sorted(static.items())))
    out = fn(sc, np.asarray(X, dtype=float), float(t), params or {})
    return jax.tree_util.tree_map(lambda a: np.asarray(a, dtype=float), out)
