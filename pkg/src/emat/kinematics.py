"""Motions, point kinematics, pull-back/push-forward maps and differential operators."""

from __future__ import annotations

from dataclasses import dataclass, field, fields, replace
from typing import Callable

import jax
import jax.numpy as jnp
import numpy as np

from ._backend import is_jax, xp_of
from .tensor_core import TensorError, cross, inv

EPS0 = 8.8541878128e-12  # F/m
MU0 = 1.25663706212e-6  # H/m


class InvalidDeformationError(ValueError):
    """det F <= 0 (or an isochoric constraint violated) at an evaluated point."""


class DifferentiationError(ValueError):
    """Non-finite values met on a finite-difference stencil."""


# ---------------------------------------------------------------------------
# differential operators on evaluators f(X, t)


@dataclass(frozen=True)
class DiffConfig:
    """How spatial and temporal derivatives are taken.

    ``mode="ad"`` differentiates the evaluator exactly with jax; ``mode="fd"`` uses
    central differences with step ``h * length`` in space and ``ht * time_scale``
    in time (order 2 or 4).
    """

    mode: str = "ad"
    h: float = 1e-5
    ht: float = 1e-5
    order: int = 2
    length: float = 1.0
    time_scale: float = 1.0

    def __post_init__(self):
        if self.mode not in ("ad", "fd"):
            raise ValueError(f"mode must be 'ad' or 'fd', got {self.mode!r}")
        if self.order not in (2, 4):
            raise ValueError("finite-difference order must be 2 or 4")


_STENCILS = {
    2: ((1.0, 0.5), (-1.0, -0.5)),
    4: ((2.0, -1.0 / 12.0), (1.0, 8.0 / 12.0), (-1.0, -8.0 / 12.0), (-2.0, 1.0 / 12.0)),
}


def _fd(f, step, order):
    """Central difference of f(s) at s = 0 for a scalar shift s (pytree outputs allowed)."""
    stencil = _STENCILS[order]
    values = [f(shift * step) for shift, _ in stencil]
    weights = [w for _, w in stencil]
    return jax.tree_util.tree_map(lambda *vs: sum(w * v for w, v in zip(weights, vs)) / step, *values)


class Ops:
    """Spatial Jacobian and time derivative of evaluators f(X, t) -> array."""

    def __init__(self, config: DiffConfig | None = None):
        self.config = config or DiffConfig()

    @property
    def mode(self) -> str:
        return self.config.mode

    def jac(self, f: Callable) -> Callable:
        """(X, t) -> d f / d X with the derivative index appended last."""
        if self.config.mode == "ad":
            return jax.jacfwd(f, argnums=0)
        h = self.config.h * self.config.length
        order = self.config.order

        def jac_fd(X, t):
            xp = xp_of(X)
            cols = [_fd(lambda s, e=e: f(X + s * e, t), h, order) for e in np.eye(3)]
            return jax.tree_util.tree_map(lambda *cs: xp.stack([xp.asarray(c) for c in cs], axis=-1), *cols)

        return jac_fd

    def dt(self, f: Callable) -> Callable:
        """(X, t) -> d f / d t at fixed X."""
        if self.config.mode == "ad":
            return jax.jacfwd(f, argnums=1)
        ht = self.config.ht * self.config.time_scale
        order = self.config.order

        def dt_fd(X, t):
            return _fd(lambda s: f(X, t + s), ht, order)

        return dt_fd

    # convenience reductions of the Jacobian
    def div(self, f: Callable) -> Callable:
        """Divergence contracting the first index with the derivative: d f_{j...}/d X_j."""
        jf = self.jac(f)

        return lambda X, t: div_from_grad(jf(X, t))

    def curl(self, f: Callable) -> Callable:
        jf = self.jac(f)

        return lambda X, t: curl_from_grad(jf(X, t))


def curl_from_grad(g):
    """curl from a gradient array g[i, j] = d f_i / d x_j."""
    xp = xp_of(g)
    return xp.stack([g[2, 1] - g[1, 2], g[0, 2] - g[2, 0], g[1, 0] - g[0, 1]])


def div_from_grad(g):
    """For vectors d f_j/d x_j; for second-order fields (div T)_i = d T_ji / d x_j."""
    xp = xp_of(g)
    if g.ndim == 2:
        return xp.trace(g)
    if g.ndim == 3:
        return xp.einsum("jij->i", g)
    raise TensorError(f"divergence needs a vector or tensor gradient, got ndim {g.ndim}")


def differential_ops(fn: Callable, point, t: float = 0.0, config: DiffConfig | None = None) -> dict:
    """grad, div, curl and time derivative of an evaluator ``fn(x, t)`` at one point.

    Scalar fields return only ``grad`` and ``dt``; vector fields also ``div`` and
    ``curl``.  Analytic (``mode="ad"``) and finite-difference modes are available.
    """
    config = config or DiffConfig(mode="fd")
    ops = Ops(config)
    x = jnp.asarray(point, dtype=float) if config.mode == "ad" else np.asarray(point, dtype=float)
    tt = jnp.asarray(float(t)) if config.mode == "ad" else float(t)
    value = np.asarray(fn(x, tt), dtype=float)
    g = np.asarray(ops.jac(fn)(x, tt), dtype=float)
    d = np.asarray(ops.dt(fn)(x, tt), dtype=float)
    if not (np.all(np.isfinite(g)) and np.all(np.isfinite(d))):
        raise DifferentiationError("non-finite values on the difference stencil")
    out = {"value": value, "grad": g, "dt": d}
    if value.shape == (3,):
        out["div"] = float(np.trace(g))
        out["curl"] = np.asarray(curl_from_grad(g))
    elif value.shape == (3, 3):
        out["div"] = np.asarray(div_from_grad(g))
    return out


# ---------------------------------------------------------------------------
# motions and point kinematics


@dataclass(frozen=True)
class Motion:
    """x = chi(X, t) with optional analytic hooks for F, v and a."""

    chi: Callable
    grad: Callable | None = None
    velocity: Callable | None = None
    acceleration: Callable | None = None


def _register(cls):
    names = [f.name for f in fields(cls)]
    return jax.tree_util.register_dataclass(cls, data_fields=names, meta_fields=[])


@_register
@dataclass(frozen=True)
class Kinematics:
    """F, J, c = F^T F, F^-1, velocity v, acceleration a and V = F^-1 v at a point."""

    F: object
    J: object
    c: object
    Finv: object
    v: object
    a: object
    V: object

    @classmethod
    def from_F(cls, F, v=None, a=None, check: bool = True) -> "Kinematics":
        xp = xp_of(F)
        F = xp.asarray(F, dtype=float)
        v = xp.zeros(3) if v is None else xp.asarray(v, dtype=float)
        a = xp.zeros(3) if a is None else xp.asarray(a, dtype=float)
        J = xp.linalg.det(F)
        if check and not is_jax(F):
            if not np.all(np.isfinite(F)):
                raise InvalidDeformationError("F has non-finite components")
            if J <= 0.0:
                raise InvalidDeformationError(f"det F = {J:.6g} <= 0")
        Finv = inv(F)
        return cls(F=F, J=J, c=F.T @ F, Finv=Finv, v=v, a=a, V=Finv @ v)

    def check_isochoric(self, tol: float = 1e-10) -> None:
        if abs(float(self.J) - 1.0) > tol:
            raise InvalidDeformationError(f"|J - 1| = {abs(float(self.J) - 1.0):.3e} exceeds {tol:g}")


def kinematics_at(motion: Motion | Callable, X, t: float = 0.0, config: DiffConfig | None = None) -> Kinematics:
    """Evaluate F, J, c, v, a, V of a motion at (X, t); hooks bypass differentiation."""
    if not isinstance(motion, Motion):
        motion = Motion(chi=motion)
    config = config or DiffConfig(mode="ad")
    ops = Ops(config)
    if config.mode == "ad":
        Xa, ta = jnp.asarray(X, dtype=float), jnp.asarray(float(t))
    else:
        Xa, ta = np.asarray(X, dtype=float), float(t)
    F = motion.grad(Xa, ta) if motion.grad else ops.jac(motion.chi)(Xa, ta)
    v = motion.velocity(Xa, ta) if motion.velocity else ops.dt(motion.chi)(Xa, ta)
    if motion.acceleration:
        a = motion.acceleration(Xa, ta)
    elif motion.velocity:
        a = ops.dt(motion.velocity)(Xa, ta)
    else:
        a = ops.dt(ops.dt(motion.chi))(Xa, ta)
    return Kinematics.from_F(np.asarray(F, dtype=float), np.asarray(v, dtype=float), np.asarray(a, dtype=float))


# ---------------------------------------------------------------------------
# electromagnetic and thermal field containers


@_register
@dataclass(frozen=True)
class EulerianEM:
    """Current-configuration fields; ``vacuum`` marks starred (P = M = 0) fields."""

    B: object
    E: object
    P: object
    M: object
    Jfree: object
    rho_e: object
    eps0: float = EPS0
    mu0: float = MU0

    def D(self):
        return self.eps0 * self.E + self.P

    def H(self):
        return self.B / self.mu0 - self.M

    @property
    def vacuum(self) -> bool:
        return not is_jax(self.P, self.M) and not np.any(self.P) and not np.any(self.M)

    @classmethod
    def zeros(cls, **kw) -> "EulerianEM":
        base = dict(B=np.zeros(3), E=np.zeros(3), P=np.zeros(3), M=np.zeros(3), Jfree=np.zeros(3), rho_e=0.0)
        base.update({k: (np.asarray(v, dtype=float) if not np.isscalar(v) else float(v)) for k, v in kw.items()})
        return cls(**base)


@_register
@dataclass(frozen=True)
class EffectiveFields:
    """J_e = J - rho_e v, E_e = E + v x B, M_e = M + v x P."""

    J_e: object
    E_e: object
    M_e: object


def effective_fields(eul: EulerianEM, v) -> EffectiveFields:
    return EffectiveFields(J_e=eul.Jfree - eul.rho_e * v, E_e=eul.E + cross(v, eul.B), M_e=eul.M + cross(v, eul.P))


@_register
@dataclass(frozen=True)
class LagrangianEM:
    """Reference-configuration fields plus the effective fields E_el and M_el.

    ``J_l`` is the pulled-back conduction current J F^-1 J (the Lagrangian Ohm
    variable) and ``J_E`` = J F^-1 (J - rho_e v) the one entering Ampere's law.
    """

    B_l: object
    E_l: object
    P_l: object
    M_l: object
    J_E: object
    rho_E: object
    J_l: object
    E_el: object
    M_el: object
    eps0: float = EPS0
    mu0: float = MU0


def pull_back_em(eul: EulerianEM, kin: Kinematics) -> LagrangianEM:
    """B_l = J F^-1 B, P_l = J F^-1 P, E_l = F^T E, M_l = F^T M, J_E, rho_E = J rho_e.

    E_el = E_l + V x B_l and M_el = M_l + V x P_l (equal to F^T E_e and F^T M_e).
    """
    F, J, Finv, v, V = kin.F, kin.J, kin.Finv, kin.v, kin.V
    B_l = J * Finv @ eul.B
    P_l = J * Finv @ eul.P
    E_l = F.T @ eul.E
    M_l = F.T @ eul.M
    J_E = J * Finv @ (eul.Jfree - eul.rho_e * v)
    J_l = J * Finv @ eul.Jfree
    return LagrangianEM(
        B_l=B_l,
        E_l=E_l,
        P_l=P_l,
        M_l=M_l,
        J_E=J_E,
        rho_E=J * eul.rho_e,
        J_l=J_l,
        E_el=E_l + cross(V, B_l),
        M_el=M_l + cross(V, P_l),
        eps0=eul.eps0,
        mu0=eul.mu0,
    )


def push_forward_em(lag: LagrangianEM, kin: Kinematics) -> EulerianEM:
    """Exact inverse of :func:`pull_back_em`."""
    F, J, Finv, v = kin.F, kin.J, kin.Finv, kin.v
    rho_e = lag.rho_E / J
    return EulerianEM(
        B=F @ lag.B_l / J,
        E=Finv.T @ lag.E_l,
        P=F @ lag.P_l / J,
        M=Finv.T @ lag.M_l,
        Jfree=F @ lag.J_E / J + rho_e * v,
        rho_e=rho_e,
        eps0=lag.eps0,
        mu0=lag.mu0,
    )


def effective_lagrangian_check(eul: EulerianEM, kin: Kinematics) -> dict:
    """E_el and M_el computed both ways (convected and pulled-back effective fields)."""
    lag = pull_back_em(eul, kin)
    eff = effective_fields(eul, kin.v)
    return {
        "E_el_convected": lag.E_el,
        "E_el_pulled": kin.F.T @ eff.E_e,
        "M_el_convected": lag.M_el,
        "M_el_pulled": kin.F.T @ eff.M_e,
    }


@_register
@dataclass(frozen=True)
class ThermalState:
    """Temperature, heat flux, volumetric source, entropy and densities.

    In a referential state (``referential=True``) ``theta`` holds theta_l = J theta,
    ``q`` holds q_l = J F^-1 q and ``q_vol`` holds J q.
    """

    theta: object
    q: object
    q_vol: object
    c_p: float = 1.0
    rho: object = 1.0
    S: object = 0.0
    referential: bool = False


def pull_back_thermal(th: ThermalState, kin: Kinematics) -> ThermalState:
    if th.referential:
        raise ValueError("state is already referential")
    if not is_jax(th.theta) and float(th.theta) <= 0.0:
        raise ValueError("absolute temperature must be positive")
    J = kin.J
    return replace(th, theta=J * th.theta, q=J * kin.Finv @ th.q, q_vol=J * th.q_vol, rho=J * th.rho, referential=True)


def push_forward_thermal(th: ThermalState, kin: Kinematics) -> ThermalState:
    if not th.referential:
        raise ValueError("state is already spatial")
    J = kin.J
    return replace(th, theta=th.theta / J, q=kin.F @ th.q / J, q_vol=th.q_vol / J, rho=th.rho / J, referential=False)


def relative_difference(a, b) -> float:
    a = np.asarray(a, dtype=float)
    b = np.asarray(b, dtype=float)
    scale = max(np.max(np.abs(a)), np.max(np.abs(b)), np.finfo(float).tiny)
    return float(np.max(np.abs(a - b)) / scale)
