"""Closed-form field scenarios and the operator frame used by the residual evaluators.

A :class:`Scenario` bundles a motion with electromagnetic, thermal, stress,
vacuum and surface components.  Every component is a jax pytree whose numeric
parameters are traced, so one compiled evaluator serves all random states of the
same structure.  Eulerian components are written as functions of (x, t) and
Lagrangian ones as functions of (X, t); :class:`Frame` turns either into
functions of (X, t) and supplies the referential and spatial operators.
"""

from __future__ import annotations

from dataclasses import dataclass, field, fields as dc_fields
from typing import Any

import jax
import jax.numpy as jnp
import numpy as np

from .kinematics import EPS0, MU0, DiffConfig, Ops, curl_from_grad, div_from_grad

tmap = jax.tree_util.tree_map


def pytree(*meta):
    """Register a frozen dataclass as a pytree; ``meta`` names static fields."""

    def wrap(cls):
        cls = dataclass(frozen=True)(cls)
        names = [f.name for f in dc_fields(cls)]
        data = [n for n in names if n not in meta]
        return jax.tree_util.register_dataclass(cls, data_fields=data, meta_fields=list(meta))

    return wrap


def traced_memo(fn):
    """Reuse a method's value for the same (X, t) objects within one trace.

    Evaluators are retraced many times under nested jacobians; keying on object
    identity (with strong references) makes the reuse exact.
    """
    name = fn.__name__

    def wrapped(self, X, t):
        cache = self.__dict__.get("_memo")
        if cache is None:
            cache = {}
            object.__setattr__(self, "_memo", cache)
        key = (name, id(X), id(t))
        hit = cache.get(key)
        if hit is not None and hit[0] is X and hit[1] is t:
            out = hit[2]
        else:
            out = fn(self, X, t)
            cache[key] = (X, t, out)
        return dict(out) if isinstance(out, dict) else out

    wrapped.__name__ = name
    wrapped.__doc__ = fn.__doc__
    return wrapped


# ---------------------------------------------------------------------------
# smooth building blocks


@pytree()
class SmoothField:
    """f(y, t) = c + G y + r t + sum_n a_n sin(k_n . y + w_n t + p_n), any value shape."""

    const: Any
    lin: Any
    rate: Any
    amp: Any
    k: Any
    w: Any
    phase: Any

    def __call__(self, y, t):
        arg = self.k @ y + self.w * t + self.phase
        out = self.const + self.lin @ y + self.rate * t
        return out + jnp.tensordot(jnp.sin(arg), self.amp, axes=1)

    @classmethod
    def zeros(cls, shape=(3,), modes: int = 1) -> "SmoothField":
        shape = tuple(shape)
        return cls(
            const=np.zeros(shape),
            lin=np.zeros(shape + (3,)),
            rate=np.zeros(shape),
            amp=np.zeros((modes,) + shape),
            k=np.zeros((modes, 3)),
            w=np.zeros(modes),
            phase=np.zeros(modes),
        )

    @classmethod
    def constant(cls, value, modes: int = 1) -> "SmoothField":
        value = np.asarray(value, dtype=float)
        f = cls.zeros(value.shape, modes)
        return cls(value, f.lin, f.rate, f.amp, f.k, f.w, f.phase)

    @classmethod
    def random(cls, rng, shape=(3,), scale=1.0, modes=2, k_scale=1.0, w_scale=1.0, lin_scale=None,
               rate_scale=None) -> "SmoothField":
        shape = tuple(shape)
        lin_scale = scale if lin_scale is None else lin_scale
        rate_scale = scale if rate_scale is None else rate_scale
        return cls(
            const=scale * rng.standard_normal(shape),
            lin=lin_scale * rng.standard_normal(shape + (3,)),
            rate=rate_scale * rng.standard_normal(shape),
            amp=scale * rng.standard_normal((modes,) + shape),
            k=k_scale * rng.standard_normal((modes, 3)),
            w=w_scale * rng.standard_normal(modes),
            phase=rng.uniform(0.0, 2.0 * np.pi, modes),
        )

    def scaled(self, s) -> "SmoothField":
        return SmoothField(s * self.const, s * self.lin, s * self.rate, s * self.amp, self.k, self.w, self.phase)


def _scalar(f: SmoothField, y, t):
    return f(y, t)[0]


# ---------------------------------------------------------------------------
# motions


@pytree()
class SmoothMotion:
    """chi = (A0 + t A1 + t^2 A2) X + t c1 + t^2 c2 + sum_n d_n sin(k_n . X + w_n t + p_n)."""

    A0: Any
    A1: Any
    A2: Any
    c1: Any
    c2: Any
    wiggle: SmoothField

    def __call__(self, X, t):
        A = self.A0 + t * self.A1 + t * t * self.A2
        return A @ X + t * self.c1 + t * t * self.c2 + self.wiggle(X, t)

    @classmethod
    def affine(cls, F, v0=None, modes: int = 1) -> "SmoothMotion":
        z = np.zeros((3, 3))
        v0 = np.zeros(3) if v0 is None else np.asarray(v0, float)
        return cls(np.asarray(F, float), z, z, v0, np.zeros(3), SmoothField.zeros((3,), modes))

    @classmethod
    def identity(cls, modes: int = 1) -> "SmoothMotion":
        return cls.affine(np.eye(3), modes=modes)

    @classmethod
    def random(cls, rng, strain=0.15, rate=0.2, wiggle=0.03, modes=2) -> "SmoothMotion":
        A0 = np.eye(3) + strain * rng.standard_normal((3, 3))
        while np.linalg.det(A0) < 0.5:
            A0 = np.eye(3) + strain * rng.standard_normal((3, 3))
        return cls(
            A0=A0,
            A1=rate * rng.standard_normal((3, 3)),
            A2=0.5 * rate * rng.standard_normal((3, 3)),
            c1=rate * rng.standard_normal(3),
            c2=rate * rng.standard_normal(3),
            wiggle=SmoothField(np.zeros(3), np.zeros((3, 3)), np.zeros(3),
                               wiggle * rng.standard_normal((modes, 3)), rng.standard_normal((modes, 3)),
                               rng.standard_normal(modes), rng.uniform(0, 2 * np.pi, modes)),
        )


# ---------------------------------------------------------------------------
# electromagnetic components


@pytree()
class PotentialEM:
    """Eulerian fields satisfying the current-configuration Maxwell system exactly.

    B = curl A, E = -grad phi - dA/dt; P and M are free; rho_e and J are the
    charge and current demanded by the Gauss and Ampere laws (computed by jax).
    """

    A: SmoothField
    phi: SmoothField
    P: SmoothField
    M: SmoothField
    eps0: Any = EPS0
    mu0: Any = MU0
    kind = "eulerian"

    def _BE(self, x, t):
        gA = jax.jacfwd(self.A, argnums=0)(x, t)
        B = curl_from_grad(gA)
        E = -jax.grad(lambda y: _scalar(self.phi, y, t))(x) - jax.jacfwd(self.A, argnums=1)(x, t)
        return B, E

    def _DH(self, y, s):
        B, E = self._BE(y, s)
        return self.eps0 * E + self.P(y, s), B / self.mu0 - self.M(y, s)

    def eulerian(self, x, t):
        B, E = self._BE(x, t)
        gD, gH = jax.jacfwd(self._DH, argnums=0)(x, t)
        dD = jax.jvp(lambda s: self._DH(x, s)[0], (t,), (jnp.ones_like(t),))[1]
        Jf = curl_from_grad(gH) - dD
        return dict(B=B, E=E, P=self.P(x, t), M=self.M(x, t), Jfree=Jf, rho_e=jnp.trace(gD))

    @classmethod
    def random(cls, rng, scale=1.0, pol_scale=1e-11, mag_scale=1e5, modes=2, k_scale=1.0, w_scale=1.0):
        return cls(
            A=SmoothField.random(rng, (3,), scale, modes, k_scale, w_scale),
            phi=SmoothField.random(rng, (1,), scale, modes, k_scale, w_scale),
            P=SmoothField.random(rng, (3,), pol_scale, modes, k_scale, w_scale),
            M=SmoothField.random(rng, (3,), mag_scale, modes, k_scale, w_scale),
        )


@pytree()
class EulerianEMFields:
    """Independent smooth Eulerian fields (no Maxwell constraint)."""

    B: SmoothField
    E: SmoothField
    P: SmoothField
    M: SmoothField
    Jfree: SmoothField
    rho_e: SmoothField
    kind = "eulerian"

    def eulerian(self, x, t):
        return dict(B=self.B(x, t), E=self.E(x, t), P=self.P(x, t), M=self.M(x, t), Jfree=self.Jfree(x, t),
                    rho_e=_scalar(self.rho_e, x, t))

    @classmethod
    def random(cls, rng, scales=None, modes=2, k_scale=1.0, w_scale=1.0):
        s = dict(B=1.0, E=1.0, P=1.0, M=1.0, Jfree=1.0, rho_e=1.0)
        s.update(scales or {})
        mk = lambda n, shape: SmoothField.random(rng, shape, s[n], modes, k_scale, w_scale)  # noqa: E731
        return cls(mk("B", (3,)), mk("E", (3,)), mk("P", (3,)), mk("M", (3,)), mk("Jfree", (3,)), mk("rho_e", (1,)))

    @classmethod
    def uniform(cls, B=None, E=None, P=None, M=None, Jfree=None, rho_e=0.0, modes=1):
        c = lambda a: SmoothField.constant(np.zeros(3) if a is None else a, modes)  # noqa: E731
        return cls(c(B), c(E), c(P), c(M), c(Jfree), SmoothField.constant([rho_e], modes))


@pytree()
class LagrangianEMFields:
    """Independent smooth referential fields B_l, E_l, P_l, M_l, J_l (conduction) and rho_E."""

    B_l: SmoothField
    E_l: SmoothField
    P_l: SmoothField
    M_l: SmoothField
    J_l: SmoothField
    rho_E: SmoothField
    kind = "lagrangian"

    def lagrangian(self, X, t):
        return dict(B_l=self.B_l(X, t), E_l=self.E_l(X, t), P_l=self.P_l(X, t), M_l=self.M_l(X, t),
                    J_l=self.J_l(X, t), rho_E=_scalar(self.rho_E, X, t))

    @classmethod
    def random(cls, rng, scales=None, modes=2, k_scale=1.0, w_scale=1.0):
        s = dict(B_l=1.0, E_l=1.0, P_l=1.0, M_l=1.0, J_l=1.0, rho_E=1.0)
        s.update(scales or {})
        mk = lambda n, shape: SmoothField.random(rng, shape, s[n], modes, k_scale, w_scale)  # noqa: E731
        return cls(mk("B_l", (3,)), mk("E_l", (3,)), mk("P_l", (3,)), mk("M_l", (3,)), mk("J_l", (3,)),
                   mk("rho_E", (1,)))

    @classmethod
    def zeros(cls, modes=1):
        z = SmoothField.zeros((3,), modes)
        return cls(z, z, z, z, z, SmoothField.zeros((1,), modes))


@pytree()
class PlaneWaveEM:
    """E = e0 f(n.x - c t), B = (n x e0) f / c with f = sin(k s); P = M = J = 0.

    At c = 1/sqrt(eps0 mu0) this solves the vacuum system; other speeds leave the
    Ampere mismatch e0 f' (eps0 mu0 c - 1/c) in the starred form.
    """

    n: Any
    e0: Any
    speed: Any
    k: Any
    kind = "eulerian"

    def eulerian(self, x, t):
        s = self.n @ x - self.speed * t
        f = jnp.sin(self.k * s)
        E = self.e0 * f
        B = jnp.cross(self.n, self.e0) * f / self.speed
        z = jnp.zeros(3)
        return dict(B=B, E=E, P=z, M=z, Jfree=z, rho_e=jnp.zeros(()))

    def ampere_mismatch(self, x, t, eps0=EPS0, mu0=MU0):
        """Analytic value of curl B - eps0 mu0 dE/dt."""
        s = self.n @ x - self.speed * t
        fp = self.k * jnp.cos(self.k * s)
        return self.e0 * fp * (eps0 * mu0 * self.speed - 1.0 / self.speed)


# ---------------------------------------------------------------------------
# thermal, stress, vacuum and surface components


@pytree()
class EulerianThermal:
    """theta(x, t), heat flux q, volumetric source q_vol and entropy S (all Eulerian)."""

    theta: SmoothField
    q: SmoothField
    q_vol: SmoothField
    S: SmoothField
    kind = "eulerian"

    def eulerian(self, x, t):
        return dict(theta=_scalar(self.theta, x, t), q=self.q(x, t), q_vol=_scalar(self.q_vol, x, t),
                    S=_scalar(self.S, x, t))

    @classmethod
    def random(cls, rng, theta0=300.0, scale=1.0, modes=2):
        th = SmoothField.random(rng, (1,), scale, modes)
        th = SmoothField(th.const + theta0, th.lin, th.rate, th.amp, th.k, th.w, th.phase)
        return cls(th, SmoothField.random(rng, (3,), scale, modes), SmoothField.random(rng, (1,), scale, modes),
                   SmoothField.random(rng, (1,), scale, modes))

    @classmethod
    def uniform(cls, theta=300.0, modes=1):
        return cls(SmoothField.constant([theta], modes), SmoothField.zeros((3,), modes),
                   SmoothField.zeros((1,), modes), SmoothField.zeros((1,), modes))


@pytree()
class LagrangianThermal:
    """theta_l(X, t) = J theta, q_l = J F^-1 q, qv_l = J q_vol, entropy S."""

    theta_l: SmoothField
    q_l: SmoothField
    qv_l: SmoothField
    S: SmoothField
    kind = "lagrangian"

    def lagrangian(self, X, t):
        return dict(theta_l=_scalar(self.theta_l, X, t), q_l=self.q_l(X, t), qv_l=_scalar(self.qv_l, X, t),
                    S=_scalar(self.S, X, t))

    @classmethod
    def random(cls, rng, theta0=300.0, scale=1.0, modes=2):
        th = SmoothField.random(rng, (1,), scale, modes)
        th = SmoothField(th.const + theta0, th.lin, th.rate, th.amp, th.k, th.w, th.phase)
        return cls(th, SmoothField.random(rng, (3,), scale, modes), SmoothField.random(rng, (1,), scale, modes),
                   SmoothField.random(rng, (1,), scale, modes))

    @classmethod
    def zeros(cls, modes=1):
        return cls(SmoothField.zeros((1,), modes), SmoothField.zeros((3,), modes), SmoothField.zeros((1,), modes),
                   SmoothField.zeros((1,), modes))


@pytree()
class FourierThermal:
    """theta(x, t) given, q = sign * kappa grad(theta) (sign = -1 is Fourier's law)."""

    theta: SmoothField
    q_vol: SmoothField
    S: SmoothField
    kappa: Any
    sign: Any = -1.0
    kind = "eulerian"

    def eulerian(self, x, t):
        g = jax.grad(lambda y: _scalar(self.theta, y, t))(x)
        return dict(theta=_scalar(self.theta, x, t), q=self.sign * self.kappa @ g, q_vol=_scalar(self.q_vol, x, t),
                    S=_scalar(self.S, x, t))


@pytree()
class NominalStressField:
    """Prescribed nominal stress T(X, t) with components T[alpha, i]."""

    T: SmoothField
    kind = "field"

    def nominal(self, X, t):
        return self.T(X, t)


@pytree()
class CauchyStressField:
    """Prescribed Cauchy stress tau(x, t)."""

    tau: SmoothField
    kind = "cauchy"

    def cauchy(self, x, t):
        return self.tau(x, t)


@pytree()
class ModelStress:
    """Nominal stress from the scenario's free-energy model (plus -p F^-1 if constrained)."""

    p: Any = 0.0
    kind = "model"


@pytree()
class VacuumFields:
    """Starred fields E*, B* sampled at the material boundary point (X, t)."""

    E: SmoothField
    B: SmoothField

    def values(self, X, t):
        return dict(E=self.E(X, t), B=self.B(X, t))


@pytree()
class SurfaceFields:
    """Referential surface charge sigma_E, surface current K_l and traction t_A on the boundary."""

    N: Any
    sigma_E: SmoothField
    K_l: SmoothField
    t_A: SmoothField

    def values(self, X, t):
        return dict(sigma_E=_scalar(self.sigma_E, X, t), K_l=self.K_l(X, t), t_A=self.t_A(X, t))


# ---------------------------------------------------------------------------
# scenario


@pytree("model")
class Scenario:
    motion: Any
    em: Any
    thermal: Any = None
    stress: Any = None
    vacuum: Any = None
    surface: Any = None
    rho_r: Any = 1.0
    c_p: Any = 1.0
    kappa: Any = field(default_factory=lambda: np.eye(3))
    xi: Any = field(default_factory=lambda: np.zeros((3, 3)))
    eps0: Any = EPS0
    mu0: Any = MU0
    model: Any = None

    def chi(self, X, t):
        return self.motion(X, t)


# ---------------------------------------------------------------------------
# increments and perturbed families


@pytree()
class IncrementFields:
    """Increment fields over (X, t): displacement u at x = chi(X, t) and dotted referential primitives.

    ``em`` holds the increments of (B_l, E_l, P_l, M_l, J_l, rho_E); ``thermal`` those
    of (theta_l, q_l, qv_l); ``T`` the nominal-stress increment when the bias stress
    is a prescribed field; ``vacuum`` and ``surface`` the boundary increments.
    """

    u: SmoothField
    em: LagrangianEMFields
    thermal: Any = None
    T: Any = None
    vacuum: Any = None
    surface: Any = None


def smooth_step(eps, s):
    """sin(s eps)/s: unit slope at 0 with a nonzero cubic term (keeps the O(eps^2) error visible)."""
    return jnp.where(s == 0.0, eps, jnp.sin(s * eps) / jnp.where(s == 0.0, 1.0, s))


@pytree()
class _PerturbedEM:
    base: Any
    inc: Any
    eps: Any
    s: Any
    kind = "lagrangian"

    def lagrangian(self, X, t):
        b = self.base.lag_primitive(X, t)
        d = self.inc.em.lagrangian(X, t)
        k = smooth_step(self.eps, self.s)
        return {n: b[n] + k * d[n] for n in b}


@pytree()
class _PerturbedThermal:
    base: Any
    inc: Any
    eps: Any
    s: Any
    kind = "lagrangian"

    def lagrangian(self, X, t):
        b = self.base.thermal_lag_primitive(X, t)
        d = self.inc.thermal.lagrangian(X, t)
        k = smooth_step(self.eps, self.s)
        return dict(theta_l=b["theta_l"] + k * d["theta_l"], q_l=b["q_l"] + k * d["q_l"],
                    qv_l=b["qv_l"] + k * d["qv_l"], S=b["S"])


@pytree()
class _PerturbedStress:
    base: Any
    inc: Any
    eps: Any
    s: Any
    kind = "field"

    def nominal(self, X, t):
        return self.base.nominal_field(X, t) + smooth_step(self.eps, self.s) * self.inc.T(X, t)


@pytree()
class _PerturbedVacuum:
    base: Any
    inc: Any
    eps: Any
    s: Any

    def values(self, X, t):
        b = self.base.sc.vacuum.values(X, t)
        d = self.inc.vacuum.values(X, t)
        k = smooth_step(self.eps, self.s)
        return {n: b[n] + k * d[n] for n in b}


@pytree()
class _PerturbedSurface:
    base: Any
    inc: Any
    eps: Any
    s: Any

    @property
    def N(self):
        return self.base.sc.surface.N

    def values(self, X, t):
        b = self.base.sc.surface.values(X, t)
        d = self.inc.surface.values(X, t)
        k = smooth_step(self.eps, self.s)
        return {n: b[n] + k * d[n] for n in b}


@pytree()
class _PerturbedMotion:
    base: Any
    u: Any
    eps: Any
    s: Any

    def __call__(self, X, t):
        return self.base(X, t) + smooth_step(self.eps, self.s) * self.u(X, t)


def perturbed(sc: Scenario, inc: IncrementFields, eps, s=30.0, config: DiffConfig | None = None) -> Scenario:
    """The one-parameter family chi + k(eps) u, primitives + k(eps) increments, k = sin(s eps)/s.

    Primitive fields of the family are referential, so the bias is first pulled
    back with the bias motion.
    """
    base = Frame(sc, config)
    em = _PerturbedEM(base, inc, eps, s)
    thermal = sc.thermal
    if sc.thermal is not None and inc.thermal is not None:
        thermal = _PerturbedThermal(base, inc, eps, s)
    stress = sc.stress
    if sc.stress is not None and sc.stress.kind != "model" and inc.T is not None:
        stress = _PerturbedStress(base, inc, eps, s)
    vacuum = sc.vacuum if inc.vacuum is None else _PerturbedVacuum(base, inc, eps, s)
    surface = sc.surface if inc.surface is None else _PerturbedSurface(base, inc, eps, s)
    return Scenario(
        motion=_PerturbedMotion(sc.motion, inc.u, eps, s),
        em=em,
        thermal=thermal,
        stress=stress,
        vacuum=vacuum,
        surface=surface,
        rho_r=sc.rho_r,
        c_p=sc.c_p,
        kappa=sc.kappa,
        xi=sc.xi,
        eps0=sc.eps0,
        mu0=sc.mu0,
        model=sc.model,
    )


# ---------------------------------------------------------------------------
# operator frame


@pytree("config")
class Frame:
    """Operators on (X, t) evaluators of a scenario.

    ``grad`` is the spatial gradient (d/dX) F^-1, ``st`` the spatial time
    partial (at fixed x), ``mt`` the material time derivative (at fixed X).
    """

    sc: Any
    config: Any = None

    @property
    def ops(self) -> Ops:
        return Ops(self.config or DiffConfig())

    # kinematics
    def x(self, X, t):
        return self.sc.chi(X, t)

    @traced_memo
    def F(self, X, t):
        return self.ops.jac(self.sc.chi)(X, t)

    @traced_memo
    def v(self, X, t):
        return self.ops.dt(self.sc.chi)(X, t)

    def a(self, X, t):
        return self.ops.dt(self.v)(X, t)

    @traced_memo
    def kin(self, X, t):
        F = self.F(X, t)
        Fi = jnp.linalg.inv(F)
        J = jnp.linalg.det(F)
        v = self.v(X, t)
        return dict(F=F, Finv=Fi, J=J, c=F.T @ F, v=v, V=Fi @ v)

    # operators
    def Grad(self, f):
        return self.ops.jac(f)

    def grad(self, f):
        jf = self.ops.jac(f)

        def g(X, t):
            Fi = jnp.linalg.inv(self.F(X, t))
            return tmap(lambda a: a @ Fi, jf(X, t))

        return g

    def div(self, f):
        gf = self.grad(f)
        return lambda X, t: tmap(div_from_grad, gf(X, t))

    def curl(self, f):
        gf = self.grad(f)
        return lambda X, t: tmap(curl_from_grad, gf(X, t))

    def Div(self, f):
        jf = self.ops.jac(f)
        return lambda X, t: tmap(div_from_grad, jf(X, t))

    def Curl(self, f):
        jf = self.ops.jac(f)
        return lambda X, t: tmap(curl_from_grad, jf(X, t))

    def mt(self, f):
        return self.ops.dt(f)

    def st(self, f):
        dtf = self.ops.dt(f)
        gf = self.grad(f)

        def g(X, t):
            v = self.v(X, t)
            return tmap(lambda d, gr: d - gr @ v, dtf(X, t), gf(X, t))

        return g

    # electromagnetic fields
    @traced_memo
    def lag_primitive(self, X, t):
        em = self.sc.em
        if em.kind == "lagrangian":
            return em.lagrangian(X, t)
        e = em.eulerian(self.x(X, t), t)
        k = self.kin(X, t)
        J, Fi, F = k["J"], k["Finv"], k["F"]
        return dict(B_l=J * Fi @ e["B"], E_l=F.T @ e["E"], P_l=J * Fi @ e["P"], M_l=F.T @ e["M"],
                    J_l=J * Fi @ e["Jfree"], rho_E=J * e["rho_e"])

    @traced_memo
    def eul(self, X, t):
        """Eulerian B, E, P, M, Jfree, rho_e at x = chi(X, t), plus effective fields."""
        em = self.sc.em
        k = self.kin(X, t)
        if em.kind == "eulerian":
            e = dict(em.eulerian(self.x(X, t), t))
        else:
            lg = em.lagrangian(X, t)
            J, F, Fi = k["J"], k["F"], k["Finv"]
            e = dict(B=F @ lg["B_l"] / J, E=Fi.T @ lg["E_l"], P=F @ lg["P_l"] / J, M=Fi.T @ lg["M_l"],
                     Jfree=F @ lg["J_l"] / J, rho_e=lg["rho_E"] / J)
        v = k["v"]
        e["J_e"] = e["Jfree"] - e["rho_e"] * v
        e["E_e"] = e["E"] + jnp.cross(v, e["B"])
        e["M_e"] = e["M"] + jnp.cross(v, e["P"])
        return e

    @traced_memo
    def lag(self, X, t):
        """Referential fields with J_E = J_l - rho_E V, E_el = E_l + V x B_l, M_el = M_l + V x P_l."""
        lg = dict(self.lag_primitive(X, t))
        V = self.kin(X, t)["V"]
        lg["J_E"] = lg["J_l"] - lg["rho_E"] * V
        lg["E_el"] = lg["E_l"] + jnp.cross(V, lg["B_l"])
        lg["M_el"] = lg["M_l"] + jnp.cross(V, lg["P_l"])
        return lg

    # thermal fields
    @traced_memo
    def thermal_lag_primitive(self, X, t):
        th = self.sc.thermal
        if th.kind == "lagrangian":
            return th.lagrangian(X, t)
        e = th.eulerian(self.x(X, t), t)
        k = self.kin(X, t)
        return dict(theta_l=k["J"] * e["theta"], q_l=k["J"] * k["Finv"] @ e["q"], qv_l=k["J"] * e["q_vol"], S=e["S"])

    @traced_memo
    def thermal_eul(self, X, t):
        th = self.sc.thermal
        if th.kind == "eulerian":
            return th.eulerian(self.x(X, t), t)
        lg = th.lagrangian(X, t)
        k = self.kin(X, t)
        J = k["J"]
        return dict(theta=lg["theta_l"] / J, q=k["F"] @ lg["q_l"] / J, q_vol=lg["qv_l"] / J, S=lg["S"])

    # stress
    @traced_memo
    def nominal_field(self, X, t):
        """Nominal stress T(X, t) of the scenario (prescribed field or free-energy model)."""
        st = self.sc.stress
        if st.kind == "field":
            return st.nominal(X, t)
        k = self.kin(X, t)
        if st.kind == "cauchy":
            tau = st.cauchy(self.x(X, t), t)
            return k["J"] * k["Finv"] @ tau
        return self.model_response(X, t)["T"]

    def cauchy(self, X, t):
        k = self.kin(X, t)
        return k["F"] @ self.nominal_field(X, t) / k["J"]

    @traced_memo
    def model_response(self, X, t):
        """T, P_l, M_el from the scenario model at the local (F, E_el, B_l, theta_l)."""
        model = self.sc.model
        k = self.kin(X, t)
        lg = self.lag(X, t)
        theta_l = self.thermal_lag_primitive(X, t)["theta_l"] if self.sc.thermal is not None else model.reference_temperature()
        F = k["F"]
        gF, gE, gB = jax.grad(lambda FF, ee, bb: model.energy(FF, ee, bb, theta_l), argnums=(0, 1, 2))(
            F, lg["E_el"], lg["B_l"])
        T = gF.T
        if model.incompressible:
            p = self.sc.stress.p if self.sc.stress is not None and self.sc.stress.kind == "model" else 0.0
            T = T - p * k["Finv"]
        return dict(T=T, P_l=-gE, M_el=-gB)


__all__ = [
    "CauchyStressField",
    "EulerianEMFields",
    "EulerianThermal",
    "FourierThermal",
    "Frame",
    "IncrementFields",
    "LagrangianEMFields",
    "LagrangianThermal",
    "ModelStress",
    "NominalStressField",
    "PlaneWaveEM",
    "PotentialEM",
    "Scenario",
    "SmoothField",
    "SmoothMotion",
    "SurfaceFields",
    "VacuumFields",
    "perturbed",
    "pytree",
    "smooth_step",
]
