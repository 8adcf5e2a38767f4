"""Increment algebra: linearized Maxwell, momentum and heat residuals about a biased motion.

An increment is described by :class:`~emat.fields.IncrementFields` over (X, t):
the displacement u (carried to x = chi(X, t)) and the dotted referential
primitives.  With L = grad u the perturbed family chi + eps u has

    Fdot = L F,  Jdot = J div u,  vdot = u_t,  Vdot = F^-1 (u_t - L v),

and every evaluator here is the eps-derivative of a finite residual from
:mod:`emat.balance` at eps = 0 (Eulerian forms are its push-forward).  Terms
are labeled for term-level tests.  Two switches restore the forms as printed
in the source derivation: ``printed_forms`` (sign and factor slips) and
``literal_L_inverse`` (inverse displacement gradients in the jump conditions);
both change the residuals and are reported as flagged.
"""

from __future__ import annotations

from dataclasses import dataclass

import jax
import jax.numpy as jnp
import numpy as np

from . import balance as bal
from .constitutive import NVAR, SL_B, SL_E, SL_F, IX_T, ModuliSet, UpdatedModuliSet, pack
from .fields import Frame, IncrementFields, Scenario, perturbed, pytree, traced_memo
from .kinematics import DiffConfig, Kinematics
from .report import ResidualReport, make_report, run_kernel
from .tensor_core import TensorError, Ten3, moduli_products, perm_contract

cross = jnp.cross

# ---------------------------------------------------------------------------
# increment frame


@pytree("printed", "literal", "closure")
class IncFrame:
    """Bias frame plus increment fields; all accessors are functions of (X, t).

    With ``closure`` the stress, polarization, magnetization, conduction-current
    and heat-flux increments come from the incremental constitutive and
    conduction laws instead of the increment fields.
    """

    fr: Frame
    inc: IncrementFields
    printed: bool = False
    literal: bool = False
    closure: bool = False

    @property
    def sc(self):
        return self.fr.sc

    # kinematic increments
    def u(self, X, t):
        return self.inc.u(X, t)

    @traced_memo
    def L(self, X, t):
        return self.fr.grad(self.u)(X, t)

    @traced_memo
    def divu(self, X, t):
        return jnp.trace(self.L(X, t))

    @traced_memo
    def ut(self, X, t):
        return self.fr.mt(self.u)(X, t)

    def utt(self, X, t):
        return self.fr.mt(self.ut)(X, t)

    @traced_memo
    def w(self, X, t):
        """u_t - L v, the push-forward of F Vdot."""
        return self.ut(X, t) - self.L(X, t) @ self.fr.v(X, t)

    @traced_memo
    def Vdot(self, X, t):
        return self.fr.kin(X, t)["Finv"] @ self.w(X, t)

    # dotted referential fields
    @traced_memo
    def dl(self, X, t):
        """Dotted primitives plus Jdot_E, Edot_el, Mdot_el (closure-aware)."""
        if self.closure:
            return self._dl_closure(X, t)
        d = dict(self.inc.em.lagrangian(X, t))
        return self._derived_dots(d, X, t)

    def _derived_dots(self, d, X, t):
        lg = self.fr.lag(X, t)
        V = self.fr.kin(X, t)["V"]
        Vd = self.Vdot(X, t)
        d["Vdot"] = Vd
        d["J_E"] = d["J_l"] - d["rho_E"] * V - lg["rho_E"] * Vd
        d["E_el"] = d["E_l"] + cross(Vd, lg["B_l"]) + cross(V, d["B_l"])
        if "M_el" not in d:
            d["M_el"] = d["M_l"] + cross(Vd, lg["P_l"]) + cross(V, d["P_l"])
        return d

    def _dl_closure(self, X, t):
        k = self.fr.kin(X, t)
        F, Fi, J = k["F"], k["Finv"], k["J"]
        d0 = self.d0(X, t)
        return self._derived_dots(
            dict(B_l=J * Fi @ d0["B_l0"], E_l=F.T @ d0["E_l0"], P_l=J * Fi @ d0["P_l0"], M_l=F.T @ d0["M_l0"],
                 M_el=F.T @ d0["M_el0"], J_l=J * Fi @ d0["J_l0"], rho_E=J * d0["rho_E0"]), X, t)

    @traced_memo
    def d0(self, X, t):
        """Pushed-forward increments: B_l0, P_l0, E_l0, M_l0, M_el0, rho_E0, J_l0, J_E0, E_el0."""
        k = self.fr.kin(X, t)
        F, Fi, J, v = k["F"], k["Finv"], k["J"], k["v"]
        d = dict(self.inc.em.lagrangian(X, t))
        e = self.fr.eul(X, t)
        w = self.w(X, t)
        L = self.L(X, t)
        out = dict(B_l0=F @ d["B_l"] / J, E_l0=Fi.T @ d["E_l"], rho_E0=d["rho_E"] / J)
        out["E_el0"] = out["E_l0"] + cross(v, out["B_l0"]) + cross(w, e["B"])
        if self.closure:
            th0 = self.th0(X, t)["theta_l0"]
            _, P0, Mel0 = _updated_products(self.umod(X, t), L, out["E_el0"], out["B_l0"], th0, jnp)
            out["P_l0"] = P0
            out["M_el0"] = Mel0
            out["M_l0"] = Mel0 - cross(w, e["P"]) - cross(v, P0)
            out["J_l0"] = _ohm_increment(self.sc.xi, L, e["E"], out["E_l0"])
        else:
            out["P_l0"] = F @ d["P_l"] / J
            out["M_l0"] = Fi.T @ d["M_l"]
            out["M_el0"] = out["M_l0"] + cross(w, e["P"]) + cross(v, out["P_l0"])
            out["J_l0"] = F @ d["J_l"] / J
        out["J_E0"] = out["J_l0"] - out["rho_E0"] * v - e["rho_e"] * w
        return out

    # thermal increments
    @traced_memo
    def thl(self, X, t):
        th = self.inc.thermal.lagrangian(X, t)
        return dict(theta_l=th["theta_l"], q_l=th["q_l"], qv_l=th["qv_l"])

    @traced_memo
    def th0(self, X, t):
        k = self.fr.kin(X, t)
        if self.inc.thermal is None:
            z = jnp.zeros(())
            return dict(theta_l0=z, q_l0=jnp.zeros(3), qv_l0=z)
        th = self.thl(X, t)
        out = dict(theta_l0=th["theta_l"] / k["J"], q_l0=k["F"] @ th["q_l"] / k["J"], qv_l0=th["qv_l"] / k["J"])
        if self.closure:
            out["q_l0"] = self.fourier0(X, t)
        return out

    @traced_memo
    def fourier0(self, X, t):
        """Incremented Fourier law in the current configuration."""
        kap = self.sc.kappa
        L = self.L(X, t)
        divu = jnp.trace(L)
        gth = self.fr.grad(_theta_fn(self.fr))(X, t)

        def combo(Y, s):
            k = self.fr.kin(Y, s)
            return self.inc.thermal.lagrangian(Y, s)["theta_l"] / k["J"] - self.divu(Y, s) * _theta_fn(self.fr)(Y, s)

        gc = self.fr.grad(combo)(X, t)
        two = 2.0 * L @ kap if self.printed else L @ kap + kap @ L.T
        return -divu * kap @ gth + two @ gth - kap @ gc

    # stress and constitutive increments
    @traced_memo
    def hessian(self, X, t):
        k = self.fr.kin(X, t)
        lg = self.fr.lag(X, t)
        model = self.sc.model
        if self.sc.thermal is not None:
            th = self.fr.thermal_lag_primitive(X, t)["theta_l"]
        else:
            th = jnp.asarray(model.reference_temperature(), dtype=float)
        z = pack(k["F"], lg["E_el"], lg["B_l"], th)
        return jax.hessian(model.energy_packed)(z)

    @traced_memo
    def moduli(self, X, t):
        mod = _moduli_arrays(self.hessian(X, t))
        if self.sc.model.incompressible and self.sc.stress is not None and self.sc.stress.kind == "model":
            Fi = self.fr.kin(X, t)["Finv"]
            mod["AA"] = mod["AA"] + self.sc.stress.p * jnp.einsum("aj,bi->aibj", Fi, Fi)
        return mod

    @traced_memo
    def umod(self, X, t):
        k = self.fr.kin(X, t)
        return _updated_arrays(self.moduli(X, t), k["F"], k["J"], k["Finv"])

    @traced_memo
    def Tdot(self, X, t):
        """Nominal stress increment (field, or incremental constitutive law)."""
        k = self.fr.kin(X, t)
        if self.closure or self.sc.stress.kind == "model":
            d = self.dl(X, t) if not self.closure else None
            if self.closure:
                return k["J"] * k["Finv"] @ self.T0dot(X, t)
            th = self.thl(X, t)["theta_l"] if self.inc.thermal is not None else 0.0
            T, _, _ = _referential_products(self.moduli(X, t), self.L(X, t) @ k["F"], d["E_el"], d["B_l"], th, jnp)
            return T
        return self.inc.T(X, t)

    @traced_memo
    def T0dot(self, X, t):
        k = self.fr.kin(X, t)
        if self.closure:
            d0 = self.d0(X, t)
            th0 = self.th0(X, t)["theta_l0"]
            T0, _, _ = _updated_products(self.umod(X, t), self.L(X, t), d0["E_el0"], d0["B_l0"], th0, jnp)
            return T0
        return k["F"] @ self.Tdot(X, t) / k["J"]


def _theta_fn(fr):
    return lambda Y, s: fr.thermal_eul(Y, s)["theta"]


def _ohm_increment(xi, L, E, E_l0):
    """Jdot_l0 = (div u) xi E - (L xi + xi L^T) E + xi Edot_l0."""
    return jnp.trace(L) * xi @ E - (L @ xi + xi @ L.T) @ E + xi @ E_l0


# ---------------------------------------------------------------------------
# moduli as plain arrays (traceable)


def _moduli_arrays(H):
    xp = jnp if isinstance(H, jax.Array) else np
    blk = H[SL_F, SL_F].reshape(3, 3, 3, 3)
    return dict(
        AA=xp.transpose(blk, (1, 0, 3, 2)),
        BB=xp.transpose(H[SL_F, SL_E].reshape(3, 3, 3), (1, 0, 2)),
        CC=xp.transpose(H[SL_F, SL_B].reshape(3, 3, 3), (1, 0, 2)),
        DD=H[SL_F, IX_T].reshape(3, 3).T,
        FF=xp.transpose(H[SL_E, SL_F].reshape(3, 3, 3), (0, 2, 1)),
        KK=xp.transpose(H[SL_B, SL_F].reshape(3, 3, 3), (0, 2, 1)),
        GG=H[SL_E, SL_E],
        HH=H[SL_E, SL_B],
        II=H[SL_E, IX_T],
        LL=H[SL_B, SL_E],
        MM=H[SL_B, SL_B],
        NN=H[SL_B, IX_T],
    )


def _updated_arrays(m, F, J, Fi):
    xp = jnp if isinstance(F, jax.Array) else np
    return dict(
        A0=xp.einsum("pa,qb,aibj->piqj", F, F, m["AA"]) / J,
        B0=xp.einsum("ia,kb,ajb->ijk", F, F, m["BB"]) / J,
        C0=xp.einsum("ia,bk,ajb->ijk", F, Fi, m["CC"]),
        D0=F @ m["DD"],
        G0=F @ m["GG"] @ F.T / J,
        H0=F @ m["HH"] @ Fi,
        I0=F @ m["II"],
        M0=J * Fi.T @ m["MM"] @ Fi,
        N0=J * Fi.T @ m["NN"],
    )


def _referential_products(m, Fd, Ed, Bd, thd, xp):
    T = xp.einsum("aibj,jb->ai", m["AA"], Fd) + xp.einsum("aib,b->ai", m["BB"], Ed) \
        + xp.einsum("aib,b->ai", m["CC"], Bd) + m["DD"] * thd
    P = -(xp.einsum("iaj,ja->i", m["FF"], Fd) + m["GG"] @ Ed + m["HH"] @ Bd + m["II"] * thd)
    M = -(xp.einsum("iaj,ja->i", m["KK"], Fd) + m["LL"] @ Ed + m["MM"] @ Bd + m["NN"] * thd)
    return T, P, M


def _updated_products(u, L, Ed0, Bd0, thd0, xp):
    T0 = xp.einsum("piqj,jq->pi", u["A0"], L) + xp.einsum("ijk,k->ij", u["B0"], Ed0) \
        + xp.einsum("ijk,k->ij", u["C0"], Bd0) + u["D0"] * thd0
    P0 = -(xp.einsum("ijk,ji->k", u["B0"], L) + u["G0"] @ Ed0 + u["H0"] @ Bd0 + u["I0"] * thd0)
    M0 = -(xp.einsum("ijk,ji->k", u["C0"], L) + u["H0"].T @ Ed0 + u["M0"] @ Bd0 + u["N0"] * thd0)
    return T0, P0, M0


# ---------------------------------------------------------------------------
# point-level algebra


@dataclass(frozen=True)
class IncrementalState:
    """Dotted referential increments at a point (any missing entry is zero)."""

    B_l: np.ndarray = None
    E_l: np.ndarray = None
    P_l: np.ndarray = None
    M_l: np.ndarray = None
    M_el: np.ndarray = None
    J_E: np.ndarray = None
    J_l: np.ndarray = None
    rho_E: float = 0.0
    theta_l: float = 0.0
    q_l: np.ndarray = None
    q_vol: float = 0.0
    w_E: float = 0.0
    sigma_E: float = 0.0
    K_l: np.ndarray = None

    def __post_init__(self):
        for name in ("B_l", "E_l", "P_l", "M_l", "M_el", "J_E", "J_l", "q_l", "K_l"):
            a = getattr(self, name)
            a = np.zeros(3) if a is None else np.asarray(a, dtype=float)
            if a.shape != (3,):
                raise TensorError(f"{name} must be a 3-vector")
            object.__setattr__(self, name, a)
        for name in ("rho_E", "theta_l", "q_vol", "w_E", "sigma_E"):
            object.__setattr__(self, name, float(getattr(self, name)))


@dataclass(frozen=True)
class UpdatedIncrements:
    """Pushed-forward increments (subscript 0 quantities)."""

    B_l0: np.ndarray
    E_l0: np.ndarray
    P_l0: np.ndarray
    M_l0: np.ndarray
    M_el0: np.ndarray
    J_E0: np.ndarray
    J_l0: np.ndarray
    rho_E0: float
    theta_l0: float
    q_l0: np.ndarray
    q_vol0: float
    w_E0: float
    sigma_E0: float = 0.0
    K_l0: np.ndarray = None


def push_forward_increments(inc: IncrementalState, kin: Kinematics, area_ratio: float | None = None
                            ) -> UpdatedIncrements:
    """Bdot_l0 = J^-1 F Bdot_l, Pdot_l0 = J^-1 F Pdot_l, Edot_l0 = F^-T Edot_l, Mdot_el0 = F^-T Mdot_el, ...

    Thermal: theta_l0 = J^-1 theta_l, q_l0 = J^-1 F q_l, q_vol0 = J^-1 q_vol, w_E0 = J^-1 w_E.
    Surface sources use the Nanson ratio da/dA when given.
    """
    F, Fi, J = np.asarray(kin.F, float), np.asarray(kin.Finv, float), float(kin.J)
    if J <= 0:
        raise TensorError("det F must be positive")
    ratio = 1.0 if area_ratio is None else float(area_ratio)
    return UpdatedIncrements(
        B_l0=F @ inc.B_l / J, E_l0=Fi.T @ inc.E_l, P_l0=F @ inc.P_l / J, M_l0=Fi.T @ inc.M_l,
        M_el0=Fi.T @ inc.M_el, J_E0=F @ inc.J_E / J, J_l0=F @ inc.J_l / J, rho_E0=inc.rho_E / J,
        theta_l0=inc.theta_l / J, q_l0=F @ inc.q_l / J, q_vol0=inc.q_vol / J, w_E0=inc.w_E / J,
        sigma_E0=inc.sigma_E / ratio, K_l0=F @ inc.K_l / ratio,
    )


def pull_back_increments(up: UpdatedIncrements, kin: Kinematics, area_ratio: float | None = None
                         ) -> IncrementalState:
    """Exact inverse of :func:`push_forward_increments`."""
    F, Fi, J = np.asarray(kin.F, float), np.asarray(kin.Finv, float), float(kin.J)
    ratio = 1.0 if area_ratio is None else float(area_ratio)
    K_l0 = np.zeros(3) if up.K_l0 is None else up.K_l0
    return IncrementalState(
        B_l=J * Fi @ up.B_l0, E_l=F.T @ up.E_l0, P_l=J * Fi @ up.P_l0, M_l=F.T @ up.M_l0, M_el=F.T @ up.M_el0,
        J_E=J * Fi @ up.J_E0, J_l=J * Fi @ up.J_l0, rho_E=J * up.rho_E0, theta_l=J * up.theta_l0,
        q_l=J * Fi @ up.q_l0, q_vol=J * up.q_vol0, w_E=J * up.w_E0, sigma_E=up.sigma_E0 * ratio,
        K_l=Fi @ K_l0 * ratio,
    )


@dataclass(frozen=True)
class AuxiliaryIncrementals:
    E_hat: np.ndarray
    E_el0: np.ndarray
    J_E0: np.ndarray
    J_l0: np.ndarray


def auxiliary_fields(L, E, B, v, u_t, E_l0, B_l0, rho_E0=0.0, rho_e=0.0, xi=None) -> AuxiliaryIncrementals:
    """Ehat = Edot_l0 + (div u) E - (L + L^T) E;  Edot_el0 = Edot_l0 + v x Bdot_l0 + (u_t - L v) x B;
    Jdot_E0 = Jdot_l0 - rhodot_E0 v - rho_e (u_t - L v) with the incremented Ohm law for Jdot_l0."""
    L, E, B, v, u_t, E_l0, B_l0 = (np.asarray(a, dtype=float) for a in (L, E, B, v, u_t, E_l0, B_l0))
    xi = np.zeros((3, 3)) if xi is None else np.asarray(xi, dtype=float)
    E_hat = E_l0 + np.trace(L) * E - (L + L.T) @ E
    w = u_t - L @ v
    E_el0 = E_l0 + np.cross(v, B_l0) + np.cross(w, B)
    J_l0 = np.trace(L) * xi @ E - (L @ xi + xi @ L.T) @ E + xi @ E_l0
    return AuxiliaryIncrementals(E_hat, E_el0, J_l0 - rho_E0 * v - rho_e * w, J_l0)


def incremental_constitutive(mod: ModuliSet, Fdot, Edot_el, Bdot_l, thetadot_l=0.0):
    """Tdot = A Fdot + B Edot_el + C Bdot_l + D thetadot_l;  Pdot_l = -(F Fdot + G Edot_el + H Bdot_l + I thetadot_l);
    Mdot_el = -(K Fdot + L Edot_el + M Bdot_l + N thetadot_l)."""
    Fdot, Ed, Bd = (np.asarray(a, dtype=float) for a in (Fdot, Edot_el, Bdot_l))
    if Fdot.shape != (3, 3) or Ed.shape != (3,) or Bd.shape != (3,):
        raise TensorError("increments must be a 3x3 Fdot and 3-vectors Edot_el, Bdot_l")
    th = float(thetadot_l)
    T = moduli_products(mod.AA, Fdot) + moduli_products(mod.BB, Ed) + moduli_products(mod.CC, Bd) + mod.DD * th
    P = -(moduli_products(mod.FF, Fdot) + moduli_products(mod.GG, Ed) + moduli_products(mod.HH, Bd) + mod.II * th)
    M = -(moduli_products(mod.KK, Fdot) + moduli_products(mod.LL, Ed) + moduli_products(mod.MM, Bd) + mod.NN * th)
    return T, P, M


def incremental_constitutive_updated(umod: UpdatedModuliSet, L, Edot_el0, Bdot_l0, thetadot_l0=0.0):
    """Tdot0 = A0 L + B0 Edot_el0 + C0 Bdot_l0 + D0 thetadot_l0, and the matching Pdot_l0, Mdot_el0."""
    L, Ed, Bd = (np.asarray(a, dtype=float) for a in (L, Edot_el0, Bdot_l0))
    if L.shape != (3, 3) or Ed.shape != (3,) or Bd.shape != (3,):
        raise TensorError("increments must be a 3x3 L and 3-vectors Edot_el0, Bdot_l0")
    u = {k: (v.data if isinstance(v, Ten3) else v) for k, v in umod.blocks().items()}
    return _updated_products(u, L, Ed, Bd, float(thetadot_l0), np)


def incremental_conduction_point(kappa, xi, L, grad_theta, grad_combo, E, E_l0, printed_forms=False):
    """qdot_l0 = -(div u) kappa grad(theta) + (L kappa + kappa L^T) grad(theta) - kappa grad[thetadot_l0 - (div u) theta]
    and Jdot_l0 = (div u) xi E - (L xi + xi L^T) E + xi Edot_l0 (printed: 2 L kappa and xi[...] forms)."""
    kappa, xi, L, g, gc, E, E0 = (np.asarray(a, dtype=float) for a in (kappa, xi, L, grad_theta, grad_combo, E,
                                                                        E_l0))
    divu = np.trace(L)
    sym = 2.0 * L @ kappa if printed_forms else L @ kappa + kappa @ L.T
    q0 = -divu * kappa @ g + sym @ g - kappa @ gc
    if printed_forms:
        J0 = xi @ ((divu * np.eye(3) - L - L.T) @ E + E0)
    else:
        J0 = divu * xi @ E - (L @ xi + xi @ L.T) @ E + xi @ E0
    return q0, J0


# ---------------------------------------------------------------------------
# kernels: sources


def fdot_E_terms(f: IncFrame, X, t):
    """Increment of the referential body force, one entry per printed line."""
    fr = f.fr
    k = fr.kin(X, t)
    F, Fi, J, V = k["F"], k["Finv"], k["J"], k["V"]
    lg = fr.lag(X, t)
    d = f.dl(X, t)
    L = f.L(X, t)
    divu = jnp.trace(L)
    Vd = f.Vdot(X, t)
    s2 = 2.0 if f.printed else -2.0
    Ee = Fi.T @ lg["E_l"]
    FP, FB, FJ = F @ lg["P_l"], F @ lg["B_l"], F @ lg["J_l"]
    FPd = L @ FP + F @ d["P_l"]
    FBd = L @ FB + F @ d["B_l"]
    Ml = Fi.T @ lg["M_l"]

    def E_sp(Y, s):
        return fr.kin(Y, s)["Finv"].T @ fr.lag(Y, s)["E_l"]

    def E_sp_dot(Y, s):
        kk = fr.kin(Y, s)
        return -f.L(Y, s).T @ kk["Finv"].T @ fr.lag(Y, s)["E_l"] + kk["Finv"].T @ f.dl(Y, s)["E_l"]

    def b(Y, s):
        kk = fr.kin(Y, s)
        return kk["F"] @ fr.lag(Y, s)["B_l"] / kk["J"]

    def b_dot(Y, s):
        kk = fr.kin(Y, s)
        LL = f.L(Y, s)
        FB_ = kk["F"] @ fr.lag(Y, s)["B_l"]
        return (-jnp.trace(LL) * FB_ + LL @ FB_ + kk["F"] @ f.dl(Y, s)["B_l"]) / kk["J"]

    def w_pb(Y, s):
        kk = fr.kin(Y, s)
        ll = fr.lag(Y, s)
        return cross(kk["F"] @ ll["P_l"], kk["F"] @ ll["B_l"]) / kk["J"] ** 2

    def w_pb_dot(Y, s):
        kk = fr.kin(Y, s)
        ll = fr.lag(Y, s)
        dd = f.dl(Y, s)
        LL = f.L(Y, s)
        FP_, FB_ = kk["F"] @ ll["P_l"], kk["F"] @ ll["B_l"]
        return (s2 * jnp.trace(LL) * cross(FP_, FB_) + cross(LL @ FP_ + kk["F"] @ dd["P_l"], FB_)
                + cross(FP_, LL @ FB_ + kk["F"] @ dd["B_l"])) / kk["J"] ** 2

    def Vq(Y, s):
        kk = fr.kin(Y, s)
        ll = fr.lag(Y, s)
        return jnp.outer(kk["V"], cross(kk["F"] @ ll["P_l"], kk["F"] @ ll["B_l"])) / kk["J"]

    def Vq_dot(Y, s):
        kk = fr.kin(Y, s)
        ll = fr.lag(Y, s)
        dd = f.dl(Y, s)
        LL = f.L(Y, s)
        FP_, FB_ = kk["F"] @ ll["P_l"], kk["F"] @ ll["B_l"]
        q = cross(FP_, FB_)
        qd = cross(LL @ FP_ + kk["F"] @ dd["P_l"], FB_) + cross(FP_, LL @ FB_ + kk["F"] @ dd["B_l"])
        return (jnp.outer(dd["Vdot"], q) - jnp.trace(LL) * jnp.outer(kk["V"], q) + jnp.outer(kk["V"], qd)) / kk["J"]

    GE = fr.Grad(E_sp)(X, t)
    GB = fr.Grad(b)(X, t)
    terms = {
        "rho_E E": (-divu * lg["rho_E"] * Ee + d["rho_E"] * Ee - lg["rho_E"] * L.T @ Ee
                    + lg["rho_E"] * Fi.T @ d["E_l"]) / J,
        "J x B": (s2 * divu * cross(FJ, FB) + cross(L @ FJ + F @ d["J_l"], FB) + cross(FJ, FBd)) / J**2,
        "(grad E)^T P": (-L.T @ Fi.T @ GE.T @ FP + Fi.T @ fr.Grad(E_sp_dot)(X, t).T @ FP
                         + Fi.T @ GE.T @ (-divu * FP + FPd)) / J,
        "(grad B)^T M": -L.T @ Fi.T @ GB.T @ Ml + Fi.T @ fr.Grad(b_dot)(X, t).T @ Ml
        + Fi.T @ GB.T @ (-L.T @ Ml + Fi.T @ d["M_l"]),
        "d(P x B)/dt": fr.st(w_pb_dot)(X, t),
        "div[v (x) (P x B)]": (-divu * fr.Div(Vq)(X, t) + fr.Div(Vq_dot)(X, t)) / J,
    }
    if not f.printed:
        terms["-Grad(P x B) Vdot"] = -fr.Grad(w_pb)(X, t) @ Vd
    return terms


def fdot_E0_terms(f: IncFrame, X, t):
    """Eulerian (pushed-forward) form of the body-force increment."""
    fr = f.fr
    e = fr.eul(X, t)
    E, B, P, M, Jf, rho = e["E"], e["B"], e["P"], e["M"], e["Jfree"], e["rho_e"]
    d0 = f.d0(X, t)
    L = f.L(X, t)
    divu = jnp.trace(L)
    w = f.w(X, t)
    v = fr.v(X, t)
    s2 = 2.0 if f.printed else -2.0

    def ev(name):
        return lambda Y, s: fr.eul(Y, s)[name]

    def E_dot(Y, s):
        return -f.L(Y, s).T @ fr.eul(Y, s)["E"] + f.d0(Y, s)["E_l0"]

    def B_dot(Y, s):
        LL = f.L(Y, s)
        BB = fr.eul(Y, s)["B"]
        return -jnp.trace(LL) * BB + LL @ BB + f.d0(Y, s)["B_l0"]

    def PxB(Y, s):
        ee = fr.eul(Y, s)
        return cross(ee["P"], ee["B"])

    def PxB_dot(Y, s):
        ee = fr.eul(Y, s)
        dd = f.d0(Y, s)
        LL = f.L(Y, s)
        return (s2 * jnp.trace(LL) * cross(ee["P"], ee["B"]) + cross(LL @ ee["P"] + dd["P_l0"], ee["B"])
                + cross(ee["P"], LL @ ee["B"] + dd["B_l0"]))

    def v_PxB(Y, s):
        return jnp.outer(fr.v(Y, s), PxB(Y, s))

    def flux_dot(Y, s):
        ee = fr.eul(Y, s)
        dd = f.d0(Y, s)
        LL = f.L(Y, s)
        vv = fr.v(Y, s)
        q = cross(ee["P"], ee["B"])
        qd = cross(LL @ ee["P"] + dd["P_l0"], ee["B"]) + cross(ee["P"], LL @ ee["B"] + dd["B_l0"])
        return jnp.outer(f.w(Y, s), q) - jnp.trace(LL) * jnp.outer(vv, q) + jnp.outer(vv, qd)

    gE = fr.grad(ev("E"))(X, t)
    gB = fr.grad(ev("B"))(X, t)
    terms = {
        "rho_e E": -divu * rho * E + d0["rho_E0"] * E - rho * L.T @ E + rho * d0["E_l0"],
        "(grad E)^T P": -L.T @ gE.T @ P + fr.grad(E_dot)(X, t).T @ P + gE.T @ (-divu * P + L @ P + d0["P_l0"]),
        "J x B": -2.0 * divu * cross(Jf, B) + cross(L @ Jf + d0["J_l0"], B) + cross(Jf, L @ B + d0["B_l0"]),
        "(grad B)^T M": -L.T @ gB.T @ M + fr.grad(B_dot)(X, t).T @ M + gB.T @ (-L.T @ M + d0["M_l0"]),
        "d(P x B)/dt": fr.st(PxB_dot)(X, t),
        "div[v (x) (P x B)]": -divu * fr.div(v_PxB)(X, t) + fr.div(flux_dot)(X, t),
    }
    if not f.printed:
        terms["-grad(P x B)(u_t - L v)"] = -fr.grad(PxB)(X, t) @ w
    return terms


def Ldot_E_terms(f: IncFrame, X, t):
    fr = f.fr
    k = fr.kin(X, t)
    F, Fi, J = k["F"], k["Finv"], k["J"]
    lg = fr.lag(X, t)
    d = f.dl(X, t)
    L = f.L(X, t)
    divu = jnp.trace(L)
    FP, FB = F @ lg["P_l"], F @ lg["B_l"]
    Ee, Me = Fi.T @ lg["E_l"], Fi.T @ lg["M_el"]
    return {
        "-(div u) L_E": -divu * (cross(FP, Ee) + cross(Me, FB)) / J,
        "Pdot x E": cross(L @ FP + F @ d["P_l"], Ee) / J,
        "P x Edot": cross(FP, -L.T @ Ee + Fi.T @ d["E_l"]) / J,
        "M x Bdot": cross(Me, L @ FB + F @ d["B_l"]) / J,
        "Mdot x B": cross(-L.T @ Me + Fi.T @ d["M_el"], FB) / J,
    }


def Ldot_E0_terms(f: IncFrame, X, t):
    e = f.fr.eul(X, t)
    d0 = f.d0(X, t)
    L = f.L(X, t)
    divu = jnp.trace(L)
    E, B, P, Me = e["E"], e["B"], e["P"], e["M_e"]
    return {
        "-(div u) L_e": -divu * (cross(P, E) + cross(Me, B)),
        "Pdot x E": cross(L @ P + d0["P_l0"], E),
        "P x Edot": cross(P, -L.T @ E + d0["E_l0"]),
        "M_e x Bdot": cross(Me, L @ B + d0["B_l0"]),
        "Mdot_e x B": cross(-L.T @ Me + d0["M_el0"], B),
    }


def wdot_E_terms(f: IncFrame, X, t):
    fr = f.fr
    k = fr.kin(X, t)
    F, Fi, J, V = k["F"], k["Finv"], k["J"], k["V"]
    lg = fr.lag(X, t)
    d = f.dl(X, t)
    L = f.L(X, t)
    divu = jnp.trace(L)
    Vd = d["Vdot"]
    rho_r = fr.sc.rho_r
    Ee = Fi.T @ lg["E_el"]
    Ee_d = -L.T @ Ee + Fi.T @ d["E_el"]
    Me = Fi.T @ lg["M_el"]

    def g(Y, s):
        return fr.kin(Y, s)["F"] @ fr.lag(Y, s)["P_l"] / rho_r

    def g_dot(Y, s):
        kk = fr.kin(Y, s)
        return (f.L(Y, s) @ kk["F"] @ fr.lag(Y, s)["P_l"] + kk["F"] @ f.dl(Y, s)["P_l"]) / rho_r

    def b(Y, s):
        kk = fr.kin(Y, s)
        return kk["F"] @ fr.lag(Y, s)["B_l"] / kk["J"]

    def b_dot(Y, s):
        kk = fr.kin(Y, s)
        LL = f.L(Y, s)
        FB_ = kk["F"] @ fr.lag(Y, s)["B_l"]
        return (-jnp.trace(LL) * FB_ + LL @ FB_ + kk["F"] @ f.dl(Y, s)["B_l"]) / kk["J"]

    def rate(fn):
        return fr.st(fn)(X, t) + fr.Grad(fn)(X, t) @ V

    terms = {
        "(L F J_el + F Jdot_el).E_el": (L @ F @ lg["J_E"] + F @ d["J_E"]) @ Ee,
        "(F J_el).Edot_el": (F @ lg["J_E"]) @ Ee_d,
        "rho_r rate(Pdot).E_el": rho_r * rate(g_dot) @ Ee,
        "rho_r rate(P).Edot_el": rho_r * rate(g) @ Ee_d,
        "-J Mdot.rate(B)": -J * (divu * Me - L.T @ Me + Fi.T @ d["M_el"]) @ rate(b),
        "-J M.rate(Bdot)": -J * Me @ rate(b_dot),
    }
    if f.printed:
        terms["rho_r Grad(P) Vdot.E_el"] = rho_r * (fr.Grad(g)(X, t) @ Vd) @ Ee
        terms["-J M.Grad(B) Vdot"] = -J * Me @ (fr.Grad(b)(X, t) @ Vd)
    return terms


def wdot_E0_terms(f: IncFrame, X, t):
    fr = f.fr
    e = fr.eul(X, t)
    d0 = f.d0(X, t)
    L = f.L(X, t)
    divu = jnp.trace(L)
    w = f.w(X, t)
    rho_r = fr.sc.rho_r
    rho = rho_r / fr.kin(X, t)["J"]
    Je, Ee, Me = e["J_e"], e["E_e"], e["M_e"]
    Ee_d = -L.T @ Ee + d0["E_el0"]

    def P_rho(Y, s):
        return fr.eul(Y, s)["P"] * fr.kin(Y, s)["J"] / rho_r

    def Pd_rho(Y, s):
        ee = fr.eul(Y, s)
        return (f.L(Y, s) @ ee["P"] + f.d0(Y, s)["P_l0"]) * fr.kin(Y, s)["J"] / rho_r

    def B_(Y, s):
        return fr.eul(Y, s)["B"]

    def B_dot(Y, s):
        LL = f.L(Y, s)
        BB = fr.eul(Y, s)["B"]
        return -jnp.trace(LL) * BB + LL @ BB + f.d0(Y, s)["B_l0"]

    terms = {
        "(L J_e + Jdot_el0).E_e": (L @ Je + d0["J_E0"]) @ Ee,
        "J_e.Edot_e": Je @ Ee_d,
        "rho d/dt(Pdot/rho).E_e": rho * fr.mt(Pd_rho)(X, t) @ Ee,
        "rho d/dt(P/rho).Edot_e": rho * fr.mt(P_rho)(X, t) @ Ee_d,
        "-Mdot_e.dB/dt": -(divu * Me - L.T @ Me + d0["M_el0"]) @ fr.mt(B_)(X, t),
        "-M_e.d/dt(Bdot)": -Me @ fr.mt(B_dot)(X, t),
    }
    if f.printed:
        terms["rho grad(P/rho)(u_t - L v).E_e"] = rho * (fr.grad(P_rho)(X, t) @ w) @ Ee
        terms["-M_e.grad(B)(u_t - L v)"] = -Me @ (fr.grad(B_)(X, t) @ w)
    return terms


def _sum(terms):
    return sum(terms.values())


# ---------------------------------------------------------------------------
# kernels: Maxwell


def _Ddot_l(f, Y, s):
    """(J c^-1 E_l) increment."""
    kk = f.fr.kin(Y, s)
    Fi, J = kk["Finv"], kk["J"]
    LL = f.L(Y, s)
    E_l = f.fr.lag(Y, s)["E_l"]
    cinv = Fi @ Fi.T
    return J * jnp.trace(LL) * cinv @ E_l + J * cinv @ f.dl(Y, s)["E_l"] - J * Fi @ (LL + LL.T) @ Fi.T @ E_l


def k_inc_maxwell_lagrangian(f: IncFrame, X, t):
    fr = f.fr
    eps0, mu0 = fr.sc.eps0, fr.sc.mu0
    d = f.dl(X, t)

    def dl(name):
        return lambda Y, s: f.dl(Y, s)[name]

    def Ddot(Y, s):
        return _Ddot_l(f, Y, s)

    def Hdot(Y, s):
        kk = fr.kin(Y, s)
        F, J, c = kk["F"], kk["J"], kk["c"]
        LL = f.L(Y, s)
        B_l = fr.lag(Y, s)["B_l"]
        if f.printed:
            inner = jnp.trace(LL) * c @ B_l + 2.0 * F.T @ LL @ F @ B_l
        else:
            inner = -jnp.trace(LL) * c @ B_l + F.T @ (LL + LL.T) @ F @ B_l
        return (inner + c @ f.dl(Y, s)["B_l"]) / (J * mu0)

    def conv(Y, s):
        kk = fr.kin(Y, s)
        D = kk["J"] * jnp.linalg.solve(kk["c"], fr.lag(Y, s)["E_l"])
        return cross(f.dl(Y, s)["Vdot"], D) + cross(kk["V"], Ddot(Y, s))

    def JDdot(Y, s):
        return fr.kin(Y, s)["J"] * Ddot(Y, s)

    sgn = -1.0 if f.printed else 1.0
    return {
        "div_B": {"Div Bdot_l": fr.Div(dl("B_l"))(X, t)},
        "faraday": {"Curl Edot_el": fr.Curl(dl("E_el"))(X, t), "Bdot_l,t": fr.mt(dl("B_l"))(X, t)},
        "gauss": {
            "eps0 Div Ddot": eps0 * fr.Div(Ddot)(X, t),
            "Div Pdot_l": sgn * fr.Div(dl("P_l"))(X, t),
            "-rhodot_E": -d["rho_E"],
        },
        "ampere": {
            "Curl Hdot": fr.Curl(Hdot)(X, t),
            "-eps0 Curl(Vdot x D + V x Ddot)": -eps0 * fr.Curl(conv)(X, t),
            "-eps0 Ddot,t": -eps0 * fr.mt(JDdot if f.printed else Ddot)(X, t),
            "-Pdot_l,t": -fr.mt(dl("P_l"))(X, t),
            "-Curl Mdot_el": -fr.Curl(dl("M_el"))(X, t),
            "-Jdot_E": -d["J_E"],
        },
    }


def _Ehat(f, Y, s):
    LL = f.L(Y, s)
    E = f.fr.eul(Y, s)["E"]
    return f.d0(Y, s)["E_l0"] + jnp.trace(LL) * E - (LL + LL.T) @ E


def k_inc_maxwell_eulerian(f: IncFrame, X, t):
    fr = f.fr
    eps0, mu0 = fr.sc.eps0, fr.sc.mu0
    d0 = f.d0(X, t)
    Gam = fr.grad(fr.v)(X, t)
    divv = jnp.trace(Gam)
    Eh = _Ehat(f, X, t)

    def d0f(name):
        return lambda Y, s: f.d0(Y, s)[name]

    def Ehat(Y, s):
        return _Ehat(f, Y, s)

    def Hdot(Y, s):
        LL = f.L(Y, s)
        Bl0 = f.d0(Y, s)["B_l0"]
        if f.printed:
            return ((1.0 + jnp.trace(LL)) * Bl0 + 2.0 * LL @ Bl0) / mu0
        B = fr.eul(Y, s)["B"]
        return (Bl0 - jnp.trace(LL) * B + (LL + LL.T) @ B) / mu0

    def conv(Y, s):
        ee = fr.eul(Y, s)
        a = f.ut(Y, s) if f.printed else f.w(Y, s)
        return cross(a, ee["E"]) + cross(fr.v(Y, s), Ehat(Y, s))

    rate_E = fr.mt(Ehat)(X, t)
    if not f.printed:
        rate_E = rate_E + divv * Eh - Gam @ Eh
    sgn = -1.0 if f.printed else 1.0
    return {
        "div_B": {"div Bdot_l0": fr.div(d0f("B_l0"))(X, t)},
        "faraday": {
            "curl Edot_el0": fr.curl(d0f("E_el0"))(X, t),
            "Bdot_l0,t": fr.mt(d0f("B_l0"))(X, t),
            "[(div v)I - Gamma]Bdot_l0": divv * d0["B_l0"] - Gam @ d0["B_l0"],
        },
        "gauss": {
            "eps0 div Ehat": eps0 * fr.div(Ehat)(X, t),
            "div Pdot_l0": sgn * fr.div(d0f("P_l0"))(X, t),
            "-rhodot_E0": -d0["rho_E0"],
        },
        "ampere": {
            "curl Hdot": fr.curl(Hdot)(X, t),
            "-eps0 curl((u_t - L v) x E + v x Ehat)": -eps0 * fr.curl(conv)(X, t),
            "-eps0 rate(Ehat)": -eps0 * rate_E,
            "-Pdot_l0,t": -fr.mt(d0f("P_l0"))(X, t),
            "-[(div v)I - Gamma]Pdot_l0": -(divv * d0["P_l0"] - Gam @ d0["P_l0"]),
            "-curl Mdot_el0": -fr.curl(d0f("M_el0"))(X, t),
            "-Jdot_E0": -d0["J_E0"],
        },
    }


# ---------------------------------------------------------------------------
# kernels: momentum and heat


def k_inc_momentum(f: IncFrame, X, t):
    fr = f.fr
    k = fr.kin(X, t)
    F, J = k["F"], k["J"]
    rho_r = fr.sc.rho_r
    L = f.L(X, t)
    divu = jnp.trace(L)
    utt = f.utt(X, t)
    T = fr.nominal_field(X, t)
    tau = F @ T / J
    Td = f.Tdot(X, t)
    T0d = F @ Td / J
    f_E = _sum(bal.f_E_terms(fr, X, t))
    f_e = _sum(bal.f_e_terms(fr, X, t))
    L_E = _sum(bal.L_E_terms(fr, X, t))
    L_e = _sum(bal.L_e_terms(fr, X, t))
    return {
        "linear_lagrangian": {
            "Div Tdot": fr.Div(f.Tdot)(X, t),
            "J (div u) f_E": J * divu * f_E,
            "J fdot_E": J * _sum(fdot_E_terms(f, X, t)),
            "-rho_r u_tt": -rho_r * utt,
        },
        "angular_lagrangian": {
            "eps(L F T + F Tdot)": perm_contract(L @ F @ T + F @ Td),
            "J (div u) L_E": J * divu * L_E,
            "J Ldot_E": J * _sum(Ldot_E_terms(f, X, t)),
        },
        "linear_eulerian": {
            "div Tdot0": fr.div(f.T0dot)(X, t),
            "(div u) f_e": divu * f_e,
            "fdot_E0": _sum(fdot_E0_terms(f, X, t)),
            "-rho u_tt": -rho_r / J * utt,
        },
        "angular_eulerian": {
            "eps(L tau + Tdot0)": perm_contract(L @ tau + T0d),
            "(div u) L_e": divu * L_e,
            "Ldot_E0": _sum(Ldot_E0_terms(f, X, t)),
        },
    }


def k_inc_heat(f: IncFrame, X, t):
    fr = f.fr
    k = fr.kin(X, t)
    J = k["J"]
    rho_r, c_p = fr.sc.rho_r, fr.sc.c_p
    T = fr.nominal_field(X, t)
    tau = k["F"] @ T / J
    Gam = fr.grad(fr.v)(X, t)
    th = f.thl(X, t)
    th0 = f.th0(X, t)

    def store_l(Y, s):
        kk = fr.kin(Y, s)
        th_l = fr.thermal_lag_primitive(Y, s)["theta_l"]
        return (f.thl(Y, s)["theta_l"] - f.divu(Y, s) * th_l) / kk["J"]

    def store_0(Y, s):
        return f.th0(Y, s)["theta_l0"] - f.divu(Y, s) * fr.thermal_eul(Y, s)["theta"]

    def q_l(Y, s):
        if f.closure:
            kk = fr.kin(Y, s)
            return kk["J"] * kk["Finv"] @ f.th0(Y, s)["q_l0"]
        return f.thl(Y, s)["q_l"]

    def q_l0(Y, s):
        return f.th0(Y, s)["q_l0"]

    return {
        "heat_lagrangian": {
            "qdot_l": th["qv_l"],
            "wdot_E": _sum(wdot_E_terms(f, X, t)),
            "Tdot:Grad(FV)": jnp.einsum("ai,ia->", f.Tdot(X, t), fr.Grad(fr.v)(X, t)),
            "T:Grad(L F V + F Vdot)": jnp.einsum("ai,ia->", T, fr.Grad(f.ut)(X, t)),
            "-Div qdot_l": -fr.Div(q_l)(X, t),
            "-rho_r c_p d/dt[J^-1 thetadot_l - J^-1 (div u) theta_l]": -rho_r * c_p * fr.mt(store_l)(X, t),
        },
        "heat_eulerian": {
            "qdot_l0": th0["qv_l0"],
            "wdot_E0": _sum(wdot_E0_terms(f, X, t)),
            "Tdot0:grad v": jnp.einsum("ij,ji->", f.T0dot(X, t), Gam),
            "tau:grad u_t": jnp.einsum("ij,ji->", tau, fr.grad(f.ut)(X, t)),
            "-div qdot_l0": -fr.div(q_l0)(X, t),
            "-rho c_p d/dt[thetadot_l0 - (div u) theta]": -(rho_r / J) * c_p * fr.mt(store_0)(X, t),
        },
    }


def k_inc_sources(f: IncFrame, X, t):
    return {
        "fdot_E": fdot_E_terms(f, X, t),
        "fdot_E0": fdot_E0_terms(f, X, t),
        "Ldot_E": Ldot_E_terms(f, X, t),
        "Ldot_E0": Ldot_E0_terms(f, X, t),
        "wdot_E": wdot_E_terms(f, X, t),
        "wdot_E0": wdot_E0_terms(f, X, t),
    }


def k_inc_state(f: IncFrame, X, t):
    k = f.fr.kin(X, t)
    out = {"L": f.L(X, t), "u_t": f.ut(X, t), "u_tt": f.utt(X, t), "Vdot": f.Vdot(X, t), "dl": f.dl(X, t),
           "d0": f.d0(X, t), "kin": k}
    if f.inc.thermal is not None:
        out["th0"] = f.th0(X, t)
    if f.sc.stress is not None:
        out["Tdot"] = f.Tdot(X, t)
        out["T0dot"] = f.T0dot(X, t)
    return out


def k_inc_conduction(f: IncFrame, X, t):
    e = f.fr.eul(X, t)
    d0 = f.d0(X, t)
    out = {"J_l0": _ohm_increment(f.sc.xi, f.L(X, t), e["E"], d0["E_l0"]) if not f.printed else
           f.sc.xi @ ((jnp.trace(f.L(X, t)) * jnp.eye(3) - f.L(X, t) - f.L(X, t).T) @ e["E"] + d0["E_l0"])}
    if f.inc.thermal is not None and f.sc.thermal is not None:
        out["q_l0"] = f.fourier0(X, t)
    return out


# ---------------------------------------------------------------------------
# kernels: assembled governing equations (literal moduli substitution)


def k_assembled(f: IncFrame, X, t):
    """Updated balance laws with the incremented constitutive and conduction laws written out."""
    fr = f.fr
    eps0, mu0 = fr.sc.eps0, fr.sc.mu0
    rho_r, c_p = fr.sc.rho_r, fr.sc.c_p
    k = fr.kin(X, t)
    J = k["J"]
    L = f.L(X, t)
    divu = jnp.trace(L)
    e = fr.eul(X, t)
    v = k["v"]
    Gam = fr.grad(fr.v)(X, t)
    divv = jnp.trace(Gam)
    T = fr.nominal_field(X, t)
    tau = k["F"] @ T / J

    def raw(Y, s):
        """Increment fields the constitutive laws act on."""
        kk = fr.kin(Y, s)
        F, Fi, JJ = kk["F"], kk["Finv"], kk["J"]
        ee = fr.eul(Y, s)
        d = f.inc.em.lagrangian(Y, s)
        LL = f.L(Y, s)
        B0 = F @ d["B_l"] / JJ
        E0 = Fi.T @ d["E_l"]
        ww = f.ut(Y, s) - LL @ fr.v(Y, s)
        Eel0 = E0 + cross(fr.v(Y, s), B0) + cross(ww, ee["B"])
        th0 = f.inc.thermal.lagrangian(Y, s)["theta_l"] / JJ if f.inc.thermal is not None else jnp.zeros(())
        return dict(L=LL, B0=B0, E0=E0, Eel0=Eel0, th0=th0, u=f.umod(Y, s), rho0=d["rho_E"] / JJ)

    def stressT(Y, s):
        r = raw(Y, s)
        u = r["u"]
        return (jnp.einsum("piqj,jq->pi", u["A0"], r["L"]) + jnp.einsum("ijk,k->ij", u["B0"], r["Eel0"])
                + jnp.einsum("ijk,k->ij", u["C0"], r["B0"]) + u["D0"] * r["th0"])

    def stressP(Y, s):
        r = raw(Y, s)
        u = r["u"]
        return (jnp.einsum("ijk,ji->k", u["B0"], r["L"]) + u["G0"] @ r["Eel0"] + u["H0"] @ r["B0"]
                + u["I0"] * r["th0"])

    def stressM(Y, s):
        r = raw(Y, s)
        u = r["u"]
        return (jnp.einsum("ijk,ji->k", u["C0"], r["L"]) + u["H0"].T @ r["Eel0"] + u["M0"] @ r["B0"]
                + u["N0"] * r["th0"])

    def Ehat(Y, s):
        return _Ehat(f, Y, s)

    def Hdot(Y, s):
        LL = f.L(Y, s)
        Bl0 = raw(Y, s)["B0"]
        if f.printed:
            return ((1.0 + jnp.trace(LL)) * Bl0 + 2.0 * LL @ Bl0) / mu0
        B = fr.eul(Y, s)["B"]
        return (Bl0 - jnp.trace(LL) * B + (LL + LL.T) @ B) / mu0

    def conv(Y, s):
        ee = fr.eul(Y, s)
        a = f.ut(Y, s) if f.printed else f.w(Y, s)
        return cross(a, ee["E"]) + cross(fr.v(Y, s), Ehat(Y, s))

    def fourier(Y, s):
        return f.fourier0(Y, s)

    r = raw(X, t)
    Eh = _Ehat(f, X, t)
    w = f.w(X, t)
    xi = fr.sc.xi
    ohm = _ohm_increment(xi, L, e["E"], r["E0"])
    Jd_E0 = ohm - r["rho0"] * v - e["rho_e"] * w
    sP = stressP(X, t)
    gdiv = divu if f.printed else divv
    rate_E = fr.mt(Ehat)(X, t)
    if not f.printed:
        rate_E = rate_E + divv * Eh - Gam @ Eh
    sgn = -1.0 if f.printed else 1.0
    ST = stressT(X, t)
    out = {
        "div_B": {"div Bdot_l0": fr.div(lambda Y, s: raw(Y, s)["B0"])(X, t)},
        "faraday": {
            "curl Edot_el0": fr.curl(lambda Y, s: raw(Y, s)["Eel0"])(X, t),
            "Bdot_l0,t": fr.mt(lambda Y, s: raw(Y, s)["B0"])(X, t),
            "[(div v)I - Gamma]Bdot_l0": divv * r["B0"] - Gam @ r["B0"],
        },
        "gauss": {
            "eps0 div Ehat": eps0 * fr.div(Ehat)(X, t),
            "-div(B0^T L + G0 Edot_el0 + H0 Bdot_l0 + I0 thetadot_l0)": -sgn * fr.div(stressP)(X, t),
            "-rhodot_E0": -r["rho0"],
        },
        "ampere": {
            "curl Hdot": fr.curl(Hdot)(X, t),
            "-eps0 curl((u_t - L v) x E + v x Ehat)": -eps0 * fr.curl(conv)(X, t),
            "-eps0 rate(Ehat)": -eps0 * rate_E,
            "curl(C0^T L + H0^T Edot_el0 + M0 Bdot_l0 + N0 thetadot_l0)": fr.curl(stressM)(X, t),
            "-Jdot_E0": -Jd_E0,
            "[(div v)I - Gamma](...)": gdiv * sP - Gam @ sP,
            "(...),t": fr.mt(stressP)(X, t),
        },
        "linear": {
            "div(A0 L + B0 Edot_el0 + C0 Bdot_l0 + D0 thetadot_l0)": fr.div(stressT)(X, t),
            "(div u) f_e": divu * _sum(bal.f_e_terms(fr, X, t)),
            "fdot_E0": _sum(fdot_E0_terms(f, X, t)),
            "-rho u_tt": -rho_r / J * f.utt(X, t),
        },
        "angular": {
            "eps(L tau + A0 L + ...)": perm_contract(L @ tau + ST),
            "(div u) L_e": divu * _sum(bal.L_e_terms(fr, X, t)),
            "Ldot_E0": _sum(Ldot_E0_terms(f, X, t)),
        },
    }
    if fr.sc.thermal is not None and f.inc.thermal is not None:

        def store_0(Y, s):
            return f.th0(Y, s)["theta_l0"] - f.divu(Y, s) * fr.thermal_eul(Y, s)["theta"]

        out["heat"] = {
            "-div(qdot_l0 law)": -fr.div(fourier)(X, t),
            "-rho c_p d/dt[thetadot_l0 - (div u) theta]": -(rho_r / J) * c_p * fr.mt(store_0)(X, t),
            "qdot_l0": f.th0(X, t)["qv_l0"],
            "wdot_E0": _sum(wdot_E0_terms(f, X, t)),
            "tau:grad u_t": jnp.einsum("ij,ji->", tau, fr.grad(f.ut)(X, t)),
            "(A0 L + ...):grad v": jnp.einsum("ij,ji->", ST, Gam),
        }
    return out


def k_composed(f: IncFrame, X, t):
    """The same equations obtained by composing the updated laws with the incremental balance kernels."""
    mx = k_inc_maxwell_eulerian(f, X, t)
    mo = k_inc_momentum(f, X, t)
    out = {
        "div_B": mx["div_B"], "faraday": mx["faraday"], "gauss": mx["gauss"], "ampere": mx["ampere"],
        "linear": mo["linear_eulerian"], "angular": mo["angular_eulerian"],
    }
    if f.sc.thermal is not None and f.inc.thermal is not None:
        out["heat"] = k_inc_heat(f, X, t)["heat_eulerian"]
    return out


# ---------------------------------------------------------------------------
# kernels: boundary


def _sym_L(L, literal):
    """(L + L^T), or the printed (L^-1 + L^-T)."""
    if literal:
        Li = jnp.linalg.inv(L)
        return Li + Li.T
    return L + L.T


def k_inc_boundary(f: IncFrame, X, t):
    fr = f.fr
    sc = fr.sc
    eps0, mu0 = sc.eps0, sc.mu0
    k = fr.kin(X, t)
    F, Fi, J, c, V, v = k["F"], k["Finv"], k["J"], k["c"], k["V"], k["v"]
    cinv = Fi @ Fi.T
    lg = fr.lag(X, t)
    e = fr.eul(X, t)
    d = f.dl(X, t)
    d0 = f.d0(X, t)
    L = f.L(X, t)
    divu = jnp.trace(L)
    Vd = d["Vdot"]
    w = f.w(X, t)
    vac = sc.vacuum.values(X, t)
    dvac = f.inc.vacuum.values(X, t)
    srf = sc.surface.values(X, t)
    dsrf = f.inc.surface.values(X, t)
    N = sc.surface.N
    Es, Bs, Ed, Bd = vac["E"], vac["B"], dvac["E"], dvac["B"]
    lit, pr = f.literal, f.printed
    Li = jnp.linalg.inv(L) if lit else L
    S = _sym_L(L, lit)
    s_bc = 1.0 if (lit or pr) else -1.0  # sign of the symmetric-gradient term in the D jump

    D = J * cinv @ lg["E_l"]
    Ddot = J * divu * cinv @ lg["E_l"] + J * cinv @ d["E_l"] + s_bc * J * Fi @ S @ Fi.T @ lg["E_l"]
    jumpE = lg["E_l"] - F.T @ Es
    m = J * Fi.T @ N
    ratio = jnp.linalg.norm(m)
    n = m / ratio
    dAda = 1.0 / ratio
    Td = f.Tdot(X, t) if sc.stress is not None else jnp.zeros((3, 3))
    T0d = F @ Td / J

    lag = {
        "bc1_tangential_E": {
            "N x Edot_el": cross(N, d["E_el"]),
            "-N x F^T L^T E*": -cross(N, F.T @ (L if pr else L.T) @ Es),
            "-N x F^T Edot*": -cross(N, F.T @ Ed),
        },
        "bc2_normal_B": {
            "N.Bdot_l": N @ d["B_l"],
            "-N.J (div u) F^-1 B*": -J * divu * N @ (Fi @ Bs),
            "N.J F^-1 L B*": (-1.0 if (lit or pr) else 1.0) * J * N @ (Fi @ Li @ Bs),
            "-N.J F^-1 Bdot*": -J * N @ (Fi @ Bd),
        },
        "bc3_normal_D": {
            "N.eps0 J c^-1 (Edot_l - F^T L^T E* - F^T Edot*)": eps0 * J * N @ (cinv @ (d["E_l"] - F.T @ L.T @ Es
                                                                                      - F.T @ Ed)),
            "N.eps0 J (div u) c^-1 (E_l - F^T E*)": eps0 * J * divu * N @ (cinv @ jumpE),
            "N.eps0 J F^-1 (sym L) F^-T (E_l - F^T E*)": s_bc * eps0 * J * N @ (Fi @ S @ Fi.T @ jumpE),
            "N.Pdot_l": N @ d["P_l"],
            "-sigmadot_E": -dsrf["sigma_E"],
        },
        "bc4_tangential_H": {
            "N x J^-1 c Bdot_l/mu0": cross(N, c @ d["B_l"] / (J * mu0)),
            "-N x J^-1 (div u) c B_l/mu0": -cross(N, divu * c @ lg["B_l"] / (J * mu0)),
            "N x J^-1 F^T (L + L^T) F B_l/mu0": cross(N, F.T @ (L + L.T) @ F @ lg["B_l"] / (J * mu0)),
            "-N x Mdot_l": -cross(N, d["M_l"]),
            "-N x Vdot x (eps0 D + P_l)": -cross(N, cross(Vd, eps0 * D + lg["P_l"])),
            "-N x V x (eps0 Ddot + Pdot_l)": -cross(N, cross(V, eps0 * Ddot + (eps0 if pr else 1.0) * d["P_l"])),
            "-N x F^T L^T B*/mu0": -cross(N, F.T @ L.T @ Bs / mu0),
            "-N x F^T Bdot*/mu0": -cross(N, F.T @ Bd / mu0),
            "-Kdot_l": -dsrf["K_l"],
            "sigmadot_E V_s": dsrf["sigma_E"] * V,
            "sigma_E Vdot_s": srf["sigma_E"] * Vd,
        },
        "traction": {"Tdot^T N": Td.T @ N, "-tdot_A": -dsrf["t_A"]},
    }

    E, B, P = e["E"], e["B"], e["P"]
    Ehat_b = d0["E_l0"] + divu * E + s_bc * S @ E
    sig0d = dsrf["sigma_E"] * dAda
    K0d = F @ dsrf["K_l"] * dAda
    sig_e = srf["sigma_E"] * dAda
    K = F @ srf["K_l"] * dAda
    bc4_rhs = ({"-Kdot_l0": -K0d, "-L^-1 K": -Li @ K, "-sigma_e L v_s": -sig_e * L @ v} if (pr or lit) else
               {"-Kdot_l0": -K0d, "sigmadot_E0 v_s": sig0d * v, "sigma_e (u_t - L v)_s": sig_e * w})
    eul = {
        "bc1_tangential_E": {
            "n x Edot_el0": cross(n, d0["E_el0"]),
            "-n x L^T E*": -cross(n, (L if pr else L.T) @ Es),
            "-n x Edot*": -cross(n, Ed),
        },
        "bc2_normal_B": {
            "n.Bdot_l0": n @ d0["B_l0"],
            "-n.(div u) B*": -divu * n @ Bs,
            "n.L B*": (-1.0 if (lit or pr) else 1.0) * n @ (Li @ Bs),
            "-n.Bdot*": -n @ Bd,
        },
        "bc3_normal_D": {
            "n.eps0 (Edot_l0 - L^T E* - Edot*)": eps0 * n @ (d0["E_l0"] - L.T @ Es - Ed),
            "n.eps0 (div u)(E - E*)": eps0 * divu * n @ (E - Es),
            "n.eps0 (sym L)(E - E*)": s_bc * eps0 * n @ (S @ (E - Es)),
            "n.Pdot_l0": n @ d0["P_l0"],
            "-sigmadot_E0": -sig0d,
        },
        "bc4_tangential_H": {
            "n x [Bdot_l0 - (div u) B + (L + L^T) B]/mu0": cross(n, (d0["B_l0"] - divu * B + (L + L.T) @ B) / mu0),
            "-n x Mdot_l0": -cross(n, d0["M_l0"]),
            "-n x (u_t - L v) x (eps0 E + P)": -cross(n, cross(w, eps0 * E + P)),
            "-n x v x (eps0 Ehat + Pdot_l0)": -cross(n, cross(v, eps0 * Ehat_b + (eps0 if pr else 1.0) * d0["P_l0"])),
            "-n x L^T B*/mu0": -cross(n, L.T @ Bs / mu0),
            "-n x Bdot*/mu0": -cross(n, Bd / mu0),
            **bc4_rhs,
        },
        "traction": {"Tdot0^T n": T0d.T @ n, "-tdot_A dA/da": -dsrf["t_A"] * dAda},
    }
    return {"lagrangian": lag, "eulerian": eul, "_nanson": {"ratio": ratio, "n": n}}


# ---------------------------------------------------------------------------
# runner


def _inc_kernel(kernel):
    """Adapt an IncFrame kernel to the run_kernel calling convention."""

    def run(fr, X, t, params, printed=False, literal=False, closure=False):
        sc, inc = fr.sc
        f = IncFrame(Frame(sc, fr.config), inc, printed, literal, closure)
        return kernel(f, X, t)

    run.__name__ = kernel.__name__
    return run


_KERNELS = {}


def _runner(kernel):
    if kernel not in _KERNELS:
        _KERNELS[kernel] = _inc_kernel(kernel)
    return _KERNELS[kernel]


def run_incremental(kernel, sc: Scenario, inc: IncrementFields, X, t, config=None, printed_forms=False,
                    literal_L_inverse=False, closure=False):
    return run_kernel(_runner(kernel), (sc, inc), X, t, config, printed=bool(printed_forms),
                      literal=bool(literal_L_inverse), closure=bool(closure))


def _flags(printed, literal, names):
    return tuple(names) if (printed or literal) else ()


def incremental_state(sc, inc, X, t=0.0, config=None) -> dict:
    """Point values of L, u_t, u_tt, Vdot, the dotted and pushed-forward increments."""
    return run_incremental(k_inc_state, sc, inc, X, t, config)


def incremental_maxwell_lagrangian(sc, inc, X, t=0.0, config=None, printed_forms=False) -> ResidualReport:
    raw = run_incremental(k_inc_maxwell_lagrangian, sc, inc, X, t, config, printed_forms)
    return make_report("incremental/lagrangian", raw, X, t, _flags(printed_forms, False, ("gauss", "ampere")))


def incremental_maxwell_eulerian(sc, inc, X, t=0.0, config=None, printed_forms=False) -> ResidualReport:
    raw = run_incremental(k_inc_maxwell_eulerian, sc, inc, X, t, config, printed_forms)
    return make_report("incremental/eulerian", raw, X, t, _flags(printed_forms, False, ("gauss", "ampere")))


def incremental_sources(sc, inc, X, t=0.0, config=None, printed_forms=False) -> dict:
    """Labeled terms of fdot_E, fdot_E0, Ldot_E, Ldot_E0, wdot_E, wdot_E0."""
    return run_incremental(k_inc_sources, sc, inc, X, t, config, printed_forms)


def incremental_body_force(sc, inc, X, t=0.0, config=None, printed_forms=False):
    s = incremental_sources(sc, inc, X, t, config, printed_forms)
    return _sum(s["fdot_E"]), _sum(s["fdot_E0"])


def incremental_couple(sc, inc, X, t=0.0, config=None):
    s = incremental_sources(sc, inc, X, t, config)
    return _sum(s["Ldot_E"]), _sum(s["Ldot_E0"])


def incremental_power(sc, inc, X, t=0.0, config=None, printed_forms=False):
    s = incremental_sources(sc, inc, X, t, config, printed_forms)
    return float(_sum(s["wdot_E"])), float(_sum(s["wdot_E0"]))


def incremental_momentum_residuals(sc, inc, X, t=0.0, config=None, printed_forms=False,
                                   closure=False) -> ResidualReport:
    if sc.stress is None:
        raise ValueError("scenario has no stress component")
    if sc.stress.kind != "model" and inc.T is None and not closure:
        raise ValueError("a prescribed bias stress needs a stress increment (inc.T)")
    raw = run_incremental(k_inc_momentum, sc, inc, X, t, config, printed_forms, closure=closure)
    return make_report("incremental/momentum", raw, X, t, _flags(printed_forms, False, ("linear_lagrangian",
                                                                                        "linear_eulerian")))


def incremental_heat_residual(sc, inc, X, t=0.0, config=None, printed_forms=False) -> ResidualReport:
    """Sources minus storage, as for the finite heat residual."""
    if sc.thermal is None or inc.thermal is None or sc.stress is None:
        raise ValueError("incremental heat residual needs bias thermal, stress and thermal increments")
    raw = run_incremental(k_inc_heat, sc, inc, X, t, config, printed_forms)
    return make_report("incremental/heat", raw, X, t, _flags(printed_forms, False, ("heat_lagrangian",
                                                                                    "heat_eulerian")))


def incremental_conduction(sc, inc, X, t=0.0, config=None, printed_forms=False) -> dict:
    """Incremented Fourier and Ohm laws in the current configuration: {"q_l0", "J_l0"}."""
    return run_incremental(k_inc_conduction, sc, inc, X, t, config, printed_forms)


def assembled_governing_residuals(sc, inc, X, t=0.0, config=None, printed_forms=False) -> ResidualReport:
    """Updated balance laws with the incremented constitutive and conduction laws substituted."""
    if sc.model is None or sc.stress is None:
        raise ValueError("assembly needs a free-energy model and a stress component")
    raw = run_incremental(k_assembled, sc, inc, X, t, config, printed_forms, closure=True)
    return make_report("incremental/assembled", raw, X, t, _flags(printed_forms, False, ("gauss", "ampere")))


def composed_governing_residuals(sc, inc, X, t=0.0, config=None, printed_forms=False) -> ResidualReport:
    """Incremental constitutive laws composed with the incremental balance evaluators."""
    if sc.model is None or sc.stress is None:
        raise ValueError("composition needs a free-energy model and a stress component")
    raw = run_incremental(k_composed, sc, inc, X, t, config, printed_forms, closure=True)
    return make_report("incremental/composed", raw, X, t)


def region_incremental_residual(sc_inc, X, t=0.0, region="vacuum", eps_r=1.0, mu_r=1.0, config=None
                                ) -> ResidualReport:
    """Coil or vacuum equations for increment fields (scenario whose EM component holds the increments)."""
    rep = bal.region_maxwell_residual(sc_inc, X, t, region, eps_r, mu_r, config)
    if region == "coil":
        div = rep.entries["div_E"]
        rep.entries["div_E"] = type(div).from_terms("div_E", {"eps_r div Edot": eps_r * div.terms["div E"]})
    rep.tag = f"incremental/{region}"
    return rep


def incremental_boundary_residuals(sc, inc, X, t=0.0, config=None, printed_forms=False,
                                   literal_L_inverse=False) -> dict:
    """{"lagrangian": report, "eulerian": report, "area_ratio": da/dA, "n": current normal}."""
    if sc.vacuum is None or sc.surface is None or inc.vacuum is None or inc.surface is None:
        raise ValueError("boundary increments need vacuum and surface components on both bias and increment")
    N = np.asarray(sc.surface.N, dtype=float)
    if abs(np.linalg.norm(N) - 1.0) > 1e-12:
        raise TensorError("N must be a unit vector")
    raw = run_incremental(k_inc_boundary, sc, inc, X, t, config, printed_forms, literal_L_inverse)
    flagged = ("bc1_tangential_E", "bc2_normal_B", "bc3_normal_D", "bc4_tangential_H") \
        if (printed_forms or literal_L_inverse) else ()
    notes = []
    if printed_forms or literal_L_inverse:
        notes.append("printed jump-condition forms are not the linearization of the finite conditions")
    return {
        "lagrangian": make_report("incremental/lagrangian-boundary", raw["lagrangian"], X, t, flagged, notes),
        "eulerian": make_report("incremental/eulerian-boundary", raw["eulerian"], X, t, flagged, notes),
        "area_ratio": float(raw["_nanson"]["ratio"]),
        "n": raw["_nanson"]["n"],
    }


def incremental_coil_boundary(n, Edot, Bdot, Edot_star, Bdot_star, eps_r=1.0, mu_r=1.0) -> ResidualReport:
    rep = bal.coil_boundary_residuals(n, Edot, Bdot, Edot_star, Bdot_star, None, eps_r, mu_r)
    rep.tag = "incremental/coil-boundary"
    return rep


__all__ = [
    "AuxiliaryIncrementals",
    "IncFrame",
    "IncrementalState",
    "UpdatedIncrements",
    "assembled_governing_residuals",
    "auxiliary_fields",
    "composed_governing_residuals",
    "incremental_body_force",
    "incremental_boundary_residuals",
    "incremental_coil_boundary",
    "incremental_conduction",
    "incremental_conduction_point",
    "incremental_constitutive",
    "incremental_constitutive_updated",
    "incremental_couple",
    "incremental_heat_residual",
    "incremental_maxwell_eulerian",
    "incremental_maxwell_lagrangian",
    "incremental_momentum_residuals",
    "incremental_power",
    "incremental_sources",
    "incremental_state",
    "pull_back_increments",
    "push_forward_increments",
    "region_incremental_residual",
    "run_incremental",
]
