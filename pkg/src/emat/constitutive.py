"""Free energies, constitutive response, moduli tensors and conduction laws.

Layout conventions: the nominal stress is stored as T[alpha, i] = dPhi/dF_{i alpha};
the fourth-order modulus as AA[alpha, i, beta, j] = d2Phi/dF_{i alpha} dF_{j beta}.
"""

from __future__ import annotations

from dataclasses import dataclass, field, replace
from typing import Callable

import jax
import jax.numpy as jnp
import numpy as np

from ._backend import xp_of
from .kinematics import InvalidDeformationError, Kinematics
from .tensor_core import SPLIT_REF, SPLIT_VEC, TensorError, Ten3, inv, moduli_products

NVAR = 16  # F (9), E_el (3), B_l (3), theta_l (1)
SL_F, SL_E, SL_B, IX_T = slice(0, 9), slice(9, 12), slice(12, 15), 15


class ConstitutiveError(ValueError):
    pass


def pack(F, E_el, B_l, theta_l):
    xp = xp_of(F, E_el, B_l)
    return xp.concatenate([xp.ravel(F), E_el, B_l, xp.reshape(xp.asarray(theta_l, dtype=float), (1,))])


def unpack(z):
    return z[SL_F].reshape(3, 3), z[SL_E], z[SL_B], z[IX_T]


class FreeEnergyModel:
    """Phi(F, E_el, B_l, theta_l) per unit reference volume.

    Subclasses implement :meth:`energy` with array-namespace agnostic code (numpy or
    jax).  Analytic hooks :meth:`gradient` and :meth:`hessian` are optional: they
    return the packed 16-vector / 16x16 matrix of derivatives with respect to
    (F_{i alpha} row-major, E_el, B_l, theta_l), or ``None`` when absent.
    """

    incompressible: bool = False
    rho_r: float = 1.0
    has_analytic = False

    def energy(self, F, E_el, B_l, theta_l):  # pragma: no cover - interface
        raise NotImplementedError

    def energy_packed(self, z):
        return self.energy(*unpack(z))

    def gradient(self, F, E_el, B_l, theta_l):
        return None

    def hessian(self, F, E_el, B_l, theta_l):
        return None

    def reference_temperature(self) -> float:
        return 0.0


@dataclass(frozen=True)
class DemoEnergy(FreeEnergyModel):
    """Compressible neo-Hookean solid with magnetic, electric and thermal couplings.

    Phi = mu/2 (tr c - 3) - mu ln J + lam/2 (ln J)^2 + alpha/2 B.B + beta/2 B.cB
          - gamma/2 E.E - delta/2 E.c^-1 E + c_theta/2 (th - th0)^2 + m (th - th0)(tr c - 3)
          + eta E.B + omega_e/2 (th - th0) E.E + omega_b/2 (th - th0) B.B

    with E = E_el, B = B_l, th = theta_l.  The last three terms are optional
    extensions (zero by default) that populate the H, I, N moduli.  With
    ``volumetric=False`` the two ln J terms are dropped, which gives the plain
    (mu/2)(tr c - 3) model used for incompressible solids.
    """

    mu: float = 1.0
    lam: float = 1.0
    alpha: float = 0.0
    beta: float = 0.0
    gamma: float = 0.0
    delta: float = 0.0
    c_theta: float = 0.0
    theta0: float = 0.0
    m: float = 0.0
    eta: float = 0.0
    omega_e: float = 0.0
    omega_b: float = 0.0
    volumetric: bool = True
    incompressible: bool = False
    rho_r: float = 1.0
    has_analytic = True

    def reference_temperature(self) -> float:
        return self.theta0

    def energy(self, F, E_el, B_l, theta_l):
        xp = xp_of(F, E_el, B_l, theta_l)
        c = F.T @ F
        I1 = xp.trace(c)
        dth = theta_l - self.theta0
        phi = 0.5 * self.mu * (I1 - 3.0)
        if self.volumetric:
            lnJ = xp.log(xp.linalg.det(F))
            phi = phi - self.mu * lnJ + 0.5 * self.lam * lnJ**2
        w = xp.linalg.solve(F.T, E_el)  # F^-T E_el
        phi = phi + 0.5 * self.alpha * (B_l @ B_l) + 0.5 * self.beta * (B_l @ c @ B_l)
        phi = phi - 0.5 * self.gamma * (E_el @ E_el) - 0.5 * self.delta * (w @ w)
        phi = phi + 0.5 * self.c_theta * dth**2 + self.m * dth * (I1 - 3.0)
        phi = phi + self.eta * (E_el @ B_l) + 0.5 * dth * (self.omega_e * (E_el @ E_el) + self.omega_b * (B_l @ B_l))
        return phi

    def _common(self, F, E_el, B_l, theta_l):
        F = np.asarray(F, dtype=float)
        Fi = np.linalg.inv(F)
        return F, Fi, np.asarray(E_el, float), np.asarray(B_l, float), float(theta_l) - self.theta0

    def gradient(self, F, E_el, B_l, theta_l):
        F, Fi, e, b, dth = self._common(F, E_el, B_l, theta_l)
        c = F.T @ F
        w = Fi.T @ e
        G = (self.mu + 2.0 * self.m * dth) * F  # G[i, alpha] = dPhi/dF_{i alpha}
        if self.volumetric:
            lnJ = np.log(np.linalg.det(F))
            G = G + (self.lam * lnJ - self.mu) * Fi.T
        G = G + self.beta * np.outer(F @ b, b) + self.delta * np.outer(w, Fi @ w)
        cinv = Fi @ Fi.T
        dE = -self.gamma * e - self.delta * cinv @ e + self.eta * b + self.omega_e * dth * e
        dB = self.alpha * b + self.beta * c @ b + self.eta * e + self.omega_b * dth * b
        dT = self.c_theta * dth + self.m * (np.trace(c) - 3.0) + 0.5 * (self.omega_e * e @ e + self.omega_b * b @ b)
        return np.concatenate([G.ravel(), dE, dB, [dT]])

    def hessian(self, F, E_el, B_l, theta_l):
        F, Fi, e, b, dth = self._common(F, E_el, B_l, theta_l)
        d = np.eye(3)
        c = F.T @ F
        cinv = Fi @ Fi.T
        w = Fi.T @ e
        Fiw = Fi @ w
        # A[alpha, i, beta, j] = d2Phi / dF_{i alpha} dF_{j beta}
        A = (self.mu + 2.0 * self.m * dth) * np.einsum("ij,ab->aibj", d, d)
        if self.volumetric:
            lnJ = np.log(np.linalg.det(F))
            A = A + (self.mu - self.lam * lnJ) * np.einsum("aj,bi->aibj", Fi, Fi)
            A = A + self.lam * np.einsum("ai,bj->aibj", Fi, Fi)
        A = A + self.beta * np.einsum("ij,a,b->aibj", d, b, b)
        A = A + self.delta * (
            -np.einsum("j,bi,a->aibj", w, Fi, Fiw)
            - np.einsum("i,aj,b->aibj", w, Fi, Fiw)
            - np.einsum("i,ab,j->aibj", w, cinv, w)
        )
        Bm = self.delta * (np.einsum("bi,a->aib", Fi, Fiw) + np.einsum("i,ab->aib", w, cinv))  # [alpha, i, beta]
        Cm = self.beta * (np.einsum("ib,a->aib", F, b) + np.einsum("i,ab->aib", F @ b, d))
        Dm = 2.0 * self.m * F.T  # [alpha, i]
        Gm = (-self.gamma + self.omega_e * dth) * d - self.delta * cinv
        Hm = self.eta * d
        Im = self.omega_e * e
        Mm = (self.alpha + self.omega_b * dth) * d + self.beta * c
        Nm = self.omega_b * b
        H = np.zeros((NVAR, NVAR))
        # packed F index is 3*i + alpha
        A_packed = np.transpose(A, (1, 0, 3, 2)).reshape(9, 9)
        H[SL_F, SL_F] = A_packed
        H[SL_F, SL_E] = np.transpose(Bm, (1, 0, 2)).reshape(9, 3)
        H[SL_F, SL_B] = np.transpose(Cm, (1, 0, 2)).reshape(9, 3)
        H[SL_F, IX_T] = Dm.T.ravel()
        H[SL_E, SL_E] = Gm
        H[SL_E, SL_B] = Hm
        H[SL_E, IX_T] = Im
        H[SL_B, SL_B] = Mm
        H[SL_B, IX_T] = Nm
        H[IX_T, IX_T] = self.c_theta
        upper = np.triu(H, 1)
        H = np.triu(H) + upper.T
        return H


def neo_hookean(mu: float, rho_r: float = 1.0, incompressible: bool = False) -> DemoEnergy:
    """Phi = (mu/2)(tr c - 3), without volumetric terms."""
    return DemoEnergy(mu=mu, lam=0.0, volumetric=False, incompressible=incompressible, rho_r=rho_r)


def decoupled_energy(mu: float, lam: float, alpha: float, rho_r: float = 1.0) -> DemoEnergy:
    """Mechanical neo-Hookean part plus an isolated alpha/2 B_l.B_l magnetic term."""
    return DemoEnergy(mu=mu, lam=lam, alpha=alpha, rho_r=rho_r)


@dataclass(frozen=True)
class CallableEnergy(FreeEnergyModel):
    """Wrap a user energy function Phi(F, E_el, B_l, theta_l) without analytic hooks."""

    fn: Callable = None
    incompressible: bool = False
    rho_r: float = 1.0

    def energy(self, F, E_el, B_l, theta_l):
        return self.fn(F, E_el, B_l, theta_l)


# ---------------------------------------------------------------------------
# derivatives


@dataclass(frozen=True)
class FDSteps:
    """Relative central-difference steps per variable group."""

    h_F: float = 1e-6
    h_E: float = 1e-6
    h_B: float = 1e-6
    h_theta: float = 1e-6
    E_scale: float = 1.0
    B_scale: float = 1.0
    theta_scale: float = 1.0

    def vector(self, z) -> np.ndarray:
        F, e, b, th = unpack(np.asarray(z, dtype=float))
        h = np.empty(NVAR)
        h[SL_F] = self.h_F
        h[SL_E] = self.h_E * max(np.max(np.abs(e)), self.E_scale)
        h[SL_B] = self.h_B * max(np.max(np.abs(b)), self.B_scale)
        h[IX_T] = self.h_theta * max(abs(th), self.theta_scale)
        return h


def _check_state(model: FreeEnergyModel, F, p):
    F = np.asarray(F, dtype=float)
    if F.shape != (3, 3) or not np.all(np.isfinite(F)):
        raise TensorError("F must be a finite 3x3 tensor")
    J = np.linalg.det(F)
    if J <= 0:
        raise InvalidDeformationError(f"det F = {J:.6g} <= 0")
    if model.incompressible:
        if abs(J - 1.0) > 1e-10:
            raise InvalidDeformationError(f"incompressible model evaluated at J = {J:.15g}")
        if p is None:
            raise ConstitutiveError("incompressible model needs the Lagrange multiplier p")
    return F


def _fd_gradient(model, z, steps: FDSteps):
    h = steps.vector(z)
    g = np.empty(NVAR)
    for k in range(NVAR):
        zp, zm = z.copy(), z.copy()
        zp[k] += h[k]
        zm[k] -= h[k]
        fp, fm = float(model.energy_packed(zp)), float(model.energy_packed(zm))
        if not (np.isfinite(fp) and np.isfinite(fm)):
            raise ConstitutiveError("non-finite energy on the difference stencil")
        g[k] = (fp - fm) / (2.0 * h[k])
    return g


_AD_CACHE: dict = {}


def _ad_fns(model):
    key = id(model)
    hit = _AD_CACHE.get(key)
    if hit is None or hit[0] is not model:
        grad = jax.jit(jax.grad(lambda z: model.energy_packed(z)))
        hess = jax.jit(jax.hessian(lambda z: model.energy_packed(z)))
        hit = (model, grad, hess)
        _AD_CACHE[key] = hit
    return hit[1], hit[2]


def energy_gradient(model, F, E_el, B_l, theta_l, method: str = "auto", steps: FDSteps | None = None) -> np.ndarray:
    """Packed first derivatives by analytic hooks, jax ("ad") or central differences ("fd")."""
    z = np.asarray(pack(np.asarray(F, float), np.asarray(E_el, float), np.asarray(B_l, float), theta_l), dtype=float)
    if method == "auto":
        method = "analytic" if model.gradient(*unpack(z)) is not None else "fd"
    if method == "analytic":
        g = model.gradient(*unpack(z))
        if g is None:
            raise ConstitutiveError("model has no analytic gradient hook")
        return np.asarray(g, dtype=float)
    if method == "ad":
        return np.asarray(_ad_fns(model)[0](jnp.asarray(z)), dtype=float)
    if method == "fd":
        return _fd_gradient(model, z, steps or FDSteps())
    raise ValueError(f"unknown derivative method {method!r}")


def energy_hessian(
    model,
    F,
    E_el,
    B_l,
    theta_l,
    method: str = "auto",
    steps: FDSteps | None = None,
    richardson: bool = False,
    gradient_method: str = "auto",
) -> np.ndarray:
    """Packed 16x16 Hessian.

    ``method="fd"`` differences the first derivatives (analytic when the model has
    hooks) with per-variable steps; ``richardson=True`` combines steps h and h/2.
    """
    z = np.asarray(pack(np.asarray(F, float), np.asarray(E_el, float), np.asarray(B_l, float), theta_l), dtype=float)
    if method == "auto":
        method = "analytic" if model.hessian(*unpack(z)) is not None else "fd"
    if method == "analytic":
        H = model.hessian(*unpack(z))
        if H is None:
            raise ConstitutiveError("model has no analytic Hessian hook")
        return np.asarray(H, dtype=float)
    if method == "ad":
        return np.asarray(_ad_fns(model)[1](jnp.asarray(z)), dtype=float)
    if method != "fd":
        raise ValueError(f"unknown derivative method {method!r}")
    steps = steps or FDSteps()
    gm = gradient_method
    if gm == "auto":
        gm = "analytic" if model.gradient(*unpack(z)) is not None else "fd"
        if gm == "fd":
            # nested differences need a larger outer step to stay above round-off
            steps = replace(steps, h_F=max(steps.h_F, 1e-4), h_E=max(steps.h_E, 1e-4), h_B=max(steps.h_B, 1e-4),
                            h_theta=max(steps.h_theta, 1e-4))

    def grad_at(zz):
        return energy_gradient(model, *unpack(zz), method=gm, steps=FDSteps(1e-6, 1e-6, 1e-6, 1e-6, steps.E_scale, steps.B_scale, steps.theta_scale))

    def central(scale):
        h = steps.vector(z) * scale
        H = np.empty((NVAR, NVAR))
        for k in range(NVAR):
            zp, zm = z.copy(), z.copy()
            zp[k] += h[k]
            zm[k] -= h[k]
            H[:, k] = (grad_at(zp) - grad_at(zm)) / (2.0 * h[k])
        return H

    if richardson:
        base = 100.0  # larger base step: truncation is cancelled, round-off is not
        H = (4.0 * central(base / 2.0) - central(base)) / 3.0
    else:
        H = central(1.0)
    if not np.all(np.isfinite(H)):
        raise ConstitutiveError("non-finite Hessian entries from finite differences")
    return H


# ---------------------------------------------------------------------------
# response and moduli


@dataclass(frozen=True)
class MaterialResponse:
    T: np.ndarray  # nominal stress, T[alpha, i]
    tau: np.ndarray  # Cauchy stress J^-1 F T
    P_l: np.ndarray
    M_el: np.ndarray
    dphi_dtheta: float
    p: float | None = None


def evaluate_response(model, F, E_el, B_l, theta_l, p: float | None = None, method: str = "auto",
                      steps: FDSteps | None = None) -> MaterialResponse:
    """T = dPhi/dF (- p F^-1 when incompressible), P_l = -dPhi/dE_el, M_el = -dPhi/dB_l."""
    F = _check_state(model, F, p)
    g = energy_gradient(model, F, E_el, B_l, theta_l, method=method, steps=steps)
    T = g[SL_F].reshape(3, 3).T.copy()
    Fi = np.linalg.inv(F)
    if model.incompressible:
        T = T - p * Fi
    J = np.linalg.det(F)
    return MaterialResponse(T=T, tau=F @ T / J, P_l=-g[SL_E], M_el=-g[SL_B], dphi_dtheta=float(g[IX_T]), p=p)


def stress_jax(model, F, E_el, B_l, theta_l, p=0.0):
    """Nominal stress from jax differentiation of the energy (traceable)."""
    g = jax.grad(lambda FF: model.energy(FF, E_el, B_l, theta_l))(F)
    T = g.T
    if model.incompressible:
        T = T - p * jnp.linalg.inv(F)
    return T


def response_jax(model, F, E_el, B_l, theta_l):
    """(T, P_l, M_el) by jax differentiation, usable inside traced evaluators."""
    gF, gE, gB = jax.grad(lambda FF, ee, bb: model.energy(FF, ee, bb, theta_l), argnums=(0, 1, 2))(F, E_el, B_l)
    return gF.T, -gE, -gB


_BLOCKS_TEN3 = {"BB": SPLIT_REF, "CC": SPLIT_REF, "FF": SPLIT_VEC, "KK": SPLIT_VEC}


@dataclass(frozen=True)
class ModuliSet:
    """The thirteen second derivatives of the free energy.

    AA[alpha,i,beta,j]; BB, CC as Ten3 "ai|b"; DD[alpha,i]; FF, KK as Ten3 "i|aj"
    (the vector index first); GG, HH, LL, MM[alpha,beta]; II, NN[alpha].
    Names are doubled so that FF and II do not collide with F and the identity.
    """

    AA: np.ndarray
    BB: Ten3
    CC: Ten3
    DD: np.ndarray
    FF: Ten3
    GG: np.ndarray
    HH: np.ndarray
    II: np.ndarray
    KK: Ten3
    LL: np.ndarray
    MM: np.ndarray
    NN: np.ndarray

    @classmethod
    def from_hessian(cls, H: np.ndarray) -> "ModuliSet":
        H = np.asarray(H, dtype=float)
        FF_blk = H[SL_F, SL_F].reshape(3, 3, 3, 3)  # [i, alpha, j, beta]
        AA = np.transpose(FF_blk, (1, 0, 3, 2))
        BB = np.transpose(H[SL_F, SL_E].reshape(3, 3, 3), (1, 0, 2))
        CC = np.transpose(H[SL_F, SL_B].reshape(3, 3, 3), (1, 0, 2))
        DD = H[SL_F, IX_T].reshape(3, 3).T
        FFm = np.transpose(H[SL_E, SL_F].reshape(3, 3, 3), (0, 2, 1))  # [beta, alpha, j]
        KK = np.transpose(H[SL_B, SL_F].reshape(3, 3, 3), (0, 2, 1))
        return cls(
            AA=AA,
            BB=Ten3(BB, SPLIT_REF),
            CC=Ten3(CC, SPLIT_REF),
            DD=DD,
            FF=Ten3(FFm, SPLIT_VEC),
            GG=H[SL_E, SL_E].copy(),
            HH=H[SL_E, SL_B].copy(),
            II=H[SL_E, IX_T].copy(),
            KK=Ten3(KK, SPLIT_VEC),
            LL=H[SL_B, SL_E].copy(),
            MM=H[SL_B, SL_B].copy(),
            NN=H[SL_B, IX_T].copy(),
        )

    def blocks(self) -> dict:
        out = {}
        for name in ("AA", "BB", "CC", "DD", "FF", "GG", "HH", "II", "KK", "LL", "MM", "NN"):
            val = getattr(self, name)
            out[name] = np.asarray(val.data if isinstance(val, Ten3) else val, dtype=float)
        return out

    def symmetry_defects(self) -> dict:
        """Relative defects of KK = CC^T, FF = BB^T, LL = HH^T and the major symmetry of AA."""

        def rel(a, b):
            scale = max(np.max(np.abs(a)), np.max(np.abs(b)))
            return 0.0 if scale == 0.0 else float(np.max(np.abs(a - b)) / scale)

        return {
            "KK=CC^T": rel(self.KK.data, self.CC.T.data),
            "FF=BB^T": rel(self.FF.data, self.BB.T.data),
            "LL=HH^T": rel(self.LL, self.HH.T),
            "AA major": rel(self.AA, np.transpose(self.AA, (2, 3, 0, 1))),
            "GG sym": rel(self.GG, self.GG.T),
            "MM sym": rel(self.MM, self.MM.T),
        }


def compute_moduli(model, F, E_el, B_l, theta_l, p: float | None = None, method: str = "auto",
                   steps: FDSteps | None = None, richardson: bool = False) -> ModuliSet:
    """All thirteen moduli at a state; incompressible models add p F^-1 F^-1 to AA."""
    F = _check_state(model, F, p)
    H = energy_hessian(model, F, E_el, B_l, theta_l, method=method, steps=steps, richardson=richardson)
    mod = ModuliSet.from_hessian(H)
    if model.incompressible and p:
        Fi = np.linalg.inv(F)
        mod = replace(mod, AA=mod.AA + p * np.einsum("aj,bi->aibj", Fi, Fi))
    return mod


@dataclass(frozen=True)
class UpdatedModuliSet:
    """Eulerian push-forwards A0..N0 and the (F, J) they were produced with."""

    A0: np.ndarray
    B0: Ten3
    C0: Ten3
    D0: np.ndarray
    G0: np.ndarray
    H0: np.ndarray
    I0: np.ndarray
    M0: np.ndarray
    N0: np.ndarray
    F: np.ndarray
    J: float

    def blocks(self) -> dict:
        out = {}
        for name in ("A0", "B0", "C0", "D0", "G0", "H0", "I0", "M0", "N0"):
            val = getattr(self, name)
            out[name] = np.asarray(val.data if isinstance(val, Ten3) else val, dtype=float)
        return out


def push_forward_moduli(mod: ModuliSet, kin: Kinematics | np.ndarray, printed_forms: bool = False) -> UpdatedModuliSet:
    """Updated moduli.

    A0_{piqj} = J^-1 F_{p a} F_{q b} A_{a i b j};  B0_{ij|k} = J^-1 F_{i a} F_{k b} B_{a j|b};
    C0_{ij|k} = F_{i a} Finv_{b k} C_{a j|b};      D0 = F D;  G0 = J^-1 F G F^T;
    H0 = F H F^-1;  I0 = F I;  M0 = J F^-T M F^-1;  N0 = J F^-T N.

    N0 carries the factor J so that the updated law equals the pushed-forward
    referential law with theta_l0 = J^-1 theta_l; ``printed_forms=True`` uses
    J^-1 instead.
    """
    F = np.asarray(kin.F if isinstance(kin, Kinematics) else kin, dtype=float)
    J = float(np.linalg.det(F))
    if J <= 0:
        raise InvalidDeformationError(f"det F = {J:.6g} <= 0")
    Fi = inv(F)
    from .kernels import push_forward_a_batch

    A0 = push_forward_a_batch(mod.AA[None], F[None])[0]
    B0 = np.einsum("ia,kb,ajb->ijk", F, F, mod.BB.data) / J
    C0 = np.einsum("ia,bk,ajb->ijk", F, Fi, mod.CC.data)
    D0 = F @ mod.DD
    G0 = F @ mod.GG @ F.T / J
    H0 = F @ mod.HH @ Fi
    I0 = F @ mod.II
    M0 = J * Fi.T @ mod.MM @ Fi
    N0 = (Fi.T @ mod.NN / J) if printed_forms else (J * Fi.T @ mod.NN)
    return UpdatedModuliSet(A0=A0, B0=Ten3(B0, SPLIT_REF), C0=Ten3(C0, SPLIT_REF), D0=D0, G0=G0, H0=H0, I0=I0,
                            M0=M0, N0=N0, F=F, J=J)


# ---------------------------------------------------------------------------
# conduction


@dataclass(frozen=True)
class Conductivities:
    """Thermal conductivity kappa (W/(m K)) and electrical conductivity xi (S/m).

    Both must be symmetric positive definite; xi may also be exactly zero.
    """

    kappa: np.ndarray = field(default_factory=lambda: np.eye(3))
    xi: np.ndarray = field(default_factory=lambda: np.zeros((3, 3)))
    require_definite: bool = True

    def __post_init__(self):
        for name in ("kappa", "xi"):
            a = np.asarray(getattr(self, name), dtype=float)
            if a.ndim == 0:
                a = float(a) * np.eye(3)
            if a.shape != (3, 3) or not np.all(np.isfinite(a)):
                raise TensorError(f"{name} must be a finite 3x3 tensor")
            if np.max(np.abs(a - a.T)) > 1e-12 * max(np.max(np.abs(a)), 1.0):
                raise ConstitutiveError(f"{name} must be symmetric")
            if name == "xi" and not np.any(a):
                pass  # a non-conductor
            elif self.require_definite and np.any(np.linalg.eigvalsh(a) <= 0.0):
                raise ConstitutiveError(f"{name} must be positive definite")
            object.__setattr__(self, name, a)


def conduction(cond: Conductivities, grad_theta, E):
    """Fourier and Ohm laws: q = -kappa grad(theta), J = xi E."""
    return -cond.kappa @ np.asarray(grad_theta, float), cond.xi @ np.asarray(E, float)


def conduction_lagrangian(cond: Conductivities, kin: Kinematics, grad_theta_l_over_J, E_l):
    """q_l = -J F^-1 kappa F^-T Grad(J^-1 theta_l),  J_l = J F^-1 xi F^-T E_l."""
    Fi, J = kin.Finv, kin.J
    q_l = -J * Fi @ cond.kappa @ Fi.T @ np.asarray(grad_theta_l_over_J, float)
    J_l = J * Fi @ cond.xi @ Fi.T @ np.asarray(E_l, float)
    return q_l, J_l


__all__ = [
    "ConstitutiveError",
    "Conductivities",
    "DemoEnergy",
    "CallableEnergy",
    "FDSteps",
    "FreeEnergyModel",
    "MaterialResponse",
    "ModuliSet",
    "UpdatedModuliSet",
    "compute_moduli",
    "conduction",
    "conduction_lagrangian",
    "decoupled_energy",
    "energy_gradient",
    "energy_hessian",
    "evaluate_response",
    "moduli_products",
    "neo_hookean",
    "push_forward_moduli",
]
