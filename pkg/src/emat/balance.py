"""Pointwise residuals of the finite balance laws, sources and jump conditions.

Every residual is returned as labeled signed terms whose sum is the residual
(left side minus right side; the heat equations are written as sources minus
storage).  Kernels take a :class:`~emat.fields.Frame` and are compiled per
scenario structure by :func:`~emat.report.run_kernel`.
"""

from __future__ import annotations

from dataclasses import dataclass

import jax.numpy as jnp
import numpy as np

from .constitutive import Conductivities
from .kinematics import (
    EPS0,
    MU0,
    DiffConfig,
    EffectiveFields,
    EulerianEM,
    InvalidDeformationError,
    Kinematics,
    LagrangianEM,
    ThermalState,
    effective_fields,
    pull_back_em,
    pull_back_thermal,
    relative_difference,
)
from .report import ResidualReport, make_report, run_kernel
from .tensor_core import TensorError, perm_contract

# ---------------------------------------------------------------------------
# point containers


@dataclass(frozen=True)
class PointState:
    """Finite state at one material point in both configurations."""

    kin: Kinematics
    eul: EulerianEM
    lag: LagrangianEM
    eff: EffectiveFields
    thermal: ThermalState | None = None
    cond: Conductivities | None = None
    rho_r: float = 1.0

    @property
    def rho(self) -> float:
        return self.rho_r / float(self.kin.J)

    @classmethod
    def from_eulerian(cls, kin, eul, thermal=None, cond=None, rho_r=1.0) -> "PointState":
        return cls(kin, eul, pull_back_em(eul, kin), effective_fields(eul, kin.v), thermal, cond, rho_r)

    def check_consistency(self, tol: float = 1e-10) -> None:
        ref = pull_back_em(self.eul, self.kin)
        for name in ("B_l", "E_l", "P_l", "M_l", "J_E", "E_el", "M_el"):
            a, b = getattr(ref, name), getattr(self.lag, name)
            if relative_difference(a, b) > tol and np.max(np.abs(a - b)) > tol:
                raise ValueError(f"Lagrangian {name} inconsistent with the Eulerian fields")


@dataclass(frozen=True)
class SurfaceData:
    """Boundary point data: referential and current unit normals, surface sources, Nanson ratio."""

    N: np.ndarray
    n: np.ndarray
    area_ratio: float  # da/dA
    sigma_E: float = 0.0
    K_l: np.ndarray = None
    V_s: np.ndarray = None
    t_A: np.ndarray = None

    def __post_init__(self):
        for name in ("N", "n"):
            a = np.asarray(getattr(self, name), dtype=float)
            if a.shape != (3,) or abs(np.linalg.norm(a) - 1.0) > 1e-12:
                raise TensorError(f"{name} must be a unit 3-vector")
            object.__setattr__(self, name, a)
        for name in ("K_l", "V_s", "t_A"):
            a = getattr(self, name)
            object.__setattr__(self, name, np.zeros(3) if a is None else np.asarray(a, dtype=float))

    @classmethod
    def from_reference(cls, N, kin: Kinematics, **kw) -> "SurfaceData":
        """Current normal and da/dA from Nanson's relation n da = J F^-T N dA."""
        N = np.asarray(N, dtype=float)
        if abs(np.linalg.norm(N) - 1.0) > 1e-12:
            raise TensorError("N must be a unit vector")
        m = float(kin.J) * np.asarray(kin.Finv).T @ N
        ratio = float(np.linalg.norm(m))
        kw.setdefault("V_s", np.asarray(kin.V))
        return cls(N=N, n=m / ratio, area_ratio=ratio, **kw)

    def nanson_defect(self, kin: Kinematics) -> float:
        return float(np.linalg.norm(self.n * self.area_ratio - float(kin.J) * np.asarray(kin.Finv).T @ self.N))


# ---------------------------------------------------------------------------
# kernels: Maxwell


def _field(fr, name, which="eul"):
    get = fr.eul if which == "eul" else fr.lag
    return lambda X, t: get(X, t)[name]


def k_maxwell_eulerian(fr, X, t, p):
    e = fr.eul(X, t)
    eps0, mu0 = fr.sc.eps0, fr.sc.mu0
    B, E, P, M = (_field(fr, n) for n in ("B", "E", "P", "M"))
    return {
        "div_B": {"div B": fr.div(B)(X, t)},
        "faraday": {"curl E": fr.curl(E)(X, t), "dB/dt": fr.st(B)(X, t)},
        "gauss": {"eps0 div E": eps0 * fr.div(E)(X, t), "div P": fr.div(P)(X, t), "-rho_e": -e["rho_e"]},
        "ampere": {
            "curl B/mu0": fr.curl(B)(X, t) / mu0,
            "-curl M": -fr.curl(M)(X, t),
            "-J": -e["Jfree"],
            "-eps0 dE/dt": -eps0 * fr.st(E)(X, t),
            "-dP/dt": -fr.st(P)(X, t),
        },
    }


def k_maxwell_lagrangian(fr, X, t, p, printed_forms=False):
    lg = fr.lag(X, t)
    eps0, mu0 = fr.sc.eps0, fr.sc.mu0

    def D_l(Y, s):
        k = fr.kin(Y, s)
        return k["J"] * jnp.linalg.solve(k["c"], fr.lag(Y, s)["E_l"])

    def H_part(Y, s):
        k = fr.kin(Y, s)
        return k["c"] @ fr.lag(Y, s)["B_l"] / (k["J"] * mu0)

    def VxD(Y, s):
        return jnp.cross(fr.kin(Y, s)["V"], D_l(Y, s))

    def E_eff(Y, s):
        return fr.lag(Y, s)["E_el"]

    def M_eff(Y, s):
        return fr.lag(Y, s)["M_el"]

    return {
        "div_B": {"Div B_l": fr.Div(_field(fr, "B_l", "lag"))(X, t)},
        "faraday": {"Curl(E_l + V x B_l)": fr.Curl(E_eff)(X, t), "B_l,t": fr.mt(_field(fr, "B_l", "lag"))(X, t)},
        "gauss": {
            "eps0 Div(J c^-1 E_l)": eps0 * fr.Div(D_l)(X, t),
            "-rho_E": -lg["rho_E"],
            # pulled-back polarization enters with the same sign as div P
            ("-Div P_l" if printed_forms else "Div P_l"): (-1.0 if printed_forms else 1.0)
            * fr.Div(_field(fr, "P_l", "lag"))(X, t),
        },
        "ampere": {
            "Curl(c B_l / J mu0)": fr.Curl(H_part)(X, t),
            "-eps0 Curl(V x J c^-1 E_l)": -eps0 * fr.Curl(VxD)(X, t),
            "-eps0 (J c^-1 E_l),t": -eps0 * fr.mt(D_l)(X, t),
            "-P_l,t": -fr.mt(_field(fr, "P_l", "lag"))(X, t),
            "-Curl(M_l + V x P_l)": -fr.Curl(M_eff)(X, t),
            "-J_E": -lg["J_E"],
        },
    }


def k_region(fr, X, t, p, region="vacuum"):
    e = fr.eul(X, t)
    eps0, mu0 = fr.sc.eps0, fr.sc.mu0
    B, E = _field(fr, "B"), _field(fr, "E")
    if region == "vacuum":
        return {
            "div_B": {"div B*": fr.div(B)(X, t)},
            "faraday": {"curl E*": fr.curl(E)(X, t), "dB*/dt": fr.st(B)(X, t)},
            "div_E": {"div E*": fr.div(E)(X, t)},
            "ampere": {"curl B*": fr.curl(B)(X, t), "-eps0 mu0 dE*/dt": -eps0 * mu0 * fr.st(E)(X, t)},
        }
    eps_r, mu_r = p["eps_r"], p["mu_r"]
    return {
        "div_B": {"div B": fr.div(B)(X, t)},
        "faraday": {"curl E": fr.curl(E)(X, t), "dB/dt": fr.st(B)(X, t)},
        "ampere": {
            "curl B/(mu0 mu_r)": fr.curl(B)(X, t) / (mu0 * mu_r),
            "-eps0 eps_r dE/dt": -eps0 * eps_r * fr.st(E)(X, t),
            "-J": -e["Jfree"],
        },
        "div_E": {"div E": fr.div(E)(X, t)},
    }


# ---------------------------------------------------------------------------
# kernels: body force, couple, momentum


def f_e_terms(fr, X, t):
    e = fr.eul(X, t)
    v = fr.v(X, t)
    gE = fr.grad(_field(fr, "E"))(X, t)
    gB = fr.grad(_field(fr, "B"))(X, t)

    def PxB(Y, s):
        ee = fr.eul(Y, s)
        return jnp.cross(ee["P"], ee["B"])

    def v_PxB(Y, s):
        return jnp.outer(fr.v(Y, s), PxB(Y, s))

    return {
        "rho_e E": e["rho_e"] * e["E"],
        "J x B": jnp.cross(e["Jfree"], e["B"]),
        "(grad E)^T P": gE.T @ e["P"],
        "(grad B)^T M": gB.T @ e["M"],
        "d(P x B)/dt": fr.st(PxB)(X, t),
        "div[v (x) (P x B)]": fr.div(v_PxB)(X, t),
    }


def f_E_terms(fr, X, t):
    lg = fr.lag(X, t)
    k = fr.kin(X, t)
    F, Fi, J = k["F"], k["Finv"], k["J"]

    def E_sp(Y, s):
        return fr.kin(Y, s)["Finv"].T @ fr.lag(Y, s)["E_l"]

    def B_sp(Y, s):
        kk = fr.kin(Y, s)
        return kk["F"] @ fr.lag(Y, s)["B_l"] / kk["J"]

    def w(Y, s):
        kk = fr.kin(Y, s)
        ll = fr.lag(Y, s)
        return jnp.cross(kk["F"] @ ll["P_l"], kk["F"] @ ll["B_l"]) / kk["J"] ** 2

    def Vw(Y, s):
        kk = fr.kin(Y, s)
        ll = fr.lag(Y, s)
        return jnp.outer(kk["V"], jnp.cross(kk["F"] @ ll["P_l"], kk["F"] @ ll["B_l"])) / kk["J"]

    GE = fr.Grad(E_sp)(X, t)
    GB = fr.Grad(B_sp)(X, t)
    return {
        "rho_e E": lg["rho_E"] * Fi.T @ lg["E_l"] / J,
        "J x B": jnp.cross(F @ lg["J_l"], F @ lg["B_l"]) / J**2,
        "(grad E)^T P": Fi.T @ GE.T @ (F @ lg["P_l"]) / J,
        "(grad B)^T M": Fi.T @ GB.T @ (Fi.T @ lg["M_l"]),
        "d(P x B)/dt": fr.st(w)(X, t),
        "div[v (x) (P x B)]": fr.Div(Vw)(X, t) / J,
    }


def L_e_terms(fr, X, t):
    e = fr.eul(X, t)
    return {"P x E": jnp.cross(e["P"], e["E"]), "M_e x B": jnp.cross(e["M_e"], e["B"])}


def L_E_terms(fr, X, t):
    lg = fr.lag(X, t)
    k = fr.kin(X, t)
    F, Fi, J = k["F"], k["Finv"], k["J"]
    return {
        "P x E": jnp.cross(F @ lg["P_l"], Fi.T @ lg["E_l"]) / J,
        "M_e x B": jnp.cross(Fi.T @ lg["M_el"], F @ lg["B_l"]) / J,
    }


def k_body_force(fr, X, t, p):
    return {"f_e": f_e_terms(fr, X, t), "f_E": f_E_terms(fr, X, t), "L_e": L_e_terms(fr, X, t),
            "L_E": L_E_terms(fr, X, t)}


def _sum(terms):
    return sum(terms.values())


def k_momentum(fr, X, t, p):
    k = fr.kin(X, t)
    rho_r = fr.sc.rho_r
    a = fr.a(X, t)
    T = fr.nominal_field(X, t)
    tau = k["F"] @ T / k["J"]
    f_e = _sum(f_e_terms(fr, X, t))
    f_E = _sum(f_E_terms(fr, X, t))
    L_e = _sum(L_e_terms(fr, X, t))
    L_E = _sum(L_E_terms(fr, X, t))
    return {
        "linear_eulerian": {"div tau": fr.div(fr.cauchy)(X, t), "f_e": f_e, "-rho a": -rho_r / k["J"] * a},
        "angular_eulerian": {"eps tau": perm_contract(tau), "L_e": L_e},
        "linear_lagrangian": {"Div T": fr.Div(fr.nominal_field)(X, t), "J f_E": k["J"] * f_E, "-rho_r a": -rho_r * a},
        "angular_lagrangian": {"eps(F T)": perm_contract(k["F"] @ T), "J L_E": k["J"] * L_E},
    }


# ---------------------------------------------------------------------------
# kernels: power, energy, entropy


def w_e_terms(fr, X, t):
    e = fr.eul(X, t)
    rho_r = fr.sc.rho_r

    def P_over_rho(Y, s):
        return fr.eul(Y, s)["P"] * fr.kin(Y, s)["J"] / rho_r

    rho = rho_r / fr.kin(X, t)["J"]
    return {
        "J_e.E_e": e["J_e"] @ e["E_e"],
        "rho d(P/rho)/dt.E_e": rho * fr.mt(P_over_rho)(X, t) @ e["E_e"],
        "-M_e.dB/dt": -e["M_e"] @ fr.mt(_field(fr, "B"))(X, t),
    }


def w_E_terms(fr, X, t):
    lg = fr.lag(X, t)
    k = fr.kin(X, t)
    F, Fi, J, V = k["F"], k["Finv"], k["J"], k["V"]
    rho_r = fr.sc.rho_r

    def FP(Y, s):
        return fr.kin(Y, s)["F"] @ fr.lag(Y, s)["P_l"] / rho_r

    def FB(Y, s):
        kk = fr.kin(Y, s)
        return kk["F"] @ fr.lag(Y, s)["B_l"] / kk["J"]

    E_sp = Fi.T @ lg["E_el"]
    return {
        "J_el.E_el": (F @ lg["J_E"]) @ E_sp,
        "rho_r [dt(FP_l/rho_r) + Grad(.)V].E": rho_r * (fr.st(FP)(X, t) + fr.Grad(FP)(X, t) @ V) @ E_sp,
        "-J M.[dt(FB_l/J) + Grad(.)V]": -J * (Fi.T @ lg["M_el"]) @ (fr.st(FB)(X, t) + fr.Grad(FB)(X, t) @ V),
    }


def k_power(fr, X, t, p):
    return {"w_e": w_e_terms(fr, X, t), "w_E": w_E_terms(fr, X, t)}


def k_energy(fr, X, t, p):
    k = fr.kin(X, t)
    J = k["J"]
    rho_r, c_p = fr.sc.rho_r, fr.sc.c_p
    th = fr.thermal_eul(X, t)
    tl = fr.thermal_lag_primitive(X, t)
    T = fr.nominal_field(X, t)
    tau = k["F"] @ T / J
    Gam = fr.grad(fr.v)(X, t)

    def theta(Y, s):
        return fr.thermal_eul(Y, s)["theta"]

    def q(Y, s):
        return fr.thermal_eul(Y, s)["q"]

    def theta_over_J(Y, s):
        return fr.thermal_lag_primitive(Y, s)["theta_l"] / fr.kin(Y, s)["J"]

    def q_l(Y, s):
        return fr.thermal_lag_primitive(Y, s)["q_l"]

    return {
        "heat_eulerian": {
            "q": th["q_vol"],
            "w_e": _sum(w_e_terms(fr, X, t)),
            "tau:grad v": jnp.einsum("ij,ji->", tau, Gam),
            "-div q": -fr.div(q)(X, t),
            "-rho c_p dtheta/dt": -(rho_r / J) * c_p * fr.mt(theta)(X, t),
        },
        "heat_lagrangian": {
            "q_l": tl["qv_l"],
            "w_E": _sum(w_E_terms(fr, X, t)),
            "T:Grad(FV)": jnp.einsum("ai,ia->", T, fr.Grad(fr.v)(X, t)),
            "-Div q_l": -fr.Div(q_l)(X, t),
            "-rho_r c_p d(theta_l/J)/dt": -rho_r * c_p * fr.mt(theta_over_J)(X, t),
        },
    }


def k_entropy(fr, X, t, p):
    k = fr.kin(X, t)
    th = fr.thermal_eul(X, t)

    def S(Y, s):
        return fr.thermal_eul(Y, s)["S"]

    def q_over_theta(Y, s):
        e = fr.thermal_eul(Y, s)
        return e["q"] / e["theta"]

    return {
        "clausius_duhem": {
            "rho dS/dt": fr.sc.rho_r / k["J"] * fr.mt(S)(X, t),
            "div(q/theta)": fr.div(q_over_theta)(X, t),
            "-q/theta": -th["q_vol"] / th["theta"],
        },
        "_theta": {"theta": th["theta"]},
    }


# ---------------------------------------------------------------------------
# kernels: boundary


def boundary_terms_lagrangian(N, F, J, V, lg, Es, Bs, sigma_E, K_l, T, t_A, eps0, mu0):
    """Jump conditions on the reference boundary and the traction condition."""
    Fi = jnp.linalg.inv(F)
    cinv = Fi @ Fi.T
    c = F.T @ F
    cross = jnp.cross
    return {
        "bc1_tangential_E": {"N x (E_l + V x B_l)": cross(N, lg["E_l"] + cross(V, lg["B_l"])),
                             "-N x F^T E*": -cross(N, F.T @ Es)},
        "bc2_normal_B": {"N.B_l": N @ lg["B_l"], "-N.J F^-1 B*": -N @ (J * Fi @ Bs)},
        "bc3_normal_D": {
            "N.eps0 J c^-1 E_l": eps0 * J * N @ (cinv @ lg["E_l"]),
            "-N.eps0 J c^-1 F^T E*": -eps0 * J * N @ (cinv @ (F.T @ Es)),
            "N.P_l": N @ lg["P_l"],
            "-sigma_E": -sigma_E,
        },
        "bc4_tangential_H": {
            "N x c B_l/(J mu0)": cross(N, c @ lg["B_l"] / (J * mu0)),
            "-N x M_l": -cross(N, lg["M_l"]),
            "-N x V x (eps0 J c^-1 E_l + P_l)": -cross(N, cross(V, eps0 * J * cinv @ lg["E_l"] + lg["P_l"])),
            "-N x F^T B*/mu0": -cross(N, F.T @ Bs / mu0),
            "-K_l": -K_l,
            "sigma_E V_s": sigma_E * V,
        },
        "traction": {"T^T N": T.T @ N, "-t_A": -t_A},
    }


def k_boundary(fr, X, t, p):
    k = fr.kin(X, t)
    lg = fr.lag(X, t)
    vac = fr.sc.vacuum.values(X, t)
    srf = fr.sc.surface.values(X, t)
    T = fr.nominal_field(X, t) if fr.sc.stress is not None else jnp.zeros((3, 3))
    return boundary_terms_lagrangian(fr.sc.surface.N, k["F"], k["J"], k["V"], lg, vac["E"], vac["B"],
                                     srf["sigma_E"], srf["K_l"], T, srf["t_A"], fr.sc.eps0, fr.sc.mu0)


def coil_boundary_terms(n, E, B, Es, Bs, K, eps_r, mu_r):
    return {
        "coil_tangential_E": {"n x E": jnp.cross(n, E), "-n x E*": -jnp.cross(n, Es)},
        "coil_normal_E": {"n.eps_r E": eps_r * n @ E, "-n.E*": -n @ Es},
        "coil_tangential_B": {"n x B/mu_r": jnp.cross(n, B) / mu_r, "-n x B*": -jnp.cross(n, Bs), "-K": -K},
        "coil_normal_B": {"n.B": n @ B, "-n.B*": -n @ Bs},
    }


# ---------------------------------------------------------------------------
# public API


def _entries(raw, names):
    return {k: raw[k] for k in names}


def maxwell_residual_eulerian(sc, X, t=0.0, config: DiffConfig | None = None) -> ResidualReport:
    raw = run_kernel(k_maxwell_eulerian, sc, X, t, config)
    return make_report("eulerian/continuum", raw, X, t)


def maxwell_residual_lagrangian(sc, X, t=0.0, config: DiffConfig | None = None,
                                printed_forms: bool = False) -> ResidualReport:
    """Referential Maxwell system; ``printed_forms`` flips the Div P_l sign in the Gauss law."""
    raw = run_kernel(k_maxwell_lagrangian, sc, X, t, config, printed_forms=printed_forms)
    flagged = ("gauss",) if printed_forms else ()
    return make_report("lagrangian/continuum", raw, X, t, flagged=flagged)


def region_maxwell_residual(sc, X, t=0.0, region: str = "vacuum", eps_r: float = 1.0, mu_r: float = 1.0,
                            config: DiffConfig | None = None) -> ResidualReport:
    """Coil (rigid, eps_r, mu_r) or vacuum field equations at a point of the region."""
    if region not in ("coil", "vacuum"):
        raise ValueError(f"region must be 'coil' or 'vacuum', got {region!r}")
    if region == "coil" and (eps_r <= 0 or mu_r <= 0):
        raise ValueError("coil needs positive eps_r and mu_r")
    raw = run_kernel(k_region, sc, X, t, config, {"eps_r": float(eps_r), "mu_r": float(mu_r)}, region=region)
    return make_report(f"eulerian/{region}", raw, X, t)


def body_force_terms(sc, X, t=0.0, config: DiffConfig | None = None) -> dict:
    """Labeled terms of f_e, f_E, L_e and L_E."""
    return run_kernel(k_body_force, sc, X, t, config)


def em_body_force(sc, X, t=0.0, config=None) -> np.ndarray:
    return sum(body_force_terms(sc, X, t, config)["f_e"].values())


def em_body_couple(sc, X, t=0.0, config=None) -> np.ndarray:
    return sum(body_force_terms(sc, X, t, config)["L_e"].values())


def em_body_force_lagrangian(sc, X, t=0.0, config=None) -> np.ndarray:
    return sum(body_force_terms(sc, X, t, config)["f_E"].values())


def em_body_couple_lagrangian(sc, X, t=0.0, config=None) -> np.ndarray:
    return sum(body_force_terms(sc, X, t, config)["L_E"].values())


def body_couple_point(P, E, M, v, B):
    """L_e = P x E + (M + v x P) x B from point values."""
    P, E, M, v, B = (np.asarray(a, dtype=float) for a in (P, E, M, v, B))
    return np.cross(P, E) + np.cross(M + np.cross(v, P), B)


def momentum_residuals(sc, X, t=0.0, config: DiffConfig | None = None) -> ResidualReport:
    if sc.stress is None:
        raise ValueError("scenario has no stress component")
    raw = run_kernel(k_momentum, sc, X, t, config)
    return make_report("momentum", raw, X, t)


def em_power(sc, X, t=0.0, config: DiffConfig | None = None) -> dict:
    """{"w_e": ..., "w_E": ..., "terms": {...}}; w_E = J w_e for consistent states."""
    raw = run_kernel(k_power, sc, X, t, config)
    return {"w_e": float(sum(raw["w_e"].values())), "w_E": float(sum(raw["w_E"].values())), "terms": raw}


def energy_residual(sc, X, t=0.0, config: DiffConfig | None = None) -> ResidualReport:
    if sc.thermal is None or sc.stress is None:
        raise ValueError("energy residual needs thermal and stress components")
    raw = run_kernel(k_energy, sc, X, t, config)
    return make_report("energy", raw, X, t)


def clausius_duhem_check(sc, X, t=0.0, config: DiffConfig | None = None) -> float:
    """rho dS/dt + div(q/theta) - q/theta; negative values violate the inequality."""
    if sc.thermal is None:
        raise ValueError("scenario has no thermal component")
    raw = run_kernel(k_entropy, sc, X, t, config)
    if float(raw["_theta"]["theta"]) <= 0.0:
        raise ValueError("absolute temperature must be positive")
    return float(sum(raw["clausius_duhem"].values()))


def boundary_residuals_finite(sc, X, t=0.0, config: DiffConfig | None = None) -> ResidualReport:
    """Jump and traction conditions at a material boundary point (scenario vacuum + surface data)."""
    if sc.vacuum is None or sc.surface is None:
        raise ValueError("scenario needs vacuum and surface components")
    N = np.asarray(sc.surface.N, dtype=float)
    if abs(np.linalg.norm(N) - 1.0) > 1e-12:
        raise TensorError("N must be a unit vector")
    raw = run_kernel(k_boundary, sc, X, t, config)
    return make_report("lagrangian/boundary", raw, X, t)


def boundary_residuals_point(state: PointState, E_star, B_star, surface: SurfaceData, T=None) -> ResidualReport:
    """Jump and traction conditions from point values (no field evaluation)."""
    kin, lag = state.kin, state.lag
    if float(kin.J) <= 0:
        raise InvalidDeformationError("det F <= 0")
    lg = {"E_l": lag.E_l, "B_l": lag.B_l, "P_l": lag.P_l, "M_l": lag.M_l}
    T = np.zeros((3, 3)) if T is None else np.asarray(T, float)
    raw = boundary_terms_lagrangian(jnp.asarray(surface.N), jnp.asarray(kin.F), kin.J, jnp.asarray(surface.V_s), lg,
                                    jnp.asarray(E_star, float), jnp.asarray(B_star, float), surface.sigma_E,
                                    jnp.asarray(surface.K_l), jnp.asarray(T), jnp.asarray(surface.t_A),
                                    lag.eps0, lag.mu0)
    return make_report("lagrangian/boundary", raw, np.zeros(3), 0.0)


def coil_boundary_residuals(n, E, B, E_star, B_star, K=None, eps_r=1.0, mu_r=1.0) -> ResidualReport:
    n = np.asarray(n, dtype=float)
    if abs(np.linalg.norm(n) - 1.0) > 1e-12:
        raise TensorError("n must be a unit vector")
    K = np.zeros(3) if K is None else K
    raw = coil_boundary_terms(jnp.asarray(n), *(jnp.asarray(a, dtype=float) for a in (E, B, E_star, B_star, K)),
                              eps_r, mu_r)
    return make_report("eulerian/coil-boundary", raw, np.zeros(3), 0.0)


__all__ = [
    "EPS0",
    "MU0",
    "PointState",
    "SurfaceData",
    "body_couple_point",
    "body_force_terms",
    "boundary_residuals_finite",
    "boundary_residuals_point",
    "clausius_duhem_check",
    "coil_boundary_residuals",
    "em_body_couple",
    "em_body_couple_lagrangian",
    "em_body_force",
    "em_body_force_lagrangian",
    "em_power",
    "energy_residual",
    "maxwell_residual_eulerian",
    "maxwell_residual_lagrangian",
    "momentum_residuals",
    "region_maxwell_residual",
]
