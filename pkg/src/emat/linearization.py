"""Central-difference linearization checks of the incremental evaluators.

For a bias scenario and increment fields, the family ``perturbed(sc, inc, eps)``
is evaluated with the finite residual kernels at +eps and -eps.  The central
difference is compared with the incremental evaluator (referential forms
directly, updated forms after the push-forward factor of each equation), and
the observed convergence order is reported.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field

import jax
import jax.numpy as jnp
import numpy as np

from . import balance as bal
from . import incremental as incm
from .fields import Frame, perturbed
from .report import run_kernel

DEFAULT_EPS = (1e-3, 1e-4, 1e-5)
GROUPS = ("maxwell", "momentum", "heat", "constitutive", "conduction", "boundary")
ORDER_TARGET = 1.9
# below this normalized error the difference quotient is at round-off and the order is not meaningful
ERROR_FLOOR = 1e-11


@dataclass(frozen=True)
class LinearizationRow:
    group: str
    equation: str
    form: str
    errors: tuple
    order: float
    passed: bool
    flagged: bool = False
    sign_audit: dict | None = None

    def line(self) -> str:
        errs = " ".join(f"{e:.2e}" for e in self.errors)
        tag = "PASS" if self.passed else ("FLAGGED" if self.flagged else "FAIL")
        return f"{tag} {self.group}/{self.form}/{self.equation}: order {self.order:.3f} errors [{errs}]"

    def to_dict(self) -> dict:
        out = {"group": self.group, "equation": self.equation, "form": self.form, "errors": list(self.errors),
               "order": self.order if math.isfinite(self.order) else "exact", "passed": self.passed}
        if self.flagged:
            out["flagged"] = True
        if self.sign_audit is not None:
            out["sign_audit"] = self.sign_audit
        return out


@dataclass
class LinearizationReport:
    eps: tuple
    rows: list = field(default_factory=list)

    @property
    def passed(self) -> bool:
        return all(r.passed for r in self.rows if not r.flagged)

    def failures(self):
        return [r for r in self.rows if not r.passed and not r.flagged]

    def min_order(self) -> float:
        return min((r.order for r in self.rows if not r.flagged), default=math.inf)

    def to_dict(self) -> dict:
        return {"eps": list(self.eps), "passed": self.passed, "rows": [r.to_dict() for r in self.rows]}


def observed_order(eps, errors) -> float:
    """Smallest order log(e_i/e_{i+1})/log(eps_i/eps_{i+1}) over consecutive pairs."""
    orders = []
    for (h1, e1), (h2, e2) in zip(zip(eps, errors), zip(eps[1:], errors[1:])):
        if e1 < ERROR_FLOOR and e2 < ERROR_FLOOR:
            continue
        if e2 < ERROR_FLOOR:
            continue  # reached round-off; converged at least as fast as required
        orders.append(math.log(e1 / e2) / math.log(h1 / h2))
    return min(orders) if orders else math.inf


# ---------------------------------------------------------------------------
# finite-side kernels


def k_finite_constitutive(fr, X, t, p):
    r = fr.model_response(X, t)
    return {"T": r["T"], "P_l": r["P_l"], "M_el": r["M_el"]}


def k_finite_conduction(fr, X, t, p):
    """Referential Fourier and Ohm laws: q_l = -J F^-1 kappa F^-T Grad(theta_l/J), J_l = J F^-1 xi F^-T E_l."""
    k = fr.kin(X, t)
    Fi, J = k["Finv"], k["J"]

    def th_over_J(Y, s):
        return fr.thermal_lag_primitive(Y, s)["theta_l"] / fr.kin(Y, s)["J"]

    out = {"J_l": J * Fi @ fr.sc.xi @ Fi.T @ fr.lag(X, t)["E_l"]}
    if fr.sc.thermal is not None:
        out["q_l"] = -J * Fi @ fr.sc.kappa @ Fi.T @ fr.Grad(th_over_J)(X, t)
    return out


def k_inc_constitutive(f: incm.IncFrame, X, t):
    k = f.fr.kin(X, t)
    F, Fi, J = k["F"], k["Finv"], k["J"]
    d = f.dl(X, t)
    th = f.thl(X, t)["theta_l"] if f.inc.thermal is not None else 0.0
    mod = f.moduli(X, t)
    T, P, M = incm._referential_products(mod, f.L(X, t) @ F, d["E_el"], d["B_l"], th, jnp)
    d0 = f.d0(X, t)
    th0 = f.th0(X, t)["theta_l0"]
    T0, P0, M0 = incm._updated_products(f.umod(X, t), f.L(X, t), d0["E_el0"], d0["B_l0"], th0, jnp)
    return {"lagrangian": {"T": T, "P_l": P, "M_el": M},
            "eulerian": {"T": T0, "P_l": P0, "M_el": M0},
            "_push": {"T": F / J, "P_l": F / J, "M_el": Fi.T}}


def k_inc_conduction_pair(f: incm.IncFrame, X, t):
    k = f.fr.kin(X, t)
    out = incm.k_inc_conduction(f, X, t)
    return {"eulerian": out, "_push": {"J_l": k["F"] / k["J"], "q_l": k["F"] / k["J"]}}


# ---------------------------------------------------------------------------
# helpers


def _fd(kernel, sc, inc, X, t, eps, config, s):
    plus = run_kernel(kernel, perturbed(sc, inc, eps, s, config), X, t, config)
    minus = run_kernel(kernel, perturbed(sc, inc, -eps, s, config), X, t, config)
    return jax.tree_util.tree_map(lambda a, b: (a - b) / (2.0 * eps), plus, minus)


def _values(raw):
    """Residual values from a kernel's {equation: {label: term}} output."""
    return {k: sum(np.asarray(v, dtype=float) for v in terms.values()) for k, terms in raw.items()}


def _scale(terms):
    return max(float(np.linalg.norm(v)) for v in terms.values())


def _apply(factor, value):
    factor = np.asarray(factor, dtype=float)
    return factor * value if factor.ndim == 0 else factor @ value


def _rows(group, form, an_terms, fds, eps, factor=None, flagged=(), audit=None):
    """Compare analytic labeled terms with a list of central differences (one per eps)."""
    rows = []
    for eq, terms in an_terms.items():
        if eq not in fds[0]:
            continue
        an = sum(np.asarray(v, dtype=float) for v in terms.values())
        scale = max(_scale(terms), 1e-300)
        fac = (factor or {}).get(eq) if isinstance(factor, dict) else factor
        refs = [fd[eq] if fac is None else _apply(fac, fd[eq]) for fd in fds]
        errors = tuple(float(np.linalg.norm(r - an)) / scale for r in refs)
        order = observed_order(eps, errors)
        sa = None
        if audit is not None and eq in audit:
            alt = an - 2.0 * np.asarray(terms[audit[eq]], dtype=float)
            alt_err = tuple(float(np.linalg.norm(r - alt)) / scale for r in refs)
            alt_order = observed_order(eps, alt_err)
            sa = {"adopted_order": order if math.isfinite(order) else "exact",
                  "flipped_divergence_order": alt_order if math.isfinite(alt_order) else "exact",
                  "passing_convention": ("sources minus storage with -Div q" if order >= ORDER_TARGET else
                                         "flipped" if alt_order >= ORDER_TARGET else "neither")}
        rows.append(LinearizationRow(group, eq, form, errors, order, order >= ORDER_TARGET, eq in flagged, sa))
    return rows


# ---------------------------------------------------------------------------
# public


def linearization_check(sc, inc, X, t=0.0, eps=DEFAULT_EPS, groups=GROUPS, config=None, printed_forms=False,
                        literal_L_inverse=False, s=30.0, sign_audit=True) -> LinearizationReport:
    """Central-difference check of every incremental evaluator that has a finite parent.

    Groups whose scenario components are missing (thermal, stress, model,
    boundary data) are skipped.  Equations changed by ``printed_forms`` or
    ``literal_L_inverse`` are reported as flagged.
    """
    eps = tuple(float(e) for e in eps)
    if len(eps) < 2 or any(e <= 0 for e in eps):
        raise ValueError("need at least two positive step sizes")
    rep = LinearizationReport(eps)
    X = np.asarray(X, dtype=float)
    run = incm.run_incremental

    def fds(kernel):
        return [_fd(kernel, sc, inc, X, t, e, config, s) for e in eps]

    kin = run_kernel(_k_kin, sc, X, t, config)
    F, J = kin["F"], float(kin["J"])
    pf = bool(printed_forms)
    mflag = ("gauss", "ampere") if pf else ()

    if "maxwell" in groups:
        d = [_values(r) for r in fds(bal.k_maxwell_lagrangian)]
        lag = run(incm.k_inc_maxwell_lagrangian, sc, inc, X, t, config, pf)
        eul = run(incm.k_inc_maxwell_eulerian, sc, inc, X, t, config, pf)
        rep.rows += _rows("maxwell", "lagrangian", lag, d, eps, flagged=mflag)
        fac = {"div_B": 1.0 / J, "gauss": 1.0 / J, "faraday": F / J, "ampere": F / J}
        rep.rows += _rows("maxwell", "eulerian", eul, d, eps, fac, flagged=mflag)

    has_stress = sc.stress is not None and (sc.stress.kind == "model" or inc.T is not None)
    if "momentum" in groups and has_stress:
        d = [_values(r) for r in fds(bal.k_momentum)]
        raw = run(incm.k_inc_momentum, sc, inc, X, t, config, pf)
        lagn = {k: raw[k] for k in ("linear_lagrangian", "angular_lagrangian")}
        euln = {k.replace("eulerian", "lagrangian"): raw[k] for k in ("linear_eulerian", "angular_eulerian")}
        fl = ("linear_lagrangian",) if pf else ()
        rep.rows += _rows("momentum", "lagrangian", lagn, d, eps, flagged=fl)
        rep.rows += [_rename(r, "lagrangian", "eulerian") for r in
                     _rows("momentum", "eulerian", euln, d, eps, 1.0 / J, flagged=fl)]

    if "heat" in groups and has_stress and sc.thermal is not None and inc.thermal is not None:
        d = [_values(r) for r in fds(bal.k_energy)]
        raw = run(incm.k_inc_heat, sc, inc, X, t, config, pf)
        fl = ("heat_lagrangian",) if pf else ()
        audit = {"heat_lagrangian": "-Div qdot_l"} if sign_audit else None
        rep.rows += _rows("heat", "lagrangian", {"heat_lagrangian": raw["heat_lagrangian"]}, d, eps, flagged=fl,
                          audit=audit)
        audit = {"heat_lagrangian": "-div qdot_l0"} if sign_audit else None
        rep.rows += [_rename(r, "heat_lagrangian", "heat_eulerian") for r in
                     _rows("heat", "eulerian", {"heat_lagrangian": raw["heat_eulerian"]}, d, eps, 1.0 / J,
                           flagged=fl, audit=audit)]

    if "constitutive" in groups and sc.model is not None:
        d = fds(k_finite_constitutive)
        raw = run(k_inc_constitutive, sc, inc, X, t, config, pf)
        lagn = {k: {k: v} for k, v in raw["lagrangian"].items()}
        euln = {k: {k: v} for k, v in raw["eulerian"].items()}
        rep.rows += _rows("constitutive", "lagrangian", lagn, d, eps)
        rep.rows += _rows("constitutive", "eulerian", euln, d, eps, raw["_push"])

    if "conduction" in groups:
        d = fds(k_finite_conduction)
        raw = run(k_inc_conduction_pair, sc, inc, X, t, config, pf)
        names = {"J_l0": "J_l", "q_l0": "q_l"}
        euln = {names[k]: {k: v} for k, v in raw["eulerian"].items()}
        fl = ("J_l", "q_l") if pf else ()
        rep.rows += _rows("conduction", "eulerian", euln, d, eps, raw["_push"], flagged=fl)

    has_bc = sc.vacuum is not None and sc.surface is not None and inc.vacuum is not None and inc.surface is not None
    if "boundary" in groups and has_bc:
        d = [_values(r) for r in fds(bal.k_boundary)]
        raw = run(incm.k_inc_boundary, sc, inc, X, t, config, pf, literal_L_inverse)
        fl = ("bc1_tangential_E", "bc2_normal_B", "bc3_normal_D", "bc4_tangential_H") \
            if (pf or literal_L_inverse) else ()
        rep.rows += _rows("boundary", "lagrangian", raw["lagrangian"], d, eps, flagged=fl)
        dAda = 1.0 / float(raw["_nanson"]["ratio"])
        fac = {k: (dAda * F if "tangential" in k else dAda) for k in raw["eulerian"]}
        rep.rows += _rows("boundary", "eulerian", raw["eulerian"], d, eps, fac, flagged=fl)
    return rep


def _k_kin(fr, X, t, p):
    return fr.kin(X, t)


def _rename(row, old, new):
    return LinearizationRow(row.group, row.equation.replace(old, new), row.form, row.errors, row.order, row.passed,
                            row.flagged, row.sign_audit)


def jvp_derivative(kernel, sc, inc, X, t=0.0, config=None, s=30.0):
    """Exact d/deps of a finite kernel along the perturbed family (forward-mode AD diagnostic)."""
    X = np.asarray(X, dtype=float)

    def f(e):
        return kernel(Frame(perturbed(sc, inc, e, s, config), config), X, t, {})

    _, tangent = jax.jit(lambda e: jax.jvp(f, (e,), (jnp.ones_like(e),)))(jnp.asarray(0.0))
    return jax.tree_util.tree_map(lambda a: np.asarray(a, dtype=float), tangent)


__all__ = [
    "DEFAULT_EPS",
    "GROUPS",
    "LinearizationReport",
    "LinearizationRow",
    "jvp_derivative",
    "linearization_check",
    "observed_order",
]
