"""Invariant suites run by ``emat verify`` and the manufactured scenarios they use.

Each suite draws its states from its own seeded generator, so selecting a
subset of suites does not change the states of the others.  Results carry no
timing information; the report is a pure function of config and seed.
"""

from __future__ import annotations

import json
import math
from dataclasses import dataclass, field

import numpy as np

from . import balance as bal
from .config import SUITES, ScenarioConfig
from .constitutive import compute_moduli, push_forward_moduli
from .fields import (
    EulerianEMFields,
    EulerianThermal,
    IncrementFields,
    LagrangianEMFields,
    LagrangianThermal,
    ModelStress,
    PlaneWaveEM,
    PotentialEM,
    Scenario,
    SmoothField,
    SmoothMotion,
    SurfaceFields,
    VacuumFields,
)
from .incremental import (
    IncrementalState,
    assembled_governing_residuals,
    composed_governing_residuals,
    pull_back_increments,
    push_forward_increments,
)
from .kinematics import (
    EulerianEM,
    Kinematics,
    ThermalState,
    effective_lagrangian_check,
    pull_back_em,
    pull_back_thermal,
    push_forward_em,
    push_forward_thermal,
    relative_difference,
)
from .linearization import _k_kin, linearization_check
from .report import SCHEMA_VERSION, run_kernel


@dataclass
class Check:
    suite: str
    name: str
    passed: bool
    value: float
    tolerance: float
    flagged: bool = False
    detail: dict = field(default_factory=dict)

    @property
    def status(self) -> str:
        if self.flagged:
            return "flagged"
        return "pass" if self.passed else "fail"

    def to_dict(self) -> dict:
        return {"suite": self.suite, "name": self.name, "status": self.status, "value": _num(self.value),
                "tolerance": _num(self.tolerance), "detail": _clean(self.detail)}


def _num(x):
    x = float(x)
    return x if math.isfinite(x) else repr(x)


def _clean(obj):
    if isinstance(obj, dict):
        return {str(k): _clean(v) for k, v in obj.items()}
    if isinstance(obj, (list, tuple)):
        return [_clean(v) for v in obj]
    if isinstance(obj, (float, np.floating)):
        return _num(obj)
    if isinstance(obj, np.ndarray):
        return _clean(obj.tolist())
    if isinstance(obj, np.integer):
        return int(obj)
    return obj


@dataclass
class RunReport:
    command: str
    seed: int
    scenario: dict
    checks: list = field(default_factory=list)
    tables: list = field(default_factory=list)

    @property
    def passed(self) -> bool:
        return all(c.passed for c in self.checks if not c.flagged)

    def suites(self) -> dict:
        out = {}
        for c in self.checks:
            s = out.setdefault(c.suite, {"checks": 0, "failed": 0, "flagged": 0})
            s["checks"] += 1
            s["failed"] += int(c.status == "fail")
            s["flagged"] += int(c.flagged)
        for s in out.values():
            s["passed"] = s["failed"] == 0
        return out

    def to_dict(self) -> dict:
        return {
            "schema_version": SCHEMA_VERSION,
            "command": self.command,
            "seed": self.seed,
            "passed": self.passed,
            "suites": self.suites(),
            "checks": [c.to_dict() for c in self.checks],
            "tables": list(self.tables),
            "scenario": self.scenario,
        }

    def to_json(self) -> str:
        return json.dumps(self.to_dict(), sort_keys=True, indent=1) + "\n"


# ---------------------------------------------------------------------------
# manufactured states


def suite_rng(seed: int, suite: str) -> np.random.Generator:
    return np.random.default_rng([int(seed), SUITES.index(suite) if suite in SUITES else 97])


def random_F(rng, strain=0.2, min_det=0.3):
    while True:
        F = np.eye(3) + strain * rng.standard_normal((3, 3))
        if np.linalg.det(F) > min_det:
            return F


def _motion(cfg: ScenarioConfig, rng):
    m = cfg.manufactured
    if m.motion == "identity":
        return SmoothMotion.identity()
    if m.motion == "bias":
        return SmoothMotion.affine(np.asarray(cfg.bias.F))
    return SmoothMotion.random(rng, m.strain, m.rate, m.wiggle)


def _em(cfg: ScenarioConfig, rng):
    m, c = cfg.manufactured, cfg.constants
    s = m.field_scale
    if m.em == "potential":
        em = PotentialEM.random(rng, scale=s)
        return PotentialEM(em.A, em.phi, em.P, em.M, c.eps0, c.mu0)
    if m.em == "vacuum_wave":
        speed = 1.0 / math.sqrt(c.eps0 * c.mu0)
        return PlaneWaveEM(np.asarray(m.wave_direction), np.asarray(m.wave_polarization) * s, speed, 1.0)
    if m.em == "div_defect":
        # B = (X_1, 0, 0): div B = 1 while every other field vanishes
        z = SmoothField.zeros((3,))
        lin = np.zeros((3, 3))
        lin[0, 0] = 1.0
        B = SmoothField(np.zeros(3), lin, z.rate, z.amp, z.k, z.w, z.phase)
        return EulerianEMFields(B, z, z, z, z, SmoothField.zeros((1,)))
    if m.em == "uniform":
        return EulerianEMFields.uniform(B=s * rng.standard_normal(3), E=s * rng.standard_normal(3))
    return EulerianEMFields.random(rng, {k: s for k in ("B", "E", "P", "M", "Jfree", "rho_e")})


def manufactured_scenario(cfg: ScenarioConfig, rng, boundary: bool = False, model: bool = True,
                          em: str | None = None) -> Scenario:
    """Bias scenario from the ``[manufactured]`` table with the configured model and conductivities.

    ``em`` overrides the field family (the linearization and assembly suites use
    independent random fields: they difference residuals, so the bias need not
    satisfy the equations, and potential-built fields are costly to trace).
    """
    m = cfg.manufactured
    if em is not None:
        m = m.model_copy(update={"em": em})
        cfg = cfg.model_copy(update={"manufactured": m})
    thermal = EulerianThermal.random(rng, theta0=m.theta0, scale=0.1) if m.thermal == "random" else None
    vacuum = surface = None
    if boundary:
        N = rng.standard_normal(3)
        N /= np.linalg.norm(N)
        vacuum = VacuumFields(SmoothField.random(rng, (3,)), SmoothField.random(rng, (3,)))
        surface = SurfaceFields(N, SmoothField.random(rng, (1,)), SmoothField.random(rng, (3,)),
                                SmoothField.random(rng, (3,)))
    mdl = cfg.build_model() if model else None
    return Scenario(
        motion=_motion(cfg, rng), em=_em(cfg, rng), thermal=thermal,
        stress=ModelStress(cfg.bias.p) if mdl is not None else None, vacuum=vacuum, surface=surface,
        rho_r=cfg.model.rho_r, kappa=np.asarray(cfg.conductivity.kappa), xi=np.asarray(cfg.conductivity.xi),
        eps0=cfg.constants.eps0, mu0=cfg.constants.mu0, model=mdl,
    )


def manufactured_increment(cfg: ScenarioConfig, rng, sc: Scenario) -> IncrementFields:
    m = cfg.manufactured
    if m.increment == "zero":
        u, em, th = SmoothField.zeros((3,)), LagrangianEMFields.zeros(), LagrangianThermal.zeros()
    else:
        u = SmoothField.random(rng, (3,), m.increment_scale)
        em = LagrangianEMFields.random(rng, {k: m.field_scale for k in ("B_l", "E_l", "P_l", "M_l", "J_l", "rho_E")})
        th = LagrangianThermal.random(rng, theta0=0.1)
    vac = surf = None
    if sc.vacuum is not None:
        if m.increment == "zero":
            z = SmoothField.zeros((3,))
            vac = VacuumFields(z, z)
            surf = SurfaceFields(sc.surface.N, SmoothField.zeros((1,)), z, z)
        else:
            vac = VacuumFields(SmoothField.random(rng, (3,)), SmoothField.random(rng, (3,)))
            surf = SurfaceFields(sc.surface.N, SmoothField.random(rng, (1,)), SmoothField.random(rng, (3,)),
                                 SmoothField.random(rng, (3,)))
    return IncrementFields(u, em, th if sc.thermal is not None else None, None, vac, surf)


def random_point(rng, extent=0.3):
    return extent * rng.standard_normal(3)


def random_material_state(cfg: ScenarioConfig, rng):
    """(F, E_el, B_l, theta_l) for moduli checks."""
    model = cfg.build_model()
    F = random_F(rng)
    if model.incompressible:
        F = F / np.cbrt(np.linalg.det(F))
    return F, rng.standard_normal(3), rng.standard_normal(3), model.reference_temperature() + 0.1 * rng.standard_normal()


# ---------------------------------------------------------------------------
# suites


def _max(values):
    return max(values) if values else 0.0


def suite_round_trips(cfg: ScenarioConfig, rng) -> list:
    n = cfg.verify.round_trip_states
    tol = cfg.tol("round_trip")
    c = cfg.constants
    em_d, th_d, inc_d, eff_d = [], [], [], []
    for _ in range(n):
        kin = Kinematics.from_F(random_F(rng), rng.standard_normal(3))
        eul = EulerianEM(*(rng.standard_normal(3) for _ in range(5)), float(rng.standard_normal()), c.eps0, c.mu0)
        back = push_forward_em(pull_back_em(eul, kin), kin)
        em_d.append(max(relative_difference(getattr(back, k), getattr(eul, k))
                        for k in ("B", "E", "P", "M", "Jfree", "rho_e")))
        eff = effective_lagrangian_check(eul, kin)
        eff_d.append(max(relative_difference(eff["E_el_convected"], eff["E_el_pulled"]),
                         relative_difference(eff["M_el_convected"], eff["M_el_pulled"])))
        th = ThermalState(1.0 + rng.uniform(), rng.standard_normal(3), float(rng.standard_normal()))
        tb = push_forward_thermal(pull_back_thermal(th, kin), kin)
        th_d.append(max(relative_difference(getattr(tb, k), getattr(th, k)) for k in ("theta", "q", "q_vol", "rho")))
        vecs = {k: rng.standard_normal(3) for k in ("B_l", "E_l", "P_l", "M_l", "M_el", "J_E", "J_l", "q_l", "K_l")}
        scal = {k: float(rng.standard_normal()) for k in ("rho_E", "theta_l", "q_vol", "w_E", "sigma_E")}
        inc = IncrementalState(**vecs, **scal)
        ratio = 0.5 + rng.uniform()
        ib = pull_back_increments(push_forward_increments(inc, kin, ratio), kin, ratio)
        inc_d.append(max(relative_difference(getattr(ib, k), getattr(inc, k)) for k in
                         ("B_l", "E_l", "P_l", "M_l", "M_el", "J_E", "J_l", "rho_E", "theta_l", "q_l", "q_vol",
                          "w_E", "sigma_E", "K_l")))
    model = cfg.build_model()
    _, E, B, th = random_material_state(cfg, rng)
    mod = compute_moduli(model, np.eye(3), E, B, th, p=cfg.bias.p if model.incompressible else None)
    up = push_forward_moduli(mod, np.eye(3))
    ref = mod.blocks()
    pairs = {"A0": "AA", "B0": "BB", "C0": "CC", "D0": "DD", "G0": "GG", "H0": "HH", "I0": "II", "M0": "MM",
             "N0": "NN"}
    ident = max(float(np.max(np.abs(v - ref[pairs[k]]))) for k, v in up.blocks().items())
    return [
        Check("round_trips", "em", _max(em_d) <= tol, _max(em_d), tol, detail={"states": n}),
        Check("round_trips", "effective_fields", _max(eff_d) <= tol, _max(eff_d), tol, detail={"states": n}),
        Check("round_trips", "thermal", _max(th_d) <= tol, _max(th_d), tol, detail={"states": n}),
        Check("round_trips", "increments", _max(inc_d) <= tol, _max(inc_d), tol, detail={"states": n}),
        Check("round_trips", "moduli_identity_at_F=I", ident == 0.0, ident, 0.0),
    ]


def suite_moduli_symmetry(cfg: ScenarioConfig, rng) -> list:
    model = cfg.build_model()
    p = cfg.bias.p if model.incompressible else None
    worst = {"analytic": {}, "fd": {}}
    for _ in range(cfg.verify.moduli_states):
        state = random_material_state(cfg, rng)
        for method, key in (("auto", "analytic"), ("fd", "fd")):
            for name, d in compute_moduli(model, *state, p=p, method=method).symmetry_defects().items():
                worst[key][name] = max(worst[key].get(name, 0.0), d)
    out = []
    for key, tname in (("analytic", "symmetry_analytic"), ("fd", "symmetry_fd")):
        tol = cfg.tol(tname)
        for name in ("KK=CC^T", "FF=BB^T", "LL=HH^T", "AA major"):
            v = worst[key][name]
            out.append(Check("moduli_symmetry", f"{key}/{name}", v <= tol, v, tol,
                             detail={"states": cfg.verify.moduli_states}))
    return out


def suite_fd_vs_analytic(cfg: ScenarioConfig, rng) -> list:
    from .constitutive import energy_hessian

    model = cfg.build_model()
    worst = {"fd": 0.0, "richardson": 0.0}
    reference = "analytic" if model.has_analytic else "ad"
    for _ in range(cfg.verify.moduli_states):
        state = random_material_state(cfg, rng)
        H = energy_hessian(model, *state, method=reference)
        scale = max(float(np.max(np.abs(H))), 1e-300)
        for key, rich in (("fd", False), ("richardson", True)):
            Hf = energy_hessian(model, *state, method="fd", richardson=rich)
            worst[key] = max(worst[key], float(np.max(np.abs(Hf - H))) / scale)
    t1, t2 = cfg.tol("fd_moduli"), cfg.tol("fd_richardson")
    d = {"states": cfg.verify.moduli_states, "reference": reference}
    return [Check("fd_vs_analytic", "central", worst["fd"] <= t1, worst["fd"], t1, detail=d),
            Check("fd_vs_analytic", "richardson", worst["richardson"] <= t2, worst["richardson"], t2, detail=d)]


def suite_configuration_equivalence(cfg: ScenarioConfig, rng) -> list:
    tol = cfg.tol("equivalence")
    c = cfg.constants
    diff = cfg.numerics.diff_config()
    worst = {"lagrangian_maxwell": 0.0, "f_E": 0.0, "L_E": 0.0, "w_E": 0.0}
    n = cfg.verify.equivalence_states
    for _ in range(n):
        em = PotentialEM.random(rng, scale=cfg.manufactured.field_scale)
        em = PotentialEM(em.A, em.phi, em.P, em.M, c.eps0, c.mu0)
        sc = Scenario(SmoothMotion.random(rng, cfg.manufactured.strain, cfg.manufactured.rate,
                                          cfg.manufactured.wiggle), em, eps0=c.eps0, mu0=c.mu0)
        X, t = random_point(rng), float(rng.uniform(0.0, 0.5))
        rep = bal.maxwell_residual_lagrangian(sc, X, t, diff)
        scale = max(r.scale for r in rep)
        worst["lagrangian_maxwell"] = max(worst["lagrangian_maxwell"], max(r.norm for r in rep) / scale)
        terms = bal.body_force_terms(sc, X, t, diff)
        tot = {k: sum(v.values()) for k, v in terms.items()}
        worst["f_E"] = max(worst["f_E"], relative_difference(tot["f_E"], tot["f_e"]))
        worst["L_E"] = max(worst["L_E"], relative_difference(tot["L_E"], tot["L_e"]))
        J = float(run_kernel(_k_kin, sc, X, t, diff)["J"])
        pw = bal.em_power(sc, X, t, diff)
        worst["w_E"] = max(worst["w_E"], relative_difference(pw["w_E"], J * pw["w_e"]))
    rel = {"lagrangian_maxwell": "max residual norm / report scale", "f_E": "f_E vs f_e", "L_E": "L_E vs L_e",
           "w_E": "w_E vs J w_e"}
    return [Check("configuration_equivalence", k, v <= tol, v, tol, detail={"states": n, "measure": rel[k]})
            for k, v in worst.items()]


def suite_linearization(cfg: ScenarioConfig, rng) -> list:
    out = []
    target = cfg.numerics.order_target
    n = cfg.verify.linearization_states
    for i in range(n):
        sc = manufactured_scenario(cfg, rng, boundary=True, em="random")
        inc = manufactured_increment(cfg, rng, sc)
        X, t = random_point(rng), float(rng.uniform(0.0, 0.5))
        rep = linearization_check(sc, inc, X, t, eps=tuple(cfg.numerics.lin_eps), printed_forms=cfg.printed_forms,
                                  literal_L_inverse=cfg.literal_L_inverse)
        for row in rep.rows:
            ok = row.order >= target
            d = {"errors": list(row.errors), "order": row.order if math.isfinite(row.order) else "exact"}
            if row.sign_audit:
                d["sign_audit"] = row.sign_audit
            name = f"{row.group}/{row.form}/{row.equation}" + (f"#{i}" if n > 1 else "")
            out.append(Check("linearization", name, ok, row.order, target, flagged=row.flagged, detail=d))
    return out


def suite_assembly(cfg: ScenarioConfig, rng) -> list:
    tol = cfg.tol("assembly")
    worst: dict = {}
    n = cfg.verify.assembly_states
    for _ in range(n):
        sc = manufactured_scenario(cfg, rng, em="random")
        inc = manufactured_increment(cfg, rng, sc)
        X, t = random_point(rng), float(rng.uniform(0.0, 0.5))
        a = assembled_governing_residuals(sc, inc, X, t, printed_forms=cfg.printed_forms)
        b = composed_governing_residuals(sc, inc, X, t, printed_forms=cfg.printed_forms)
        for name in a.names():
            scale = max(a[name].scale, b[name].scale, 1e-300)
            worst[name] = max(worst.get(name, 0.0), float(np.max(np.abs(a[name].value - b[name].value))) / scale)
    return [Check("assembly", name, v <= tol, v, tol, detail={"states": n}) for name, v in sorted(worst.items())]


SUITE_FUNCS = {
    "round_trips": suite_round_trips,
    "moduli_symmetry": suite_moduli_symmetry,
    "fd_vs_analytic": suite_fd_vs_analytic,
    "configuration_equivalence": suite_configuration_equivalence,
    "linearization": suite_linearization,
    "assembly": suite_assembly,
}


def run_verify(cfg: ScenarioConfig, progress=None) -> RunReport:
    """Run the selected suites; failures inside a suite become failed checks."""
    report = RunReport("verify", cfg.seed, cfg.echo())
    for name in SUITES:
        if name not in cfg.verify.suites:
            continue
        if progress:
            progress(name)
        try:
            checks = SUITE_FUNCS[name](cfg, suite_rng(cfg.seed, name))
            for c in checks:
                if not math.isfinite(c.value) and not (c.suite == "linearization" and c.value == math.inf):
                    c.passed = False
        except Exception as err:  # a suite error is a failed check, never a crash
            checks = [Check(name, "error", False, math.nan, math.nan, detail={"error": f"{type(err).__name__}: {err}"})]
        report.checks.extend(checks)
    return report


__all__ = [
    "Check",
    "RunReport",
    "SUITE_FUNCS",
    "manufactured_increment",
    "manufactured_scenario",
    "random_F",
    "run_verify",
    "suite_rng",
]
