import jax
import jax.numpy as jnp
import numpy as np
import pytest

from conftest import random_F, rel, superpose
from emat.constitutive import (
    compute_moduli,
    decoupled_energy,
    evaluate_response,
    neo_hookean,
    push_forward_moduli,
)
from emat.fields import (
    CauchyStressField,
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
from emat.incremental import (
    IncrementalState,
    assembled_governing_residuals,
    auxiliary_fields,
    incremental_body_force,
    incremental_boundary_residuals,
    incremental_coil_boundary,
    incremental_conduction,
    incremental_conduction_point,
    incremental_constitutive,
    incremental_constitutive_updated,
    incremental_heat_residual,
    incremental_maxwell_eulerian,
    incremental_maxwell_lagrangian,
    incremental_momentum_residuals,
    incremental_power,
    incremental_state,
    pull_back_increments,
    push_forward_increments,
    region_incremental_residual,
)
from emat.kinematics import Kinematics

X0 = np.array([0.1, 0.2, -0.1])
E1 = np.array([1.0, 0.0, 0.0])


def field(const=None, lin=None, rate=None, shape=(3,)):
    z = SmoothField.zeros(shape)
    return SmoothField(z.const if const is None else np.asarray(const, float).reshape(shape),
                       z.lin if lin is None else np.asarray(lin, float), z.rate if rate is None else
                       np.asarray(rate, float).reshape(shape), z.amp, z.k, z.w, z.phase)


def zero_increment(**kw):
    return IncrementFields(SmoothField.zeros((3,)), LagrangianEMFields.zeros(), **kw)


def em_increment(**components):
    z = LagrangianEMFields.zeros()
    parts = {name: getattr(z, name) for name in ("B_l", "E_l", "P_l", "M_l", "J_l", "rho_E")}
    parts.update(components)
    return LagrangianEMFields(**parts)


def add_em(a: LagrangianEMFields, b: LagrangianEMFields) -> LagrangianEMFields:
    return LagrangianEMFields(*(superpose(getattr(a, n), getattr(b, n))
                                for n in ("B_l", "E_l", "P_l", "M_l", "J_l", "rho_E")))


def random_state(rng):
    return IncrementalState(**{n: rng.standard_normal(3) for n in ("B_l", "E_l", "P_l", "M_l", "M_el", "J_E", "J_l",
                                                                   "q_l", "K_l")},
                            rho_E=rng.standard_normal(), theta_l=rng.standard_normal(), q_vol=rng.standard_normal(),
                            w_E=rng.standard_normal(), sigma_E=rng.standard_normal())


# point-level algebra

def test_push_forward_at_identity_is_identity(rng):
    inc = random_state(rng)
    up = push_forward_increments(inc, Kinematics.from_F(np.eye(3)))
    assert np.array_equal(up.B_l0, inc.B_l) and np.array_equal(up.E_l0, inc.E_l)
    assert up.theta_l0 == inc.theta_l and up.w_E0 == inc.w_E


def test_push_forward_stretch_example():
    up = push_forward_increments(IncrementalState(B_l=[2.0, 0, 0]), Kinematics.from_F(np.diag([2.0, 1.0, 1.0])))
    assert np.array_equal(up.B_l0, [2.0, 0, 0])


def test_increment_round_trip(rng):
    worst = 0.0
    for _ in range(100):
        kin = Kinematics.from_F(random_F(rng))
        inc = random_state(rng)
        ratio = float(rng.uniform(0.5, 2.0))
        back = pull_back_increments(push_forward_increments(inc, kin, ratio), kin, ratio)
        for name in ("B_l", "E_l", "P_l", "M_l", "M_el", "J_E", "J_l", "q_l", "K_l", "rho_E", "theta_l", "q_vol",
                     "w_E", "sigma_E"):
            worst = max(worst, rel(getattr(back, name), getattr(inc, name)))
    assert worst <= 1e-13


def test_auxiliary_fields_examples():
    z = np.zeros(3)
    aux = auxiliary_fields(np.zeros((3, 3)), z, z, z, z, z, z)
    assert not np.any(aux.E_hat) and not np.any(aux.E_el0) and not np.any(aux.J_E0)
    aux = auxiliary_fields(np.zeros((3, 3)), z, z, z, z, E1, z)
    assert np.array_equal(aux.E_hat, E1)
    gam = 0.3
    L = np.zeros((3, 3))
    L[0, 1] = gam
    aux = auxiliary_fields(L, [0.0, 1.0, 0.0], z, z, z, z, z)
    assert np.allclose(aux.E_hat, [-gam, 0, 0], atol=0)


def test_auxiliary_convective_terms(rng):
    L, E, B, v, ut, E0, B0 = rng.standard_normal((3, 3)), *rng.standard_normal((6, 3))
    aux = auxiliary_fields(L, E, B, v, ut, E0, B0, rho_E0=0.5, rho_e=2.0, xi=np.eye(3))
    w = ut - L @ v
    assert np.allclose(aux.E_el0, E0 + np.cross(v, B0) + np.cross(w, B))
    assert np.allclose(aux.J_E0, aux.J_l0 - 0.5 * v - 2.0 * w)


def test_incremental_constitutive_zero_and_decoupled(rng, demo_model):
    F = random_F(rng)
    mod = compute_moduli(demo_model, F, rng.standard_normal(3), rng.standard_normal(3), 1.0)
    for out in incremental_constitutive(mod, np.zeros((3, 3)), np.zeros(3), np.zeros(3)):
        assert not np.any(out)
    dec = compute_moduli(decoupled_energy(1.0, 2.0, 0.3), F, np.zeros(3), np.zeros(3), 0.0)
    T, P, M = incremental_constitutive(dec, rng.standard_normal((3, 3)), np.zeros(3), np.zeros(3))
    assert np.any(T) and not np.any(P) and not np.any(M)


def test_incremental_constitutive_matches_difference_quotient(rng, demo_model):
    F, E, B, th = random_F(rng), rng.standard_normal(3), rng.standard_normal(3), 1.05
    dF, dE, dB, dth = rng.standard_normal((3, 3)), rng.standard_normal(3), rng.standard_normal(3), 0.3
    mod = compute_moduli(demo_model, F, E, B, th)
    T, P, M = incremental_constitutive(mod, dF, dE, dB, dth)
    h = 1e-5
    hi = evaluate_response(demo_model, F + h * dF, E + h * dE, B + h * dB, th + h * dth)
    lo = evaluate_response(demo_model, F - h * dF, E - h * dE, B - h * dB, th - h * dth)
    assert rel(T, (hi.T - lo.T) / (2 * h)) <= 1e-8
    assert rel(P, (hi.P_l - lo.P_l) / (2 * h)) <= 1e-8
    assert rel(M, (hi.M_el - lo.M_el) / (2 * h)) <= 1e-8


def test_updated_law_commutes_with_push_forward(rng, demo_model):
    worst = 0.0
    for _ in range(20):
        F = random_F(rng)
        J, Fi = np.linalg.det(F), np.linalg.inv(F)
        mod = compute_moduli(demo_model, F, rng.standard_normal(3), rng.standard_normal(3), 1.1)
        dF, dE, dB, dth = rng.standard_normal((3, 3)), rng.standard_normal(3), rng.standard_normal(3), 0.2
        T, P, M = incremental_constitutive(mod, dF, dE, dB, dth)
        T0, P0, M0 = incremental_constitutive_updated(push_forward_moduli(mod, F), dF @ Fi, Fi.T @ dE, F @ dB / J,
                                                      dth / J)
        worst = max(worst, rel(F @ T / J, T0), rel(F @ P / J, P0), rel(Fi.T @ M, M0))
    assert worst <= 1e-12


def test_neo_hookean_updated_stress_increment(rng):
    mu = 1.3
    umod = push_forward_moduli(compute_moduli(neo_hookean(mu), np.eye(3), np.zeros(3), np.zeros(3), 0.0), np.eye(3))
    L = rng.standard_normal((3, 3))
    T0, _, _ = incremental_constitutive_updated(umod, L, np.zeros(3), np.zeros(3))
    # first index of the stress increment is the gradient index of L
    assert np.allclose(T0, mu * L.T, atol=1e-14)
    S = L + L.T
    assert np.allclose(incremental_constitutive_updated(umod, S, np.zeros(3), np.zeros(3))[0], mu * S, atol=1e-14)


def test_conduction_point_examples():
    kappa = xi = np.eye(3)
    z = np.zeros(3)
    q, j = incremental_conduction_point(kappa, xi, np.zeros((3, 3)), z, z, z, z)
    assert not np.any(q) and not np.any(j)
    q, _ = incremental_conduction_point(kappa, xi, np.zeros((3, 3)), z, E1, z, z)
    assert np.array_equal(q, -E1)
    gam = 0.4
    L = np.zeros((3, 3))
    L[0, 1] = gam
    _, j = incremental_conduction_point(kappa, xi, L, z, z, [0.0, 1.0, 0.0], z)
    assert np.allclose(j, [-gam, 0, 0], atol=0)


def test_conduction_point_printed_variant(rng):
    kappa, L, g = np.eye(3), rng.standard_normal((3, 3)), rng.standard_normal(3)
    z = np.zeros(3)
    q, _ = incremental_conduction_point(kappa, np.eye(3), L, g, z, z, z)
    qp, _ = incremental_conduction_point(kappa, np.eye(3), L, g, z, z, z, printed_forms=True)
    assert rel(qp - q, (L - L.T) @ g) <= 1e-14


def test_state_validation():
    from emat.tensor_core import TensorError

    with pytest.raises(TensorError):
        IncrementalState(B_l=[1.0, 2.0])
    with pytest.raises(TensorError):
        push_forward_increments(IncrementalState(), Kinematics.from_F(np.eye(3)).__class__(
            F=np.diag([1.0, 1.0, -1.0]), Finv=np.eye(3), J=-1.0, c=np.eye(3), v=np.zeros(3), V=np.zeros(3),
            a=np.zeros(3)))


# field-level residuals

def static_bias(**kw):
    return Scenario(SmoothMotion.identity(), EulerianEMFields.uniform(B=[0.3, -0.2, 0.5], E=[0.1, 0.4, 0.0]), **kw)


def test_zero_increment_gives_zero_maxwell():
    sc = Scenario(SmoothMotion.random(np.random.default_rng(1)), EulerianEMFields.random(np.random.default_rng(2)))
    for fn in (incremental_maxwell_lagrangian, incremental_maxwell_eulerian):
        rep = fn(sc, zero_increment(), X0, 0.2)
        assert all(r.norm == 0.0 for r in rep)


def test_divergence_defect_increment():
    lin = np.zeros((3, 3))
    lin[0, 0] = 1.0
    inc = IncrementFields(SmoothField.zeros((3,)), em_increment(B_l=field(lin=lin)))
    sc = static_bias()
    assert incremental_maxwell_lagrangian(sc, inc, X0)["div_B"].value == pytest.approx(1.0, abs=1e-14)
    assert incremental_maxwell_eulerian(sc, inc, X0)["div_B"].value == pytest.approx(1.0, abs=1e-14)


def test_lagrangian_and_eulerian_forms_agree(rng):
    # with a bias satisfying Maxwell the two forms differ by the Piola factors only
    em = PotentialEM.random(rng)
    sc = Scenario(SmoothMotion.random(rng), em, xi=np.eye(3))
    inc = IncrementFields(SmoothField.random(rng, (3,), 0.1), LagrangianEMFields.random(rng))
    t = 0.3
    k = incremental_state(sc, inc, X0, t)["kin"]
    F, J = np.asarray(k["F"]), float(k["J"])
    a, b = incremental_maxwell_lagrangian(sc, inc, X0, t), incremental_maxwell_eulerian(sc, inc, X0, t)
    for name in ("div_B", "gauss"):
        assert rel(a[name].value, J * b[name].value) <= 1e-12, name
    for name in ("faraday", "ampere"):
        assert rel(a[name].value, J * np.linalg.solve(F, b[name].value)) <= 1e-12, name


def test_maxwell_increments_are_linear(rng):
    sc = Scenario(SmoothMotion.random(rng), EulerianEMFields.random(rng))
    ua, ub = SmoothField.random(rng, (3,), 0.1), SmoothField.random(rng, (3,), 0.1)
    ea, eb = LagrangianEMFields.random(rng), LagrangianEMFields.random(rng)
    a = incremental_maxwell_eulerian(sc, IncrementFields(ua, ea), X0, 0.1)
    b = incremental_maxwell_eulerian(sc, IncrementFields(ub, eb), X0, 0.1)
    ab = incremental_maxwell_eulerian(sc, IncrementFields(superpose(ua, ub), add_em(ea, eb)), X0, 0.1)
    for name in ab.names():
        scale = max(a[name].scale, b[name].scale)
        assert np.max(np.abs(ab[name].value - a[name].value - b[name].value)) <= 1e-12 * scale, name


def test_body_force_and_power_vanish_without_bias_fields(rng):
    sc = Scenario(SmoothMotion.random(rng), EulerianEMFields.uniform(), xi=np.eye(3))
    inc = IncrementFields(SmoothField.random(rng, (3,), 0.1), LagrangianEMFields.random(rng))
    fE, fE0 = incremental_body_force(sc, inc, X0, 0.1)
    assert np.allclose(fE, 0.0, atol=1e-12) and np.allclose(fE0, 0.0, atol=1e-12)
    sc = Scenario(SmoothMotion.random(rng), EulerianEMFields.random(rng))
    assert incremental_power(sc, zero_increment(), X0, 0.1) == (0.0, 0.0)


def accelerating_increment(a, w=1.0):
    # u = -(a/w^2) cos(w t) e1 so u_tt(t = 0) = a e1
    z = SmoothField.zeros((3,))
    u = SmoothField(z.const, z.lin, z.rate, np.array([[-a / w ** 2, 0.0, 0.0]]), np.zeros((1, 3)), np.array([w]),
                    np.array([np.pi / 2]))
    T = SmoothField.constant(np.array([[0.2, 0.1, 0.0], [0.1, -0.3, 0.0], [0.0, 0.0, 0.4]]))
    return IncrementFields(u, LagrangianEMFields.zeros(), T=T)


def test_momentum_rigid_acceleration():
    a, rho_r = 0.7, 2.5
    F = np.diag([2.0, 1.0, 1.0])
    sc = Scenario(SmoothMotion.affine(F), EulerianEMFields.uniform(), stress=CauchyStressField(field(shape=(3, 3))),
                  rho_r=rho_r)
    rep = incremental_momentum_residuals(sc, accelerating_increment(a), X0, 0.0)
    assert np.allclose(rep["linear_lagrangian"].value, -rho_r * a * E1, atol=1e-12)
    assert np.allclose(rep["linear_eulerian"].value, -rho_r / 2.0 * a * E1, atol=1e-12)


def test_momentum_lagrangian_is_j_times_eulerian(rng, demo_model):
    sc = Scenario(SmoothMotion.random(rng), EulerianEMFields.random(rng), stress=ModelStress(), model=demo_model,
                  xi=np.eye(3))
    inc = IncrementFields(SmoothField.random(rng, (3,), 0.1), LagrangianEMFields.random(rng))
    rep = incremental_momentum_residuals(sc, inc, X0, 0.3)
    J = float(incremental_state(sc, inc, X0, 0.3)["kin"]["J"])
    for kind in ("linear", "angular"):
        assert rel(rep[f"{kind}_lagrangian"].value, J * rep[f"{kind}_eulerian"].value) <= 1e-12


def test_momentum_requires_stress_increment():
    sc = static_bias(stress=CauchyStressField(field(shape=(3, 3))))
    with pytest.raises(ValueError):
        incremental_momentum_residuals(sc, zero_increment(), X0)
    with pytest.raises(ValueError):
        incremental_momentum_residuals(static_bias(), zero_increment(T=field(shape=(3, 3))), X0)


def test_heat_residual_uniform_heating():
    b, rho_r, c_p = 0.8, 2.0, 3.0
    sc = Scenario(SmoothMotion.identity(), EulerianEMFields.uniform(), thermal=EulerianThermal.uniform(1.0),
                  stress=CauchyStressField(field(shape=(3, 3))), rho_r=rho_r, c_p=c_p)
    th = LagrangianThermal.zeros()
    th = LagrangianThermal(field(rate=[b], shape=(1,)), th.q_l, th.qv_l, th.S)
    inc = zero_increment(thermal=th, T=field(shape=(3, 3)))
    rep = incremental_heat_residual(sc, inc, X0, 0.2)
    assert rep["heat_eulerian"].value == pytest.approx(-rho_r * c_p * b, abs=1e-12)
    assert rep["heat_lagrangian"].value == pytest.approx(-rho_r * c_p * b, abs=1e-12)
    with pytest.raises(ValueError):
        incremental_heat_residual(sc, zero_increment(T=field(shape=(3, 3))), X0)


def test_field_conduction_examples():
    sc = Scenario(SmoothMotion.identity(), EulerianEMFields.uniform(E=[0.0, 1.0, 0.0]),
                  thermal=EulerianThermal.uniform(1.0), xi=np.eye(3))
    th = LagrangianThermal.zeros()
    lin = np.zeros((1, 3))
    lin[0, 0] = 1.0
    inc = zero_increment(thermal=LagrangianThermal(field(lin=lin, shape=(1,)), th.q_l, th.qv_l, th.S))
    out = incremental_conduction(sc, inc, X0)
    assert np.allclose(out["q_l0"], -E1, atol=1e-14)
    gam = 0.4
    ulin = np.zeros((3, 3))
    ulin[0, 1] = gam
    out = incremental_conduction(sc, IncrementFields(field(lin=ulin), LagrangianEMFields.zeros()), X0)
    assert np.allclose(out["J_l0"], [-gam, 0, 0], atol=1e-14)


def test_decoupled_mechanics_reduces_to_classical(rng):
    # zero fields, isothermal: linear momentum is div(A0 L) - rho u_tt
    model = decoupled_energy(1.0, 2.0, 0.3)
    F = random_F(rng)
    Fi, J = np.linalg.inv(F), np.linalg.det(F)
    sc = Scenario(SmoothMotion.affine(F), EulerianEMFields.uniform(), stress=ModelStress(), model=model)
    u = SmoothField.random(rng, (3,), 0.1)
    rep = assembled_governing_residuals(sc, IncrementFields(u, LagrangianEMFields.zeros()), X0, 0.2)
    A0 = push_forward_moduli(compute_moduli(model, F, np.zeros(3), np.zeros(3), model.reference_temperature()),
                             F).A0

    def T0(X):
        L = jax.jacfwd(lambda Y: u(Y, 0.2))(X) @ Fi
        return jnp.einsum("piqj,jq->pi", A0, L)

    divT0 = jnp.einsum("pia,ap->i", jax.jacfwd(T0)(jnp.asarray(X0)), Fi)
    utt = jax.jacfwd(jax.jacfwd(lambda s: u(jnp.asarray(X0), s)))(0.2)
    expect = np.asarray(divT0 - model.rho_r / J * utt)
    assert rel(rep["linear"].value, expect) <= 1e-10
    for name in ("ampere", "gauss", "faraday", "div_B"):
        assert np.allclose(rep[name].value, 0.0, atol=1e-12), name


# regions and boundaries

def test_vacuum_incremental_plane_wave():
    sc = Scenario(SmoothMotion.identity(), PlaneWaveEM(E1, np.array([0.0, 0.0, 1.0]), 1.0, 2.0), eps0=1.0, mu0=1.0)
    rep = region_incremental_residual(sc, X0, 0.3, "vacuum")
    assert all(r.norm <= 1e-12 * max(r.scale, 1.0) for r in rep)
    slow = Scenario(SmoothMotion.identity(), PlaneWaveEM(E1, np.array([0.0, 0.0, 1.0]), 0.5, 2.0), eps0=1.0,
                    mu0=1.0)
    rep = region_incremental_residual(slow, X0, 0.3, "coil", eps_r=2.0, mu_r=2.0)
    assert all(r.norm <= 1e-12 * max(r.scale, 1.0) for r in rep)
    assert rep.tag == "incremental/coil"


def boundary_bias(rng, N):
    return Scenario(SmoothMotion.identity(), EulerianEMFields.uniform(B=[0.1, 0.2, 0.3]),
                    stress=CauchyStressField(field(shape=(3, 3))),
                    vacuum=VacuumFields(SmoothField.random(rng, (3,)), SmoothField.random(rng, (3,))),
                    surface=SurfaceFields(N, SmoothField.random(rng, (1,)), SmoothField.random(rng, (3,)),
                                          SmoothField.random(rng, (3,))))


def zero_boundary_increment(N, **em):
    z = SmoothField.zeros((3,))
    return IncrementFields(z, em_increment(**em), T=field(shape=(3, 3)), vacuum=VacuumFields(z, z),
                           surface=SurfaceFields(N, SmoothField.zeros((1,)), z, z))


def test_zero_boundary_increment_gives_zero(rng):
    N = np.array([0.0, 0.0, 1.0])
    sc = boundary_bias(rng, N)
    out = incremental_boundary_residuals(sc, zero_boundary_increment(N), X0, 0.1)
    for form in ("lagrangian", "eulerian"):
        assert all(r.norm == 0.0 for r in out[form])
    assert out["area_ratio"] == pytest.approx(1.0)
    assert np.allclose(out["n"], N)


def test_tangential_field_jump(rng):
    N = np.array([0.0, 0.0, 1.0])
    delta = np.array([0.3, -0.4, 2.0])
    out = incremental_boundary_residuals(boundary_bias(rng, N), zero_boundary_increment(N, E_l=field(const=delta)),
                                         X0, 0.1)
    for form in ("lagrangian", "eulerian"):
        r = out[form]["bc1_tangential_E"]
        assert r.norm == pytest.approx(np.linalg.norm(np.cross(N, delta)), rel=1e-14)


def test_literal_inverse_flags_jump_conditions(rng):
    N = np.array([0.6, 0.0, 0.8])
    sc = boundary_bias(rng, N)
    # the literal form inverts L, so the displacement gradient must be invertible
    inc = zero_boundary_increment(N)
    inc = IncrementFields(field(lin=0.2 * np.eye(3) + 0.05 * rng.standard_normal((3, 3))), inc.em, inc.thermal,
                          inc.T, inc.vacuum, inc.surface)
    out = incremental_boundary_residuals(sc, inc, X0, 0.1, literal_L_inverse=True)
    flagged = {r.name for r in out["lagrangian"] if r.flagged}
    assert flagged == {"bc1_tangential_E", "bc2_normal_B", "bc3_normal_D", "bc4_tangential_H"}
    assert out["eulerian"].notes
    plain = incremental_boundary_residuals(sc, inc, X0, 0.1)
    assert not any(r.flagged for r in plain["lagrangian"])


def test_boundary_validation(rng):
    N = np.array([0.0, 0.0, 1.0])
    with pytest.raises(ValueError):
        incremental_boundary_residuals(static_bias(), zero_boundary_increment(N), X0)
    from emat.tensor_core import TensorError

    bad = boundary_bias(rng, np.array([0.0, 0.0, 2.0]))
    with pytest.raises(TensorError):
        incremental_boundary_residuals(bad, zero_boundary_increment(N), X0)


def test_coil_boundary_continuity():
    n = np.array([0.0, 1.0, 0.0])
    E, B = np.array([0.2, 0.5, -0.1]), np.array([1.0, 0.3, 0.2])
    rep = incremental_coil_boundary(n, E, B, E, B)
    assert all(r.norm == 0.0 for r in rep)
    assert rep.tag == "incremental/coil-boundary"
