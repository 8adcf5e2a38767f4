import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st
from scipy.spatial.transform import Rotation

from conftest import DEMO, random_F, rel
from emat.constitutive import (
    CallableEnergy,
    Conductivities,
    ConstitutiveError,
    DemoEnergy,
    compute_moduli,
    conduction,
    conduction_lagrangian,
    decoupled_energy,
    energy_gradient,
    energy_hessian,
    evaluate_response,
    neo_hookean,
    push_forward_moduli,
)
from emat.kinematics import InvalidDeformationError, Kinematics
from emat.tensor_core import SPLIT_REF, Ten3

COUPLING = ("BB", "CC", "FF", "KK", "HH", "LL")


def demo_state(rng, model):
    return random_F(rng), rng.standard_normal(3), rng.standard_normal(3), model.theta0 + 0.1 * rng.standard_normal()


def test_reference_state_is_stress_free(demo_model):
    r = evaluate_response(demo_model, np.eye(3), np.zeros(3), np.zeros(3), demo_model.theta0)
    assert np.allclose(r.T, 0.0, atol=1e-15)
    assert np.allclose(r.P_l, 0.0) and np.allclose(r.M_el, 0.0)


def test_energy_without_electric_field_has_no_polarization(rng):
    model = DemoEnergy(mu=1.0, lam=1.0, alpha=0.4, beta=0.1)
    r = evaluate_response(model, random_F(rng), rng.standard_normal(3), rng.standard_normal(3), 0.0)
    assert np.array_equal(r.P_l, np.zeros(3))


def test_quadratic_magnetic_energy(rng):
    beta = 0.7
    b = rng.standard_normal(3)
    model = CallableEnergy(fn=lambda F, E, B, th: -0.5 * beta * (B @ B))
    for method in ("fd", "ad"):
        r = evaluate_response(model, np.eye(3), np.zeros(3), b, 1.0, method=method)
        assert np.allclose(r.M_el, beta * b, rtol=1e-8)
        mod = compute_moduli(model, np.eye(3), np.zeros(3), b, 1.0, method=method)
        assert np.allclose(mod.MM, -beta * np.eye(3), atol=1e-6)


def test_decoupled_model_has_zero_coupling_moduli(rng):
    mod = compute_moduli(decoupled_energy(1.0, 2.0, 0.3), random_F(rng), rng.standard_normal(3),
                         rng.standard_normal(3), 0.0)
    for name, block in mod.blocks().items():
        if name in COUPLING:
            assert not np.any(block), name


def test_neo_hookean_moduli_at_reference():
    mu = 1.7
    mod = compute_moduli(neo_hookean(mu), np.eye(3), np.zeros(3), np.zeros(3), 0.0)
    expect = mu * np.einsum("ij,ab->aibj", np.eye(3), np.eye(3))
    assert np.allclose(mod.AA, expect, atol=1e-15)


def test_tau_is_push_forward_of_nominal_stress(rng, demo_model):
    F, E, B, th = demo_state(rng, demo_model)
    r = evaluate_response(demo_model, F, E, B, th)
    assert np.allclose(r.tau, F @ r.T / np.linalg.det(F))


def test_incompressible_needs_pressure():
    model = neo_hookean(1.0, incompressible=True)
    with pytest.raises(ConstitutiveError):
        evaluate_response(model, np.eye(3), np.zeros(3), np.zeros(3), 0.0)
    with pytest.raises(InvalidDeformationError):
        evaluate_response(model, np.diag([2.0, 1.0, 1.0]), np.zeros(3), np.zeros(3), 0.0, p=1.0)
    lam = 1.5
    F = np.diag([lam, lam ** -0.5, lam ** -0.5])
    r = evaluate_response(model, F, np.zeros(3), np.zeros(3), 0.0, p=0.3)
    assert np.allclose(r.T, F.T - 0.3 * np.linalg.inv(F))


def test_inverted_state_rejected(demo_model):
    with pytest.raises(InvalidDeformationError):
        compute_moduli(demo_model, -np.eye(3), np.zeros(3), np.zeros(3), 1.0)


def test_moduli_symmetry_analytic_and_fd(rng, demo_model):
    for _ in range(5):
        state = demo_state(rng, demo_model)
        analytic = compute_moduli(demo_model, *state).symmetry_defects()
        fd = compute_moduli(demo_model, *state, method="fd").symmetry_defects()
        for name in ("KK=CC^T", "FF=BB^T", "LL=HH^T", "AA major"):
            assert analytic[name] <= 1e-12, name
            assert fd[name] <= 1e-6, name


def test_gradient_and_hessian_hooks_match_ad_and_fd(rng, demo_model):
    for _ in range(5):
        state = demo_state(rng, demo_model)
        g = energy_gradient(demo_model, *state, method="analytic")
        assert rel(g, energy_gradient(demo_model, *state, method="ad")) <= 1e-13
        assert rel(g, energy_gradient(demo_model, *state, method="fd")) <= 1e-6
        H = energy_hessian(demo_model, *state, method="analytic")
        assert rel(H, energy_hessian(demo_model, *state, method="ad")) <= 1e-12
        assert rel(H, energy_hessian(demo_model, *state, method="fd")) <= 1e-6
        assert rel(H, energy_hessian(demo_model, *state, method="fd", richardson=True)) <= 1e-9


def test_energy_only_fd_hessian(rng):
    # a model without hooks: the Hessian differences FD gradients
    base = DemoEnergy(**DEMO)
    model = CallableEnergy(fn=base.energy)
    state = demo_state(rng, base)
    H = energy_hessian(model, *state, method="fd")
    assert rel(H, energy_hessian(base, *state, method="analytic")) <= 1e-5


@settings(max_examples=20, deadline=None)
@given(st.integers(0, 2**32 - 1))
def test_demo_energy_objective(seed):
    rng = np.random.default_rng(seed)
    model = DemoEnergy(**DEMO)
    F, E, B, th = demo_state(rng, model)
    Q = Rotation.random(random_state=seed).as_matrix()
    a, b = model.energy(F, E, B, th), model.energy(Q @ F, E, B, th)
    assert abs(a - b) <= 1e-13 * max(1.0, abs(a))


def test_push_forward_identity_at_reference(rng, demo_model):
    mod = compute_moduli(demo_model, np.eye(3), *demo_state(rng, demo_model)[1:])
    up = push_forward_moduli(mod, np.eye(3))
    ref = mod.blocks()
    for name, block in up.blocks().items():
        assert np.array_equal(block, ref[name[0] * 2]), name


def test_push_forward_magnetic_modulus():
    mod = compute_moduli(DemoEnergy(mu=1.0, lam=1.0), np.eye(3), np.zeros(3), np.zeros(3), 0.0)
    from dataclasses import replace

    up = push_forward_moduli(replace(mod, MM=np.eye(3)), Kinematics.from_F(np.diag([2.0, 1.0, 1.0])))
    assert np.allclose(up.M0, np.diag([0.5, 2.0, 2.0]), atol=0)
    assert up.J == 2.0


def test_push_forward_matches_loop_oracle(rng, demo_model):
    mod = compute_moduli(demo_model, *demo_state(rng, demo_model))
    F = random_F(rng)
    J = np.linalg.det(F)
    Fi = np.linalg.inv(F)
    up = push_forward_moduli(mod, F)
    A0 = np.zeros((3, 3, 3, 3))
    B0 = np.zeros((3, 3, 3))
    C0 = np.zeros((3, 3, 3))
    for p in range(3):
        for i in range(3):
            for q in range(3):
                for a in range(3):
                    for b in range(3):
                        B0[p, i, q] += F[p, a] * F[q, b] * mod.BB.data[a, i, b] / J
                        C0[p, i, q] += F[p, a] * Fi[b, q] * mod.CC.data[a, i, b]
                        for j in range(3):
                            A0[p, i, q, j] += F[p, a] * F[q, b] * mod.AA[a, i, b, j] / J
    assert rel(up.A0, A0) <= 1e-13
    assert rel(up.B0.data, B0) <= 1e-13
    assert rel(up.C0.data, C0) <= 1e-13
    assert rel(up.M0, J * Fi.T @ mod.MM @ Fi) <= 1e-13
    assert rel(up.G0, F @ mod.GG @ F.T / J) <= 1e-13
    assert rel(up.H0, F @ mod.HH @ Fi) <= 1e-13
    assert rel(up.D0, F @ mod.DD) <= 1e-13
    assert rel(up.I0, F @ mod.II) <= 1e-13


def test_push_forward_printed_magneto_thermal_variant(rng, demo_model):
    mod = compute_moduli(demo_model, *demo_state(rng, demo_model))
    F = random_F(rng)
    J = np.linalg.det(F)
    a = push_forward_moduli(mod, F)
    b = push_forward_moduli(mod, F, printed_forms=True)
    assert np.allclose(a.N0, J * J * b.N0)


def test_conduction_examples():
    cond = Conductivities(kappa=np.eye(3), xi=np.diag([2.0, 1.0, 1.0]))
    q, j = conduction(cond, np.zeros(3), np.zeros(3))
    assert not np.any(q) and not np.any(j)
    q, _ = conduction(cond, [1.0, 2.0, 3.0], np.zeros(3))
    assert np.array_equal(q, [-1.0, -2.0, -3.0])
    _, j = conduction(cond, np.zeros(3), [1.0, 0, 0])
    assert np.array_equal(j, [2.0, 0, 0])


def test_conduction_lagrangian_examples(rng):
    cond = Conductivities(kappa=np.eye(3), xi=np.eye(3))
    g, e = rng.standard_normal(3), rng.standard_normal(3)
    q_l, j_l = conduction_lagrangian(cond, Kinematics.from_F(np.eye(3)), g, e)
    q, j = conduction(cond, g, e)
    assert np.array_equal(q_l, q) and np.array_equal(j_l, j)
    # J F^-1 F^-T = diag(1/2, 2, 2) for F = diag(2, 1, 1)
    q_l, _ = conduction_lagrangian(cond, Kinematics.from_F(np.diag([2.0, 1.0, 1.0])), [1.0, 0, 0], np.zeros(3))
    assert np.allclose(q_l, [-0.5, 0, 0], atol=0)


def test_conduction_lagrangian_pushes_forward(rng):
    k = rng.standard_normal((3, 3))
    x = rng.standard_normal((3, 3))
    cond = Conductivities(kappa=k @ k.T + np.eye(3), xi=x @ x.T + np.eye(3))
    for _ in range(20):
        kin = Kinematics.from_F(random_F(rng))
        Grad, E_l = rng.standard_normal(3), rng.standard_normal(3)
        q_l, j_l = conduction_lagrangian(cond, kin, Grad, E_l)
        q, j = conduction(cond, kin.Finv.T @ Grad, kin.Finv.T @ E_l)
        assert rel(kin.F @ q_l / kin.J, q) <= 1e-13
        assert rel(kin.F @ j_l / kin.J, j) <= 1e-13


def test_conductivities_validation():
    with pytest.raises(ConstitutiveError):
        Conductivities(kappa=np.array([[1.0, 0.5, 0], [0, 1, 0], [0, 0, 1]]))
    with pytest.raises(ConstitutiveError):
        Conductivities(kappa=-np.eye(3))
    c = Conductivities(kappa=2.0, xi=0.0)
    assert np.array_equal(c.kappa, 2 * np.eye(3)) and not np.any(c.xi)


def test_moduli_ten3_splits(rng, demo_model):
    mod = compute_moduli(demo_model, *demo_state(rng, demo_model))
    assert mod.BB.split == SPLIT_REF and mod.KK.split != SPLIT_REF
    assert isinstance(mod.CC, Ten3)
