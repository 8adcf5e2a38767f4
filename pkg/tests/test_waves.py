from dataclasses import replace

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from conftest import DEMO, random_F, rel
from emat.cli import fibonacci_directions
from emat.constitutive import DemoEnergy, neo_hookean
from emat.tensor_core import TensorError
from emat.waves import (
    DegenerateProblemError,
    PlaneWaveProblem,
    _sym_eig_2x2,
    acoustic_tensor,
    em_plane_wave_check,
    em_wave_speed,
    full_system_speeds,
    magnetoacoustic_tensor,
    probe_assembled_system,
    quasi_magnetostatic_system,
    solve_wave_speeds,
    sweep_directions,
    wave_speeds,
)

MAGNETOELASTIC = DemoEnergy(mu=1.0, lam=2.0, alpha=0.3, beta=0.2)


def magnetic_problem(rng, model=MAGNETOELASTIC, n=None):
    F = random_F(rng, 0.1)
    n = rng.standard_normal(3) if n is None else n
    return PlaneWaveProblem.from_model(model, F, n, B_l=rng.standard_normal(3), mu0=1.0), F


def test_neo_hookean_reference_speeds():
    mu, rho = 1.7, 2.0
    prob = PlaneWaveProblem.from_model(neo_hookean(mu, rho_r=rho), np.eye(3), [0.3, -1.0, 0.2])
    assert np.allclose(acoustic_tensor(prob.umod, prob.n), mu * np.eye(3), atol=1e-15)
    sol = wave_speeds(prob)
    assert rel(sol.speeds, np.full(3, np.sqrt(mu / rho))) <= 1e-10
    inc = PlaneWaveProblem.from_model(neo_hookean(mu, rho_r=rho, incompressible=True), np.eye(3), [0.0, 0.0, 1.0])
    sol = wave_speeds(inc)
    assert sol.speeds.shape == (2,)
    assert rel(sol.speeds, np.full(2, np.sqrt(mu / rho))) <= 1e-10


def test_isotropy_at_reference():
    mu, lam = 1.0, 2.0
    model = DemoEnergy(mu=mu, lam=lam)
    prob = PlaneWaveProblem.from_model(model, np.eye(3), [1.0, 0, 0])
    expect = np.sqrt([mu, mu, lam + 2 * mu])
    for row_n in fibonacci_directions(50):
        sol = wave_speeds(replace(prob, n=row_n))
        assert rel(sol.speeds, expect) <= 1e-12
        # the fast mode is longitudinal
        assert abs(abs(sol.polarizations[:, 2] @ row_n) - 1.0) <= 1e-12


@pytest.mark.parametrize("p", [0.0, 0.7])
def test_uniaxial_transverse_speed(p):
    mu, rho, lam = 1.3, 1.5, 1.8
    F = np.diag([lam, lam ** -0.5, lam ** -0.5])
    prob = PlaneWaveProblem.from_model(neo_hookean(mu, rho_r=rho, incompressible=True), F, [1.0, 0, 0], p=p)
    sol = wave_speeds(prob)
    assert rel(sol.speed_squared, np.full(2, mu * lam ** 2 / rho)) <= 1e-8
    assert np.allclose(sol.polarizations[0], 0.0, atol=1e-14)


def test_magnetoacoustic_reduces_without_field(rng, demo_model):
    prob = PlaneWaveProblem.from_model(demo_model, random_F(rng), rng.standard_normal(3))
    Q = acoustic_tensor(prob.umod, prob.n)
    assert rel(magnetoacoustic_tensor(prob), Q) <= 1e-15


def test_speeds_do_not_depend_on_wavenumber(rng):
    prob, _ = magnetic_problem(rng)
    ref = wave_speeds(prob).speeds
    for k in (0.1, 10.0, 100.0):
        assert rel(wave_speeds(replace(prob, k=k)).speeds, ref) <= 1e-14


def test_eigen_residual_and_symmetry_policy(rng):
    for _ in range(10):
        prob, _ = magnetic_problem(rng)
        sol = wave_speeds(prob)
        assert sol.eigen_residual <= 1e-10
        assert sol.symmetrized == (sol.symmetry_defect <= 1e-10)
    forced = wave_speeds(prob, symmetrize=True)
    assert forced.symmetrized and forced.eigen_residual <= 1e-10


def test_acoustic_tensor_matches_loop(rng):
    A0 = rng.standard_normal((3, 3, 3, 3))
    n = rng.standard_normal(3)
    u = n / np.linalg.norm(n)
    loop = np.zeros((3, 3))
    for p in range(3):
        for i in range(3):
            for q in range(3):
                for j in range(3):
                    loop[i, j] += A0[p, i, q, j] * u[p] * u[q]
    assert rel(acoustic_tensor(A0, n), loop) <= 1e-14


def test_full_system_agrees_with_elimination(rng):
    for _ in range(5):
        prob, _ = magnetic_problem(rng)
        assert rel(full_system_speeds(prob), wave_speeds(prob).speeds) <= 1e-10


def test_incompressible_full_system(rng):
    model = DemoEnergy(mu=1.0, lam=0.0, alpha=0.3, beta=0.2, volumetric=False, incompressible=True)
    F = random_F(rng, 0.1)
    F = F / np.cbrt(np.linalg.det(F))
    prob = PlaneWaveProblem.from_model(model, F, rng.standard_normal(3), B_l=rng.standard_normal(3), p=0.4, mu0=1.0)
    assert quasi_magnetostatic_system(prob)[0].shape == (7, 7)
    assert rel(full_system_speeds(prob), wave_speeds(prob).speeds) <= 1e-10


def test_probe_reads_the_same_system(rng):
    prob, F = magnetic_problem(rng)
    K, Mass = probe_assembled_system(prob, MAGNETOELASTIC, F)
    K2, M2 = quasi_magnetostatic_system(prob)
    assert rel(K, K2) <= 1e-12
    assert np.max(np.abs(Mass - M2)) <= 1e-12 * np.max(np.abs(M2))


def test_electric_coupling_changes_probe(rng):
    # the motional field u_t x B polarizes an electroactive solid
    prob, F = magnetic_problem(rng, DemoEnergy(**DEMO))
    _, Mass = probe_assembled_system(prob, DemoEnergy(**DEMO), F)
    assert np.max(np.abs(Mass - quasi_magnetostatic_system(prob)[1])) > 1e-3


def test_sweep_rows(rng):
    prob, _ = magnetic_problem(rng)
    dirs = fibonacci_directions(4)
    rows = sweep_directions(prob, dirs)
    assert len(rows) == 12
    assert [r[0] for r in rows] == [0, 0, 0, 1, 1, 1, 2, 2, 2, 3, 3, 3]
    assert rows[3][3] == pytest.approx(wave_speeds(replace(prob, n=dirs[1])).speeds[0], rel=1e-14)


def test_unstable_and_invalid_inputs():
    sol = solve_wave_speeds(-np.eye(3), 1.0)
    assert not sol.stable and np.all(np.isnan(sol.speeds))
    with pytest.raises(TensorError):
        solve_wave_speeds(np.eye(2), 1.0)
    with pytest.raises(ValueError):
        solve_wave_speeds(np.eye(3), 0.0)
    with pytest.raises(ValueError):
        solve_wave_speeds(np.eye(3), 1.0, incompressible=True)
    with pytest.raises(TensorError):
        PlaneWaveProblem.from_model(neo_hookean(1.0), np.eye(3), np.zeros(3))


def test_degenerate_magnetic_elimination(rng):
    prob, _ = magnetic_problem(rng)
    bad = replace(prob, umod=replace(prob.umod, M0=-np.eye(3) / prob.mu0))
    with pytest.raises(DegenerateProblemError):
        wave_speeds(bad)


@settings(max_examples=50, deadline=None)
@given(st.floats(-10, 10), st.floats(-10, 10), st.floats(-10, 10))
def test_closed_form_2x2_eigenpairs(a, b, d):
    S = np.array([[a, b], [b, d]])
    lam, vec = _sym_eig_2x2(S)
    assert np.allclose(lam, np.linalg.eigvalsh(S), atol=1e-12 * (1 + np.abs(S).max()))
    assert np.allclose(S @ vec, vec * lam, atol=1e-12 * (1 + np.abs(S).max()))


def test_em_plane_wave_at_light_speed():
    n, e0 = np.array([0.0, 1.0, 0.0]), np.array([0.0, 0.0, 2.0])
    X = np.array([0.1, 0.3, -0.2])
    for region, er, mr in (("vacuum", 1.0, 1.0), ("coil", 2.0, 3.0)):
        c = em_wave_speed(1.0, 1.0, er, mr)
        for increment in (False, True):
            rep, mism = em_plane_wave_check(n, e0, c, X, 0.4, 1.5, region, er, mr, 1.0, 1.0, increment)
            assert np.allclose(mism, 0.0, atol=1e-15)
            assert all(r.norm <= 1e-12 * max(r.scale, 1.0) for r in rep)


def test_em_plane_wave_mismatch_at_wrong_speed():
    n, e0 = np.array([1.0, 0.0, 0.0]), np.array([0.0, 1.0, 0.0])
    X = np.array([0.2, 0.0, 0.0])
    rep, mism = em_plane_wave_check(n, e0, 0.5, X, 0.1, 1.0, eps0=1.0, mu0=1.0)
    assert np.linalg.norm(mism) > 0.1
    assert rel(rep["ampere"].value, mism) <= 1e-12
    with pytest.raises(ValueError):
        em_plane_wave_check(n, n, 1.0, X)
    with pytest.raises(ValueError):
        em_plane_wave_check(n, e0, 1.0, X, region="plasma")
