"""Plane waves on homogeneous bias states.

Mechanical waves use the acoustic tensor Q(n) of the updated elastic moduli.
Magnetoelastic waves use the quasi-magnetostatic increment system

    div Tdot0 + fdot_E0 = rho u_tt,   div Bdot_l0 = 0,   curl Hdot = 0,

with Tdot0 = A0 L + C0 Bdot_l0, Mdot_el0 = -(C0^T L + M0 Bdot_l0) and
Hdot = [Bdot_l0 - (div u) B + (L + L^T) B]/mu0 - Mdot_el0.  Eliminating the
magnetic increment under n . Bdot_l0 = 0 gives the generalized tensor Q*(n);
the same system without elimination is available as a generalized eigenproblem.
Electromagnetic plane waves in vacuum and coil regions are checked against the
region residuals.
"""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np
import scipy.linalg as sla

from .constitutive import UpdatedModuliSet, compute_moduli, evaluate_response, push_forward_moduli
from .kernels import acoustic_tensor_batch
from .kinematics import EPS0, MU0
from .tensor_core import TensorError

SYM_TOL = 1e-10


class DegenerateProblemError(ValueError):
    """The magnetic block cannot be eliminated for this direction."""


def unit(n) -> np.ndarray:
    n = np.asarray(n, dtype=float)
    if n.shape != (3,):
        raise TensorError("direction must be a 3-vector")
    norm = np.linalg.norm(n)
    if not np.isfinite(norm) or norm == 0.0:
        raise TensorError("direction must be nonzero")
    return n / norm


def tangent_basis(n) -> np.ndarray:
    """3x2 matrix whose columns are an orthonormal basis of the plane orthogonal to n."""
    n = unit(n)
    a = np.eye(3)[np.argmin(np.abs(n))]
    t1 = np.cross(n, a)
    t1 /= np.linalg.norm(t1)
    return np.column_stack([t1, np.cross(n, t1)])


# ---------------------------------------------------------------------------
# bias problem


@dataclass(frozen=True)
class PlaneWaveProblem:
    """Homogeneous static bias: updated moduli, Eulerian B and M_e, density, direction."""

    umod: UpdatedModuliSet
    n: np.ndarray
    rho: float
    B: np.ndarray = field(default_factory=lambda: np.zeros(3))
    M: np.ndarray = field(default_factory=lambda: np.zeros(3))
    mu0: float = MU0
    k: float = 1.0
    incompressible: bool = False

    def __post_init__(self):
        object.__setattr__(self, "n", unit(self.n))
        object.__setattr__(self, "B", np.asarray(self.B, dtype=float))
        object.__setattr__(self, "M", np.asarray(self.M, dtype=float))
        if not self.rho > 0:
            raise ValueError("density must be positive")
        if not self.k > 0:
            raise ValueError("wavenumber must be positive")

    @classmethod
    def from_model(cls, model, F, n, B_l=None, theta_l=None, p=None, rho_r=None, mu0=MU0, k=1.0,
                   method="auto") -> "PlaneWaveProblem":
        """Bias from a free-energy model at (F, B_l) with E_el = 0 and v = 0."""
        F = np.asarray(F, dtype=float)
        B_l = np.zeros(3) if B_l is None else np.asarray(B_l, dtype=float)
        theta_l = model.reference_temperature() if theta_l is None else theta_l
        if model.incompressible and p is None:
            p = 0.0
        mod = compute_moduli(model, F, np.zeros(3), B_l, theta_l, p=p, method=method)
        resp = evaluate_response(model, F, np.zeros(3), B_l, theta_l, p=p, method=method)
        J = float(np.linalg.det(F))
        rho_r = getattr(model, "rho_r", 1.0) if rho_r is None else rho_r
        return cls(umod=push_forward_moduli(mod, F), n=n, rho=rho_r / J, B=F @ B_l / J,
                   M=np.linalg.solve(F.T, resp.M_el), mu0=mu0, k=k, incompressible=model.incompressible)

    def blocks(self):
        b = self.umod.blocks()
        return b["A0"], b["C0"], b["M0"]


# ---------------------------------------------------------------------------
# tensors


def acoustic_tensor(A0, n) -> np.ndarray:
    """Q_ij(n) = A0_{piqj} n_p n_q."""
    A0 = np.asarray(A0.A0 if isinstance(A0, UpdatedModuliSet) else A0, dtype=float)
    if A0.shape != (3, 3, 3, 3):
        raise TensorError("A0 must be 3x3x3x3")
    return acoustic_tensor_batch(A0, unit(n)[None])[0]


def magnetic_elimination(problem: PlaneWaveProblem):
    """Return (Q, coupling, Pi, W): momentum blocks and the projector eliminating Bdot_l0.

    With K = I/mu0 + M0, the Ampere and div-B conditions give
    Bdot_l0 = -Pi W a (per unit k), Pi = K^-1 - K^-1 n n K^-1/(n.K^-1 n).
    """
    A0, C0, M0 = problem.blocks()
    n, B, M, mu0 = problem.n, problem.B, problem.M, problem.mu0
    Q = acoustic_tensor(A0, n)
    K = np.eye(3) / mu0 + M0
    try:
        Ki = np.linalg.inv(K)
    except np.linalg.LinAlgError as exc:
        raise DegenerateProblemError("I/mu0 + M0 is singular") from exc
    denom = n @ Ki @ n
    if abs(denom) <= 1e-14 * np.linalg.norm(Ki):
        raise DegenerateProblemError("n . K^-1 n vanishes; magnetic increment cannot be eliminated")
    Pi = Ki - np.outer(Ki @ n, n @ Ki) / denom
    W = (np.eye(3) * (n @ B) + np.outer(n, B) - np.outer(B, n)) / mu0 + np.einsum("kji,k->ij", C0, n)
    Qb = Q + np.outer(n, (n @ B) * M - (B @ M) * n)
    coupling = np.einsum("p,pik->ik", n, C0) + np.outer(n, M)
    return Qb, coupling, Pi, W


def magnetoacoustic_tensor(problem: PlaneWaveProblem) -> np.ndarray:
    """Q*(n) = Q + n (x) [(n.B) M - (B.M) n] - (Ct + n (x) M) Pi W, with Ct_ik = n_p C0_pik."""
    Qb, coupling, Pi, W = magnetic_elimination(problem)
    return Qb - coupling @ Pi @ W


# ---------------------------------------------------------------------------
# eigen-solves


@dataclass(frozen=True)
class WaveSolution:
    speeds: np.ndarray
    speed_squared: np.ndarray
    polarizations: np.ndarray
    Q: np.ndarray
    symmetry_defect: float
    eigen_residual: float
    stable: bool
    symmetrized: bool

    def to_dict(self) -> dict:
        return {
            "speeds": [float(s) for s in self.speeds],
            "speed_squared": [float(np.real(s)) for s in self.speed_squared],
            "polarizations": np.real(self.polarizations).T.tolist(),
            "symmetry_defect": self.symmetry_defect,
            "eigen_residual": self.eigen_residual,
            "stable": self.stable,
            "symmetrized": self.symmetrized,
        }


def _sym_eig_2x2(S):
    """Closed-form eigenpairs of a real symmetric 2x2 matrix (ascending)."""
    a, b, d = S[0, 0], S[0, 1], S[1, 1]
    m, r = 0.5 * (a + d), np.hypot(0.5 * (a - d), b)
    lam = np.array([m - r, m + r])
    if r == 0.0:
        return lam, np.eye(2)
    theta = 0.5 * np.arctan2(2.0 * b, a - d)
    v_hi = np.array([np.cos(theta), np.sin(theta)])
    v_lo = np.array([-v_hi[1], v_hi[0]])
    return lam, np.column_stack([v_lo, v_hi])


def solve_wave_speeds(Q, rho, n=None, incompressible=False, symmetrize="auto") -> WaveSolution:
    """Speeds (ascending) and unit polarizations of rho c^2 p = Q p.

    Q is symmetrized when its antisymmetric part is at round-off (``"auto"``), or
    when forced.  Otherwise the general eigenproblem is solved and the defect is
    reported.  Incompressible problems are solved on the plane orthogonal to n.
    Complex or negative c^2 mark the bias as unstable (speeds are NaN there).
    """
    Q = np.asarray(Q, dtype=float)
    if Q.shape != (3, 3):
        raise TensorError("Q must be 3x3")
    if not rho > 0:
        raise ValueError("density must be positive")
    scale = max(np.linalg.norm(Q), 1e-300)
    defect = float(np.linalg.norm(Q - Q.T) / (2.0 * scale))
    sym = defect <= SYM_TOL if symmetrize == "auto" else bool(symmetrize)
    if incompressible:
        if n is None:
            raise ValueError("incompressible solve needs the direction n")
        T = tangent_basis(n)
        Qr = T.T @ Q @ T
    else:
        T = np.eye(3)
        Qr = Q
    if sym:
        S = 0.5 * (Qr + Qr.T)
        lam, vec = _sym_eig_2x2(S) if incompressible else np.linalg.eigh(S)
        lam = lam.astype(complex)
    else:
        lam, vec = sla.eig(Qr)
        order = np.lexsort((lam.imag, lam.real))
        lam, vec = lam[order], vec[:, order]
    pol = T @ vec
    pol = pol / np.linalg.norm(pol, axis=0)
    c2 = lam / rho
    tol = 1e-12 * scale / rho
    stable = bool(np.all(np.abs(c2.imag) <= tol) and np.all(c2.real >= -tol))
    speeds = np.where((np.abs(c2.imag) <= tol) & (c2.real >= -tol), np.sqrt(np.maximum(c2.real, 0.0)), np.nan)
    Qeff = Q if not sym else 0.5 * (Q + Q.T)
    if incompressible:
        P = T @ T.T
        Qeff = P @ Qeff @ P
    resid = max(float(np.linalg.norm(Qeff @ pol[:, i] - lam[i] * pol[:, i])) for i in range(pol.shape[1])) / scale
    if np.all(np.abs(pol.imag) <= 1e-14):
        pol = pol.real
    return WaveSolution(speeds, c2 if not np.all(c2.imag == 0) else c2.real, pol, Q, defect, resid, stable, sym)


def wave_speeds(problem: PlaneWaveProblem, magnetic=True, symmetrize="auto") -> WaveSolution:
    Q = magnetoacoustic_tensor(problem) if magnetic else acoustic_tensor(problem.umod, problem.n)
    return solve_wave_speeds(Q, problem.rho, problem.n, problem.incompressible, symmetrize)


def quasi_magnetostatic_system(problem: PlaneWaveProblem):
    """(K, Mass) of the un-eliminated plane-wave system K x = c^2 Mass x.

    Unknowns x = (a, b[, pi]) with u = a sin(k(n.x - ct)), Bdot_l0 = k b cos(.), and
    a pressure increment pi for incompressible solids.  Rows: momentum (3), the
    two tangential components of curl Hdot (2), div Bdot_l0 (1)[, n . a (1)].
    """
    Qb, coupling, _, W = magnetic_elimination(problem)
    _, _, M0 = problem.blocks()
    n = problem.n
    K = np.eye(3) / problem.mu0 + M0
    T = tangent_basis(n)
    size = 7 if problem.incompressible else 6
    A = np.zeros((size, size))
    Mass = np.zeros((size, size))
    A[:3, :3] = Qb
    A[:3, 3:6] = coupling
    A[3:5, :3] = T.T @ W
    A[3:5, 3:6] = T.T @ K
    A[5, 3:6] = n
    Mass[:3, :3] = problem.rho * np.eye(3)
    if problem.incompressible:
        A[:3, 6] = -n
        A[6, :3] = n
    return A, Mass


def full_system_speeds(problem: PlaneWaveProblem) -> np.ndarray:
    """Wave speeds from the un-eliminated system (finite, nonnegative eigenvalues), ascending."""
    A, Mass = quasi_magnetostatic_system(problem)
    lam = sla.eig(A, Mass, right=False)
    lam = lam[np.isfinite(lam)]
    scale = max(np.linalg.norm(A) / problem.rho, 1e-300)
    lam = lam[np.abs(lam.imag) <= 1e-9 * scale].real
    return np.sort(np.sqrt(np.maximum(lam, 0.0)))


def sweep_directions(problem: PlaneWaveProblem, directions, magnetic=True):
    """Rows (direction index, n, mode, speed, polarization) for a set of directions."""
    rows = []
    for idx, n in enumerate(np.atleast_2d(directions)):
        sol = wave_speeds(PlaneWaveProblem(problem.umod, n, problem.rho, problem.B, problem.M, problem.mu0,
                                           problem.k, problem.incompressible), magnetic)
        for m, c in enumerate(sol.speeds):
            rows.append((idx, unit(n), m, float(c), np.real(sol.polarizations[:, m])))
    return rows


# ---------------------------------------------------------------------------
# probing the assembled incremental equations


def probe_assembled_system(problem: PlaneWaveProblem, model, F, p=0.0, rho_r=None):
    """(K, Mass) read off the assembled incremental residuals for plane-wave increments.

    The bias is the homogeneous static state x = F X with the problem's B and M,
    eps0 = 0 (no displacement current) and no electric fields.  Residuals are
    evaluated on the crest of the wave for each unit amplitude and for c = 0, 1.
    The motional field u_t x B enters Edot_el0, so a model with electric terms
    adds c-linear rows that the quasi-magnetostatic system omits; the two agree
    for magnetoelastic energies.
    """
    from .fields import EulerianEMFields, IncrementFields, LagrangianEMFields, ModelStress, Scenario, \
        SmoothField, SmoothMotion
    from .incremental import assembled_governing_residuals

    if problem.incompressible:
        raise NotImplementedError("probing covers compressible bias states")
    F = np.asarray(F, dtype=float)
    J = float(np.linalg.det(F))
    n, k = problem.n, problem.k
    rho_r = problem.rho * J if rho_r is None else rho_r
    em = EulerianEMFields.uniform(B=problem.B, M=problem.M)
    sc = Scenario(SmoothMotion.affine(F), em, stress=ModelStress(p), rho_r=rho_r, eps0=0.0, mu0=problem.mu0,
                  model=model)
    kX = k * F.T @ n
    X = kX * (0.5 * np.pi) / (kX @ kX)  # phase pi/2: sin = 1, cos = 0
    T = tangent_basis(n)
    Fi = np.linalg.inv(F)

    def wave(amp, c, phase):
        return SmoothField(np.zeros(3), np.zeros((3, 3)), np.zeros(3), np.asarray(amp, float)[None], kX[None],
                           np.array([-k * c]), np.array([phase]))

    def rows(x, c):
        a, b = x[:3], x[3:6]
        zero = wave(np.zeros(3), c, 0.0)
        lem = LagrangianEMFields(B_l=wave(J * Fi @ (k * b), c, 0.5 * np.pi), E_l=zero, P_l=zero, M_l=zero, J_l=zero,
                                 rho_E=SmoothField.zeros((1,)))
        inc = IncrementFields(u=wave(a, c, 0.0), em=lem)
        rep = assembled_governing_residuals(sc, inc, X, 0.0)
        mom = -rep["linear"].value / k**2
        amp = -np.cross(n, rep["ampere"].value) / k**2  # n x (n x h) = -h_tangential
        div = -rep["div_B"].value / k**2
        return np.concatenate([mom, -T.T @ amp, np.atleast_1d(div)])

    K = np.zeros((6, 6))
    R1 = np.zeros((6, 6))
    for j in range(6):
        x = np.zeros(6)
        x[j] = 1.0
        K[:, j] = rows(x, 0.0)
        R1[:, j] = rows(x, 1.0)
    return K, K - R1


# ---------------------------------------------------------------------------
# electromagnetic plane waves


def em_wave_speed(eps0=EPS0, mu0=MU0, eps_r=1.0, mu_r=1.0) -> float:
    return 1.0 / np.sqrt(eps0 * eps_r * mu0 * mu_r)


def em_plane_wave_check(n, e0, speed, X, t=0.0, k=1.0, region="vacuum", eps_r=1.0, mu_r=1.0, eps0=EPS0, mu0=MU0,
                        increment=False):
    """Region residuals of E = e0 sin(k(n.x - c t)), B = (n x e0) sin(.)/c and the analytic Ampere mismatch.

    Returns (report, mismatch) where mismatch is the exact value of the Ampere
    residual as the region evaluator writes it (zero at the region's light speed).
    """
    from .balance import region_maxwell_residual
    from .fields import PlaneWaveEM, Scenario, SmoothMotion
    from .incremental import region_incremental_residual

    n = unit(n)
    e0 = np.asarray(e0, dtype=float)
    if abs(n @ e0) > 1e-12 * max(np.linalg.norm(e0), 1.0):
        raise ValueError("e0 must be orthogonal to n")
    if region not in ("vacuum", "coil"):
        raise ValueError(f"unknown region {region!r}")
    sc = Scenario(SmoothMotion.identity(), PlaneWaveEM(n, e0, float(speed), float(k)), eps0=eps0, mu0=mu0)
    X = np.asarray(X, dtype=float)
    if increment:
        rep = region_incremental_residual(sc, X, t, region, eps_r, mu_r)
    else:
        rep = region_maxwell_residual(sc, X, t, region, eps_r, mu_r)
    fp = k * np.cos(k * (n @ X - speed * t))
    if region == "vacuum":
        mismatch = e0 * fp * (eps0 * mu0 * speed - 1.0 / speed)
    else:
        mismatch = e0 * fp * (eps0 * eps_r * speed - 1.0 / (mu0 * mu_r * speed))
    return rep, mismatch


__all__ = [
    "DegenerateProblemError",
    "PlaneWaveProblem",
    "WaveSolution",
    "acoustic_tensor",
    "em_plane_wave_check",
    "em_wave_speed",
    "full_system_speeds",
    "magnetic_elimination",
    "magnetoacoustic_tensor",
    "probe_assembled_system",
    "quasi_magnetostatic_system",
    "solve_wave_speeds",
    "sweep_directions",
    "tangent_basis",
    "unit",
    "wave_speeds",
]
