"""TOML run configuration for the command-line front end.

Every table rejects unknown keys.  Quantities are SI; the field descriptions
carry the units.  The demo coefficients are order-one numbers, which suits the
algebraic checks; set ``[constants]`` eps0 = mu0 = 1 for fully normalized runs.
"""

from __future__ import annotations

import sys
import warnings
from pathlib import Path
from typing import Literal

import numpy as np
from pydantic import BaseModel, ConfigDict, Field, ValidationError, field_validator, model_validator

from .constitutive import Conductivities, DemoEnergy, decoupled_energy, neo_hookean
from .kinematics import EPS0, MU0, DiffConfig

if sys.version_info >= (3, 11):
    import tomllib
else:  # pragma: no cover
    import tomli as tomllib


class ConfigError(ValueError):
    """Invalid configuration file or values."""


Vec3 = list[float]
Mat3 = list[list[float]]


def _vec3(v, name):
    a = np.asarray(v, dtype=float)
    if a.shape != (3,) or not np.all(np.isfinite(a)):
        raise ValueError(f"{name} must be a finite 3-vector")
    return a.tolist()


def _mat3(v, name):
    a = np.asarray(v, dtype=float)
    if a.ndim == 0:
        a = float(a) * np.eye(3)
    if a.shape != (3, 3) or not np.all(np.isfinite(a)):
        raise ValueError(f"{name} must be a finite 3x3 matrix or a scalar")
    return a.tolist()


def _normalize(v, name):
    a = np.asarray(_vec3(v, name))
    norm = np.linalg.norm(a)
    if norm == 0.0:
        raise ValueError(f"{name} must be nonzero")
    if abs(norm - 1.0) > 1e-12:
        warnings.warn(f"{name} {a.tolist()} is not a unit vector; normalized", UserWarning, stacklevel=2)
    return (a / norm).tolist()


class _Table(BaseModel):
    model_config = ConfigDict(extra="forbid", frozen=True)


class Coefficients(_Table):
    """Free-energy coefficients of the demo model (normalized units by default)."""

    mu: float = Field(1.0, description="shear modulus (Pa)")
    lam: float = Field(2.0, description="volumetric modulus of the ln J terms (Pa)")
    alpha: float = Field(0.3, description="magnetic coefficient of B.B (m/H)")
    beta: float = Field(0.2, description="magnetoelastic coefficient of B.cB (m/H)")
    gamma: float = Field(0.1, description="dielectric coefficient of E.E (F/m)")
    delta: float = Field(0.2, description="electroelastic coefficient of E.c^-1 E (F/m)")
    c_theta: float = Field(1.0, description="thermal capacity term (J/(m^3 K^2))")
    theta0: float = Field(1.0, description="reference referential temperature (K)")
    m: float = Field(0.1, description="thermoelastic coupling (Pa/K)")
    eta: float = Field(0.05, description="magnetoelectric coupling of E.B (1/(m/s))")
    omega_e: float = Field(0.03, description="thermodielectric coupling (F/(m K))")
    omega_b: float = Field(0.02, description="thermomagnetic coupling (m/(H K))")


class ModelSpec(_Table):
    id: Literal["demo", "neo_hookean", "decoupled"] = "demo"
    coefficients: Coefficients = Coefficients()
    incompressible: bool = False
    rho_r: float = Field(1.0, gt=0, description="reference mass density (kg/m^3)")


class BiasSpec(_Table):
    """Homogeneous bias used by the moduli and wave commands."""

    F: Mat3 = Field(default_factory=lambda: np.eye(3).tolist(), description="deformation gradient (1)")
    E_el: Vec3 = Field(default_factory=lambda: [0.0, 0.0, 0.0], description="referential effective E (V/m)")
    B_l: Vec3 = Field(default_factory=lambda: [0.0, 0.0, 0.0], description="referential B (T)")
    theta_l: float | None = Field(None, description="referential temperature (K); model reference when omitted")
    p: float = Field(0.0, description="Lagrange multiplier of incompressible models (Pa)")

    @field_validator("F")
    @classmethod
    def _F(cls, v):
        v = _mat3(v, "bias.F")
        if np.linalg.det(np.asarray(v)) <= 0:
            raise ValueError("bias.F must have a positive determinant")
        return v

    @field_validator("E_el", "B_l")
    @classmethod
    def _vectors(cls, v, info):
        return _vec3(v, f"bias.{info.field_name}")


class ManufacturedSpec(_Table):
    """Smooth manufactured fields used by verification and residual sampling."""

    motion: Literal["random", "identity", "bias"] = "random"
    em: Literal["random", "potential", "vacuum_wave", "div_defect", "uniform"] = "potential"
    thermal: Literal["random", "none"] = "random"
    increment: Literal["random", "zero"] = "random"
    strain: float = Field(0.15, ge=0, description="amplitude of the random deformation (1)")
    rate: float = Field(0.2, ge=0, description="amplitude of the random velocity gradient (1/s)")
    wiggle: float = Field(0.03, ge=0, description="amplitude of the nonaffine part of the motion (m)")
    field_scale: float = Field(1.0, gt=0, description="amplitude of the manufactured EM fields (SI of each field)")
    increment_scale: float = Field(0.3, gt=0, description="amplitude of the displacement increment (m)")
    theta0: float = Field(1.0, gt=0, description="mean temperature of the manufactured thermal field (K)")
    wave_direction: Vec3 = Field(default_factory=lambda: [1.0, 0.0, 0.0], description="vacuum wave direction")
    wave_polarization: Vec3 = Field(default_factory=lambda: [0.0, 1.0, 0.0], description="E amplitude (V/m)")

    @field_validator("wave_direction")
    @classmethod
    def _direction(cls, v):
        return _normalize(v, "manufactured.wave_direction")

    @field_validator("wave_polarization")
    @classmethod
    def _polarization(cls, v):
        return _vec3(v, "manufactured.wave_polarization")


class ConductivitySpec(_Table):
    kappa: Mat3 | float = Field(default_factory=lambda: (np.eye(3) + 0.1 * np.ones((3, 3))).tolist(),
                                description="thermal conductivity (W/(m K))")
    xi: Mat3 | float = Field(default_factory=lambda: (0.2 * np.eye(3)).tolist(),
                             description="electrical conductivity (S/m)")

    @field_validator("kappa", "xi")
    @classmethod
    def _tensors(cls, v, info):
        return _mat3(v, f"conductivity.{info.field_name}")

    @model_validator(mode="after")
    def _definite(self):
        try:
            Conductivities(np.asarray(self.kappa), np.asarray(self.xi))
        except ValueError as err:
            raise ValueError(f"conductivity: {err}") from None
        return self


class NumericsSpec(_Table):
    diff_mode: Literal["ad", "fd"] = Field("ad", description="field derivatives by jax or central differences")
    fd_h: float = Field(1e-5, gt=0, description="relative spatial difference step (1)")
    fd_ht: float = Field(1e-5, gt=0, description="relative temporal difference step (1)")
    fd_order: Literal[2, 4] = 2
    length: float = Field(1.0, gt=0, description="characteristic length (m)")
    time_scale: float = Field(1.0, gt=0, description="characteristic time (s)")
    lin_eps: list[float] = Field(default_factory=lambda: [1e-3, 1e-4, 1e-5], description="linearization steps")
    order_target: float = Field(1.9, gt=0, description="minimum observed convergence order")

    @field_validator("lin_eps")
    @classmethod
    def _eps(cls, v):
        if len(v) < 2 or any(e <= 0 for e in v):
            raise ValueError("numerics.lin_eps needs at least two positive steps")
        return v

    def diff_config(self) -> DiffConfig:
        return DiffConfig(self.diff_mode, self.fd_h, self.fd_ht, self.fd_order, self.length, self.time_scale)


class ToleranceSpec(_Table):
    """Pass thresholds (relative); all are multiplied by --tol-scale."""

    round_trip: float = 1e-13
    symmetry_analytic: float = 1e-12
    symmetry_fd: float = 1e-6
    fd_moduli: float = 1e-6
    fd_richardson: float = 1e-9
    equivalence: float = 1e-6
    assembly: float = 1e-12


SUITES = ("round_trips", "moduli_symmetry", "fd_vs_analytic", "configuration_equivalence", "linearization",
          "assembly")


class VerifySpec(_Table):
    suites: list[Literal[SUITES]] = Field(default_factory=lambda: list(SUITES))
    round_trip_states: int = Field(100, ge=1)
    moduli_states: int = Field(20, ge=1)
    equivalence_states: int = Field(50, ge=1)
    linearization_states: int = Field(1, ge=1)
    assembly_states: int = Field(20, ge=1)


class RegionSpec(_Table):
    eps_r: float = Field(1.0, gt=0, description="relative permittivity of the coil (1)")
    mu_r: float = Field(1.0, gt=0, description="relative permeability of the coil (1)")


class ConstantsSpec(_Table):
    eps0: float = Field(EPS0, gt=0, description="vacuum permittivity (F/m)")
    mu0: float = Field(MU0, gt=0, description="vacuum permeability (H/m)")


class WavesSpec(_Table):
    directions: list[Vec3] | None = Field(None, description="propagation directions (normalized with a warning)")
    n_directions: int = Field(8, ge=1, description="Fibonacci-sphere directions when none are listed")
    B_magnitudes: list[float] = Field(default_factory=lambda: [0.0], description="referential |B_l| sweep (T)")
    B_direction: Vec3 = Field(default_factory=lambda: [0.0, 0.0, 1.0], description="direction of B_l")
    k: float = Field(1.0, gt=0, description="wavenumber (1/m)")
    magnetic: bool = True
    full_system: bool = Field(False, description="also solve the un-eliminated system")
    workers: int = Field(1, ge=1, description="threads for sweep points; output order is fixed")

    @field_validator("directions")
    @classmethod
    def _dirs(cls, v):
        return None if v is None else [_normalize(d, f"waves.directions[{i}]") for i, d in enumerate(v)]

    @field_validator("B_direction")
    @classmethod
    def _bdir(cls, v):
        return _normalize(v, "waves.B_direction")


class ResidualsSpec(_Table):
    sets: list[Literal["maxwell", "momentum", "energy", "boundary", "vacuum", "coil", "incremental",
                       "assembled"]] = Field(default_factory=lambda: ["maxwell"])
    points: int = Field(4, ge=1, description="sample points drawn in the cube [-extent, extent]^3")
    extent: float = Field(0.5, gt=0, description="half-width of the sample cube (m)")
    time: float = Field(0.2, description="evaluation time (s)")


class OutputSpec(_Table):
    directory: str = "emat-out"
    with_terms: bool = Field(False, description="add term-level breakdowns to JSON reports")


class ScenarioConfig(_Table):
    seed: int = 0
    tol_scale: float = Field(1.0, gt=0)
    printed_forms: bool = Field(False, description="use the printed incremental forms (flagged)")
    literal_L_inverse: bool = Field(False, description="printed inverse displacement gradients in jump conditions")
    model: ModelSpec = ModelSpec()
    bias: BiasSpec = BiasSpec()
    manufactured: ManufacturedSpec = ManufacturedSpec()
    conductivity: ConductivitySpec = ConductivitySpec()
    numerics: NumericsSpec = NumericsSpec()
    tolerances: ToleranceSpec = ToleranceSpec()
    verify: VerifySpec = VerifySpec()
    region: RegionSpec = RegionSpec()
    constants: ConstantsSpec = ConstantsSpec()
    waves: WavesSpec = WavesSpec()
    residuals: ResidualsSpec = ResidualsSpec()
    output: OutputSpec = OutputSpec()

    # builders -----------------------------------------------------------

    def build_model(self):
        c = self.model.coefficients
        m = self.model
        if m.id == "neo_hookean":
            return neo_hookean(c.mu, m.rho_r, m.incompressible)
        if m.id == "decoupled":
            if m.incompressible:
                raise ConfigError("the decoupled model is compressible")
            return decoupled_energy(c.mu, c.lam, c.alpha, m.rho_r)
        if m.incompressible:
            raise ConfigError("the demo model is compressible; use id = 'neo_hookean' for incompressible runs")
        return DemoEnergy(**c.model_dump(), rho_r=m.rho_r)

    def conductivities(self) -> Conductivities:
        return Conductivities(np.asarray(self.conductivity.kappa), np.asarray(self.conductivity.xi))

    def tol(self, name: str) -> float:
        return getattr(self.tolerances, name) * self.tol_scale

    def echo(self) -> dict:
        return self.model_dump(mode="json")


def _format_error(err: ValidationError) -> str:
    lines = []
    for e in err.errors():
        loc = ".".join(str(p) for p in e["loc"])
        if e["type"] == "extra_forbidden":
            lines.append(f"unknown key '{loc}'")
        else:
            lines.append(f"{loc}: {e['msg']}")
    return "; ".join(lines)


def parse_config(data: dict, **overrides) -> ScenarioConfig:
    data = dict(data)
    data.update({k: v for k, v in overrides.items() if v is not None})
    try:
        return ScenarioConfig.model_validate(data)
    except ValidationError as err:
        raise ConfigError(_format_error(err)) from None


def load_config(path: str | Path | None = None, **overrides) -> ScenarioConfig:
    """Read a TOML file (or the defaults when ``path`` is None) and apply overrides."""
    data = {}
    if path is not None:
        try:
            with open(path, "rb") as fh:
                data = tomllib.load(fh)
        except OSError as err:
            raise ConfigError(f"cannot read config: {err}") from None
        except tomllib.TOMLDecodeError as err:
            raise ConfigError(f"malformed TOML: {err}") from None
    return parse_config(data, **overrides)


__all__ = ["ConfigError", "SUITES", "ScenarioConfig", "load_config", "parse_config"]
