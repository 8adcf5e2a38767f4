import numpy as np
import pytest

from emat._backend import enable_compile_cache
from emat.constitutive import DemoEnergy
from emat.fields import SmoothField

enable_compile_cache()

DEMO = dict(mu=1.0, lam=2.0, alpha=0.3, beta=0.2, gamma=0.1, delta=0.2, c_theta=1.0, theta0=1.0, m=0.1,
            eta=0.05, omega_e=0.03, omega_b=0.02)


@pytest.fixture
def rng():
    return np.random.default_rng(20240611)


@pytest.fixture(scope="session")
def demo_model():
    return DemoEnergy(**DEMO)


def random_F(rng, strain=0.2, min_det=0.3):
    while True:
        F = np.eye(3) + strain * rng.standard_normal((3, 3))
        if np.linalg.det(F) > min_det:
            return F


def rel(a, b):
    a, b = np.asarray(a, float), np.asarray(b, float)
    scale = max(np.max(np.abs(a)), np.max(np.abs(b)), 1e-300)
    return float(np.max(np.abs(a - b)) / scale)


def superpose(a: SmoothField, b: SmoothField) -> SmoothField:
    return SmoothField(a.const + b.const, a.lin + b.lin, a.rate + b.rate, np.concatenate([a.amp, b.amp]),
                       np.concatenate([a.k, b.k]), np.concatenate([a.w, b.w]), np.concatenate([a.phase, b.phase]))


ACCEPTANCE_LINES = []


def pytest_terminal_summary(terminalreporter):
    if ACCEPTANCE_LINES:
        terminalreporter.write_sep("-", "acceptance criteria")
        for line in ACCEPTANCE_LINES:
            terminalreporter.write_line(line)
