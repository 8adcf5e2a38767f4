import math

import numpy as np
import pytest

from emat import balance as bal
from emat import incremental as incm
from emat.config import load_config
from emat.linearization import (
    ORDER_TARGET,
    jvp_derivative,
    linearization_check,
    observed_order,
)
from emat.verify import manufactured_increment, manufactured_scenario

X0 = np.array([0.05, -0.1, 0.15])


@pytest.fixture(scope="module")
def problem():
    cfg = load_config()
    rng = np.random.default_rng(7)
    sc = manufactured_scenario(cfg, rng, boundary=True, em="random")
    return sc, manufactured_increment(cfg, rng, sc)


def test_observed_order_examples():
    eps = (1e-1, 1e-2, 1e-3)
    assert observed_order(eps, [e * e for e in eps]) == pytest.approx(2.0)
    assert observed_order(eps, list(eps)) == pytest.approx(1.0)
    # exact agreement reports an infinite order
    assert math.isinf(observed_order(eps, (0.0, 0.0, 0.0)))
    # reaching round-off on the last step does not lower the order
    assert observed_order(eps, (1e-4, 1e-6, 1e-13)) == pytest.approx(2.0)


def test_full_check_passes(problem):
    sc, inc = problem
    rep = linearization_check(sc, inc, X0, 0.2)
    groups = {r.group for r in rep.rows}
    assert groups == {"maxwell", "momentum", "heat", "constitutive", "conduction", "boundary"}
    assert rep.passed, "\n".join(r.line() for r in rep.failures())
    assert rep.min_order() >= ORDER_TARGET
    assert all(r.line().startswith("PASS") for r in rep.rows)


def test_heat_sign_audit(problem):
    sc, inc = problem
    rep = linearization_check(sc, inc, X0, 0.2, groups=("heat",))
    for row in rep.rows:
        assert row.sign_audit["passing_convention"] == "sources minus storage with -Div q"
        assert row.sign_audit["flipped_divergence_order"] < 1.5


def test_printed_forms_are_flagged(problem):
    sc, inc = problem
    rep = linearization_check(sc, inc, X0, 0.2, groups=("maxwell", "conduction"), printed_forms=True)
    flagged = {(r.form, r.equation) for r in rep.rows if r.flagged}
    assert ("lagrangian", "gauss") in flagged and ("eulerian", "ampere") in flagged
    assert ("eulerian", "J_l") in flagged
    # the printed variants are genuinely not the linearization
    assert any(not r.passed for r in rep.rows if r.flagged)
    assert rep.passed
    assert any(r.line().startswith("FLAGGED") for r in rep.rows)


def test_literal_inverse_flags_boundary_rows(problem):
    sc, inc = problem
    rep = linearization_check(sc, inc, X0, 0.2, groups=("boundary",), literal_L_inverse=True)
    assert all(r.flagged for r in rep.rows if r.equation.startswith("bc"))
    assert not any(r.flagged for r in rep.rows if r.equation == "traction")
    assert rep.passed


def test_jvp_matches_incremental_maxwell(problem):
    sc, inc = problem
    exact = jvp_derivative(bal.k_maxwell_lagrangian, sc, inc, X0, 0.2)
    an = incm.incremental_maxwell_lagrangian(sc, inc, X0, 0.2)
    for name in an.names():
        total = sum(np.asarray(v) for v in exact[name].values())
        assert np.max(np.abs(total - an[name].value)) <= 1e-10 * an[name].scale, name


def test_step_validation(problem):
    sc, inc = problem
    with pytest.raises(ValueError):
        linearization_check(sc, inc, X0, eps=(1e-3,))
    with pytest.raises(ValueError):
        linearization_check(sc, inc, X0, eps=(1e-3, -1e-4))
