import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from conftest import random_F, rel
from emat import _backend
from emat.kernels import acoustic_tensor_batch, contract_a_batch, push_forward_a_batch

KERNELS = ("push_forward", "acoustic", "contract")


def run(name, rng, m=7):
    A = rng.standard_normal((m, 3, 3, 3, 3))
    if name == "push_forward":
        return push_forward_a_batch(A, np.stack([random_F(rng) for _ in range(m)]))
    if name == "acoustic":
        return acoustic_tensor_batch(A[0], rng.standard_normal((m, 3)))
    return contract_a_batch(A, rng.standard_normal((m, 3, 3)))


def test_env_flag_is_read_on_every_call(monkeypatch):
    monkeypatch.setenv("EMAT_DISABLE_NUMBA", "1")
    assert not _backend.numba_enabled()
    monkeypatch.setenv("EMAT_DISABLE_NUMBA", "off")
    assert _backend.numba_enabled() == _backend.HAS_NUMBA
    monkeypatch.delenv("EMAT_DISABLE_NUMBA")
    assert _backend.numba_enabled() == _backend.HAS_NUMBA


@pytest.mark.parametrize("name", KERNELS)
def test_numba_and_numpy_paths_agree(name, monkeypatch):
    monkeypatch.delenv("EMAT_DISABLE_NUMBA", raising=False)
    fast = run(name, np.random.default_rng(3))
    monkeypatch.setenv("EMAT_DISABLE_NUMBA", "1")
    slow = run(name, np.random.default_rng(3))
    assert fast.shape == slow.shape
    assert rel(fast, slow) <= 1e-14


def test_push_forward_loop_oracle(rng):
    A = rng.standard_normal((1, 3, 3, 3, 3))
    F = random_F(rng)
    J = np.linalg.det(F)
    loop = np.zeros((3, 3, 3, 3))
    for p, i, q, j, a, b in np.ndindex(3, 3, 3, 3, 3, 3):
        loop[p, i, q, j] += F[p, a] * F[q, b] * A[0, a, i, b, j] / J
    assert rel(push_forward_a_batch(A, F[None])[0], loop) <= 1e-14


@settings(max_examples=20, deadline=None)
@given(st.integers(0, 2**32 - 1))
def test_contract_is_linear_in_increment(seed):
    rng = np.random.default_rng(seed)
    A = rng.standard_normal((2, 3, 3, 3, 3))
    G, H = rng.standard_normal((2, 2, 3, 3))
    lhs = contract_a_batch(A, G + 2.0 * H)
    rhs = contract_a_batch(A, G) + 2.0 * contract_a_batch(A, H)
    assert np.allclose(lhs, rhs, atol=1e-12 * (1 + np.abs(rhs).max()))


def test_identity_push_forward_is_exact(rng):
    A = rng.standard_normal((3, 3, 3, 3, 3))
    out = push_forward_a_batch(A, np.broadcast_to(np.eye(3), (3, 3, 3)))
    assert np.array_equal(out, A)
