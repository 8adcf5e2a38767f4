"""Dense 3-d tensor algebra with the index conventions used throughout the package.

Greek indices are referential, Latin indices are current.  Plain arrays are used
for vectors (shape (3,)), second-order tensors (3, 3) and the fourth-order
modulus (3, 3, 3, 3) stored in the order (alpha, i, beta, j).  Third-order moduli
carry their index split in a :class:`Ten3` so that block transposes are
unambiguous.

Every function accepts numpy or jax arrays and returns the same kind.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from ._backend import is_jax, xp_of


class TensorError(ValueError):
    """Shape, split or singularity problem in a tensor operation."""


class SingularTensorError(TensorError):
    pass


def levi_civita() -> np.ndarray:
    eps = np.zeros((3, 3, 3))
    eps[0, 1, 2] = eps[1, 2, 0] = eps[2, 0, 1] = 1.0
    eps[0, 2, 1] = eps[2, 1, 0] = eps[1, 0, 2] = -1.0
    return eps


EPS = levi_civita()
I3 = np.eye(3)


def vec3(a) -> np.ndarray:
    """Validate and return a finite length-3 float vector."""
    a = np.asarray(a, dtype=float)
    if a.shape != (3,):
        raise TensorError(f"expected a 3-vector, got shape {a.shape}")
    if not np.all(np.isfinite(a)):
        raise TensorError("vector has non-finite components")
    return a


def ten2(a) -> np.ndarray:
    a = np.asarray(a, dtype=float)
    if a.shape != (3, 3):
        raise TensorError(f"expected a 3x3 tensor, got shape {a.shape}")
    if not np.all(np.isfinite(a)):
        raise TensorError("tensor has non-finite components")
    return a


def ten4(a) -> np.ndarray:
    a = np.asarray(a, dtype=float)
    if a.shape != (3, 3, 3, 3):
        raise TensorError(f"expected a 3x3x3x3 tensor, got shape {a.shape}")
    if not np.all(np.isfinite(a)):
        raise TensorError("tensor has non-finite components")
    return a


def cross(a, b):
    """Right-handed cross product (batched over leading axes)."""
    return xp_of(a, b).cross(a, b)


def double_contract(tau, gamma):
    """tau : gamma = tau_ij gamma_ji (transposed pairing)."""
    return xp_of(tau, gamma).einsum("...ij,...ji->...", tau, gamma)


def perm_contract(tau):
    """(eps tau)_i = eps_ijk tau_jk."""
    xp = xp_of(tau)
    return xp.einsum("ijk,...jk->...i", xp.asarray(EPS), tau)


def det(a):
    return xp_of(a).linalg.det(a)


def singularity_threshold(a) -> float:
    scale = float(np.max(np.abs(a)))
    return 1e-12 * scale**3


def inv(a):
    """Inverse of a 3x3 tensor.

    Concrete inputs are checked against |det| < 1e-12 (max |a_ij|)^3; traced jax
    inputs are inverted without the check.
    """
    if is_jax(a):
        return xp_of(a).linalg.inv(a)
    a = np.asarray(a, dtype=float)
    d = np.linalg.det(a)
    if not np.isfinite(d) or abs(d) < singularity_threshold(a) or np.max(np.abs(a)) == 0.0:
        raise SingularTensorError(f"tensor is singular (det = {d:.3e})")
    return np.linalg.inv(a)


def sym(a):
    return 0.5 * (a + xp_of(a).swapaxes(a, -1, -2))


def skew(a):
    return 0.5 * (a - xp_of(a).swapaxes(a, -1, -2))


def outer(a, b):
    return xp_of(a, b).einsum("...i,...j->...ij", a, b)


SPLIT_REF = "ai|b"  # T_{alpha i | beta}: modulus acting on a vector, giving a two-point tensor
SPLIT_VEC = "i|aj"  # T_{i | alpha j}: modulus acting on a two-point tensor, giving a vector
_SPLITS = (SPLIT_REF, SPLIT_VEC)


@dataclass(frozen=True)
class Ten3:
    """Third-order tensor with an immutable index split.

    ``"ai|b"`` stores components T[alpha, i, beta]; ``"i|aj"`` stores T[i, alpha, j].
    """

    data: object
    split: str

    def __post_init__(self):
        if self.split not in _SPLITS:
            raise TensorError(f"unknown index split {self.split!r}")
        if tuple(np.shape(self.data)) != (3, 3, 3):
            raise TensorError(f"Ten3 needs shape (3, 3, 3), got {np.shape(self.data)}")
        if not is_jax(self.data):
            arr = np.array(self.data, dtype=float)
            if not np.all(np.isfinite(arr)):
                raise TensorError("Ten3 has non-finite components")
            arr.setflags(write=False)
            object.__setattr__(self, "data", arr)

    @property
    def T(self) -> "Ten3":
        """Index-block transpose: B_{alpha i|beta} <-> B^T_{beta|alpha i}."""
        xp = xp_of(self.data)
        if self.split == SPLIT_REF:
            return Ten3(xp.transpose(self.data, (2, 0, 1)), SPLIT_VEC)
        return Ten3(xp.transpose(self.data, (1, 2, 0)), SPLIT_REF)

    def __array__(self, dtype=None, copy=None):
        return np.asarray(self.data, dtype=dtype)


def moduli_products(modulus, argument):
    """Apply a modulus to an increment with the component sums of the incremental laws.

    * order-4 A with a 3x3 increment:   (A Fdot)_{alpha i} = A_{alpha i beta j} Fdot_{j beta}
    * Ten3 "ai|b" with a vector:        (B e)_{alpha i}    = B_{alpha i|beta} e_beta
    * Ten3 "i|aj" with a 3x3 increment: (F Fdot)_i         = F_{i|alpha j} Fdot_{j alpha}
    * order-2 modulus with a vector:    (G e)_alpha        = G_{alpha beta} e_beta
    * order-2 or vector modulus with a scalar: plain scaling (thermal moduli D, I, N)
    """
    if isinstance(modulus, Ten3):
        data = modulus.data
        xp = xp_of(data, argument)
        arg_shape = tuple(np.shape(argument))
        if modulus.split == SPLIT_REF:
            if arg_shape != (3,):
                raise TensorError(f"split 'ai|b' acts on a 3-vector, got shape {arg_shape}")
            return xp.einsum("aib,b->ai", data, argument)
        if arg_shape != (3, 3):
            raise TensorError(f"split 'i|aj' acts on a 3x3 tensor, got shape {arg_shape}")
        return xp.einsum("iaj,ja->i", data, argument)

    xp = xp_of(modulus, argument)
    m_shape = tuple(np.shape(modulus))
    a_shape = tuple(np.shape(argument))
    if a_shape == ():
        if m_shape not in ((3,), (3, 3)):
            raise TensorError(f"only vector or 3x3 moduli multiply a scalar, got {m_shape}")
        return modulus * argument
    if m_shape == (3, 3, 3, 3):
        if a_shape != (3, 3):
            raise TensorError(f"order-4 modulus acts on a 3x3 tensor, got shape {a_shape}")
        return xp.einsum("aibj,jb->ai", modulus, argument)
    if m_shape == (3, 3):
        if a_shape != (3,):
            raise TensorError(f"order-2 modulus acts on a 3-vector, got shape {a_shape}")
        return xp.einsum("ab,b->a", modulus, argument)
    if m_shape == (3, 3, 3):
        raise TensorError("bare order-3 arrays are ambiguous; wrap them in Ten3 with a split")
    raise TensorError(f"no product rule for modulus shape {m_shape} and argument shape {a_shape}")
