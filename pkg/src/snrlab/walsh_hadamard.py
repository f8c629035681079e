"""Sylvester Hadamard transform and the 0/1 aperture sensing operator.

The sensing matrix keeps the +1 entries of the Hadamard matrix and replaces
the -1 entries by 0, i.e. ``A = (H + J) / 2`` with ``J`` the all-ones
matrix. Because the first row of ``H`` is all ones, ``A @ x`` can be read
off one fast transform:

    w = H @ x
    A @ x = (w + w[0]) / 2

and the inverse follows as ``A^-1 z = (2/n) H z - z[0] e_0``. The fast inverse
is only trusted after :func:`fast_inverse_validated` has checked it against a
dense solve for every order up to 256.
"""

from __future__ import annotations

import functools
import logging
from dataclasses import dataclass

import numpy as np

from . import _kernels
from .errors import CapacityError, SizeError

log = logging.getLogger(__name__)

DENSE_LIMIT = 2**12
_VALIDATION_ORDERS = tuple(2**k for k in range(1, 9))


def is_power_of_two(n: int) -> bool:
    return n >= 1 and (n & (n - 1)) == 0


def check_size(n: int) -> int:
    n = int(n)
    if n < 2 or not is_power_of_two(n):
        raise SizeError(f"transform size must be a power of two >= 2, got {n}")
    return n


def fwht(v) -> np.ndarray:
    """Unnormalized Walsh-Hadamard transform along the last axis.

    Integer input stays integer (exact); anything else is computed in float64.
    Works on 1-D vectors and on stacks of vectors.
    """
    arr = np.asarray(v)
    n = arr.shape[-1] if arr.ndim else 0
    if not is_power_of_two(n):
        raise SizeError(f"fwht length must be a power of two, got {n}")
    dtype = np.int64 if arr.dtype.kind in "iub" else np.float64
    out = np.array(arr, dtype=dtype, order="C", copy=True)
    _kernels.fwht_rows(out.reshape(-1, n))
    return out


def sylvester_hadamard(n: int) -> np.ndarray:
    """Dense Sylvester matrix built by Kronecker doubling (oracle use only)."""
    n = check_size(n)
    if n > DENSE_LIMIT:
        raise CapacityError(f"dense Hadamard of order {n} exceeds limit {DENSE_LIMIT}")
    h = np.ones((1, 1), dtype=np.int64)
    base = np.array([[1, 1], [1, -1]], dtype=np.int64)
    while h.shape[0] < n:
        h = np.kron(base, h)
    return h


@dataclass(frozen=True)
class SensingOperator:
    """Square 0/1 modified-Hadamard operator, optionally column-permuted.

    ``permutation[j]`` names the Hadamard column that becomes column ``j``:
    ``A_perm[:, j] = A[:, permutation[j]]``.
    """

    size: int
    permutation: tuple[int, ...] | None = None

    def __post_init__(self):
        object.__setattr__(self, "size", check_size(self.size))
        if self.permutation is not None:
            perm = tuple(int(p) for p in self.permutation)
            if sorted(perm) != list(range(self.size)):
                raise SizeError("permutation must be a bijection on range(size)")
            if perm == tuple(range(self.size)):
                perm = None
            object.__setattr__(self, "permutation", perm)

    @classmethod
    def random(cls, n: int, rng: np.random.Generator) -> SensingOperator:
        return cls(n, tuple(int(p) for p in rng.permutation(n)))

    @property
    def perm_array(self) -> np.ndarray | None:
        if self.permutation is None:
            return None
        return np.asarray(self.permutation, dtype=np.intp)

    def permute(self, x: np.ndarray) -> np.ndarray:
        """Return ``u`` with ``A_perm @ x == A @ u``."""
        p = self.perm_array
        if p is None:
            return x
        u = np.empty_like(x)
        u[..., p] = x
        return u

    def unpermute(self, u: np.ndarray) -> np.ndarray:
        p = self.perm_array
        if p is None:
            return u
        return u[..., p]


def _check_length(op: SensingOperator, arr: np.ndarray) -> None:
    if arr.shape[-1] != op.size:
        raise SizeError(f"expected length {op.size}, got {arr.shape[-1]}")


def apply_sensing(op: SensingOperator, x) -> np.ndarray:
    """Measurements ``A @ x`` (batched over leading axes)."""
    arr = np.asarray(x, dtype=np.float64)
    _check_length(op, arr)
    w = fwht(op.permute(arr))
    # w[..., 0] is the scene total
    return (w + w[..., :1]) * 0.5


def _fast_inverse(op: SensingOperator, z: np.ndarray) -> np.ndarray:
    u = fwht(z) * (2.0 / op.size)
    u[..., 0] -= z[..., 0]
    return op.unpermute(u)


def _dense_inverse(op: SensingOperator, z: np.ndarray) -> np.ndarray:
    a = materialize(op).astype(np.float64)
    return np.linalg.solve(a, z.reshape(-1, op.size).T).T.reshape(z.shape)


@functools.lru_cache(maxsize=None)
def fast_inverse_validated(rtol: float = 1e-9) -> bool:
    """Check the fast inverse against a dense LU solve for n = 2 .. 256."""
    rng = np.random.default_rng(20140101)
    for n in _VALIDATION_ORDERS:
        for perm in (None, tuple(int(p) for p in rng.permutation(n))):
            op = SensingOperator(n, perm)
            z = rng.uniform(0.0, 1e6, size=(3, n))
            fast = _fast_inverse(op, z)
            dense = _dense_inverse(op, z)
            scale = np.max(np.abs(dense))
            if not np.all(np.abs(fast - dense) <= rtol * scale):
                log.warning("fast inverse disagrees with dense solve at n=%d; using dense path", n)
                return False
    return True


def apply_inverse(op: SensingOperator, z) -> np.ndarray:
    """Reconstruction ``A^-1 @ z`` (batched over leading axes). No clamping."""
    arr = np.asarray(z, dtype=np.float64)
    _check_length(op, arr)
    if fast_inverse_validated():
        return _fast_inverse(op, arr)
    return _dense_inverse(op, arr)


def materialize(op: SensingOperator, dense_limit: int = DENSE_LIMIT) -> np.ndarray:
    """Dense 0/1 matrix of ``op`` as int64."""
    if op.size > dense_limit:
        raise CapacityError(f"operator size {op.size} exceeds dense limit {dense_limit}")
    a = (sylvester_hadamard(op.size) + 1) // 2
    p = op.perm_array
    return a if p is None else a[:, p]


@functools.lru_cache(maxsize=16)
def dense_inverse_matrix(op: SensingOperator) -> np.ndarray:
    """``inv(A)`` by dense LU; independent of the fast transform."""
    a = materialize(op).astype(np.float64)
    inv = np.linalg.inv(a)
    inv.setflags(write=False)
    return inv
