"""Dense complex linear algebra: tensor products, partial traces, and the
operator-vector (double-ket) isomorphism with its algebraic identities.

Conventions fixed here and used everywhere else:

* computational basis, row-major (C) ordering; in a tensor product the
  first factor is the most significant index;
* ``vec(X) = sum_ij X_ij |i>|j>``, i.e. the row-major flattening of ``X``;
* tolerances are absolute, default ``1e-10`` (all matrices in this library
  are at most a few thousand dimensional, so double precision leaves a
  comfortable margin).
"""

from __future__ import annotations

from typing import Iterable, Sequence

import numpy as np

from .exceptions import InvariantError, ShapeError

ATOL = 1e-10

__all__ = [
    "ATOL",
    "dag",
    "tensor",
    "vec",
    "unvec",
    "max_entangled",
    "partial_trace",
    "is_hermitian",
    "is_positive_semidefinite",
    "is_unitary",
    "min_eigenvalue",
    "validate_density",
    "trace_distance",
    "projector_onto",
    "basis_vector",
]


def dag(m: np.ndarray) -> np.ndarray:
    """Conjugate transpose."""
    return np.asarray(m).conj().T


def tensor(*ops: np.ndarray) -> np.ndarray:
    """Kronecker product of one or more matrices, first factor slowest index."""
    if not ops:
        raise ShapeError("tensor() needs at least one factor")
    out = np.asarray(ops[0], dtype=complex)
    for op in ops[1:]:
        out = np.kron(out, np.asarray(op, dtype=complex))
    return out


def vec(x: np.ndarray) -> np.ndarray:
    """Double-ket of an operator: ``vec(X) = sum_ij X_ij |i>|j>``.

    For the fixed row-major basis this is exactly ``X.reshape(-1)``.
    """
    x = np.asarray(x, dtype=complex)
    if x.ndim != 2:
        raise ShapeError(f"vec expects a matrix, got ndim={x.ndim}")
    return x.reshape(-1)


def unvec(v: np.ndarray, rows: int, cols: int) -> np.ndarray:
    """Inverse of :func:`vec`; requires ``rows*cols == len(v)``."""
    v = np.asarray(v, dtype=complex)
    if v.ndim != 1 or v.size != rows * cols:
        raise ShapeError(f"cannot reshape length-{v.size} vector to {rows}x{cols}")
    return v.reshape(rows, cols)


def max_entangled(d: int, normalized: bool = False) -> np.ndarray:
    """The vector ``|I>> = sum_i |i>|i>`` on C^d (x) C^d, optionally normalized."""
    v = vec(np.eye(d))
    return v / np.sqrt(d) if normalized else v


def basis_vector(d: int, i: int) -> np.ndarray:
    e = np.zeros(d, dtype=complex)
    e[i] = 1.0
    return e


def projector_onto(psi: np.ndarray) -> np.ndarray:
    psi = np.asarray(psi, dtype=complex)
    return np.outer(psi, psi.conj())


def _check_shape(m: np.ndarray, dims: Sequence[int]) -> tuple[int, ...]:
    dims = tuple(int(d) for d in dims)
    if any(d < 1 for d in dims):
        raise ShapeError(f"subsystem dimensions must be >= 1, got {dims}")
    total = int(np.prod(dims))
    if m.shape != (total, total):
        raise ShapeError(f"matrix shape {m.shape} inconsistent with subsystem dims {dims}")
    return dims


def partial_trace(m: np.ndarray, dims: Sequence[int], keep: Iterable[int]) -> np.ndarray:
    """Trace out all tensor factors not listed in ``keep``.

    ``dims`` lists the subsystem dimensions in tensor order; ``keep`` holds
    0-based factor indices.  The kept factors stay in their original order.
    Trace is preserved: ``Tr[partial_trace(M, ...)] == Tr[M]``.
    """
    m = np.asarray(m, dtype=complex)
    dims = _check_shape(m, dims)
    n = len(dims)
    keep = sorted(set(int(k) for k in keep))
    if not keep or any(k < 0 or k >= n for k in keep):
        raise ShapeError(f"keep={keep} is not a nonempty subset of factor indices 0..{n - 1}")
    resh = m.reshape(dims + dims)
    # pair up bra/ket axes of the traced factors via einsum indices
    letters = "abcdefghijklmnopqrstuvwxyzABCDEFGHIJKLMNOPQRSTUVWXYZ"
    if 2 * n > len(letters):
        raise ShapeError("too many tensor factors for partial_trace")
    row = list(letters[:n])
    col = list(letters[n : 2 * n])
    for k in range(n):
        if k not in keep:
            col[k] = row[k]
    out_idx = "".join(row[k] for k in keep) + "".join(letters[n + k] for k in keep)
    reduced = np.einsum("".join(row + col) + "->" + out_idx, resh)
    dkeep = int(np.prod([dims[k] for k in keep]))
    return reduced.reshape(dkeep, dkeep)


def is_hermitian(m: np.ndarray, tol: float = ATOL) -> bool:
    m = np.asarray(m)
    return m.ndim == 2 and m.shape[0] == m.shape[1] and np.max(np.abs(m - dag(m))) <= tol


def min_eigenvalue(m: np.ndarray) -> float:
    """Smallest eigenvalue of a Hermitian matrix."""
    return float(np.linalg.eigvalsh(np.asarray(m, dtype=complex))[0])


def is_positive_semidefinite(m: np.ndarray, tol: float = ATOL) -> bool:
    return is_hermitian(m, tol) and min_eigenvalue((m + dag(m)) / 2) >= -tol


def is_unitary(m: np.ndarray, tol: float = ATOL) -> bool:
    m = np.asarray(m, dtype=complex)
    if m.ndim != 2 or m.shape[0] != m.shape[1]:
        return False
    return np.max(np.abs(dag(m) @ m - np.eye(m.shape[0]))) <= tol


def validate_density(rho: np.ndarray, tol: float = ATOL) -> None:
    """Raise :class:`InvariantError` unless ``rho`` is a density matrix within ``tol``."""
    rho = np.asarray(rho, dtype=complex)
    if rho.ndim != 2 or rho.shape[0] != rho.shape[1]:
        raise InvariantError(f"density matrix must be square, got shape {rho.shape}")
    if not np.all(np.isfinite(rho)):
        raise InvariantError("density matrix has non-finite entries")
    if not is_hermitian(rho, tol):
        raise InvariantError("density matrix is not hermitian within tolerance")
    lo = min_eigenvalue((rho + dag(rho)) / 2)
    if lo < -tol:
        raise InvariantError(f"density matrix has negative eigenvalue {lo:.3e}")
    tr = complex(np.trace(rho))
    if abs(tr - 1.0) > max(tol, 1e-8):
        raise InvariantError(f"density matrix trace {tr} differs from 1")


def trace_distance(a: np.ndarray, b: np.ndarray) -> float:
    """``(1/2)||a - b||_1`` for Hermitian ``a``, ``b``."""
    diff = np.asarray(a, dtype=complex) - np.asarray(b, dtype=complex)
    return float(0.5 * np.sum(np.abs(np.linalg.eigvalsh((diff + dag(diff)) / 2))))
