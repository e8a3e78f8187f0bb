"""Channel representations and conversions: Kraus sets, Choi operators,
Stinespring isometries and square unitary dilations.

The Choi operator of a channel ``E`` acting on ``rho`` as
``E(rho) = sum_i E_i rho E_i^+`` is

    ``R = sum_i |E_i>><<E_i|``   (an operator on  out (x) in),

with the inverse action ``E(rho) = Tr_in[(I_out (x) rho^T) R]``.  Output
factor first, input factor last; this matches the double-ket convention of
:mod:`qdevices.linalg`.
"""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

from .exceptions import ContractError, NotCPError, ShapeError
from .linalg import ATOL, dag, partial_trace, unvec, vec

__all__ = [
    "KrausSet",
    "ChoiOperator",
    "IsometryMatrix",
    "UnitaryDilation",
    "ChannelCheck",
    "choi_from_kraus",
    "apply_choi",
    "canonical_kraus",
    "channel_check",
    "dual_apply",
    "stinespring",
    "unitary_dilation",
]

# eigenvalues below this relative cutoff are treated as numerical rank inflation
RANK_CUTOFF = 1e-10


def _readonly(a: np.ndarray) -> np.ndarray:
    a = np.array(a, dtype=complex)
    a.setflags(write=False)
    return a


@dataclass(frozen=True)
class KrausSet:
    """A channel as a list of Kraus operators ``E_i`` from C^in to C^out."""

    operators: tuple[np.ndarray, ...]
    in_dim: int = field(init=False)
    out_dim: int = field(init=False)

    def __post_init__(self):
        ops = tuple(_readonly(op) for op in self.operators)
        if not ops:
            raise ShapeError("a KrausSet needs at least one operator")
        out_dim, in_dim = ops[0].shape
        for op in ops:
            if op.ndim != 2 or op.shape != (out_dim, in_dim):
                raise ShapeError("all Kraus operators must share the same out x in shape")
        object.__setattr__(self, "operators", ops)
        object.__setattr__(self, "in_dim", in_dim)
        object.__setattr__(self, "out_dim", out_dim)

    def apply(self, rho: np.ndarray) -> np.ndarray:
        """``sum_i E_i rho E_i^+``."""
        rho = np.asarray(rho, dtype=complex)
        if rho.shape != (self.in_dim, self.in_dim):
            raise ShapeError(f"state dimension {rho.shape} != in_dim {self.in_dim}")
        out = np.zeros((self.out_dim, self.out_dim), dtype=complex)
        for op in self.operators:
            out += op @ rho @ dag(op)
        return out

    def normalization_defect(self) -> float:
        """``max |sum_i E_i^+ E_i - I|`` entrywise."""
        acc = sum(dag(op) @ op for op in self.operators)
        return float(np.max(np.abs(acc - np.eye(self.in_dim))))

    def is_trace_preserving(self, tol: float = ATOL) -> bool:
        return self.normalization_defect() <= tol

    def is_canonical(self, tol: float = ATOL) -> bool:
        """Hilbert-Schmidt orthogonality ``Tr[E_i^+ E_j] = ||E_i||^2 delta_ij``."""
        n = len(self.operators)
        for i in range(n):
            for j in range(i + 1, n):
                if abs(np.trace(dag(self.operators[i]) @ self.operators[j])) > tol:
                    return False
        return True


@dataclass(frozen=True)
class ChoiOperator:
    """Choi operator on out (x) in."""

    mat: np.ndarray
    in_dim: int
    out_dim: int

    def __post_init__(self):
        m = _readonly(self.mat)
        dim = self.in_dim * self.out_dim
        if m.shape != (dim, dim):
            raise ShapeError(f"Choi matrix shape {m.shape} != {(dim, dim)}")
        object.__setattr__(self, "mat", m)


@dataclass(frozen=True)
class IsometryMatrix:
    """Stinespring isometry ``V`` from C^in to C^out (x) C^anc with ``V^+V = I``."""

    mat: np.ndarray
    out_dim: int
    anc_dim: int

    def __post_init__(self):
        m = _readonly(self.mat)
        if m.ndim != 2 or m.shape[0] != self.out_dim * self.anc_dim:
            raise ShapeError(
                f"isometry shape {m.shape} inconsistent with out={self.out_dim}, anc={self.anc_dim}"
            )
        object.__setattr__(self, "mat", m)

    @property
    def in_dim(self) -> int:
        return self.mat.shape[1]

    def isometry_defect(self) -> float:
        return float(np.max(np.abs(dag(self.mat) @ self.mat - np.eye(self.in_dim))))

    def apply(self, rho: np.ndarray) -> np.ndarray:
        """Channel action ``Tr_anc[V rho V^+]``."""
        big = self.mat @ np.asarray(rho, dtype=complex) @ dag(self.mat)
        return partial_trace(big, (self.out_dim, self.anc_dim), keep=(0,))


@dataclass(frozen=True)
class UnitaryDilation:
    """Square unitary ``U`` on out (x) anc whose columns at the ancilla slot
    ``ancilla_state_index`` reproduce a Stinespring isometry columnwise."""

    u: np.ndarray
    out_dim: int
    anc_dim: int
    in_dim: int
    ancilla_state_index: int = 0

    def __post_init__(self):
        m = _readonly(self.u)
        dim = self.out_dim * self.anc_dim
        if m.shape != (dim, dim):
            raise ShapeError(f"dilation unitary shape {m.shape} != {(dim, dim)}")
        object.__setattr__(self, "u", m)

    def column_slots(self) -> list[int]:
        """Column indices of ``U`` holding the isometry columns, in input order."""
        return [_dilation_slot(j, self.out_dim, self.anc_dim, self.ancilla_state_index)
                for j in range(self.in_dim)]

    def isometry(self) -> np.ndarray:
        return self.u[:, self.column_slots()]

    def apply(self, rho: np.ndarray) -> np.ndarray:
        """``Tr_anc[U (rho (x) |0><0|) U^+]`` with ``|0>`` the ancilla slot state."""
        v = self.isometry()
        big = v @ np.asarray(rho, dtype=complex) @ dag(v)
        return partial_trace(big, (self.out_dim, self.anc_dim), keep=(0,))


@dataclass(frozen=True)
class ChannelCheck:
    cp: bool
    tp: bool
    min_eig: float
    tp_defect: float


def choi_from_kraus(k: KrausSet) -> ChoiOperator:
    """``R = sum_i |E_i>><<E_i|``."""
    dim = k.in_dim * k.out_dim
    mat = np.zeros((dim, dim), dtype=complex)
    for op in k.operators:
        v = vec(op)
        mat += np.outer(v, v.conj())
    return ChoiOperator(mat=mat, in_dim=k.in_dim, out_dim=k.out_dim)


def apply_choi(r: ChoiOperator, rho: np.ndarray) -> np.ndarray:
    """Inverse Choi formula ``E(rho) = Tr_in[(I_out (x) rho^T) R]``."""
    rho = np.asarray(rho, dtype=complex)
    if rho.shape != (r.in_dim, r.in_dim):
        raise ShapeError(f"state dimension {rho.shape} != in_dim {r.in_dim}")
    sandwich = np.kron(np.eye(r.out_dim), rho.T) @ r.mat
    return partial_trace(sandwich, (r.out_dim, r.in_dim), keep=(0,))


def canonical_kraus(r: ChoiOperator, tol: float = 1e-8) -> KrausSet:
    """Diagonalize the Choi operator into a canonical Kraus set.

    Eigenvalues below ``RANK_CUTOFF * max_eig`` are dropped; an eigenvalue
    below ``-tol`` means the map is not completely positive.
    """
    evals, evecs = np.linalg.eigh(r.mat)
    if evals[0] < -tol:
        raise NotCPError(f"Choi operator has negative eigenvalue {evals[0]:.3e}")
    cutoff = max(RANK_CUTOFF * max(evals[-1], 0.0), 0.0)
    ops = []
    for lam, v in zip(evals, evecs.T):
        if lam > cutoff:
            ops.append(np.sqrt(lam) * unvec(v, r.out_dim, r.in_dim))
    if not ops:
        ops.append(np.zeros((r.out_dim, r.in_dim)))
    return KrausSet(operators=tuple(ops))


def channel_check(r: ChoiOperator, tol: float = 1e-8) -> ChannelCheck:
    """Diagnostic CP/TP test: ``cp <=> min_eig >= -tol``, ``tp <=> ||Tr_out R - I||_max <= tol``."""
    herm = (r.mat + dag(r.mat)) / 2
    min_eig = float(np.linalg.eigvalsh(herm)[0])
    tr_out = partial_trace(r.mat, (r.out_dim, r.in_dim), keep=(1,))
    tp_defect = float(np.max(np.abs(tr_out - np.eye(r.in_dim))))
    return ChannelCheck(cp=min_eig >= -tol, tp=tp_defect <= tol, min_eig=min_eig, tp_defect=tp_defect)


def dual_apply(k: KrausSet, obs: np.ndarray) -> np.ndarray:
    """Heisenberg-picture action ``sum_i E_i^+ O E_i`` on an observable of the out space."""
    obs = np.asarray(obs, dtype=complex)
    if obs.shape != (k.out_dim, k.out_dim):
        raise ShapeError(f"observable dimension {obs.shape} != out_dim {k.out_dim}")
    out = np.zeros((k.in_dim, k.in_dim), dtype=complex)
    for op in k.operators:
        out += dag(op) @ obs @ op
    return out


def stinespring(k: KrausSet, tol: float = ATOL) -> IsometryMatrix:
    """``V = sum_i E_i (x) |i>`` with ancilla dimension = number of Kraus operators.

    Requires a trace-preserving set (otherwise ``V`` is not an isometry).
    """
    if not k.is_trace_preserving(tol):
        raise ContractError(
            f"stinespring needs a trace-preserving KrausSet (defect {k.normalization_defect():.3e})"
        )
    anc = len(k.operators)
    v = np.zeros((k.out_dim * anc, k.in_dim), dtype=complex)
    for i, op in enumerate(k.operators):
        v[i::anc, :] += op  # row (out_row * anc + i)
    return IsometryMatrix(mat=v, out_dim=k.out_dim, anc_dim=anc)


def _dilation_slot(j: int, out_dim: int, anc_dim: int, anc_index: int) -> int:
    """Column slot of input basis vector ``j`` inside the dilation unitary.

    For ``in_dim <= out_dim`` this is the usual ``U (I (x) |anc_index>)``
    convention, slot ``j * anc + anc_index``; larger inputs wrap into the
    next ancilla slots, which keeps the assignment injective whenever
    ``in_dim <= out_dim * anc_dim``.
    """
    return (j % out_dim) * anc_dim + (anc_index + j // out_dim) % anc_dim


def unitary_dilation(v: IsometryMatrix, tol: float = ATOL) -> UnitaryDilation:
    """Complete a Stinespring isometry to a square unitary by Gram-Schmidt.

    The isometry columns are placed at the slots of ``U (I (x) |0>)``; the
    remaining columns are filled by orthonormalizing computational basis
    vectors in index order (candidates whose residual norm falls below
    ``1e-8`` are skipped), so the completion is deterministic.
    """
    if v.isometry_defect() > max(tol, 1e-10):
        raise ContractError(f"not an isometry within tolerance (defect {v.isometry_defect():.3e})")
    dim = v.out_dim * v.anc_dim
    in_dim = v.in_dim
    if in_dim > dim:
        raise ShapeError("isometry has more columns than the dilation dimension")
    slots = [_dilation_slot(j, v.out_dim, v.anc_dim, 0) for j in range(in_dim)]
    if len(set(slots)) != in_dim:
        raise ShapeError("dilation slot assignment collided; inconsistent dimensions")
    u = np.zeros((dim, dim), dtype=complex)
    u[:, slots] = v.mat
    fixed = list(v.mat.T)
    free_cols = [c for c in range(dim) if c not in set(slots)]
    seed = 0
    for c in free_cols:
        while True:
            if seed >= dim + len(free_cols):
                raise ShapeError("Gram-Schmidt completion ran out of candidates")
            cand = np.zeros(dim, dtype=complex)
            cand[seed % dim] = 1.0
            seed += 1
            for w in fixed:
                cand -= (w.conj() @ cand) * w
            # re-orthogonalize once for numerical safety
            for w in fixed:
                cand -= (w.conj() @ cand) * w
            norm = np.linalg.norm(cand)
            if norm >= 1e-8:
                cand /= norm
                break
        fixed.append(cand)
        u[:, c] = cand
    return UnitaryDilation(u=u, out_dim=v.out_dim, anc_dim=v.anc_dim, in_dim=in_dim,
                           ancilla_state_index=0)
