"""Optimal universal and phase-covariant devices: cloners, NOT gates, and
their unitary realizations.

All devices come with their closed-form figures of merit (exact fractions
where the value is rational) and with constructive matrix realizations that
are cross-checked against each other in the test suite.
"""

from __future__ import annotations

import itertools
import math
from dataclasses import dataclass
from fractions import Fraction

import numpy as np

from .channels import ChoiOperator, IsometryMatrix
from .exceptions import DomainError, InvariantError, ShapeError
from .linalg import ATOL, dag, partial_trace, projector_onto, tensor, vec
from .symmetry import (
    DIM_CAP,
    occupation_indices,
    occupation_vector,
    permutation_matrix,
    sym_dim,
    sym_projector,
)

__all__ = [
    "CloneSpec",
    "uclone_fidelity",
    "uclone_choi",
    "uclone_apply",
    "unot_choi",
    "unot_fidelity",
    "triplet_isometry",
    "branch_trace",
    "cloning_unitary",
    "pclone_isometry",
    "pclone_fidelity",
    "equatorial_seed",
    "phase_rotation",
    "nsb_violations",
    "nsb_validate",
    "nsb_unique",
    "nsb_uniform",
    "nsb_d4",
    "nsb_d4_decompose",
    "pclone_choi",
    "phase_not_choi",
    "phase_not_fidelity",
    "phase_not_matchings",
    "phase_not_unitaries",
    "phase_not_program_unitary",
    "phase_not_apply",
    "phase_not_mix",
]


@dataclass(frozen=True)
class CloneSpec:
    """An ``N -> M`` cloning request for single-system dimension ``d``."""

    d: int
    n_in: int
    m_out: int

    def __post_init__(self):
        if self.d < 2:
            raise DomainError(f"need d >= 2, got {self.d}")
        if not 1 <= self.n_in < self.m_out:
            raise DomainError(f"need 1 <= N < M, got N={self.n_in}, M={self.m_out}")

    @property
    def phase_shift(self) -> int:
        """The integer ``k = (M-N)/d`` of phase-covariant cloning."""
        if (self.m_out - self.n_in) % self.d != 0:
            raise DomainError(
                f"phase-covariant cloning needs M = N + k*d; got d={self.d}, "
                f"N={self.n_in}, M={self.m_out}"
            )
        return (self.m_out - self.n_in) // self.d


def _check_state(psi: np.ndarray, d: int) -> np.ndarray:
    psi = np.asarray(psi, dtype=complex).reshape(-1)
    if psi.size != d:
        raise ShapeError(f"state has dimension {psi.size}, expected {d}")
    if abs(np.linalg.norm(psi) - 1.0) > 1e-8:
        raise InvariantError("input state is not normalized")
    return psi


# ---------------------------------------------------------------------------
# universal cloning
# ---------------------------------------------------------------------------

def uclone_fidelity(spec: CloneSpec) -> Fraction:
    """Optimal global ``N -> M`` cloning fidelity ``d[N]/d[M]`` with
    ``d[K] = binomial(d+K-1, K)`` (exact rational)."""
    return Fraction(sym_dim(spec.d, spec.n_in), sym_dim(spec.d, spec.m_out))


def uclone_choi(spec: CloneSpec) -> ChoiOperator:
    """Choi operator of the optimal universal cloner.

    Trace preservation holds on the symmetric input subspace:
    ``Tr_out[R] = P_S^(N)`` (the identity of the input domain), so
    ``channel_check`` reports ``tp`` only for ``N = 1``.
    """
    d, n, m = spec.d, spec.n_in, spec.m_out
    if d ** (m + n) > DIM_CAP:
        raise DomainError(f"Choi dimension d^(M+N) = {d ** (m + n)} exceeds cap {DIM_CAP}")
    p_s = sym_projector(d, m)
    middle = tensor(np.eye(d ** (m - n)), projector_onto(vec(np.eye(d**n))))
    side = tensor(p_s, np.eye(d**n))
    scale = float(uclone_fidelity(spec))
    mat = scale * (side @ middle @ side)
    return ChoiOperator(mat=mat, in_dim=d**n, out_dim=d**m)


def uclone_apply(spec: CloneSpec, psi: np.ndarray) -> np.ndarray:
    """Optimal cloner output ``(d[N]/d[M]) P_S (I^(x)(M-N) (x) psi^(x)N) P_S``
    for a pure single-copy input ``psi`` (the ``N`` copies are formed here)."""
    d, n, m = spec.d, spec.n_in, spec.m_out
    if d**m > DIM_CAP:
        raise DomainError(f"output dimension d^M = {d ** m} exceeds cap {DIM_CAP}")
    psi = _check_state(psi, d)
    psi_n = projector_onto(psi)
    for _ in range(n - 1):
        psi_n = np.kron(psi_n, projector_onto(psi))
    p_s = sym_projector(d, m)
    inner = tensor(np.eye(d ** (m - n)), psi_n)
    return float(uclone_fidelity(spec)) * (p_s @ inner @ p_s)


# ---------------------------------------------------------------------------
# universal NOT (optimal transposition)
# ---------------------------------------------------------------------------

def unot_fidelity(d: int) -> Fraction:
    """Optimal universal transposition fidelity ``2/(d+1)``."""
    if d < 2:
        raise DomainError(f"need d >= 2, got {d}")
    return Fraction(2, d + 1)


def unot_choi(d: int) -> ChoiOperator:
    """``R_T = 2/(d+1) P_S^(2)``; trace preserving on the full input space."""
    mat = float(unot_fidelity(d)) * sym_projector(d, 2)
    return ChoiOperator(mat=mat, in_dim=d, out_dim=d)


# ---------------------------------------------------------------------------
# triplet isometry: cloning and NOT on branches of one physical setting
# ---------------------------------------------------------------------------

def triplet_isometry(d: int) -> IsometryMatrix:
    """Isometry ``V = sum_mn M^S_mn (x) |mn>`` from C^d into (C^d)^(x)3 with
    ``M^S_mn = (|m><n| + |n><m|) / sqrt(2(d+1))``.

    Tracing ``V psi V^+`` over the first space yields optimal 1->2 universal
    cloning; over the last two spaces, the optimal universal NOT.
    """
    if d < 2:
        raise DomainError(f"need d >= 2, got {d}")
    if d**3 > DIM_CAP:
        raise DomainError(f"d^3 = {d ** 3} exceeds cap {DIM_CAP}")
    norm = 1.0 / math.sqrt(2 * (d + 1))
    v = np.zeros((d**3, d), dtype=complex)
    for m in range(d):
        for n in range(d):
            op = np.zeros((d, d), dtype=complex)
            op[m, n] += norm
            op[n, m] += norm
            # rows (i, m, n) of the output space, column index from op
            for i in range(d):
                for c in range(d):
                    if op[i, c]:
                        v[(i * d + m) * d + n, c] += op[i, c]
    return IsometryMatrix(mat=v, out_dim=d, anc_dim=d**2)


def branch_trace(v: IsometryMatrix, psi: np.ndarray, keep) -> np.ndarray:
    """Reduce ``V psi V^+`` onto a subset of the three spaces (1-indexed).

    ``keep={2,3}`` leaves the optimal 1->2 cloning output, ``keep={1}`` the
    optimal NOT output, and ``keep={1,2}`` the joint NOT (x) clone branch.
    """
    d = v.in_dim
    psi = _check_state(psi, d)
    big = v.mat @ projector_onto(psi) @ dag(v.mat)
    keep0 = sorted(int(k) - 1 for k in keep)
    if any(k not in (0, 1, 2) for k in keep0) or not keep0:
        raise DomainError(f"keep={keep} must be a nonempty subset of {{1,2,3}}")
    return partial_trace(big, (d, d, d), keep=keep0)


def cloning_unitary(d: int) -> tuple[np.ndarray, np.ndarray]:
    """Unitary network on (C^d)^(x)3 realizing the triplet isometry.

    Returns ``(U, phi)`` where ``phi`` is the two-system ancilla state
    ``sqrt(2/(d+1)) P_S^(2) sum_r |0>|r>`` and
    ``U (psi (x) |phi><phi|) U^+ = V psi V^+``.  All entries of ``U`` are
    dyadic rationals (exact in floating point); for ``d = 2`` the matrix is
    a 0/1 permutation.
    """
    if d < 2:
        raise DomainError(f"need d >= 2, got {d}")
    if d**3 > DIM_CAP:
        raise DomainError(f"d^3 = {d ** 3} exceeds cap {DIM_CAP}")
    dim = d**3

    def shifted_iso(p: int, q: int, sign: float) -> np.ndarray:
        # sum_k |k, k+p, k+q> <k+q|  (+ sign * |k, k+q, k+p> <k+q|), mod-d shifts
        m = np.zeros((dim, d))
        for k in range(d):
            kp, kq = (k + p) % d, (k + q) % d
            m[(k * d + kp) * d + kq, kq] += 1.0
            if p != q:
                m[(k * d + kq) * d + kp, kq] += sign
        return m

    u = np.zeros((dim, dim), dtype=complex)
    for p in range(d):
        row = np.zeros((1, d * d))
        row[0, p * d + p] = 1.0
        u += np.kron(shifted_iso(p, p, 0.0), row)
    for p, q in itertools.combinations(range(d), 2):
        row_s = np.zeros((1, d * d))
        row_s[0, p * d + q] = 1.0
        row_s[0, q * d + p] = 1.0
        row_a = np.zeros((1, d * d))
        row_a[0, p * d + q] = 1.0
        row_a[0, q * d + p] = -1.0
        # the two 1/sqrt(2) normalizations of the symmetric/antisymmetric
        # ancilla bras combine to an exact factor 1/2
        u += 0.5 * np.kron(shifted_iso(p, q, +1.0), row_s)
        u += 0.5 * np.kron(shifted_iso(p, q, -1.0), row_a)
    seed = np.zeros(d * d, dtype=complex)
    seed[0:d] = 1.0  # sum_r |0>|r>
    phi = sym_projector(d, 2) @ seed
    phi *= math.sqrt(2.0 / (d + 1))
    return u, phi


# ---------------------------------------------------------------------------
# phase-covariant cloning
# ---------------------------------------------------------------------------

def equatorial_seed(d: int) -> np.ndarray:
    """The fixed seed ``psi_0 = d^(-1/2) sum_i |i>`` of the multi-phase orbit."""
    return np.full(d, 1.0 / math.sqrt(d), dtype=complex)


def phase_rotation(phases) -> np.ndarray:
    """Diagonal multi-phase rotation ``sum_n e^(i phi_n) |n><n|``."""
    phases = np.asarray(phases, dtype=float)
    return np.diag(np.exp(1j * phases))


def pclone_isometry(spec: CloneSpec) -> np.ndarray:
    """The economical phase-covariant cloner ``V|{n_i}> = |{n_i + k}>``.

    Returned as a ``d^M x d^N`` matrix; on the symmetric input subspace it is
    isometric (``V^+V = P_S^(N)``), and for ``N = 1`` a genuine isometry.
    """
    d, n, m, k = spec.d, spec.n_in, spec.m_out, spec.phase_shift
    if d**m > DIM_CAP:
        raise DomainError(f"output dimension d^M = {d ** m} exceeds cap {DIM_CAP}")
    v = np.zeros((d**m, d**n), dtype=complex)
    for counts in occupation_indices(d, n):
        shifted = tuple(c + k for c in counts)
        v += np.outer(occupation_vector(d, shifted), occupation_vector(d, counts).conj())
    return v


def pclone_choi(spec: CloneSpec) -> ChoiOperator:
    """Rank-one Choi operator of the economical phase-covariant cloner,
    ``|V>><<V|`` for the occupation-shift isometry."""
    v = vec(pclone_isometry(spec))
    return ChoiOperator(
        mat=np.outer(v, v.conj()), in_dim=spec.d**spec.n_in, out_dim=spec.d**spec.m_out
    )


def pclone_fidelity(spec: CloneSpec):
    """Optimal single-site fidelity of phase-covariant ``N -> M`` cloning.

    For ``N = 1`` the exact rational ``1/d + (d-1)(M+d-1)/(M d^2)`` is
    returned; the general case evaluates the occupation-number sum

        ``1/d + 1/(M d^(N+1)) * sum_{m} (N!/prod m_i!) *
          sum_{a != b} sqrt((m_a+k+1)(m_b+k+1) / ((m_a+1)(m_b+1)))``

    over occupations ``{m_i}`` with ``sum m_i = N - 1``.
    """
    d, n, m, k = spec.d, spec.n_in, spec.m_out, spec.phase_shift
    if n == 1:
        return Fraction(1, d) + Fraction((d - 1) * (m + d - 1), m * d * d)
    total = 0.0
    nfact = math.factorial(n)
    for counts in occupation_indices(d, n - 1):
        mult = nfact / math.prod(math.factorial(c) for c in counts)
        pair_sum = 0.0
        for a in range(d):
            for b in range(d):
                if a != b:
                    pair_sum += math.sqrt(
                        (counts[a] + k + 1) * (counts[b] + k + 1)
                        / ((counts[a] + 1) * (counts[b] + 1))
                    )
        total += mult * pair_sum
    return 1.0 / d + total / (m * d ** (n + 1))


# ---------------------------------------------------------------------------
# phase-covariant NOT: NSB matrices and realizations
# ---------------------------------------------------------------------------

def nsb_violations(b: np.ndarray, tol: float = ATOL) -> list[str]:
    """Which of the four NSB axioms (nonnegative, null diagonal, symmetric,
    bistochastic) fail; empty list means a valid matrix."""
    b = np.asarray(b, dtype=float)
    out = []
    if b.ndim != 2 or b.shape[0] != b.shape[1]:
        return ["not a square matrix"]
    if np.min(b) < -tol:
        out.append(f"negative entry {np.min(b):.3e}")
    if np.max(np.abs(np.diag(b))) > tol:
        out.append("nonzero diagonal")
    if np.max(np.abs(b - b.T)) > tol:
        out.append("not symmetric")
    if np.max(np.abs(b.sum(axis=1) - 1.0)) > tol:
        out.append("row sums differ from 1")
    return out


def nsb_validate(b: np.ndarray, tol: float = ATOL) -> bool:
    return not nsb_violations(b, tol)


def nsb_unique(d: int) -> np.ndarray:
    """The unique NSB matrix for ``d = 2`` (swap) or ``d = 3`` (all 1/2)."""
    if d == 2:
        return np.array([[0.0, 1.0], [1.0, 0.0]])
    if d == 3:
        return (np.ones((3, 3)) - np.eye(3)) / 2.0
    raise DomainError(f"the NSB matrix is unique only for d in {{2, 3}}, got {d}")


def nsb_uniform(d: int) -> np.ndarray:
    """The maximally mixed NSB matrix: all off-diagonal entries ``1/(d-1)``."""
    if d < 2:
        raise DomainError(f"need d >= 2, got {d}")
    return (np.ones((d, d)) - np.eye(d)) / (d - 1)


def nsb_d4(p1: float, p2: float) -> np.ndarray:
    """The two-parameter family of 4x4 NSB matrices."""
    if not (0.0 <= p1 <= 1.0 and 0.0 <= p2 <= 1.0 - p1):
        raise DomainError(f"need 0 <= p1 <= 1 and 0 <= p2 <= 1 - p1, got ({p1}, {p2})")
    p3 = 1.0 - p1 - p2
    return np.array([
        [0.0, p1, p2, p3],
        [p1, 0.0, p3, p2],
        [p2, p3, 0.0, p1],
        [p3, p2, p1, 0.0],
    ])


def nsb_d4_decompose(b: np.ndarray, tol: float = ATOL) -> tuple[float, float, float]:
    """Extremal weights ``(p1, p2, p3)`` of a 4x4 NSB matrix (linear read-off)."""
    b = np.asarray(b, dtype=float)
    bad = nsb_violations(b, tol)
    if b.shape != (4, 4) or bad:
        raise InvariantError(f"not a 4x4 NSB matrix: {bad or b.shape}")
    p1, p2, p3 = float(b[0, 1]), float(b[0, 2]), float(b[0, 3])
    if np.max(np.abs(b - nsb_d4(p1, p2))) > max(tol, 1e-9):
        raise InvariantError("matrix does not lie in the d=4 NSB family pattern")
    return p1, p2, p3


def phase_not_fidelity(d: int) -> Fraction:
    """Optimal multi-phase transposition fidelity ``2/d`` (1 for qubits)."""
    if d < 2:
        raise DomainError(f"need d >= 2, got {d}")
    return Fraction(2, d)


def phase_not_choi(b: np.ndarray) -> ChoiOperator:
    """``R_T = sum_{i>j} b_ij (|ij> + |ji>)(<ij| + <ji|)`` for an NSB matrix ``b``."""
    b = np.asarray(b, dtype=float)
    bad = nsb_violations(b)
    if bad:
        raise InvariantError(f"invalid NSB matrix: {bad}")
    d = b.shape[0]
    mat = np.zeros((d * d, d * d), dtype=complex)
    for i in range(d):
        for j in range(i):
            if b[i, j] == 0.0:
                continue
            v = np.zeros(d * d, dtype=complex)
            v[i * d + j] = 1.0
            v[j * d + i] = 1.0
            mat += b[i, j] * np.outer(v, v)
    return ChoiOperator(mat=mat, in_dim=d, out_dim=d)


def _pair_transposition(d: int, i: int, j: int) -> np.ndarray:
    t = np.zeros((d, d), dtype=complex)
    t[i, j] = 1.0
    t[j, i] = 1.0
    return t


def phase_not_matchings(d: int) -> list[np.ndarray]:
    """Extremal NSB matrices ``B^(k)``, ``k = 1..d-1``, for even ``d``.

    ``B^(k)`` is the perfect matching pairing ``x`` with ``(k - x) mod d``;
    for even ``k`` the two fixed points of that reflection are paired with
    each other.  For ``d = 4`` this yields exactly the three extremal
    matrices of the two-parameter family.
    """
    if d < 4 or d % 2 != 0:
        raise DomainError(
            f"extremal phase-NOT realizations cover even d >= 4 only, got {d}"
        )
    out = []
    for k in range(1, d):
        b = np.zeros((d, d))
        fixed = [x for x in range(d) if (2 * x - k) % d == 0]
        for x in range(d):
            y = (k - x) % d
            if x != y:
                b[x, y] = 1.0
        if fixed:
            b[fixed[0], fixed[1]] = 1.0
            b[fixed[1], fixed[0]] = 1.0
        out.append(b)
    return out


def _matching_pairs(b: np.ndarray) -> list[tuple[int, int]]:
    d = b.shape[0]
    pairs = []
    for i in range(d):
        for j in range(i):
            if b[i, j] > 0.5:
                pairs.append((j, i))
    pairs.sort()
    return pairs


def phase_not_unitaries(d: int) -> list[np.ndarray]:
    """Control-ancilla unitaries ``U_k`` on C^d (x) C^(d/2), ``k = 1..d-1``.

    Block ``(i, j)`` of ``U_k`` holds the pair swap ``T`` of matching
    ``B^(k)`` selected by the symmetric Latin square ``(i+j) mod d/2``, so
    ``Tr_a[U_k (rho (x) |0><0|) U_k^+] = sum_{i>j} B^(k)_ij T_ij rho T_ij``.
    Odd ``d`` is unsupported (extremal NSB matrices stop being permutations).
    """
    if d % 2 != 0:
        raise DomainError(f"phase-NOT control unitaries need even d, got {d}")
    half = d // 2
    unitaries = []
    for b in phase_not_matchings(d):
        pairs = _matching_pairs(b)
        u = np.zeros((d * half, d * half), dtype=complex)
        for i in range(half):
            for j in range(half):
                t = _pair_transposition(d, *pairs[(i + j) % half])
                anc = np.zeros((half, half))
                anc[i, j] = 1.0
                u += np.kron(t, anc)
        unitaries.append(u)
    return unitaries


def phase_not_program_unitary(d: int) -> np.ndarray:
    """Controlled realization ``U = sum_k U_k (x) |k-1><k-1|`` on
    C^d (x) C^(d/2) (x) C^(d-1).

    With the control ancilla in ``|0>`` and a program state ``sigma``, tracing
    both ancillas out of ``U (rho (x) |0><0| (x) sigma) U^+`` mixes the
    extremal branches with the diagonal of ``sigma``; the total ancilla
    dimension is ``(d/2)(d-1)`` (6 for d = 4).
    """
    us = phase_not_unitaries(d)
    half, prog = d // 2, d - 1
    u = np.zeros((d * half * prog, d * half * prog), dtype=complex)
    for k, uk in enumerate(us):
        sel = np.zeros((prog, prog))
        sel[k, k] = 1.0
        u += np.kron(uk, sel)
    return u


def phase_not_apply(k: int, rho: np.ndarray) -> np.ndarray:
    """Extremal phase-NOT branch ``k``: trace the control ancilla out of
    ``U_k (rho (x) |0><0|) U_k^+``."""
    rho = np.asarray(rho, dtype=complex)
    d = rho.shape[0]
    if not 1 <= k <= d - 1:
        raise DomainError(f"branch index k={k} outside 1..{d - 1}")
    u = phase_not_unitaries(d)[k - 1]
    half = d // 2
    anc0 = np.zeros((half, half), dtype=complex)
    anc0[0, 0] = 1.0
    big = u @ np.kron(rho, anc0) @ dag(u)
    return partial_trace(big, (d, half), keep=(0,))


def phase_not_mix(weights, rho: np.ndarray) -> np.ndarray:
    """Convex mixture of the extremal branches; equals the action of
    ``phase_not_choi(sum_k w_k B^(k))``."""
    rho = np.asarray(rho, dtype=complex)
    d = rho.shape[0]
    weights = np.asarray(weights, dtype=float)
    if weights.size != d - 1:
        raise ShapeError(f"need d-1 = {d - 1} weights, got {weights.size}")
    if np.min(weights) < -ATOL or abs(weights.sum() - 1.0) > 1e-9:
        raise DomainError("weights must be a probability vector")
    out = np.zeros_like(rho)
    for k, w in enumerate(weights, start=1):
        if w:
            out += w * phase_not_apply(k, rho)
    return out
