"""Symmetric subspaces, occupation-number bases, SU(2) Clebsch-Gordan data,
spin operators, permutation representations and the block decomposition of
many-copy qubit states.

Half-integer spin labels are accepted as ``int``, ``float`` or ``Fraction``
with ``2l`` integral.  Spin matrices are indexed by ascending magnetic
number, i.e. row/column ``0`` corresponds to ``n = -l``.
"""

from __future__ import annotations

import itertools
import math
from dataclasses import dataclass
from fractions import Fraction
from functools import lru_cache

import numpy as np

from .exceptions import DomainError, ShapeError, SizeCapError
from .linalg import dag

# dense constructions on (C^d)^(x)N are capped at d^N <= DIM_CAP (~0.3 GB worst case)
DIM_CAP = 4096

__all__ = [
    "DIM_CAP",
    "sym_dim",
    "occupation_indices",
    "occupation_vector",
    "sym_projector",
    "permutation_matrix",
    "permutation_average",
    "cg_multiplicity",
    "spin_operator",
    "coupled_basis",
    "cg_projector",
    "schur_basis",
    "BlockWeights",
    "many_copies_decompose",
    "many_copies_reconstruct",
]


def _twice(l) -> int:
    """Validate a (half-)integer spin label and return ``2l`` as an int."""
    t = Fraction(l).limit_denominator(2) * 2
    if t.denominator != 1 or Fraction(l) * 2 != t:
        raise DomainError(f"spin label {l} is not a half-integer")
    t = int(t)
    if t < 0:
        raise DomainError(f"spin label {l} must be >= 0")
    return t


def _check_cap(d: int, n: int) -> int:
    dim = d**n
    if dim > DIM_CAP:
        raise SizeCapError(f"d^N = {d}^{n} = {dim} exceeds the dense cap {DIM_CAP}")
    return dim


def sym_dim(d: int, n: int) -> int:
    """Dimension ``binomial(d+N-1, N)`` of the totally symmetric subspace of (C^d)^(x)N."""
    if d < 1 or n < 0:
        raise DomainError(f"need d >= 1 and N >= 0, got d={d}, N={n}")
    return math.comb(d + n - 1, n)


def occupation_indices(d: int, n: int) -> list[tuple[int, ...]]:
    """All occupation multi-indices ``{n_i}`` with ``sum n_i = N``, lexicographic order."""
    if d < 1 or n < 0:
        raise DomainError(f"need d >= 1 and N >= 0, got d={d}, N={n}")

    def rec(slots: int, total: int):
        if slots == 1:
            yield (total,)
            return
        for first in range(total + 1):
            for rest in rec(slots - 1, total - first):
                yield (first,) + rest

    return sorted(rec(d, n))


def occupation_vector(d: int, counts) -> np.ndarray:
    """Unit-norm symmetrized basis vector of (C^d)^(x)N with the given occupations.

    Equal positive amplitude ``sqrt(prod n_i! / N!)`` on every arrangement of
    the multiset; the family over all occupations is an orthonormal basis of
    the symmetric subspace.
    """
    counts = tuple(int(c) for c in counts)
    if len(counts) != d or any(c < 0 for c in counts):
        raise DomainError(f"invalid occupation index {counts} for d={d}")
    n = sum(counts)
    dim = _check_cap(d, n)
    amp = math.sqrt(math.prod(math.factorial(c) for c in counts) / math.factorial(n))
    v = np.zeros(dim, dtype=complex)
    for arrangement in sorted(set(itertools.permutations(
            [i for i, c in enumerate(counts) for _ in range(c)]))):
        idx = 0
        for a in arrangement:
            idx = idx * d + a
        v[idx] = amp
    return v


def sym_projector(d: int, n: int) -> np.ndarray:
    """Projector onto the totally symmetric subspace of (C^d)^(x)N.

    Built as ``sum_idx |{n_i}><{n_i}|`` over the occupation basis, which
    equals the permutation average ``(1/N!) sum_tau Pi_tau`` but stays cheap
    for all ``d^N <= DIM_CAP``.
    """
    dim = _check_cap(d, n)
    p = np.zeros((dim, dim), dtype=complex)
    for counts in occupation_indices(d, n):
        v = occupation_vector(d, counts)
        p += np.outer(v, v.conj())
    return p


def permutation_matrix(perm, d: int) -> np.ndarray:
    """0/1 matrix permuting the tensor factors of (C^d)^(x)N.

    ``perm`` sends factor ``k`` of the input to factor ``perm[k]`` of the
    output, so ``Pi |i_0 ... i_{N-1}> = |j_0 ... j_{N-1}>`` with
    ``j_{perm[k]} = i_k``; composition satisfies ``Pi_s Pi_t = Pi_{s o t}``.
    """
    perm = tuple(int(p) for p in perm)
    n = len(perm)
    if sorted(perm) != list(range(n)):
        raise DomainError(f"{perm} is not a permutation of 0..{n - 1}")
    dim = _check_cap(d, n)
    strides = [d ** (n - 1 - k) for k in range(n)]
    src = np.arange(dim)
    digits = [(src // strides[k]) % d for k in range(n)]
    dst = np.zeros(dim, dtype=np.int64)
    for k in range(n):
        dst += digits[k] * strides[perm[k]]
    mat = np.zeros((dim, dim), dtype=complex)
    mat[dst, src] = 1.0
    return mat


def permutation_average(x: np.ndarray, n: int, d: int) -> np.ndarray:
    """Twirl ``(1/N!) sum_tau Pi_tau X Pi_tau^+`` over the full permutation group."""
    x = np.asarray(x, dtype=complex)
    dim = _check_cap(d, n)
    if x.shape != (dim, dim):
        raise ShapeError(f"operator shape {x.shape} != {(dim, dim)}")
    acc = np.zeros_like(x)
    count = 0
    for perm in itertools.permutations(range(n)):
        pi = permutation_matrix(perm, d)
        acc += pi @ x @ dag(pi)
        count += 1
    return acc / count


def cg_multiplicity(n: int, j) -> int:
    """Clebsch-Gordan multiplicity ``d_j = (2j+1)/(N/2+j+1) * binomial(N, N/2-j)``
    of the spin-``j`` block in (C^2)^(x)N."""
    if n < 1:
        raise DomainError(f"need N >= 1, got {n}")
    tj = _twice(j)
    if tj > n or (n - tj) % 2 != 0:
        raise DomainError(f"j={j} is not in {{N/2, N/2-1, ...}} for N={n}")
    k = (n - tj) // 2  # = N/2 - j
    val = Fraction(tj + 1, (n + tj) // 2 + 1) * math.comb(n, k)
    assert val.denominator == 1
    return int(val)


def _ladder_elements(l) -> np.ndarray:
    """``<l,n+1|J_+|l,n>`` for ascending ``n``; length ``2l``."""
    tl = _twice(l)
    lv = tl / 2.0
    ns = np.arange(-lv, lv)  # n = -l .. l-1
    return np.sqrt(lv * (lv + 1) - ns * (ns + 1))


def spin_operator(l, axis: str) -> np.ndarray:
    """Spin-``l`` angular momentum component ``J_axis`` (axis in {'x','y','z','+','-'}).

    Basis ordered by ascending magnetic number, so ``J_z = diag(-l, ..., l)``.
    """
    tl = _twice(l)
    dim = tl + 1
    lv = tl / 2.0
    if axis == "z":
        return np.diag(np.arange(-lv, lv + 1)).astype(complex)
    up = np.zeros((dim, dim), dtype=complex)
    up[np.arange(1, dim), np.arange(dim - 1)] = _ladder_elements(l)
    if axis == "+":
        return up
    if axis == "-":
        return dag(up)
    if axis == "x":
        return (up + dag(up)) / 2
    if axis == "y":
        return (up - dag(up)) / (2j)
    raise DomainError(f"unknown axis {axis!r}")


@lru_cache(maxsize=None)
def _coupled_basis_cached(tj: int, tl: int) -> dict[int, np.ndarray]:
    j, l = tj / 2.0, tl / 2.0
    dim_j, dim_l = tj + 1, tl + 1
    jm_low = spin_operator(j, "-")
    lm_low = spin_operator(l, "-")
    lower = np.kron(jm_low, np.eye(dim_l)) + np.kron(np.eye(dim_j), lm_low)

    def m_subspace(tm: int) -> list[int]:
        # product-basis indices with m1 + m2 = M, ascending m1
        out = []
        for i1 in range(dim_j):
            tm1 = -tj + 2 * i1
            tm2 = tm - tm1
            if -tl <= tm2 <= tl and (tm2 + tl) % 2 == 0:
                out.append(i1 * dim_l + (tm2 + tl) // 2)
        return out

    basis: dict[int, np.ndarray] = {}
    for tJ in range(tj + tl, abs(tj - tl) - 2, -2):
        idx = m_subspace(tJ)
        if tJ == tj + tl:
            seed = np.zeros(dim_j * dim_l, dtype=complex)
            seed[idx[-1]] = 1.0  # |j,j>|l,l>
        else:
            # orthocomplement of the already-built |J', M=J> vectors inside the M=J sector
            priors = np.array([basis[tJp][idx, (tJ + tJp) // 2]
                               for tJp in range(tj + tl, tJ, -2)])
            _, _, vh = np.linalg.svd(priors)
            coeffs = vh[-1].conj()
            seed = np.zeros(dim_j * dim_l, dtype=complex)
            seed[idx] = coeffs
            # Condon-Shortley: component on maximal m1 (= j) real positive
            pivot = seed[idx[-1]]
            seed *= abs(pivot) / pivot
            seed /= np.linalg.norm(seed)
        jv = tJ / 2.0
        cols = np.zeros((dim_j * dim_l, tJ + 1), dtype=complex)
        cols[:, tJ] = seed  # column index ascending M: M = J is the last
        vec_m = seed
        for ti, tm in enumerate(range(tJ, -tJ, -2)):
            mv = tm / 2.0
            vec_m = lower @ vec_m / math.sqrt(jv * (jv + 1) - mv * (mv - 1))
            cols[:, tJ - 1 - ti] = vec_m
        cols.setflags(write=False)
        basis[tJ] = cols
    return basis


def coupled_basis(j, l) -> dict[Fraction, np.ndarray]:
    """Coupled total-spin basis of C^(2j+1) (x) C^(2l+1).

    Returns ``{J: B_J}`` where the columns of ``B_J`` are ``|J,M>`` for
    ascending ``M``, expressed in the product basis (Condon-Shortley phases).
    """
    raw = _coupled_basis_cached(_twice(j), _twice(l))
    return {Fraction(tJ, 2): mat for tJ, mat in raw.items()}


def cg_projector(j, l, J) -> np.ndarray:
    """Projector of C^(2j+1) (x) C^(2l+1) onto its total-spin-``J`` subspace."""
    tj, tl, tJ = _twice(j), _twice(l), _twice(J)
    if not (abs(tj - tl) <= tJ <= tj + tl) or (tj + tl - tJ) % 2 != 0:
        raise DomainError(f"J={J} violates the triangle rule for j={j}, l={l}")
    b = _coupled_basis_cached(tj, tl)[tJ]
    return b @ dag(b)


@lru_cache(maxsize=None)
def schur_basis(n: int) -> tuple[tuple[Fraction, np.ndarray], ...]:
    """Spin sectors of (C^2)^(x)N built by coupling qubits in factor order.

    Returns ``((l, B), ...)`` where each ``B`` is ``2^N x (2l+1)`` with
    columns ``|l, n>`` for ascending ``n`` (eigenvectors of total ``J_z``);
    a spin value ``l`` occurs ``cg_multiplicity(N, l)`` times.  Together the
    sectors form an orthonormal basis of the full space.
    """
    if n < 1:
        raise DomainError(f"need N >= 1, got {n}")
    _check_cap(2, n)
    # single qubit: |1/2,-1/2> = |1>, |1/2,+1/2> = |0>
    start = np.array([[0.0, 1.0], [1.0, 0.0]], dtype=complex)
    sectors: list[tuple[int, np.ndarray]] = [(1, start)]
    up, down = np.array([1.0, 0.0], dtype=complex), np.array([0.0, 1.0], dtype=complex)
    for _ in range(n - 1):
        new: list[tuple[int, np.ndarray]] = []
        for tl, b in sectors:
            lv = tl / 2.0
            dim_in = b.shape[0]
            with_up = np.kron(b, up.reshape(-1, 1)).reshape(dim_in * 2, tl + 1)
            with_down = np.kron(b, down.reshape(-1, 1)).reshape(dim_in * 2, tl + 1)

            def col(mat, tm):  # column of |l, m> (x) qubit blocks, ascending m
                return mat[:, (tm + tl) // 2]

            # l + 1/2 sector
            tp = tl + 1
            bp = np.zeros((dim_in * 2, tp + 1), dtype=complex)
            for ci, tM in enumerate(range(-tp, tp + 1, 2)):
                mv = tM / 2.0
                cu = math.sqrt((lv + mv + 0.5) / (tl + 1)) if -tl <= tM - 1 <= tl else 0.0
                cd = math.sqrt((lv - mv + 0.5) / (tl + 1)) if -tl <= tM + 1 <= tl else 0.0
                if cu:
                    bp[:, ci] += cu * col(with_up, tM - 1)
                if cd:
                    bp[:, ci] += cd * col(with_down, tM + 1)
            new.append((tp, bp))
            # l - 1/2 sector
            if tl >= 1:
                tm_ = tl - 1
                bm = np.zeros((dim_in * 2, tm_ + 1), dtype=complex)
                for ci, tM in enumerate(range(-tm_, tm_ + 1, 2)):
                    mv = tM / 2.0
                    cu = math.sqrt((lv - mv + 0.5) / (tl + 1))
                    cd = math.sqrt((lv + mv + 0.5) / (tl + 1))
                    bm[:, ci] += -cu * col(with_up, tM - 1) + cd * col(with_down, tM + 1)
                new.append((tm_, bm))
        sectors = new
    out = []
    for tl, b in sectors:
        b.setflags(write=False)
        out.append((Fraction(tl, 2), b))
    return tuple(out)


@dataclass(frozen=True)
class BlockWeights:
    """Schur-block weights of ``rho^(x)N`` for a qubit of Bloch length ``r``.

    ``weights[l]`` holds ``w_{l,n}`` for ascending ``n = -l..l``; each block
    occurs with multiplicity ``multiplicities[l]`` and the total weight
    ``sum_l d_l * sum_n w_{l,n}`` equals 1.
    """

    n_copies: int
    r: float
    weights: dict[Fraction, np.ndarray]
    multiplicities: dict[Fraction, int]

    def total_weight(self) -> float:
        return float(sum(self.multiplicities[l] * w.sum() for l, w in self.weights.items()))


def many_copies_decompose(r: float, n: int) -> BlockWeights:
    """Block weights of ``rho^(x)N`` with ``rho = (I + r sigma_z)/2``.

    ``w_{l,n} = p_+^{N/2+n} p_-^{N/2-n}`` with ``p_± = (1±r)/2``; this form
    is singularity-free on the whole interval ``0 <= r <= 1`` (at ``r = 1``
    only the stretched block survives).
    """
    if not 0.0 <= r <= 1.0:
        raise DomainError(f"Bloch length r={r} outside [0, 1]")
    if n < 1:
        raise DomainError(f"need N >= 1, got {n}")
    p_plus, p_minus = (1.0 + r) / 2.0, (1.0 - r) / 2.0
    weights, mult = {}, {}
    for tl in range(n % 2, n + 1, 2):
        l = Fraction(tl, 2)
        ks = np.arange(tl + 1)  # n = -l + k
        # N/2 + n = (N - tl)/2 + k ; N/2 - n = (N + tl)/2 - k  (both integers)
        w = (p_plus ** ((n - tl) // 2 + ks)) * (p_minus ** ((n + tl) // 2 - ks))
        weights[l] = w
        mult[l] = cg_multiplicity(n, l)
    return BlockWeights(n_copies=n, r=float(r), weights=weights, multiplicities=mult)


def many_copies_reconstruct(r: float, n: int) -> np.ndarray:
    """Rebuild ``rho^(x)N`` from its block weights in the coupled Schur basis."""
    bw = many_copies_decompose(r, n)
    dim = 2**n
    out = np.zeros((dim, dim), dtype=complex)
    for l, b in schur_basis(n):
        out += (b * bw.weights[l]) @ dag(b)
    return out
