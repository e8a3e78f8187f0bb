"""POVM validation, the postprocessing (classical shuffling) relation and
its reachability decision, the theorem-backed cleanness predicates, and the
truncated nonorthogonal repeatable-measurement demonstrator.

The reachability decision ``Q = S . P`` over column-stochastic ``S`` is a
small linear feasibility problem over the real/imaginary entry expansion of
the effects; it is solved with HiGHS (scipy.optimize.linprog), the witness
is verified post hoc, and infeasibility is certified by an explicit Farkas
vector.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np
from scipy.optimize import linprog

from .exceptions import DomainError, InvariantError, ShapeError, TheoremScopeError
from .linalg import ATOL, dag, validate_density

__all__ = [
    "Povm",
    "PovmDiagnostics",
    "povm_validate",
    "postprocess",
    "ReachResult",
    "postprocessing_reachable",
    "is_postprocessing_clean",
    "effects_equivalent",
    "is_observable",
    "is_preprocessing_clean",
    "range_sample",
    "TruncatedRepeatable",
    "truncated_repeatable",
    "repeatability_check",
    "repeatable_run",
]

RANK_TOL = 1e-8  # relative singular-value cutoff for numerical rank


def _readonly(a: np.ndarray) -> np.ndarray:
    a = np.array(a, dtype=complex)
    a.setflags(write=False)
    return a


@dataclass(frozen=True)
class Povm:
    """A finite POVM: positive effects summing to the identity, with labels."""

    effects: tuple[np.ndarray, ...]
    labels: tuple[str, ...] = ()

    def __post_init__(self):
        effs = tuple(_readonly(e) for e in self.effects)
        if not effs:
            raise ShapeError("a POVM needs at least one effect")
        d = effs[0].shape[0]
        for e in effs:
            if e.ndim != 2 or e.shape != (d, d):
                raise ShapeError("all effects must be square matrices of equal dimension")
        labels = tuple(self.labels) if self.labels else tuple(str(i) for i in range(len(effs)))
        if len(labels) != len(effs):
            raise ShapeError("label count differs from effect count")
        object.__setattr__(self, "effects", effs)
        object.__setattr__(self, "labels", labels)

    @property
    def dim(self) -> int:
        return self.effects[0].shape[0]

    def __len__(self) -> int:
        return len(self.effects)

    def probabilities(self, rho: np.ndarray) -> np.ndarray:
        return np.array([float(np.real(np.trace(rho @ e))) for e in self.effects])


@dataclass(frozen=True)
class PovmDiagnostics:
    min_eigenvalues: tuple[float, ...]
    sum_defect: float
    valid: bool


def povm_validate(p: Povm, tol: float = ATOL) -> PovmDiagnostics:
    """Report the minimum eigenvalue of each effect and ``||sum P_i - I||``."""
    mins = tuple(float(np.linalg.eigvalsh((e + dag(e)) / 2)[0]) for e in p.effects)
    total = sum(p.effects)
    defect = float(np.max(np.abs(total - np.eye(p.dim))))
    hermitian = all(np.max(np.abs(e - dag(e))) <= tol for e in p.effects)
    valid = hermitian and min(mins) >= -tol and defect <= tol
    return PovmDiagnostics(min_eigenvalues=mins, sum_defect=defect, valid=valid)


def _check_stochastic(s: np.ndarray, tol: float = 1e-9) -> np.ndarray:
    s = np.asarray(s, dtype=float)
    if s.ndim != 2:
        raise ShapeError("stochastic matrix must be 2-dimensional")
    if np.min(s) < -tol:
        raise InvariantError(f"stochastic matrix has negative entry {np.min(s):.3e}")
    colsums = s.sum(axis=0)
    if np.max(np.abs(colsums - 1.0)) > tol:
        raise InvariantError("columns of a column-stochastic matrix must sum to 1")
    return s


def postprocess(p: Povm, s: np.ndarray) -> Povm:
    """Classical shuffling ``Q_i = sum_j p(i|j) P_j`` by a column-stochastic matrix."""
    s = _check_stochastic(s)
    if s.shape[1] != len(p):
        raise ShapeError(f"need {len(p)} columns, got {s.shape[1]}")
    effects = tuple(
        sum(s[i, j] * p.effects[j] for j in range(len(p))) for i in range(s.shape[0])
    )
    return Povm(effects=effects)


@dataclass(frozen=True)
class ReachResult:
    reachable: bool
    witness: np.ndarray | None = None
    certificate: np.ndarray | None = field(default=None, repr=False)


def postprocessing_reachable(p: Povm, q: Povm, tol: float = 1e-9) -> ReachResult:
    """Decide whether ``Q`` is a postprocessing of ``P``.

    Returns a verified column-stochastic witness when feasible; otherwise a
    Farkas certificate ``y`` with ``A^T y <= 0`` and ``b^T y > 0`` for the
    feasibility system ``A x = b, x >= 0``.
    """
    if p.dim != q.dim:
        raise ShapeError("POVMs must act on the same dimension")
    d = p.dim
    n_p, n_q = len(p), len(q)
    n_vars = n_q * n_p  # S[i, j] flattened row-major

    rows, rhs = [], []
    for i in range(n_q):
        for r in range(d):
            for c in range(r, d):
                row_re = np.zeros(n_vars)
                row_im = np.zeros(n_vars)
                for j in range(n_p):
                    row_re[i * n_p + j] = p.effects[j][r, c].real
                    row_im[i * n_p + j] = p.effects[j][r, c].imag
                rows.append(row_re)
                rhs.append(q.effects[i][r, c].real)
                if c > r:
                    rows.append(row_im)
                    rhs.append(q.effects[i][r, c].imag)
    for j in range(n_p):
        row = np.zeros(n_vars)
        row[j::n_p] = 1.0
        rows.append(row)
        rhs.append(1.0)
    a_eq = np.array(rows)
    b_eq = np.array(rhs)

    res = linprog(c=np.zeros(n_vars), A_eq=a_eq, b_eq=b_eq, bounds=(0, None), method="highs")
    if res.status == 0:
        s = res.x.reshape(n_q, n_p)
        s = np.clip(s, 0.0, None)
        rebuilt = postprocess(p, s / s.sum(axis=0, keepdims=True))
        defect = max(
            float(np.max(np.abs(rebuilt.effects[i] - q.effects[i]))) for i in range(n_q)
        )
        if defect <= max(tol, 1e-7):
            return ReachResult(reachable=True, witness=s / s.sum(axis=0, keepdims=True))
    # Farkas alternative: max b^T y  s.t.  A^T y <= 0,  -1 <= y <= 1
    alt = linprog(c=-b_eq, A_ub=a_eq.T, b_ub=np.zeros(n_vars), bounds=(-1, 1), method="highs")
    if alt.status == 0 and -alt.fun > tol:
        return ReachResult(reachable=False, certificate=alt.x)
    if res.status == 0:
        # solver produced a witness of borderline quality; accept it
        s = np.clip(res.x.reshape(n_q, n_p), 0.0, None)
        return ReachResult(reachable=True, witness=s / s.sum(axis=0, keepdims=True))
    return ReachResult(reachable=False, certificate=None)


def _numerical_rank(m: np.ndarray) -> int:
    svals = np.linalg.svd(np.asarray(m, dtype=complex), compute_uv=False)
    if svals.size == 0 or svals[0] <= 0.0:
        return 0
    return int(np.sum(svals > RANK_TOL * svals[0]))


def is_postprocessing_clean(p: Povm) -> bool:
    """Postprocessing cleanness is equivalent to all effects having rank one."""
    return all(_numerical_rank(e) <= 1 for e in p.effects)


def effects_equivalent(p: Povm, q: Povm, tol: float = ATOL) -> bool:
    """Preprocessing equivalence of two effects (two-outcome POVMs): equal
    spectral width, i.e. equal minimum and maximum eigenvalues of the first
    effect, regardless of the interior spectrum."""
    if len(p) != 2 or len(q) != 2:
        raise DomainError("effects_equivalent compares two-outcome POVMs")
    if p.dim != q.dim:
        raise ShapeError("effects must act on the same dimension")
    ep = np.linalg.eigvalsh((p.effects[0] + dag(p.effects[0])) / 2)
    eq = np.linalg.eigvalsh((q.effects[0] + dag(q.effects[0])) / 2)
    return abs(ep[0] - eq[0]) <= tol and abs(ep[-1] - eq[-1]) <= tol


def is_observable(p: Povm, tol: float = ATOL) -> bool:
    """True iff the effects are mutually orthogonal projectors."""
    for i, a in enumerate(p.effects):
        for j, b in enumerate(p.effects):
            target = a if i == j else 0.0
            if np.max(np.abs(a @ b - target)) > tol:
                return False
    return True


def is_preprocessing_clean(p: Povm) -> bool:
    """Theorem-backed preprocessing cleanness.

    Rank-one POVMs are clean for any number of outcomes; for at most ``d``
    outcomes cleanness coincides with being an observable.  Other cases are
    an open semidefinite decision this library does not implement.
    """
    if is_postprocessing_clean(p):
        return True
    if len(p) <= p.dim:
        return is_observable(p)
    raise TheoremScopeError(
        "preprocessing cleanness is only decided for rank-one POVMs or for "
        f"|P| <= d; got |P| = {len(p)} > d = {p.dim} with a higher-rank effect"
    )


def range_sample(p: Povm, states) -> list[np.ndarray]:
    """Outcome distributions ``(Tr[rho P_i])_i`` for each supplied state."""
    out = []
    for rho in states:
        validate_density(rho)
        out.append(p.probabilities(np.asarray(rho, dtype=complex)))
    return out


# ---------------------------------------------------------------------------
# truncated nonorthogonal repeatable measurement
# ---------------------------------------------------------------------------

@dataclass(frozen=True)
class TruncatedRepeatable:
    """Finite ``D``-level truncation of the two-outcome shift instrument.

    ``M_i^+ M_i = P_i`` and ``P_0 + P_1 = I`` hold exactly on the safe
    subspace (levels ``0 .. D-3``); each ``M_i`` raises the level by at most
    two, so ``k`` successive applications stay exact on levels
    ``0 .. D-1-2k``.
    """

    levels: int
    weight: float
    m0: np.ndarray
    m1: np.ndarray
    p0: np.ndarray
    p1: np.ndarray

    @property
    def safe_levels(self) -> int:
        return self.levels - 2


def truncated_repeatable(levels: int, weight: float) -> TruncatedRepeatable:
    """Build the truncated instrument.

    ``P_0 = p|0><0| + sum_j |2j+1><2j+1|``, ``P_1 = (1-p)|0><0| +
    sum_j |2j+2><2j+2|`` with the shift operations ``M_0 = sqrt(p)|1><0| +
    sum_j |2j+3><2j+1|`` and ``M_1 = sqrt(1-p)|2><0| + sum_j |2j+4><2j+2|``.
    The POVM is nonorthogonal for ``0 < p < 1`` and the instrument admits no
    invariant state.
    """
    if levels < 6 or levels % 2 != 0:
        raise DomainError(f"need even truncation dimension >= 6, got {levels}")
    if not 0.0 <= weight <= 1.0:
        raise DomainError(f"mixing weight {weight} outside [0, 1]")
    d = levels
    p0 = np.zeros((d, d), dtype=complex)
    p1 = np.zeros((d, d), dtype=complex)
    p0[0, 0] = weight
    p1[0, 0] = 1.0 - weight
    for n in range(1, d):
        (p0 if n % 2 == 1 else p1)[n, n] = 1.0
    m0 = np.zeros((d, d), dtype=complex)
    m1 = np.zeros((d, d), dtype=complex)
    m0[1, 0] = np.sqrt(weight)
    m1[2, 0] = np.sqrt(1.0 - weight)
    for n in range(1, d - 2):
        (m0 if n % 2 == 1 else m1)[n + 2, n] = 1.0
    for m in (m0, m1, p0, p1):
        m.setflags(write=False)
    return TruncatedRepeatable(levels=d, weight=float(weight), m0=m0, m1=m1, p0=p0, p1=p1)


def _check_support(tr: TruncatedRepeatable, psi: np.ndarray, max_level: int) -> np.ndarray:
    psi = np.asarray(psi, dtype=complex).reshape(-1)
    if psi.size != tr.levels:
        raise ShapeError(f"state has {psi.size} levels, instrument has {tr.levels}")
    if np.max(np.abs(psi[max_level + 1:]), initial=0.0) > 0.0:
        raise DomainError(f"state support exceeds safe levels 0..{max_level}")
    norm = np.linalg.norm(psi)
    if norm < 1e-12:
        raise DomainError("state vector is zero")
    return psi / norm


def repeatability_check(tr: TruncatedRepeatable, psi: np.ndarray) -> np.ndarray:
    """Conditional repetition matrix ``p(j|k) = ||M_j M_k psi||^2 / ||M_k psi||^2``.

    Exact repeatability ``p(j|k) = delta_jk`` requires both applications to
    stay below the truncation edge, so the state must live on levels
    ``0 .. D-5``.
    """
    psi = _check_support(tr, psi, tr.levels - 5)
    ms = (tr.m0, tr.m1)

    def prob(vec):
        # exactly-rounded sum: the shift operators relocate amplitudes without
        # changing them, so repeated norms agree bit for bit
        return math.fsum(float(a) for a in np.abs(vec) ** 2)

    out = np.zeros((2, 2))
    for k in range(2):
        first = ms[k] @ psi
        w = prob(first)
        if w < 1e-15:
            out[:, k] = np.nan
            continue
        for j in range(2):
            out[j, k] = prob(ms[j] @ first) / w
    return out


def repeatable_run(tr: TruncatedRepeatable, psi: np.ndarray, reps: int, rng) -> list[dict]:
    """Sample a sequence of outcomes, collapsing with ``M_i`` after each.

    Returns one record per repetition: outcome probabilities before the
    measurement and the sampled outcome.  After the first repetition the
    same outcome recurs with probability one (while the support stays safe).
    """
    psi = _check_support(tr, psi, tr.levels - 3)
    records = []
    state = psi
    for step in range(reps):
        probs = np.array([
            float(np.real(state.conj() @ tr.p0 @ state)),
            float(np.real(state.conj() @ tr.p1 @ state)),
        ])
        outcome = int(rng.random() > probs[0])
        post = (tr.m0 if outcome == 0 else tr.m1) @ state
        norm = np.linalg.norm(post)
        if norm < 1e-12:
            raise DomainError(f"outcome {outcome} has zero probability; cannot collapse")
        state = post / norm
        records.append({"rep": step, "p0": probs[0], "p1": probs[1], "outcome": outcome})
    return records
