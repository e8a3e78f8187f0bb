"""Schur-product decoherence maps: correlation matrices, environment
dilations, entropy exchange, random-unitary decompositions for qubits and
qutrits, and exact inversion by classical feedback from the environment.

All entropies are in bits (log base 2).
"""

from __future__ import annotations

import cmath
import math
from dataclasses import dataclass

import numpy as np

from .channels import IsometryMatrix, UnitaryDilation, unitary_dilation
from .exceptions import DecompositionError, DomainError, InvariantError, ShapeError, TheoremScopeError
from .linalg import ATOL, dag, partial_trace, projector_onto

__all__ = [
    "validate_correlation",
    "schur_apply",
    "rho_infinity",
    "EnvironmentModel",
    "environment_model",
    "von_neumann_entropy",
    "shannon_entropy",
    "entropy_exchange",
    "RandomUnitaryDecomp",
    "random_unitary_decomp",
    "FeedbackResult",
    "invert_by_feedback",
    "phase_kick",
    "phase_kick_info",
]


def validate_correlation(xi: np.ndarray, tol: float = ATOL) -> np.ndarray:
    """Check Hermitian, positive semidefinite, unit diagonal; return as complex array."""
    xi = np.asarray(xi, dtype=complex)
    if xi.ndim != 2 or xi.shape[0] != xi.shape[1]:
        raise InvariantError(f"correlation matrix must be square, got {xi.shape}")
    if np.max(np.abs(xi - dag(xi))) > tol:
        raise InvariantError("correlation matrix is not hermitian")
    if np.max(np.abs(np.diag(xi) - 1.0)) > tol:
        raise InvariantError("correlation matrix must have unit diagonal")
    lo = float(np.linalg.eigvalsh((xi + dag(xi)) / 2)[0])
    if lo < -tol:
        raise InvariantError(f"correlation matrix has negative eigenvalue {lo:.3e}")
    return xi


def schur_apply(xi: np.ndarray, rho: np.ndarray) -> np.ndarray:
    """Decoherence action: entrywise product ``xi_kl rho_kl`` in the pointer basis."""
    xi = validate_correlation(xi)
    rho = np.asarray(rho, dtype=complex)
    if rho.shape != xi.shape:
        raise ShapeError(f"state shape {rho.shape} != correlation shape {xi.shape}")
    return xi * rho


def rho_infinity(rho: np.ndarray) -> np.ndarray:
    """The completely decohered state: the diagonal part of ``rho``."""
    rho = np.asarray(rho, dtype=complex)
    return np.diag(np.diag(rho))


@dataclass(frozen=True)
class EnvironmentModel:
    """Pointer-environment dilation ``U|k>|0> = |k>|e_k>`` with ``<e_l|e_k> = xi_kl``."""

    env_states: tuple[np.ndarray, ...]
    dilation: UnitaryDilation


def environment_model(xi: np.ndarray) -> EnvironmentModel:
    """Factor ``xi_kl = <e_l|e_k>`` and dilate.

    The vectors ``|e_k>`` come from an eigendecomposition of ``xi^T``
    (rows beyond the numerical rank dropped, then padded back to C^d), and
    the unitary is the Gram-Schmidt completion of the controlled isometry
    ``V = sum_k |k><k| (x) |e_k>``; tracing the environment out of
    ``U (rho (x) |0><0|) U^+`` recovers :func:`schur_apply`.
    """
    xi = validate_correlation(xi)
    d = xi.shape[0]
    evals, evecs = np.linalg.eigh(xi.T)  # the Gram matrix of {|e_k>} is xi^T
    order = np.argsort(evals)[::-1]
    evals, evecs = evals[order], evecs[:, order]
    evals = np.clip(evals, 0.0, None)
    rank = max(1, int(np.sum(evals > 1e-12 * max(evals[0], 1.0))))
    factors = (np.sqrt(evals[:rank])[:, None] * dag(evecs[:, :rank]))  # rank x d
    env = np.zeros((d, d), dtype=complex)
    env[:rank, :] = factors
    env_states = tuple(env[:, k].copy() for k in range(d))
    v = np.zeros((d * d, d), dtype=complex)
    for k in range(d):
        v[k * d:(k + 1) * d, k] = env_states[k]
    dilation = unitary_dilation(IsometryMatrix(mat=v, out_dim=d, anc_dim=d))
    return EnvironmentModel(env_states=env_states, dilation=dilation)


def von_neumann_entropy(m: np.ndarray, tol: float = 1e-12) -> float:
    """``-Tr[m log2 m]`` for a positive matrix; eigenvalues in ``(-1e-12, 0)``
    are clamped to zero and ``0 log 0 = 0``."""
    evals = np.linalg.eigvalsh(np.asarray(m, dtype=complex))
    if evals[0] < -tol:
        raise InvariantError(f"matrix has negative eigenvalue {evals[0]:.3e}")
    evals = np.clip(evals, 0.0, None)
    nz = evals[evals > 0.0]
    return float(-np.sum(nz * np.log2(nz)))


def shannon_entropy(p) -> float:
    p = np.asarray(p, dtype=float)
    nz = p[p > 0.0]
    return float(-np.sum(nz * np.log2(nz)))


def entropy_exchange(xi: np.ndarray, rho: np.ndarray) -> float:
    """Entropy exchange ``S(sqrt(rho_inf) xi sqrt(rho_inf))`` in bits.

    Equals the entropy of the reduced environment state after the dilation
    of :func:`environment_model` (both are reductions of one purification).
    """
    xi = validate_correlation(xi)
    rho = np.asarray(rho, dtype=complex)
    root = np.sqrt(np.clip(np.real(np.diag(rho)), 0.0, None))
    return von_neumann_entropy(root[:, None] * xi * root[None, :])


@dataclass(frozen=True)
class RandomUnitaryDecomp:
    """``E(rho) = sum_i p_i U_i rho U_i^+`` with commuting diagonal unitaries
    ``U_i = diag(exp(1j * phases[i]))``."""

    weights: tuple[float, ...]
    phases: tuple[np.ndarray, ...]

    def branch_unitary(self, i: int) -> np.ndarray:
        return np.diag(np.exp(1j * np.asarray(self.phases[i], dtype=float)))

    def reconstruct(self) -> np.ndarray:
        """``sum_i p_i v_i v_i^+`` with ``v_i = exp(1j * phases[i])``; must equal xi."""
        d = self.phases[0].size
        out = np.zeros((d, d), dtype=complex)
        for w, ph in zip(self.weights, self.phases):
            v = np.exp(1j * np.asarray(ph, dtype=float))
            out += w * np.outer(v, v.conj())
        return out

    def apply(self, rho: np.ndarray) -> np.ndarray:
        out = np.zeros_like(np.asarray(rho, dtype=complex))
        for i, w in enumerate(self.weights):
            u = self.branch_unitary(i)
            out += w * (u @ rho @ dag(u))
        return out


def _triangle_phases(mods: np.ndarray) -> np.ndarray:
    """Angles ``psi`` with ``sum_k mods_k e^{i psi_k} = 0`` (requires the
    triangle inequality on the moduli, guaranteed for equal-norm Gram
    relations)."""
    m0, m1, m2 = mods
    if m0 + m1 + m2 <= 0.0:
        return np.zeros(3)
    # degenerate sides reduce to a back-to-back pair
    if m2 <= 1e-15:
        return np.array([0.0, math.pi, 0.0])
    if m1 <= 1e-15:
        return np.array([0.0, 0.0, math.pi])
    if m0 <= 1e-15:
        return np.array([0.0, 0.0, math.pi])
    cos_alpha = (m2**2 - m0**2 - m1**2) / (2.0 * m0 * m1)
    alpha = math.acos(min(1.0, max(-1.0, cos_alpha)))
    resid = -(m0 + m1 * cmath.exp(1j * alpha))
    return np.array([0.0, alpha, cmath.phase(resid / m2)])


def _phase_vector_in_range(r: np.ndarray, tol: float) -> np.ndarray:
    """A unit-modulus vector inside the range of the PSD residual ``r``.

    Full rank: the entrywise phases of the principal eigenvector.  Rank 2
    (one kernel vector ``z``): phases solving ``sum_k conj(v_k) z_k = 0``,
    which exist because equal diagonal entries force the moduli of ``z`` to
    satisfy the triangle inequality.
    """
    d = r.shape[0]
    evals, evecs = np.linalg.eigh(r)
    kernel = [evecs[:, i] for i in range(d) if evals[i] <= tol * max(evals[-1], 1.0)]
    if not kernel:
        top = evecs[:, -1]
        v = np.where(np.abs(top) > 1e-14, top, 1.0)
        return v / np.abs(v)
    if len(kernel) >= d - 1:
        # rank-one residual: it is already proportional to a phase dyad
        top = evecs[:, -1]
        v = np.where(np.abs(top) > 1e-14, top, 1.0)
        return v / np.abs(v)
    z = kernel[0]
    psi = _triangle_phases(np.abs(z))
    zphase = np.where(np.abs(z) > 1e-14, z / np.where(np.abs(z) > 1e-14, np.abs(z), 1.0), 1.0)
    return zphase * np.exp(1j * psi)


def random_unitary_decomp(xi: np.ndarray, max_branches: int = 50) -> RandomUnitaryDecomp:
    """Random-unitary decomposition of a qubit or qutrit decoherence map.

    Qubits use the closed form: with ``c = xi_01`` the branches carry phases
    ``(0, -arg c)`` and ``(0, -arg c + pi)`` with weights ``(1 ± |c|)/2``.
    Qutrits peel extremal rank-one correlation matrices off the residual,
    each step reducing its rank; the result is always checked against the
    reconstruction invariant (to 1e-9) before being returned.
    """
    xi = validate_correlation(xi)
    d = xi.shape[0]
    if d == 1:
        return RandomUnitaryDecomp(weights=(1.0,), phases=(np.zeros(1),))
    if d == 2:
        c = complex(xi[0, 1])
        mod, arg = abs(c), cmath.phase(c)
        weights = ((1.0 + mod) / 2.0, (1.0 - mod) / 2.0)
        phases = (np.array([0.0, -arg]), np.array([0.0, -arg + math.pi]))
        keep = tuple(i for i, w in enumerate(weights) if w > 1e-15)
        decomp = RandomUnitaryDecomp(
            weights=tuple(weights[i] for i in keep),
            phases=tuple(phases[i] for i in keep),
        )
    elif d == 3:
        residual = np.array(xi, dtype=complex)
        weights, phases = [], []
        for _ in range(max_branches):
            diag = float(np.real(residual[0, 0]))
            if diag <= 1e-12:
                break
            v = _phase_vector_in_range(residual, tol=1e-11)
            # largest mu with residual - mu v v^+ still PSD: 1 / (v^+ R^+ v)
            evals, evecs = np.linalg.eigh(residual)
            good = evals > 1e-13 * max(evals[-1], 1.0)
            coeffs = dag(evecs[:, good]) @ v
            mu = 1.0 / float(np.real(np.sum(np.abs(coeffs) ** 2 / evals[good])))
            mu = min(mu, diag)
            weights.append(mu)
            phases.append(np.angle(v))
            residual = residual - mu * np.outer(v, v.conj())
            if np.max(np.abs(residual)) < 1e-9:
                break
        else:
            raise DecompositionError(
                f"qutrit peeling did not converge within {max_branches} branches"
            )
        decomp = RandomUnitaryDecomp(weights=tuple(weights), phases=tuple(phases))
    else:
        raise TheoremScopeError(
            f"random-unitary decompositions are guaranteed for d <= 3 only, got d = {d}"
        )
    defect = np.max(np.abs(decomp.reconstruct() - xi))
    if defect > 1e-9:
        raise DecompositionError(f"decomposition failed its reconstruction gate ({defect:.2e})")
    return decomp


@dataclass(frozen=True)
class FeedbackResult:
    recovered: np.ndarray
    bits_used: float


def invert_by_feedback(decomp: RandomUnitaryDecomp, rho: np.ndarray) -> FeedbackResult:
    """Undo a random-unitary decoherence map by monitoring the environment.

    Simulates the dilation ``V = sum_i sqrt(p_i) U_i (x) |i>``, measures the
    environment in the ``{|i>}`` basis, applies ``U_i^+`` on the conditional
    state and recombines; recovery is exact and consumes ``H(p)`` bits of
    classical information per run.
    """
    rho = np.asarray(rho, dtype=complex)
    d = rho.shape[0]
    branches = len(decomp.weights)
    v = np.zeros((d * branches, d), dtype=complex)
    for i, w in enumerate(decomp.weights):
        v[i::branches, :] += math.sqrt(w) * decomp.branch_unitary(i)
    joint = v @ rho @ dag(v)
    joint = joint.reshape(d, branches, d, branches)
    recovered = np.zeros((d, d), dtype=complex)
    for i in range(branches):
        conditional = joint[:, i, :, i]
        u = decomp.branch_unitary(i)
        recovered += dag(u) @ conditional @ u
    return FeedbackResult(recovered=recovered, bits_used=shannon_entropy(decomp.weights))


def phase_kick(lam: float) -> np.ndarray:
    """Correlation matrix ``[[1, e^-lam], [e^-lam, 1]]`` of the qubit
    random phase-kick model."""
    if lam < 0.0:
        raise DomainError(f"phase-kick strength must be >= 0, got {lam}")
    c = math.exp(-lam)
    return np.array([[1.0, c], [c, 1.0]], dtype=complex)


def phase_kick_info(lam: float) -> float:
    """Minimum classical information (bits) leaked per phase-kick step:
    the binary entropy of ``p = (1 - e^-lam)/2`` (1 bit as ``lam -> inf``,
    not the diverging differential entropy of the kick distribution)."""
    if lam < 0.0:
        raise DomainError(f"phase-kick strength must be >= 0, got {lam}")
    p = (1.0 - math.exp(-lam)) / 2.0
    return shannon_entropy([p, 1.0 - p])
