"""Shared random generators for the test suite (seeded per test)."""

import numpy as np
import scipy.linalg

from qdevices import KrausSet, Povm


def haar_state(d, rng):
    v = rng.normal(size=d) + 1j * rng.normal(size=d)
    return v / np.linalg.norm(v)


def random_density(d, rng):
    a = rng.normal(size=(d, d)) + 1j * rng.normal(size=(d, d))
    rho = a @ a.conj().T
    return rho / np.trace(rho)


def random_matrix(d, rng, rows=None):
    rows = d if rows is None else rows
    return rng.normal(size=(rows, d)) + 1j * rng.normal(size=(rows, d))


def random_tp_kraus(d_in, d_out, n_ops, rng):
    """A random trace-preserving Kraus set (normalized by S^-1/2)."""
    raw = [random_matrix(d_in, rng, rows=d_out) for _ in range(n_ops)]
    total = sum(e.conj().T @ e for e in raw)
    w = scipy.linalg.sqrtm(np.linalg.inv(total))
    return KrausSet(operators=tuple(e @ w for e in raw))


def random_povm(d, n_outcomes, rng):
    mats = []
    for _ in range(n_outcomes):
        a = random_matrix(d, rng)
        mats.append(a @ a.conj().T)
    total = sum(mats)
    evals, evecs = np.linalg.eigh(total)
    w = evecs @ np.diag(evals**-0.5) @ evecs.conj().T
    return Povm(effects=tuple(w @ m @ w for m in mats))


def random_rank_one_povm(d, n_outcomes, rng):
    vecs = [haar_state(d, rng) for _ in range(n_outcomes)]
    mats = [np.outer(v, v.conj()) * rng.uniform(0.3, 1.0) for v in vecs]
    total = sum(mats)
    evals, evecs = np.linalg.eigh(total)
    w = evecs @ np.diag(evals**-0.5) @ evecs.conj().T
    return Povm(effects=tuple(w @ m @ w for m in mats))


def random_correlation(d, rng, n_branches=4):
    """Convex mixture of phase dyads: always a valid correlation matrix."""
    out = np.zeros((d, d), dtype=complex)
    for w in rng.dirichlet(np.ones(n_branches)):
        v = np.exp(1j * rng.uniform(0, 2 * np.pi, size=d))
        out += w * np.outer(v, v.conj())
    return out
