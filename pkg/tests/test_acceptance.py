"""Acceptance suite: one test per release criterion, at the stated tolerance.

Run with ``pytest tests/test_acceptance.py -v``; the terminal summary prints
one PASS/FAIL line per criterion.
"""

import math
import time
from fractions import Fraction

import numpy as np

from qdevices import (
    Povm,
    apply_choi,
    canonical_kraus,
    cg_multiplicity,
    cg_projector,
    choi_from_kraus,
    dag,
    entropy_exchange,
    invert_by_feedback,
    is_postprocessing_clean,
    many_copies_reconstruct,
    partial_trace,
    phase_kick,
    phase_kick_info,
    postprocess,
    postprocessing_reachable,
    r_star,
    random_unitary_decomp,
    repeatability_check,
    shannon_entropy,
    stinespring,
    trace_distance,
    truncated_repeatable,
    unitary_dilation,
    unot_choi,
    unot_fidelity,
)
from qdevices.decoherence import RandomUnitaryDecomp
from qdevices.devices import (
    CloneSpec,
    cloning_unitary,
    equatorial_seed,
    nsb_uniform,
    nsb_unique,
    pclone_fidelity,
    pclone_isometry,
    phase_not_choi,
    phase_not_fidelity,
    uclone_apply,
    uclone_fidelity,
)
from qdevices.superbroadcast import oracle_compare

from helpers import haar_state, random_density, random_povm, random_tp_kraus


def pure_power(psi, m):
    rho = np.outer(psi, psi.conj())
    out = rho
    for _ in range(m - 1):
        out = np.kron(out, rho)
    return out


def test_criterion_01_universal_cloning_fidelity():
    start = time.perf_counter()
    rng = np.random.default_rng(1001)
    for d in (2, 3):
        for n, m in ((1, 2), (1, 3), (2, 3)):
            spec = CloneSpec(d, n, m)
            expected = float(uclone_fidelity(spec))
            for _ in range(3):
                psi = haar_state(d, rng)
                out = uclone_apply(spec, psi)
                measured = float(np.real(np.trace(pure_power(psi, m) @ out)))
                assert abs(measured - expected) < 1e-10
    assert time.perf_counter() - start < 5.0


def test_criterion_02_not_gate_fidelities():
    rng = np.random.default_rng(1002)
    for d in range(2, 7):
        # universal: 2/(d+1), measured through the Choi action
        r = unot_choi(d)
        psi = haar_state(d, rng)
        out = apply_choi(r, np.outer(psi, psi.conj()))
        fid = float(np.real(np.trace(np.outer(psi.conj(), psi) @ out)))
        assert abs(fid - float(unot_fidelity(d))) < 1e-12
        # phase-covariant: 2/d on the equatorial orbit
        b = nsb_unique(d) if d <= 3 else nsb_uniform(d)
        seed = equatorial_seed(d)
        out = apply_choi(phase_not_choi(b), np.outer(seed, seed.conj()))
        fid = float(np.real(np.trace(np.outer(seed.conj(), seed) @ out)))
        assert abs(fid - float(phase_not_fidelity(d))) < 1e-12
    assert float(phase_not_fidelity(2)) == 1.0


def test_criterion_03_phase_cloning_single_site_fidelity():
    for d, m, expected in ((2, 3, Fraction(5, 6)), (3, 4, Fraction(2, 3))):
        spec = CloneSpec(d, 1, m)
        assert pclone_fidelity(spec) == expected
        v = pclone_isometry(spec)
        psi = equatorial_seed(d)
        out = v @ np.outer(psi, psi.conj()) @ dag(v)
        site = partial_trace(out, (d,) * m, (0,))
        measured = float(np.real(psi.conj() @ site @ psi))
        assert abs(measured - float(expected)) < 1e-10


def test_criterion_04_superbroadcasting_thresholds():
    start = time.perf_counter()
    # universal flavor: none before N = 4
    for m in (4, 5, 8):
        assert r_star(3, m, "universal") is None
    for m in (5, 6, 7):
        assert r_star(4, m, "universal") is not None
    for m in (8, 9, 12):
        assert r_star(4, m, "universal") is None
    for m in (6, 13, 21):
        assert r_star(5, m, "universal") is not None
    for m in (22, 30, math.inf):
        assert r_star(5, m, "universal") is None
    for n in (6, 9, 14, 20, 25):
        for m in (n + 1, 2 * n, math.inf):
            assert r_star(n, m, "universal") is not None
    # phase flavor first emerges at N = 3
    for m in (3, 4, 5, 6, math.inf):
        assert r_star(2, m, "phase") is None
    assert any(r_star(3, m, "phase") is not None for m in (4, 5, 6))
    for n in (4, 12, 25):
        assert r_star(n, n + 1, "phase") is not None
    assert time.perf_counter() - start < 30.0


def test_criterion_05_power_law_trends():
    ns = np.arange(10, 101, 10)
    cases = [
        ("universal", lambda n: n + 1, -2.0),
        ("universal", lambda n: math.inf, -1.0),
        ("phase", lambda n: n + 1, -2.0),
        ("phase", lambda n: math.inf, -1.0),
    ]
    for flavor, m_of, expected_slope in cases:
        gaps = []
        for n in ns:
            rs = r_star(int(n), m_of(int(n)), flavor)
            assert rs is not None
            gaps.append(1.0 - rs)
        slope = float(np.polyfit(np.log(ns), np.log(gaps), 1)[0])
        assert abs(slope - expected_slope) < 0.2, (flavor, m_of(10), slope)


def test_criterion_06_superbroadcast_choi_oracle():
    for n, m in ((1, 2), (2, 3), (2, 4)):
        for r in (0.2, 0.5, 0.9):
            assert oracle_compare(n, m, r).diff < 1e-8


def test_criterion_07_qubit_cloning_network():
    u, phi = cloning_unitary(2)
    expected = np.zeros((8, 8))
    for row, col in [(0, 0), (1, 5), (2, 6), (3, 7), (4, 3), (5, 2), (6, 1), (7, 4)]:
        expected[row, col] = 1.0
    assert np.array_equal(u, expected.astype(complex))  # exact 0/1 match
    np.testing.assert_allclose(phi, np.array([2, 1, 1, 0]) / np.sqrt(6), atol=1e-12)


def test_criterion_08_channel_representation_equivalence():
    rng = np.random.default_rng(1008)
    for _ in range(100):
        d = int(rng.integers(2, 4))
        k = random_tp_kraus(d, d, int(rng.integers(1, 5)), rng)
        rho = random_density(d, rng)
        reference = k.apply(rho)
        choi = choi_from_kraus(k)
        v = stinespring(k)
        routes = (
            apply_choi(choi, rho),
            v.apply(rho),
            unitary_dilation(v).apply(rho),
        )
        for out in routes:
            assert np.max(np.abs(out - reference)) < 1e-10
        rebuilt = choi_from_kraus(canonical_kraus(choi))
        assert np.max(np.abs(rebuilt.mat - choi.mat)) < 1e-10


def test_criterion_09_decoherence():
    # phase-kick spectrum
    for lam in (0.25, 1.0, 5.0):
        xi = phase_kick(lam)
        c = math.exp(-lam)
        evals = np.linalg.eigvalsh(xi / 2)
        assert abs(evals[0] - (1 - c) / 2) < 1e-12
        assert abs(evals[1] - (1 + c) / 2) < 1e-12
    # leaked information: binary entropy of (1 - e^-lam)/2, via the
    # independent entropy-exchange route, and the 1-bit limit
    p5 = (1 - math.exp(-5.0)) / 2
    closed_form = -p5 * math.log2(p5) - (1 - p5) * math.log2(1 - p5)
    assert abs(phase_kick_info(5.0) - closed_form) < 1e-6
    assert abs(phase_kick_info(5.0) - entropy_exchange(phase_kick(5.0), np.eye(2) / 2)) < 1e-9
    assert abs(phase_kick_info(30.0) - 1.0) < 1e-6
    # exact recovery on 50 random qubit states
    rng = np.random.default_rng(1009)
    lam = 0.8
    xi = phase_kick(lam)
    decomp = random_unitary_decomp(xi)
    for _ in range(50):
        rho = random_density(2, rng)
        res = invert_by_feedback(decomp, rho)
        assert trace_distance(res.recovered, rho) < 1e-12
    # any alternative decomposition needs at least S_ex(I/2) bits
    floor = entropy_exchange(xi, np.eye(2) / 2)
    for _ in range(20):
        weights, phases = list(decomp.weights), list(decomp.phases)
        i = int(rng.integers(len(weights)))
        frac = rng.uniform(0.05, 0.95)
        w = weights.pop(i)
        ph = phases.pop(i)
        weights += [w * frac, w * (1 - frac)]
        phases += [ph, ph]
        alt = RandomUnitaryDecomp(weights=tuple(weights), phases=tuple(phases))
        assert np.max(np.abs(alt.reconstruct() - xi)) < 1e-10
        assert shannon_entropy(alt.weights) >= floor - 1e-12


def test_criterion_10_povm_suite():
    rng = np.random.default_rng(1010)
    # 50 forward-constructed reachability instances with verified witnesses
    for _ in range(50):
        d = int(rng.integers(2, 4))
        n_p = int(rng.integers(2, 5))
        n_q = int(rng.integers(2, 5))
        p = random_povm(d, n_p, rng)
        s = rng.random((n_q, n_p))
        s /= s.sum(axis=0, keepdims=True)
        q = postprocess(p, s)
        res = postprocessing_reachable(p, q)
        assert res.reachable
        witness = np.asarray(res.witness)
        assert np.min(witness) >= -1e-9
        np.testing.assert_allclose(witness.sum(axis=0), 1.0, atol=1e-8)
        rebuilt = postprocess(p, witness)
        for a, b in zip(rebuilt.effects, q.effects):
            assert np.max(np.abs(a - b)) < 1e-8
    # span counterexample is infeasible
    trivial = Povm(effects=(np.eye(2, dtype=complex) / 2, np.eye(2, dtype=complex) / 2))
    basis = Povm(effects=(np.diag([1.0, 0j]), np.diag([0j, 1.0])))
    assert not postprocessing_reachable(trivial, basis).reachable
    # rank-one cleanness classifies the redundant-outcome family correctly
    d = 4
    effs = [np.zeros((d, d), dtype=complex) for _ in range(d + 1)]
    effs[0][0, 0] = 0.5
    effs[1][0, 0] = 0.5
    for i in range(1, d):
        effs[i + 1][i, i] = 1.0
    redundant = Povm(effects=tuple(effs))
    assert is_postprocessing_clean(redundant)
    assert not is_postprocessing_clean(trivial)
    # truncated repeatable instrument: exactly deterministic repetition,
    # no invariant state on the safe block
    tr = truncated_repeatable(12, 0.3)
    psi = np.zeros(12)
    psi[0] = 1.0
    np.testing.assert_array_equal(repeatability_check(tr, psi), np.eye(2))
    for _ in range(10):
        vec = np.zeros(12, dtype=complex)
        vec[:8] = rng.normal(size=8) + 1j * rng.normal(size=8)
        np.testing.assert_array_equal(repeatability_check(tr, vec), np.eye(2))
    for m in (tr.m0, tr.m1):
        evals = np.linalg.eigvals(m[:10, :10])
        assert np.max(np.abs(evals)) < 1e-10


def test_criterion_11_symmetry_identities():
    for n in range(1, 13):
        total = sum(
            (tl + 1) * cg_multiplicity(n, Fraction(tl, 2))
            for tl in range(n % 2, n + 1, 2)
        )
        assert total == 2**n
    for n in (1, 2, 3):
        for r in (0.0, 0.4, 1.0):
            rho = np.diag([(1 + r) / 2, (1 - r) / 2]).astype(complex)
            expected = rho
            for _ in range(n - 1):
                expected = np.kron(expected, rho)
            assert np.max(np.abs(many_copies_reconstruct(r, n) - expected)) < 1e-10
    for tj in range(1, 5):
        for tl in range(1, tj + 1):
            j, l = Fraction(tj, 2), Fraction(tl, 2)
            dim = (tj + 1) * (tl + 1)
            total = sum(
                cg_projector(j, l, Fraction(tJ, 2))
                for tJ in range(tj - tl, tj + tl + 1, 2)
            )
            assert np.max(np.abs(total - np.eye(dim))) < 1e-10
