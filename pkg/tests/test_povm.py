import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from qdevices import (
    DomainError,
    Povm,
    ShapeError,
    TheoremScopeError,
    effects_equivalent,
    is_observable,
    is_postprocessing_clean,
    is_preprocessing_clean,
    postprocess,
    postprocessing_reachable,
    povm_validate,
    range_sample,
    repeatability_check,
    repeatable_run,
    truncated_repeatable,
)

from helpers import random_density, random_povm, random_rank_one_povm


def basis_projectors(d):
    effs = []
    for i in range(d):
        e = np.zeros((d, d), dtype=complex)
        e[i, i] = 1.0
        effs.append(e)
    return Povm(effects=tuple(effs))


def redundant_rank_one_povm(d=4):
    """Doubled first outcome: {1/2 |0><0|, 1/2 |0><0|, |1><1|, ..., |d-1><d-1|}."""
    effs = [np.zeros((d, d), dtype=complex) for _ in range(d + 1)]
    effs[0][0, 0] = 0.5
    effs[1][0, 0] = 0.5
    for i in range(1, d):
        effs[i + 1][i, i] = 1.0
    return Povm(effects=tuple(effs))


def trivial_two_outcome(d=2):
    return Povm(effects=(np.eye(d, dtype=complex) / 2, np.eye(d, dtype=complex) / 2))


def random_stochastic(n_rows, n_cols, rng):
    s = rng.random((n_rows, n_cols))
    return s / s.sum(axis=0, keepdims=True)


# ---------------------------------------------------------------------------
# validation
# ---------------------------------------------------------------------------

def test_basis_projectors_are_valid_observable():
    p = basis_projectors(3)
    diag = povm_validate(p)
    assert diag.valid and diag.sum_defect < 1e-14
    assert is_observable(p)


def test_redundant_rank_one_family():
    p = redundant_rank_one_povm()
    assert povm_validate(p).valid
    assert is_postprocessing_clean(p)
    assert not is_observable(p)
    # clean under preprocessing despite the redundant outcome
    assert is_preprocessing_clean(p)


def test_single_outcome_identity_povm():
    p = Povm(effects=(np.eye(3, dtype=complex),))
    assert povm_validate(p).valid


def test_validate_reports_defects():
    p = Povm(effects=(np.diag([0.5, -0.1]).astype(complex), np.diag([0.5, 1.1]).astype(complex)))
    diag = povm_validate(p)
    assert not diag.valid
    assert diag.min_eigenvalues[0] < -1e-6


# ---------------------------------------------------------------------------
# postprocessing
# ---------------------------------------------------------------------------

def test_postprocess_identity():
    p = basis_projectors(3)
    q = postprocess(p, np.eye(3))
    for a, b in zip(q.effects, p.effects):
        np.testing.assert_array_equal(a, b)


def test_postprocess_identification_merges_outcomes():
    p = basis_projectors(3)
    s = np.array([[1.0, 1.0, 0.0], [0.0, 0.0, 1.0]])
    q = postprocess(p, s)
    np.testing.assert_allclose(q.effects[0], np.diag([1.0, 1.0, 0.0]), atol=1e-15)
    np.testing.assert_allclose(q.effects[1], np.diag([0.0, 0.0, 1.0]), atol=1e-15)


def test_postprocess_permutation_relabels():
    p = basis_projectors(3)
    pi = np.array([[0.0, 1, 0], [0, 0, 1], [1, 0, 0]])
    q = postprocess(p, pi)
    np.testing.assert_array_equal(q.effects[0], p.effects[1])
    np.testing.assert_array_equal(q.effects[2], p.effects[0])


@settings(max_examples=25, deadline=None)
@given(seed=st.integers(0, 2**32 - 1))
def test_postprocess_preserves_validity(seed):
    rng = np.random.default_rng(seed)
    p = random_povm(2, 3, rng)
    q = postprocess(p, random_stochastic(4, 3, rng))
    assert povm_validate(q).valid


# ---------------------------------------------------------------------------
# reachability decision
# ---------------------------------------------------------------------------

def test_reachability_of_forward_constructed_instances():
    rng = np.random.default_rng(61)
    for _ in range(20):
        p = random_povm(2, 3, rng)
        q = postprocess(p, random_stochastic(4, 3, rng))
        res = postprocessing_reachable(p, q)
        assert res.reachable
        rebuilt = postprocess(p, res.witness)
        for a, b in zip(rebuilt.effects, q.effects):
            np.testing.assert_allclose(a, b, atol=1e-8)


def test_coarse_graining_is_reachable():
    p = basis_projectors(3)
    q = postprocess(p, np.array([[1.0, 1.0, 0.0], [0.0, 0.0, 1.0]]))
    assert postprocessing_reachable(p, q).reachable


def test_span_counterexample_is_infeasible_with_certificate():
    p = trivial_two_outcome(2)
    q = basis_projectors(2)
    res = postprocessing_reachable(p, q)
    assert not res.reachable
    assert res.certificate is not None


def test_reachability_is_reflexive_and_transitive():
    rng = np.random.default_rng(62)
    p = random_povm(2, 3, rng)
    assert postprocessing_reachable(p, p).reachable
    s1 = random_stochastic(4, 3, rng)
    s2 = random_stochastic(3, 4, rng)
    q = postprocess(p, s1)
    r = postprocess(q, s2)
    # composing witnesses stays column-stochastic and reaches the composition
    composed = s2 @ s1
    np.testing.assert_allclose(composed.sum(axis=0), 1.0, atol=1e-12)
    rebuilt = postprocess(p, composed)
    for a, b in zip(rebuilt.effects, r.effects):
        np.testing.assert_allclose(a, b, atol=1e-12)
    assert postprocessing_reachable(p, r).reachable


def test_clean_povms_are_two_way_reachable_on_rank_one_pairs():
    # for rank-one (clean) targets, reachability backwards implies forwards
    rng = np.random.default_rng(63)
    base = random_rank_one_povm(2, 3, rng)
    # permuted partner
    perm = postprocess(base, np.array([[0.0, 1, 0], [1, 0, 0], [0, 0, 1]]))
    assert postprocessing_reachable(base, perm).reachable
    assert postprocessing_reachable(perm, base).reachable
    # split-versus-merged partner (both rank-one)
    split = Povm(effects=(base.effects[0] / 2, base.effects[0] / 2) + base.effects[1:])
    assert postprocessing_reachable(split, base).reachable
    assert postprocessing_reachable(base, split).reachable


def test_reachability_dimension_mismatch():
    with pytest.raises(ShapeError):
        postprocessing_reachable(basis_projectors(2), basis_projectors(3))


# ---------------------------------------------------------------------------
# cleanness predicates
# ---------------------------------------------------------------------------

def test_postprocessing_clean_iff_rank_one():
    assert is_postprocessing_clean(basis_projectors(3))
    assert not is_postprocessing_clean(trivial_two_outcome(2))


def test_preprocessing_clean_small_outcome_count():
    assert is_preprocessing_clean(basis_projectors(2))
    assert not is_preprocessing_clean(trivial_two_outcome(2))


def test_preprocessing_clean_out_of_scope():
    # more outcomes than dimensions and not rank-one: undecided by theorems
    rng = np.random.default_rng(64)
    p = random_povm(2, 4, rng)
    assert not is_postprocessing_clean(p)
    with pytest.raises(TheoremScopeError):
        is_preprocessing_clean(p)


def test_effects_equivalence_by_spectral_width():
    p = Povm(effects=(np.diag([0.9, 0.2, 0.1]).astype(complex),
                      np.eye(3) - np.diag([0.9, 0.2, 0.1])))
    q = Povm(effects=(np.diag([0.9, 0.7, 0.1]).astype(complex),
                      np.eye(3) - np.diag([0.9, 0.7, 0.1])))
    assert effects_equivalent(p, q)
    assert effects_equivalent(p, p)
    r = Povm(effects=(np.diag([0.8, 0.2, 0.1]).astype(complex),
                      np.eye(3) - np.diag([0.8, 0.2, 0.1])))
    assert not effects_equivalent(p, r)


def test_qubit_effects_equivalence_fixes_spectrum():
    # for d = 2 equal spectral width pins the whole spectrum, whence
    # equivalent effects are unitarily equivalent
    rng = np.random.default_rng(65)
    h = rng.normal(size=(2, 2)) + 1j * rng.normal(size=(2, 2))
    u = np.linalg.qr(h)[0]
    e = np.diag([0.8, 0.3]).astype(complex)
    p = Povm(effects=(e, np.eye(2) - e))
    q = Povm(effects=(u @ e @ u.conj().T, np.eye(2) - u @ e @ u.conj().T))
    assert effects_equivalent(p, q)
    np.testing.assert_allclose(
        np.linalg.eigvalsh(p.effects[0]), np.linalg.eigvalsh(q.effects[0]), atol=1e-12
    )


def test_observable_of_spectral_projectors():
    rng = np.random.default_rng(66)
    h = rng.normal(size=(3, 3))
    h = h + h.T
    _, vecs = np.linalg.eigh(h)
    p = Povm(effects=tuple(np.outer(vecs[:, i], vecs[:, i].conj()) for i in range(3)))
    assert is_observable(p)
    assert is_preprocessing_clean(p)


# ---------------------------------------------------------------------------
# range sampling
# ---------------------------------------------------------------------------

def test_range_sample_distributions():
    rng = np.random.default_rng(67)
    p = basis_projectors(3)
    probs = range_sample(p, [np.eye(3) / 3, random_density(3, rng)])
    for vec in probs:
        assert abs(vec.sum() - 1.0) < 1e-12
        assert np.min(vec) >= -1e-12
    np.testing.assert_allclose(probs[0], np.full(3, 1 / 3), atol=1e-12)


def test_range_sample_on_basis_states_gives_deltas():
    p = basis_projectors(3)
    states = [np.diag([1.0, 0, 0]), np.diag([0, 1.0, 0])]
    probs = range_sample(p, states)
    np.testing.assert_allclose(probs[0], [1, 0, 0], atol=1e-14)
    np.testing.assert_allclose(probs[1], [0, 1, 0], atol=1e-14)


def test_distinct_povms_have_distinct_sampled_ranges():
    rng = np.random.default_rng(68)
    states = [random_density(2, rng) for _ in range(6)]
    p = random_povm(2, 3, rng)
    q = random_povm(2, 3, rng)
    pr = np.array(range_sample(p, states))
    qr = np.array(range_sample(q, states))
    assert np.max(np.abs(pr - qr)) > 1e-6


# ---------------------------------------------------------------------------
# truncated repeatable instrument
# ---------------------------------------------------------------------------

def test_truncated_repeatable_structure():
    tr = truncated_repeatable(12, 0.3)
    safe = slice(0, 10)
    np.testing.assert_allclose(
        (tr.m0.conj().T @ tr.m0)[safe, safe], tr.p0[safe, safe], atol=1e-14
    )
    np.testing.assert_allclose(
        (tr.m1.conj().T @ tr.m1)[safe, safe], tr.p1[safe, safe], atol=1e-14
    )
    np.testing.assert_allclose((tr.p0 + tr.p1), np.eye(12), atol=1e-14)


def test_truncated_repeatable_rejects_bad_parameters():
    with pytest.raises(DomainError):
        truncated_repeatable(5, 0.3)
    with pytest.raises(DomainError):
        truncated_repeatable(12, 1.5)


def test_povm_is_nonorthogonal_for_intermediate_weight():
    tr = truncated_repeatable(10, 0.4)
    assert np.max(np.abs(tr.p0 @ tr.p1)) > 1e-12


def test_repetition_probabilities_are_exactly_deterministic():
    tr = truncated_repeatable(12, 0.3)
    psi = np.zeros(12)
    psi[0] = 1.0
    np.testing.assert_array_equal(repeatability_check(tr, psi), np.eye(2))
    rng = np.random.default_rng(69)
    for _ in range(10):
        vec = np.zeros(12, dtype=complex)
        vec[:8] = rng.normal(size=8) + 1j * rng.normal(size=8)
        np.testing.assert_array_equal(repeatability_check(tr, vec), np.eye(2))


def test_repeatability_check_rejects_unsafe_support():
    tr = truncated_repeatable(12, 0.3)
    psi = np.zeros(12)
    psi[9] = 1.0  # within one-shot safety but not two-shot
    with pytest.raises(DomainError):
        repeatability_check(tr, psi)


def test_instrument_admits_no_invariant_state():
    tr = truncated_repeatable(14, 0.3)
    safe = tr.levels - 2
    for m in (tr.m0, tr.m1):
        evals = np.linalg.eigvals(m[:safe, :safe])
        assert np.max(np.abs(evals)) < 1e-10  # nilpotent: no nonzero eigenvector
    rng = np.random.default_rng(70)
    for _ in range(20):
        vec = np.zeros(14, dtype=complex)
        vec[:9] = rng.normal(size=9) + 1j * rng.normal(size=9)
        vec /= np.linalg.norm(vec)
        for m in (tr.m0, tr.m1):
            out = m @ vec
            norm = np.linalg.norm(out)
            if norm > 1e-6:
                overlap = abs(np.vdot(vec, out)) / norm
                assert overlap < 1.0 - 1e-9


def test_repeatable_run_repeats_first_outcome():
    tr = truncated_repeatable(12, 0.3)
    psi = np.zeros(12)
    psi[0] = 1.0
    records = repeatable_run(tr, psi, 5, np.random.default_rng(3))
    assert records[0]["p0"] == pytest.approx(0.3)
    first = records[0]["outcome"]
    for rec in records[1:]:
        assert rec["outcome"] == first
        assert rec["p0" if first == 0 else "p1"] == pytest.approx(1.0)
