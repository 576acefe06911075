from fractions import Fraction

import numpy as np
import pytest

from telepsim.pauli_clifford import PAULI_UNITARIES, build_group_table
from telepsim.telep_relation import (
    CliffordRestriction,
    RelationOutcome,
    clifford_tuple_from_names,
    full_distribution,
    normal_form_trace,
    pauli_tuple_from_string,
    pauli_tuple_to_string,
    rotate,
    sample_ideal,
    sample_ideal_batch,
    verify,
    verify_restricted,
)

TABLE = build_group_table()
I_, X_, Z_, S_, H_ = (TABLE.names[k] for k in "IXZSH")


def oracle_abs_trace_sq(cliffords, paulis) -> Fraction:
    # independent route: exact 2x2 matrix products, no group table
    m = None
    for c, p in zip(cliffords, paulis):
        step = PAULI_UNITARIES[p] @ TABLE.reps[c]
        m = step if m is None else step @ m
    return m.abs_trace_sq()


def test_verify_examples():
    assert verify((I_,), (0,)) == RelationOutcome(True, 1, 0)
    assert verify((H_,), (2,)) == RelationOutcome(False, 0, 0)
    assert verify((H_,), (1,)).probability == Fraction(1, 2)


def test_verify_against_matrix_oracle_n1_exhaustive():
    for c in range(24):
        for p in range(4):
            out = verify((c,), (p,))
            assert out.probability == oracle_abs_trace_sq((c,), (p,)) / 4


def test_verify_against_matrix_oracle_sampled():
    rng = np.random.default_rng(17)
    for _ in range(400):
        n = int(rng.integers(1, 5))
        c = tuple(int(x) for x in rng.integers(0, 24, size=n))
        p = tuple(int(x) for x in rng.integers(0, 4, size=n))
        out = verify(c, p)
        assert out.probability == oracle_abs_trace_sq(c, p) / 4**n
        assert out.valid == (out.probability > 0)


def test_length_mismatch():
    with pytest.raises(ValueError):
        verify((I_, I_), (0,))


def test_full_distribution_examples():
    d = full_distribution((I_,))
    assert d == {(0,): Fraction(1), (1,): Fraction(0), (2,): Fraction(0), (3,): Fraction(0)}
    d = full_distribution((H_,))
    assert d[(1,)] == Fraction(1, 2) and d[(3,)] == Fraction(1, 2)
    assert d[(0,)] == 0 and d[(2,)] == 0


def test_full_distribution_normalization_random():
    rng = np.random.default_rng(23)
    for n in (1, 2, 3):
        for _ in range(100):
            c = tuple(int(x) for x in rng.integers(0, 24, size=n))
            d = full_distribution(c)
            assert sum(d.values()) == 1
            assert len(d) == 4**n


def test_full_distribution_matches_verify():
    rng = np.random.default_rng(29)
    c = tuple(int(x) for x in rng.integers(0, 24, size=3))
    d = full_distribution(c)
    for p, prob in d.items():
        assert verify(c, p).probability == prob


def test_enumeration_guard():
    with pytest.raises(ValueError):
        full_distribution((I_,) * 9)


def test_sampler_every_draw_valid():
    rng = np.random.default_rng(31)
    for n in (1, 2, 5, 16):
        c = tuple(int(x) for x in rng.integers(0, 24, size=n))
        batch = sample_ideal_batch(c, rng, 20_000)
        for row in batch[:: max(1, len(batch) // 512)]:
            assert verify(c, tuple(int(x) for x in row)).valid
        # full batch via vectorized fold
        m = np.full(len(batch), I_, dtype=np.int8)
        for j in range(n):
            m = TABLE.mult[TABLE.pauli_class[batch[:, j]], TABLE.mult[c[j], m]]
        assert not TABLE.traceless[m].any()


def test_sampler_n1_identity_always_identity():
    rng = np.random.default_rng(37)
    for _ in range(100):
        assert sample_ideal((I_,), rng) == (0,)


def test_single_and_batch_same_distribution():
    c = (H_, S_)
    d = full_distribution(c)
    rng = np.random.default_rng(41)
    n_draws = 60_000
    counts = {}
    batch = sample_ideal_batch(c, rng, n_draws)
    for row in batch:
        key = tuple(int(x) for x in row)
        counts[key] = counts.get(key, 0) + 1
    tv = sum(abs(counts.get(k, 0) / n_draws - float(p)) for k, p in d.items()) / 2
    assert tv < 0.02
    rng2 = np.random.default_rng(43)
    singles = {}
    for _ in range(20_000):
        key = sample_ideal(c, rng2)
        singles[key] = singles.get(key, 0) + 1
    tv2 = sum(abs(singles.get(k, 0) / 20_000 - float(p)) for k, p in d.items()) / 2
    assert tv2 < 0.03


def test_prefix_marginal_uniform():
    from scipy import stats

    rng = np.random.default_rng(47)
    c = tuple(int(x) for x in rng.integers(0, 24, size=3))
    batch = sample_ideal_batch(c, rng, 160_000)
    pair = batch[:, 0].astype(int) * 4 + batch[:, 1].astype(int)
    observed = np.bincount(pair, minlength=16)
    res = stats.chisquare(observed)
    assert res.pvalue > 0.01


def test_normal_form_agrees_with_verify():
    rng = np.random.default_rng(53)
    for _ in range(2_000):
        n = int(rng.integers(2, 8))
        c = tuple(int(x) for x in rng.integers(0, 24, size=n))
        p = tuple(int(x) for x in rng.integers(0, 4, size=n))
        j = int(rng.integers(0, n - 1))
        k = int(rng.integers(j + 1, n))
        assert normal_form_trace(c, p, j, k) == verify(c, p)


def test_normal_form_n4_all_pairs():
    rng = np.random.default_rng(59)
    for _ in range(200):
        c = tuple(int(x) for x in rng.integers(0, 24, size=4))
        p = tuple(int(x) for x in rng.integers(0, 4, size=4))
        want = verify(c, p)
        for j in range(3):
            for k in range(j + 1, 4):
                assert normal_form_trace(c, p, j, k) == want


def test_normal_form_trivial_example():
    assert normal_form_trace((I_, I_), (1, 1), 0, 1).valid


def test_normal_form_index_errors():
    with pytest.raises(ValueError):
        normal_form_trace((I_, I_), (0, 0), 1, 1)
    with pytest.raises(ValueError):
        normal_form_trace((I_, I_), (0, 0), 0, 2)


def test_cyclic_invariance():
    rng = np.random.default_rng(61)
    for _ in range(500):
        n = int(rng.integers(1, 7))
        c = tuple(int(x) for x in rng.integers(0, 24, size=n))
        p = tuple(int(x) for x in rng.integers(0, 4, size=n))
        r = int(rng.integers(0, n))
        assert verify(rotate(c, r), rotate(p, r)) == verify(c, p)


def test_restriction_all_fixed_and_all_active():
    xi_fixed = CliffordRestriction((H_, S_))
    assert xi_fixed.active_list == ()
    assert verify_restricted(xi_fixed, (), (1, 3)) == verify((H_, S_), (1, 3))
    xi_active = CliffordRestriction((None, None))
    assert verify_restricted(xi_active, (H_, S_), (1, 3)) == verify((H_, S_), (1, 3))


def test_restriction_splice_order():
    xi = CliffordRestriction((None, H_, None))
    assert xi.splice((S_, X_)) == (S_, H_, X_)
    assert verify_restricted(xi, (S_, X_), (0, 1, 2)) == verify((S_, H_, X_), (0, 1, 2))


def test_restriction_arity_and_value_errors():
    xi = CliffordRestriction((None, H_))
    with pytest.raises(ValueError):
        verify_restricted(xi, (S_, X_), (0, 0))
    with pytest.raises(ValueError):
        CliffordRestriction((99,))


def test_string_helpers():
    assert pauli_tuple_from_string("IXYZ") == (0, 1, 2, 3)
    assert pauli_tuple_to_string((0, 1, 2, 3)) == "IXYZ"
    with pytest.raises(ValueError):
        pauli_tuple_from_string("Q")
    assert clifford_tuple_from_names("H,S,I") == (H_, S_, I_)
    assert clifford_tuple_from_names("HH") == (I_,)
