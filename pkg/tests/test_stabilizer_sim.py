"""Tableau simulator tests against a dense state-vector oracle."""

import numpy as np
import pytest
from scipy import stats

from telepsim.pauli_clifford import build_group_table, pauli_mul
from telepsim.stabilizer_sim import (
    LayeredCircuit,
    PauliFrame,
    Tableau,
    batch_records,
    build_reference_trace,
    clifford_word,
    frame_apply_layer,
    noisy_run,
    record_to_paulis,
    run_circuit_record,
    run_game_circuit,
    run_telep_batch,
    run_telep_circuit,
    telep_ring_circuit,
)
from telepsim.telep_relation import full_distribution, verify
from telepsim.nonlocal_games import game_distribution

from _dense import record_probs

TABLE = build_group_table()


class _NoRandom:
    """RNG stand-in that fails if any randomness is consumed."""

    def integers(self, *a, **k):
        raise AssertionError("deterministic path consumed randomness")


def random_circuit(rng, n=None, depth=None):
    n = int(rng.integers(2, 6)) if n is None else n
    depth = int(rng.integers(1, 6)) if depth is None else depth
    layers = []
    for _ in range(depth):
        free = list(rng.permutation(n))
        layer = []
        while free:
            kind = rng.integers(0, 8)
            if kind < 4 or len(free) == 1:
                q = free.pop()
                name = ["H", "S", "CLIFF", "X", "Y", "Z"][int(rng.integers(0, 6))]
                if name == "CLIFF":
                    layer.append(("CLIFF", int(q), int(rng.integers(0, 24))))
                else:
                    layer.append((name, int(q)))
            else:
                a, b = free.pop(), free.pop()
                name = "CNOT" if rng.integers(0, 2) else "CZ"
                layer.append((name, int(a), int(b)))
        layers.append(layer)
    order = [int(q) for q in rng.permutation(n)]
    return LayeredCircuit(n, layers, order)


def chisq_pvalue(counts: dict, probs: dict, total: int) -> float:
    """Pooled chi-square of empirical counts against exact probabilities."""
    keys = sorted(set(probs) | set(counts))
    obs, exp = [], []
    pool_o = pool_e = 0.0
    for k in keys:
        e = probs.get(k, 0.0) * total
        o = counts.get(k, 0)
        if e < 5.0:
            pool_o += o
            pool_e += e
            continue
        obs.append(o)
        exp.append(e)
    if pool_e > 0:
        obs.append(pool_o)
        exp.append(pool_e)
    if len(obs) < 2:
        return 1.0
    exp = np.array(exp) * (sum(obs) / sum(exp))
    return float(stats.chisquare(obs, exp).pvalue)


def batch_counts(circuit, trials, rng, init_frames=None):
    trace = build_reference_trace(circuit, rng)
    fx = np.zeros((trials, circuit.n_qubits), dtype=np.uint8)
    fz = np.zeros((trials, circuit.n_qubits), dtype=np.uint8)
    if init_frames is not None:
        fx ^= init_frames[0]
        fz ^= init_frames[1]
    rec = batch_records(trace, fx, fz, rng)
    counts = {}
    for row in map(tuple, rec.tolist()):
        counts[row] = counts.get(row, 0) + 1
    return counts


# ---------------------------------------------------------------------------
# tableau basics


def test_fresh_state_measures_zero():
    tab = Tableau(5)
    assert [tab.measure_z(q, _NoRandom()) for q in range(5)] == [0] * 5


def test_x_flips_measurement():
    tab = Tableau(3)
    tab.apply_gate(("X", 1))
    assert tab.measure_z(1, _NoRandom()) == 1
    assert tab.measure_z(0, _NoRandom()) == 0


def test_remeasurement_is_deterministic_and_free():
    rng = np.random.default_rng(1)
    tab = Tableau(2)
    tab.apply_gate(("H", 0))
    bit, was_random, gen = tab.measure_z_detailed(0, rng)
    assert was_random and gen is not None
    assert tab.measure_z(0, _NoRandom()) == bit


def test_bell_pair_equal_bits():
    rng = np.random.default_rng(2)
    seen = set()
    for _ in range(40):
        tab = Tableau(2)
        tab.apply_gate(("H", 0))
        tab.apply_gate(("CNOT", 0, 1))
        a = tab.measure_z(0, rng)
        b = tab.measure_z(1, _NoRandom())
        assert a == b
        seen.add(a)
    assert seen == {0, 1}


def test_bell_measure_of_fresh_pair_is_identity():
    rng = np.random.default_rng(3)
    for _ in range(30):
        tab = Tableau(2)
        tab.apply_gate(("H", 0))
        tab.apply_gate(("CNOT", 0, 1))
        assert tab.bell_measure(0, 1, rng) == 0


def test_bell_measure_sees_injected_pauli():
    rng = np.random.default_rng(4)
    for name, want in (("X", 1), ("Y", 2), ("Z", 3)):
        for _ in range(10):
            tab = Tableau(2)
            tab.apply_gate(("H", 0))
            tab.apply_gate(("CNOT", 0, 1))
            tab.apply_gate((name, 1))
            assert tab.bell_measure(0, 1, rng) == want


def test_symplectic_structure_preserved():
    rng = np.random.default_rng(5)
    for _ in range(20):
        circ = random_circuit(rng)
        tab = Tableau(circ.n_qubits)
        for layer in circ.layers:
            tab.apply_layer(layer)
        assert tab.check_symplectic()
        for q in range(circ.n_qubits):
            tab.measure_z(q, rng)
        assert tab.check_symplectic()


def test_clifford_words_compose_back():
    for cls in range(24):
        acc = TABLE.names["I"]
        for g in clifford_word(cls):
            acc = TABLE.compose(TABLE.names[g], acc)
        assert acc == cls


def test_dump_lists_rows():
    tab = Tableau(2)
    text = tab.dump()
    assert "S +ZI" in text and "D +XI" in text


# ---------------------------------------------------------------------------
# dense-oracle agreement


def test_tableau_runs_match_dense_oracle():
    rng = np.random.default_rng(10)
    low = 0
    for _ in range(25):
        circ = random_circuit(rng)
        probs = record_probs(circ)
        trials = 600
        counts = {}
        for _ in range(trials):
            rec = tuple(run_circuit_record(circ, rng).tolist())
            assert rec in probs, "tableau produced a zero-probability record"
            counts[rec] = counts.get(rec, 0) + 1
        p = chisq_pvalue(counts, probs, trials)
        assert p > 1e-6
        low += p < 0.01
    assert low <= 3


def test_frame_batch_matches_dense_oracle():
    rng = np.random.default_rng(11)
    low = 0
    for _ in range(60):
        circ = random_circuit(rng)
        probs = record_probs(circ)
        trials = 4000
        counts = batch_counts(circ, trials, rng)
        for rec in counts:
            assert rec in probs
        p = chisq_pvalue(counts, probs, trials)
        assert p > 1e-6
        low += p < 0.01
    assert low <= 5


def test_frame_batch_with_end_noise_matches_dense_oracle():
    rng = np.random.default_rng(12)
    for _ in range(20):
        circ = random_circuit(rng)
        ex = rng.integers(0, 2, size=circ.n_qubits, dtype=np.uint8)
        ez = rng.integers(0, 2, size=circ.n_qubits, dtype=np.uint8)
        extra = [("X", q) for q in np.flatnonzero(ex)] + [
            ("Z", q) for q in np.flatnonzero(ez)
        ]
        probs = record_probs(circ, extra_end_gates=extra)
        trials = 3000
        counts = batch_counts(circ, trials, rng, init_frames=(ex, ez))
        for rec in counts:
            assert rec in probs
        assert chisq_pvalue(counts, probs, trials) > 1e-6


def test_midcircuit_frame_propagation_matches_dense_oracle():
    # noise injected before the last layer, conjugated forward by the frame
    # rules, must equal the dense run with the Pauli inserted mid-circuit
    rng = np.random.default_rng(13)
    for _ in range(20):
        circ = random_circuit(rng, depth=int(rng.integers(2, 5)))
        n = circ.n_qubits
        ex = rng.integers(0, 2, size=n, dtype=np.uint8)
        ez = rng.integers(0, 2, size=n, dtype=np.uint8)
        mid = [
            ("Y" if ez[q] else "X", int(q)) if ex[q] else ("Z", int(q))
            for q in range(n)
            if ex[q] or ez[q]
        ]
        # dense route: insert the Pauli right before the final layer
        psi_layers = circ.layers[:-1] + ([mid] if mid else []) + [circ.layers[-1]]
        dense = LayeredCircuit(n, [list(l) for l in psi_layers], circ.measure_order)
        probs = record_probs(dense)
        fx = np.tile(ex, (2000, 1))
        fz = np.tile(ez, (2000, 1))
        frame_apply_layer(fx, fz, circ.layers[-1])
        trace = build_reference_trace(circ, rng)
        rec = batch_records(trace, fx, fz, rng)
        counts = {}
        for row in map(tuple, rec.tolist()):
            counts[row] = counts.get(row, 0) + 1
        for r in counts:
            assert r in probs
        assert chisq_pvalue(counts, probs, 2000) > 1e-6


def test_frame_linearity():
    rng = np.random.default_rng(14)
    for _ in range(50):
        circ = random_circuit(rng)
        n = circ.n_qubits
        e1 = PauliFrame(
            rng.integers(0, 2, n, dtype=np.uint8), rng.integers(0, 2, n, dtype=np.uint8)
        )
        e2 = PauliFrame(
            rng.integers(0, 2, n, dtype=np.uint8), rng.integers(0, 2, n, dtype=np.uint8)
        )
        both = e1.compose(e2)
        outs = []
        for f in (e1, e2, both):
            fx, fz = f.x.copy()[None, :], f.z.copy()[None, :]
            for layer in circ.layers:
                frame_apply_layer(fx, fz, layer)
            outs.append((fx[0], fz[0]))
        assert (outs[0][0] ^ outs[1][0] == outs[2][0]).all()
        assert (outs[0][1] ^ outs[1][1] == outs[2][1]).all()


# ---------------------------------------------------------------------------
# layered circuit plumbing


def test_layer_overlap_rejected():
    with pytest.raises(ValueError):
        LayeredCircuit(2, [[("H", 0), ("CNOT", 0, 1)]], [0, 1])


def test_bad_gate_rejected():
    with pytest.raises(ValueError):
        LayeredCircuit(2, [[("T", 0)]], [0])
    with pytest.raises(ValueError):
        LayeredCircuit(2, [[("H", 2)]], [])


def test_bind_resolves_controls():
    circ = telep_ring_circuit(2)
    assert set(circ.controls) == {"c0", "c1"}
    bound = circ.bind({"c0": 4, "c1": 3})
    assert bound.controls == {}
    kinds = [g for layer in bound.layers for g in layer if g[0] == "CLIFF"]
    assert ("CLIFF", 1, 4) in kinds and ("CLIFF", 3, 3) in kinds


def test_depth_and_ring_shape():
    circ = telep_ring_circuit(3)
    assert circ.n_qubits == 6 and circ.depth == 5
    assert len(circ.measure_order) == 6


# ---------------------------------------------------------------------------
# teleportation ring against the exact distribution


def _tv_against_exact(samples: np.ndarray, cliffs) -> float:
    n = len(cliffs)
    trials = samples.shape[0]
    keys = (samples.astype(np.int64) * (4 ** np.arange(n))).sum(axis=1)
    counts = np.bincount(keys, minlength=4**n)
    exact = full_distribution(cliffs)
    tv = 0.0
    for k in range(4**n):
        digits = tuple((k >> (2 * i)) & 3 for i in range(n))
        tv += abs(counts[k] / trials - float(exact.get(digits, 0)))
    return tv / 2


def test_single_run_distribution_small_n():
    rng = np.random.default_rng(20)
    for cliffs in [(TABLE.names["H"],), (TABLE.names["H"], TABLE.names["S"])]:
        samp = np.array([run_telep_circuit(cliffs, rng) for _ in range(4000)], dtype=np.uint8)
        assert _tv_against_exact(samp, cliffs) < 0.05


def test_batch_distribution_matches_exact():
    rng = np.random.default_rng(21)
    hs = TABLE.compose(TABLE.names["H"], TABLE.names["S"])
    for cliffs in [
        (TABLE.names["I"],),
        (hs,),
        (TABLE.names["H"], TABLE.names["S"]),
        (hs, TABLE.names["X"], TABLE.names["H"]),
    ]:
        samp = run_telep_batch(cliffs, rng, 200000)
        assert _tv_against_exact(samp, cliffs) < 0.01


def test_batch_and_single_probabilities_agree():
    # the two routes are implementation-independent ways to run the same ring
    rng = np.random.default_rng(22)
    cliffs = (TABLE.names["H"], TABLE.compose(TABLE.names["S"], TABLE.names["H"]))
    single = np.array([run_telep_circuit(cliffs, rng) for _ in range(3000)], dtype=np.uint8)
    batch = run_telep_batch(cliffs, rng, 100000)
    k1 = np.bincount(single[:, 0] * 4 + single[:, 1], minlength=16) / 3000
    k2 = np.bincount(
        batch[:, 0].astype(int) * 4 + batch[:, 1].astype(int), minlength=16
    ) / 100000
    assert np.abs(k1 - k2).sum() / 2 < 0.05


def test_all_batch_outcomes_valid_n16():
    rng = np.random.default_rng(23)
    cliffs = tuple(int(c) for c in rng.integers(0, 24, size=16))
    samp = run_telep_batch(cliffs, rng, 20000)
    # vectorized trace-class fold over all samples
    classes = np.zeros(20000, dtype=np.int64)
    for j in range(16):
        classes = TABLE.mult[
            TABLE.pauli_class[samp[:, j].astype(np.intp)], TABLE.mult[cliffs[j], classes]
        ]
    assert not TABLE.traceless[classes].any()


def test_single_runs_valid_n8():
    rng = np.random.default_rng(24)
    cliffs = tuple(int(c) for c in rng.integers(0, 24, size=8))
    for _ in range(50):
        out = run_telep_circuit(cliffs, rng)
        assert verify(cliffs, out).valid


def test_injected_x_flips_first_outcome():
    rng = np.random.default_rng(25)
    fr = PauliFrame.identity(4)
    fr.x[1] = 1  # the gate half of pair 0, right before the pair measurement
    for _ in range(60):
        p0, p1 = run_telep_circuit((0, 0), rng, frame_noise=fr)
        assert p0 == pauli_mul(1, p1)  # ideal case has p0 == p1


def test_record_to_paulis_codes():
    rec = np.array([[0, 0, 0, 1, 1, 0, 1, 1]], dtype=np.uint8)
    # codes (s1, s2): X**s2 Z**s1
    assert record_to_paulis(rec).tolist() == [[0, 1, 3, 2]]


def test_replay_determinism():
    cliffs = (4, 3, 7)
    a = run_telep_batch(cliffs, np.random.default_rng(99), 5000)
    b = run_telep_batch(cliffs, np.random.default_rng(99), 5000)
    assert (a == b).all()
    r1 = [run_telep_circuit(cliffs, np.random.default_rng(7)) for _ in range(10)]
    r2 = [run_telep_circuit(cliffs, np.random.default_rng(7)) for _ in range(10)]
    assert r1 == r2


# ---------------------------------------------------------------------------
# noisy_run plumbing


class _FixedPlanNoise:
    """Noise plan hitting chosen stages with a fixed frame (test double)."""

    def __init__(self, stages, x, z):
        self._stages = stages
        self._x = np.asarray(x, dtype=np.uint8)
        self._z = np.asarray(z, dtype=np.uint8)

    def layer_plan(self, depth):
        return self._stages

    def sample(self, n_qubits, rng):
        return PauliFrame(self._x.copy(), self._z.copy())


def test_noisy_run_stage_placement():
    # two H layers cancel; an X between them conjugates to Z (no flip),
    # an X after them flips the readout
    circ = LayeredCircuit(1, [[("H", 0)], [("H", 0)]], [0])
    rng = np.random.default_rng(30)
    assert noisy_run(circ, None, rng)[0] == 0
    mid = _FixedPlanNoise([1], [1], [0])
    end = _FixedPlanNoise([2], [1], [0])
    start = _FixedPlanNoise([0], [1], [0])
    assert noisy_run(circ, mid, rng)[0] == 0
    assert noisy_run(circ, end, rng)[0] == 1
    assert noisy_run(circ, start, rng)[0] == 1  # X at input commutes through HH


def test_noisy_run_matches_dense():
    rng = np.random.default_rng(31)
    for _ in range(10):
        circ = random_circuit(rng, n=3, depth=3)
        ex = rng.integers(0, 2, size=3, dtype=np.uint8)
        noise = _FixedPlanNoise([1], ex, [0, 0, 0])
        mid = [("X", int(q)) for q in np.flatnonzero(ex)]
        dense = LayeredCircuit(
            3, [circ.layers[0]] + ([mid] if mid else []) + circ.layers[1:], circ.measure_order
        )
        probs = record_probs(dense)
        counts = {}
        for _ in range(400):
            rec = tuple(noisy_run(circ, noise, rng).tolist())
            assert rec in probs
            counts[rec] = counts.get(rec, 0) + 1
        assert chisq_pvalue(counts, probs, 400) > 1e-6


# ---------------------------------------------------------------------------
# the game circuit, third route


def test_game_circuit_matches_exact_distribution():
    rng = np.random.default_rng(40)
    for alpha in (1, 2, 3):
        for beta in (1, 2, 3):
            exact = game_distribution(alpha, beta)
            counts = {}
            trials = 6000
            for _ in range(trials):
                k = run_game_circuit(alpha, beta, rng)
                assert k in exact
                counts[k] = counts.get(k, 0) + 1
            tv = sum(abs(counts.get(k, 0) / trials - float(v)) for k, v in exact.items())
            assert tv / 2 < 0.03
