"""Bit-packed stabilizer tableau simulator with a Pauli-frame fast path.

The Tableau follows the standard binary-symplectic bookkeeping: n
destabilizer rows, n stabilizer rows and a scratch row, each stored as
packed 64-bit words for the X and Z parts plus one sign bit.  Gates are
column updates vectorized over all rows; measurement uses the usual
pivot/rowsum procedure, with fair coins drawn from a caller-supplied RNG
and deterministic outcomes consuming no randomness.

For Monte-Carlo work the circuit is simulated once into a ReferenceTrace
that records, per measurement, the outcome bit, whether it was a fair
coin, and the collapse generator (the stabilizer row anticommuting with
the measured observable).  Per-trial randomness then reduces to XOR-ing
coin multiples of collapse generators into cheap per-trial Pauli frames,
so millions of trials cost only bitwise array operations.

Circuits here are unitary Clifford layers followed by one final round of
computational-basis measurements; that shape covers the teleportation
ring, the game circuit and the fault-tolerance blocks.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from typing import Callable, Optional, Sequence

import numpy as np

from .pauli_clifford import CODE_TO_PAULI, build_group_table

_GATE_ARITY = {"H": 1, "S": 1, "X": 1, "Y": 1, "Z": 1, "CLIFF": 1, "CNOT": 2, "CZ": 2}


# ---------------------------------------------------------------------------
# Clifford-class decomposition into H/S words


def _clifford_words() -> dict:
    # BFS over words in the two generators; word[k] is applied k-th
    table = build_group_table()
    h, s = table.names["H"], table.names["S"]
    words = {table.names["I"]: ()}
    frontier = [table.names["I"]]
    while frontier:
        nxt = []
        for c in frontier:
            for gname, gcls in (("H", h), ("S", s)):
                c2 = table.compose(gcls, c)  # apply g after the word for c
                if c2 not in words:
                    words[c2] = words[c] + (gname,)
                    nxt.append(c2)
        frontier = nxt
    assert len(words) == 24
    return words


_WORDS: Optional[dict] = None


def clifford_word(cls: int) -> tuple:
    """H/S gate word realizing the class, in application order."""
    global _WORDS
    if _WORDS is None:
        _WORDS = _clifford_words()
    return _WORDS[int(cls)]


# ---------------------------------------------------------------------------
# Pauli frames


@dataclass
class PauliFrame:
    """X/Z support masks of a Pauli operator, signs ignored."""

    x: np.ndarray
    z: np.ndarray

    @classmethod
    def identity(cls, n_qubits: int) -> "PauliFrame":
        return cls(np.zeros(n_qubits, dtype=np.uint8), np.zeros(n_qubits, dtype=np.uint8))

    def compose(self, other: "PauliFrame") -> "PauliFrame":
        return PauliFrame(self.x ^ other.x, self.z ^ other.z)

    @property
    def support(self) -> np.ndarray:
        return np.flatnonzero(self.x | self.z)

    def copy(self) -> "PauliFrame":
        return PauliFrame(self.x.copy(), self.z.copy())


def frame_apply_gate(x: np.ndarray, z: np.ndarray, gate: tuple) -> None:
    """Conjugate a frame (last axis = qubits) through one Clifford gate, in place."""
    kind = gate[0]
    if kind == "H":
        q = gate[1]
        tmp = x[..., q].copy()
        x[..., q] = z[..., q]
        z[..., q] = tmp
    elif kind == "S":
        q = gate[1]
        z[..., q] ^= x[..., q]
    elif kind in ("X", "Y", "Z"):
        pass  # Paulis act trivially on frames (signs are not tracked)
    elif kind == "CLIFF":
        for g in clifford_word(gate[2]):
            frame_apply_gate(x, z, (g, gate[1]))
    elif kind == "CNOT":
        c, t = gate[1], gate[2]
        x[..., t] ^= x[..., c]
        z[..., c] ^= z[..., t]
    elif kind == "CZ":
        c, t = gate[1], gate[2]
        z[..., t] ^= x[..., c]
        z[..., c] ^= x[..., t]
    else:
        raise ValueError(f"unknown gate {gate!r}")


def frame_apply_layer(x: np.ndarray, z: np.ndarray, layer: Sequence[tuple]) -> None:
    for gate in layer:
        frame_apply_gate(x, z, gate)


# ---------------------------------------------------------------------------
# Layered circuits


@dataclass
class LayeredCircuit:
    """Unitary Clifford layers plus one final computational-basis readout.

    Gates are tuples: ("H", q), ("S", q), ("X"|"Y"|"Z", q), ("CLIFF", q, cls),
    ("CNOT", c, t), ("CZ", c, t).  A CLIFF class may be a placeholder string,
    resolved later through bind(); placeholder positions are the circuit's
    classical controls.  measure_order lists the qubits read out at the end,
    in record order.
    """

    n_qubits: int
    layers: list
    measure_order: list = field(default_factory=list)

    def __post_init__(self):
        for li, layer in enumerate(self.layers):
            seen = set()
            for gate in layer:
                kind = gate[0]
                if kind not in _GATE_ARITY:
                    raise ValueError(f"unknown gate {gate!r}")
                qubits = gate[1 : 1 + _GATE_ARITY[kind]]
                for q in qubits:
                    if not (0 <= q < self.n_qubits):
                        raise ValueError(f"qubit {q} out of range in layer {li}")
                    if q in seen:
                        raise ValueError(f"overlapping gates on qubit {q} in layer {li}")
                    seen.add(q)

    @property
    def depth(self) -> int:
        return len(self.layers)

    @property
    def controls(self) -> dict:
        out = {}
        for li, layer in enumerate(self.layers):
            for gi, gate in enumerate(layer):
                if gate[0] == "CLIFF" and isinstance(gate[2], str):
                    out.setdefault(gate[2], []).append((li, gi))
        return out

    def bind(self, assignment: dict) -> "LayeredCircuit":
        """Resolve placeholder controls to concrete Clifford classes."""
        layers = []
        for layer in self.layers:
            new = []
            for gate in layer:
                if gate[0] == "CLIFF" and isinstance(gate[2], str):
                    new.append(("CLIFF", gate[1], int(assignment[gate[2]])))
                else:
                    new.append(gate)
            layers.append(new)
        return LayeredCircuit(self.n_qubits, layers, list(self.measure_order))


# ---------------------------------------------------------------------------
# Tableau


class Tableau:
    """Stabilizer state on n qubits in binary-symplectic form."""

    def __init__(self, n_qubits: int):
        if n_qubits < 1:
            raise ValueError("need at least one qubit")
        self.n = n_qubits
        self.w = (n_qubits + 63) // 64
        rows = 2 * n_qubits + 1  # destabilizers, stabilizers, scratch
        self.xs = np.zeros((rows, self.w), dtype=np.uint64)
        self.zs = np.zeros((rows, self.w), dtype=np.uint64)
        self.r = np.zeros(rows, dtype=np.uint8)  # sign bit per row
        for q in range(n_qubits):
            self.xs[q, q >> 6] |= np.uint64(1) << np.uint64(q & 63)  # destab X_q
            self.zs[n_qubits + q, q >> 6] |= np.uint64(1) << np.uint64(q & 63)  # stab Z_q

    def copy(self) -> "Tableau":
        other = Tableau.__new__(Tableau)
        other.n = self.n
        other.w = self.w
        other.xs = self.xs.copy()
        other.zs = self.zs.copy()
        other.r = self.r.copy()
        return other

    # -- bit helpers

    def _get(self, arr: np.ndarray, q: int) -> np.ndarray:
        return (arr[:, q >> 6] >> np.uint64(q & 63)) & np.uint64(1)

    def _xor_bit(self, arr: np.ndarray, q: int, bits: np.ndarray) -> None:
        arr[:, q >> 6] ^= bits.astype(np.uint64) << np.uint64(q & 63)

    # -- gates

    def apply_gate(self, gate: tuple) -> None:
        kind = gate[0]
        if kind == "H":
            q = gate[1]
            xq, zq = self._get(self.xs, q), self._get(self.zs, q)
            self.r ^= (xq & zq).astype(np.uint8)
            self._xor_bit(self.xs, q, xq ^ zq)
            self._xor_bit(self.zs, q, xq ^ zq)
        elif kind == "S":
            q = gate[1]
            xq, zq = self._get(self.xs, q), self._get(self.zs, q)
            self.r ^= (xq & zq).astype(np.uint8)
            self._xor_bit(self.zs, q, xq)
        elif kind == "X":
            self.r ^= self._get(self.zs, gate[1]).astype(np.uint8)
        elif kind == "Z":
            self.r ^= self._get(self.xs, gate[1]).astype(np.uint8)
        elif kind == "Y":
            q = gate[1]
            self.r ^= (self._get(self.xs, q) ^ self._get(self.zs, q)).astype(np.uint8)
        elif kind == "CLIFF":
            for g in clifford_word(gate[2]):
                self.apply_gate((g, gate[1]))
        elif kind == "CNOT":
            c, t = gate[1], gate[2]
            xc, zc = self._get(self.xs, c), self._get(self.zs, c)
            xt, zt = self._get(self.xs, t), self._get(self.zs, t)
            self.r ^= (xc & zt & (xt ^ zc ^ np.uint64(1))).astype(np.uint8)
            self._xor_bit(self.xs, t, xc)
            self._xor_bit(self.zs, c, zt)
        elif kind == "CZ":
            c, t = gate[1], gate[2]
            self.apply_gate(("H", t))
            self.apply_gate(("CNOT", c, t))
            self.apply_gate(("H", t))
        else:
            raise ValueError(f"unknown gate {gate!r}")

    def apply_layer(self, layer: Sequence[tuple]) -> None:
        for gate in layer:
            self.apply_gate(gate)

    # -- rowsum machinery (left-multiplication of target rows by a source row)

    def _phase_counts(self, src: int, targets: np.ndarray) -> np.ndarray:
        x1, z1 = self.xs[src], self.zs[src]
        x2, z2 = self.xs[targets], self.zs[targets]
        plus = (
            (x1 & z1 & z2 & ~x2)
            | (x1 & ~z1 & z2 & x2)
            | (~x1 & z1 & x2 & ~z2)
        )
        minus = (
            (x1 & z1 & ~z2 & x2)
            | (x1 & ~z1 & z2 & ~x2)
            | (~x1 & z1 & x2 & z2)
        )
        return (
            np.bitwise_count(plus).sum(axis=1).astype(np.int64)
            - np.bitwise_count(minus).sum(axis=1).astype(np.int64)
        )

    # -- measurement

    def measure_z(self, q: int, rng: np.random.Generator) -> int:
        bit, _, _ = self.measure_z_detailed(q, rng)
        return bit

    def measure_z_detailed(self, q: int, rng: np.random.Generator):
        """Measure Z on qubit q.

        Returns (bit, was_random, generator) where generator is the
        pre-collapse anticommuting stabilizer row as a PauliFrame (or None
        for deterministic outcomes).
        """
        n = self.n
        xq_stab = self._get(self.xs[n : 2 * n], q).astype(bool)
        pivots = np.flatnonzero(xq_stab)
        if len(pivots):
            p = n + int(pivots[0])
            gen = PauliFrame(self._unpack(self.xs[p]), self._unpack(self.zs[p]))
            xq_all = self._get(self.xs, q).astype(bool)
            xq_all[p] = False
            xq_all[2 * n] = False
            targets = np.flatnonzero(xq_all)
            self._rowsum(targets, p)
            # old pivot becomes the destabilizer; new stabilizer is +-Z_q
            self.xs[p - n] = self.xs[p]
            self.zs[p - n] = self.zs[p]
            self.r[p - n] = self.r[p]
            self.xs[p] = 0
            self.zs[p] = 0
            self.zs[p, q >> 6] = np.uint64(1) << np.uint64(q & 63)
            coin = int(rng.integers(0, 2))
            self.r[p] = coin
            return coin, True, gen
        # deterministic: accumulate stabilizer partners of flagged destabilizers
        s = 2 * n
        self.xs[s] = 0
        self.zs[s] = 0
        self.r[s] = 0
        xq_destab = self._get(self.xs[:n], q).astype(bool)
        for i in np.flatnonzero(xq_destab):
            self._rowsum(np.array([s]), n + int(i))
        return int(self.r[s]), False, None

    def _rowsum(self, targets: np.ndarray, src: int) -> None:
        if len(targets) == 0:
            return
        total = (
            2 * self.r[targets].astype(np.int64)
            + 2 * int(self.r[src])
            + self._phase_counts(src, targets)
        ) % 4
        # destabilizer signs are never read and may come out odd (the pivot's
        # partner anticommutes with it); the rows that matter stay even
        assert not (total[targets >= self.n] & 1).any(), "odd stabilizer phase"
        self.r[targets] = (total >> 1).astype(np.uint8)
        self.xs[targets] ^= self.xs[src]
        self.zs[targets] ^= self.zs[src]

    def bell_measure(self, q1: int, q2: int, rng: np.random.Generator) -> int:
        """Bell-basis measurement of (q1, q2): outcome Pauli X^s2 Z^s1."""
        self.apply_gate(("CNOT", q1, q2))
        self.apply_gate(("H", q1))
        s1 = self.measure_z(q1, rng)
        s2 = self.measure_z(q2, rng)
        return CODE_TO_PAULI[(s1, s2)]

    def measure_pauli(self, x, z, rng: np.random.Generator, force: int | None = None):
        """Measure the Hermitian Pauli X^x Z^z (given as bit vectors).

        Returns (bit, was_random).  If `force` is given and the outcome is
        random, a corrective Pauli (the pre-collapse pivot generator, which
        commutes with every other stabilizer) is applied so the result
        equals `force`; a deterministic mismatch raises ValueError.
        """
        x = np.asarray(x, dtype=np.uint8)
        z = np.asarray(z, dtype=np.uint8)
        supp = np.flatnonzero(x | z)
        if len(supp) == 0:
            raise ValueError("cannot measure the identity")
        gates = []
        sign = 0
        for q in supp:
            q = int(q)
            if x[q] and z[q]:
                # S then H sends Y to -Z
                gates.append(("S", q))
                gates.append(("H", q))
                sign ^= 1
            elif x[q]:
                gates.append(("H", q))
        root = int(supp[0])
        for q in supp[1:]:
            gates.append(("CNOT", int(q), root))
        for g in gates:
            self.apply_gate(g)
        bit, was_random, gen = self.measure_z_detailed(root, rng)
        if force is not None and (bit ^ sign) != force:
            if not was_random:
                raise ValueError("deterministic Pauli outcome cannot be forced")
            for q in np.flatnonzero(gen.x | gen.z):
                q = int(q)
                if gen.x[q] and gen.z[q]:
                    self.apply_gate(("Y", q))
                elif gen.x[q]:
                    self.apply_gate(("X", q))
                else:
                    self.apply_gate(("Z", q))
            bit ^= 1
        for g in reversed(gates):
            if g[0] == "S":
                self.apply_gate(g)
                self.apply_gate(g)
                self.apply_gate(g)
            else:
                self.apply_gate(g)
        return bit ^ sign, was_random

    # -- introspection

    def _unpack(self, words: np.ndarray) -> np.ndarray:
        bits = np.unpackbits(words.view(np.uint8), bitorder="little")
        return bits[: self.n].astype(np.uint8)

    def stabilizer_row(self, k: int) -> PauliFrame:
        return PauliFrame(self._unpack(self.xs[self.n + k]), self._unpack(self.zs[self.n + k]))

    def check_symplectic(self) -> bool:
        """Stabilizers commute pairwise; destabilizer i anticommutes with
        stabilizer i only."""
        n = self.n
        x = np.vstack([self._unpack(self.xs[i]) for i in range(2 * n)])
        z = np.vstack([self._unpack(self.zs[i]) for i in range(2 * n)])
        sym = (x @ z.T + z @ x.T) % 2
        want = np.zeros((2 * n, 2 * n), dtype=np.uint8)
        want[:n, n : 2 * n] = np.eye(n, dtype=np.uint8)
        want[n : 2 * n, :n] = np.eye(n, dtype=np.uint8)
        return bool((sym == want).all())

    def dump(self) -> str:
        """Text form, one row per line: sign then IXYZ letters."""
        out = []
        for k in range(2 * self.n):
            x, z = self._unpack(self.xs[k]), self._unpack(self.zs[k])
            kind = "D" if k < self.n else "S"
            letters = "".join("IXZY"[int(2 * zi + xi)] for xi, zi in zip(x, z))
            out.append(f"{kind} {'-' if self.r[k] else '+'}{letters}")
        return "\n".join(out)


# ---------------------------------------------------------------------------
# Reference trace + frame batch fast path


@dataclass
class MeasurementEvent:
    qubit: int
    bit: int
    was_random: bool
    gen_x: Optional[np.ndarray]
    gen_z: Optional[np.ndarray]


@dataclass
class ReferenceTrace:
    circuit: LayeredCircuit
    events: list
    record: np.ndarray


def build_reference_trace(
    circuit: LayeredCircuit,
    rng: np.random.Generator,
    base: Tableau | None = None,
) -> ReferenceTrace:
    """Run the circuit once, recording collapse data for frame replays.

    `base` supplies the initial state (copied, not mutated); defaults to
    the all-zeros state.
    """
    if base is None:
        tab = Tableau(circuit.n_qubits)
    else:
        if base.n != circuit.n_qubits:
            raise ValueError("base tableau size mismatch")
        tab = base.copy()
    for layer in circuit.layers:
        tab.apply_layer(layer)
    events = []
    for q in circuit.measure_order:
        bit, was_random, gen = tab.measure_z_detailed(q, rng)
        events.append(
            MeasurementEvent(
                q,
                bit,
                was_random,
                None if gen is None else gen.x,
                None if gen is None else gen.z,
            )
        )
    record = np.array([e.bit for e in events], dtype=np.uint8)
    return ReferenceTrace(circuit, events, record)


def batch_records(
    trace: ReferenceTrace,
    frames_x: np.ndarray,
    frames_z: np.ndarray,
    rng: np.random.Generator,
) -> np.ndarray:
    """Outcome records for a batch of trials whose accumulated error/byproduct
    frames (already propagated to the end of the unitary layers) are given.

    Each fair-coin measurement draws fresh coins; each coin multiplies the
    trial frame by the recorded collapse generator, reproducing the exact
    joint outcome distribution.  frames are modified in place.
    """
    t = frames_x.shape[0]
    out = np.empty((t, len(trace.events)), dtype=np.uint8)
    for m, ev in enumerate(trace.events):
        if ev.was_random:
            coins = rng.integers(0, 2, size=t, dtype=np.uint8)
            frames_x ^= coins[:, None] * ev.gen_x[None, :]
            frames_z ^= coins[:, None] * ev.gen_z[None, :]
        out[:, m] = ev.bit ^ frames_x[:, ev.qubit]
    return out


def run_circuit_record(
    circuit: LayeredCircuit,
    rng: np.random.Generator,
    frame: Optional[PauliFrame] = None,
) -> np.ndarray:
    """Single honest tableau run; an optional pre-propagated end frame
    XORs into the X-readout."""
    tab = Tableau(circuit.n_qubits)
    for layer in circuit.layers:
        tab.apply_layer(layer)
    bits = np.array([tab.measure_z(q, rng) for q in circuit.measure_order], dtype=np.uint8)
    if frame is not None:
        bits ^= frame.x[np.array(circuit.measure_order, dtype=np.intp)]
    return bits


def noisy_run(
    circuit: LayeredCircuit,
    noise,
    rng: np.random.Generator,
) -> np.ndarray:
    """One noisy run: sample a Pauli frame before the first layer and after
    each layer per the noise plan, conjugate it to the end, and read out.

    noise: object with layer_plan (iterable of layer stages 0..depth that
    receive noise) and sample(n_qubits, rng) -> PauliFrame; or None.
    """
    n = circuit.n_qubits
    fx = np.zeros((1, n), dtype=np.uint8)
    fz = np.zeros((1, n), dtype=np.uint8)
    plan = set() if noise is None else set(noise.layer_plan(circuit.depth))
    if 0 in plan:
        e = noise.sample(n, rng)
        fx[0] ^= e.x
        fz[0] ^= e.z
    for li, layer in enumerate(circuit.layers):
        frame_apply_layer(fx, fz, layer)
        if li + 1 in plan:
            e = noise.sample(n, rng)
            fx[0] ^= e.x
            fz[0] ^= e.z
    return run_circuit_record(circuit, rng, PauliFrame(fx[0], fz[0]))


# ---------------------------------------------------------------------------
# The gate-teleportation ring


def telep_ring_circuit(n: int) -> LayeredCircuit:
    """The 2n-qubit ring: entangled pair j on qubits (2j, 2j+1), the j-th
    controlled Clifford on qubit 2j+1, pair measurements shifted by one.

    Readout order: for output j, first qubit 2j+1 then qubit 2(j+1) mod 2n;
    the basis change for each pair measurement is folded into the layers.
    """
    if n < 1:
        raise ValueError("need at least one position")
    nq = 2 * n
    prep_h = [("H", 2 * j) for j in range(n)]
    prep_cx = [("CNOT", 2 * j, 2 * j + 1) for j in range(n)]
    gates = [("CLIFF", 2 * j + 1, f"c{j}") for j in range(n)]
    meas_cx = [("CNOT", 2 * j + 1, (2 * j + 2) % nq) for j in range(n)]
    meas_h = [("H", 2 * j + 1) for j in range(n)]
    order = []
    for j in range(n):
        order += [2 * j + 1, (2 * j + 2) % nq]
    return LayeredCircuit(nq, [prep_h, prep_cx, gates, meas_cx, meas_h], order)


def record_to_paulis(record: np.ndarray) -> np.ndarray:
    """Map (…, 2n) measurement bits to (…, n) Pauli classes, pairwise."""
    s1 = record[..., 0::2]
    s2 = record[..., 1::2]
    # codes (s1, s2) -> class indices I,X,Y,Z = 0..3
    lut = np.array(
        [[CODE_TO_PAULI[(a, b)] for b in range(2)] for a in range(2)], dtype=np.uint8
    )
    return lut[s1, s2]


def run_telep_circuit(
    cliffords: Sequence[int],
    rng: np.random.Generator,
    frame_noise=None,
) -> tuple:
    """One honest tableau run of the teleportation ring; returns the Pauli tuple.

    frame_noise: optional noise plan as in noisy_run, or a fixed PauliFrame
    injected right before the pair measurements.
    """
    n = len(cliffords)
    circuit = telep_ring_circuit(n).bind({f"c{j}": cliffords[j] for j in range(n)})
    if frame_noise is None or isinstance(frame_noise, PauliFrame):
        frame = None
        if isinstance(frame_noise, PauliFrame):
            fx = frame_noise.x.copy()[None, :]
            fz = frame_noise.z.copy()[None, :]
            # injected before the basis-change layers: propagate through them
            frame_apply_layer(fx, fz, circuit.layers[3])
            frame_apply_layer(fx, fz, circuit.layers[4])
            frame = PauliFrame(fx[0], fz[0])
        record = run_circuit_record(circuit, rng, frame)
    else:
        record = noisy_run(circuit, frame_noise, rng)
    return tuple(int(p) for p in record_to_paulis(record))


def run_telep_batch(
    cliffords: Sequence[int],
    rng: np.random.Generator,
    trials: int,
    chunk: int = 65536,
) -> np.ndarray:
    """Vectorized noiseless ring runs: (trials, n) Pauli classes.

    One reference tableau trace; per-trial randomness enters only through
    measurement coins applied to shared collapse generators.
    """
    n = len(cliffords)
    circuit = telep_ring_circuit(n).bind({f"c{j}": cliffords[j] for j in range(n)})
    trace = build_reference_trace(circuit, rng)
    nq = circuit.n_qubits
    out = np.empty((trials, n), dtype=np.uint8)
    done = 0
    while done < trials:
        t = min(chunk, trials - done)
        fx = np.zeros((t, nq), dtype=np.uint8)
        fz = np.zeros((t, nq), dtype=np.uint8)
        rec = batch_records(trace, fx, fz, rng)
        out[done : done + t] = record_to_paulis(rec)
        done += t
    return out


def run_game_circuit(alpha: int, beta: int, rng: np.random.Generator) -> tuple:
    """Tableau run of the two-player shared-pair game circuit.

    Qubits (0,1,2,3) = first player's pair halves (0,1), second player's
    (2,3); pairs are (0,2) and (1,3).  Returns (first player's Pauli,
    second player's Pauli).
    """
    u1, u2, u3, v1, v2, v3 = _game_constants()
    tab = Tableau(4)
    for a, b in ((0, 2), (1, 3)):
        tab.apply_gate(("H", a))
        tab.apply_gate(("CNOT", a, b))
    tab.apply_gate(("CLIFF", 0, (u1, u2, u3)[alpha - 1]))
    tab.apply_gate(("CLIFF", 3, (v1, v2, v3)[beta - 1]))
    p = tab.bell_measure(0, 1, rng)
    q = tab.bell_measure(2, 3, rng)
    return p, q


def _game_constants():
    from .nonlocal_games import constants_UV

    return constants_UV()
