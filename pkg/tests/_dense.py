"""Dense state-vector oracle for small circuits (test-only).

Independent of the tableau machinery: gates become explicit matrices via
kron products, outcome probabilities come from squared amplitudes.  Qubit
q is the q-th least significant bit of the basis index.
"""

import numpy as np

from telepsim.pauli_clifford import build_group_table
from telepsim.stabilizer_sim import clifford_word

_S2 = 1 / np.sqrt(2.0)
_MATS = {
    "H": np.array([[_S2, _S2], [_S2, -_S2]], dtype=complex),
    "S": np.array([[1, 0], [0, 1j]], dtype=complex),
    "X": np.array([[0, 1], [1, 0]], dtype=complex),
    "Y": np.array([[0, -1j], [1j, 0]], dtype=complex),
    "Z": np.array([[1, 0], [0, -1]], dtype=complex),
}
_P0 = np.array([[1, 0], [0, 0]], dtype=complex)
_P1 = np.array([[0, 0], [0, 1]], dtype=complex)


def _cliff_mat(cls: int) -> np.ndarray:
    m = np.eye(2, dtype=complex)
    for g in clifford_word(cls):
        m = _MATS[g] @ m
    return m


def op_at(placed: dict, n: int) -> np.ndarray:
    """kron product with the given single-qubit matrices at their qubits."""
    m = np.array([[1.0 + 0j]])
    for q in range(n - 1, -1, -1):
        m = np.kron(m, placed.get(q, np.eye(2, dtype=complex)))
    return m


def gate_matrix(gate: tuple, n: int) -> np.ndarray:
    kind = gate[0]
    if kind in _MATS:
        return op_at({gate[1]: _MATS[kind]}, n)
    if kind == "CLIFF":
        return op_at({gate[1]: _cliff_mat(gate[2])}, n)
    if kind == "CNOT":
        c, t = gate[1], gate[2]
        return op_at({c: _P0}, n) + op_at({c: _P1, t: _MATS["X"]}, n)
    if kind == "CZ":
        c, t = gate[1], gate[2]
        return op_at({c: _P0}, n) + op_at({c: _P1, t: _MATS["Z"]}, n)
    raise ValueError(f"unknown gate {gate!r}")


def run_state(circuit, extra_end_gates=()) -> np.ndarray:
    n = circuit.n_qubits
    psi = np.zeros(2**n, dtype=complex)
    psi[0] = 1.0
    for layer in circuit.layers:
        for gate in layer:
            psi = gate_matrix(gate, n) @ psi
    for gate in extra_end_gates:
        psi = gate_matrix(gate, n) @ psi
    return psi


def record_probs(circuit, extra_end_gates=()) -> dict:
    """Map record tuple (bits of measure_order qubits) -> probability."""
    psi = run_state(circuit, extra_end_gates)
    n = circuit.n_qubits
    probs = np.abs(psi) ** 2
    out = {}
    for b in range(2**n):
        if probs[b] < 1e-15:
            continue
        rec = tuple((b >> q) & 1 for q in circuit.measure_order)
        out[rec] = out.get(rec, 0.0) + probs[b]
    return out
