"""The cyclic gate-teleportation relation problem.

An instance is an n-tuple C = (C_0, ..., C_{n-1}) of single-qubit Clifford
classes (indices into the phase-free group table).  A candidate answer is an
n-tuple P = (P_0, ..., P_{n-1}) of Pauli classes (0..3 = I, X, Y, Z).  The
pair is accepted when the alternating product

    P_{n-1} C_{n-1} ... P_1 C_1 P_0 C_0

has nonzero trace.  The ideal quantum strategy produces P with probability

    4^{-n} |tr(P_{n-1} C_{n-1} ... P_0 C_0)|^2

which is always of the form 2^{-k} or 0, so everything here is exact integer
arithmetic; no floats are involved in probabilities.

Tuples are plain tuples of ints.  Cliffords and Paulis are class indices; use
pauli_clifford.build_group_table().names and PAULI_NAMES to translate.
"""

from __future__ import annotations

from dataclasses import dataclass
from fractions import Fraction
from typing import Iterable, Sequence

import numpy as np

from .pauli_clifford import PAULI_NAMES, GroupTable, build_group_table, pauli_mul

_ENUM_LIMIT = 8  # 4^8 = 65536 outcome tuples; keeps exhaustive paths sub-second


@dataclass(frozen=True)
class RelationOutcome:
    """Acceptance flag plus the exact outcome probability prob_num * 2^-prob_den_log2."""

    valid: bool
    prob_num: int
    prob_den_log2: int

    @property
    def probability(self) -> Fraction:
        return Fraction(self.prob_num, 2**self.prob_den_log2)


@dataclass(frozen=True)
class CliffordRestriction:
    """Partial instance: some positions fixed to Clifford classes, the rest active.

    slots[i] is either a Clifford class index or None for an active slot.
    Active slots are filled, in increasing index order, from the answer
    tuple D passed to verify_restricted.
    """

    slots: tuple

    def __post_init__(self):
        for s in self.slots:
            if s is not None and not (0 <= int(s) < 24):
                raise ValueError(f"slot value {s!r} is not a Clifford class")

    @property
    def n(self) -> int:
        return len(self.slots)

    @property
    def active_list(self) -> tuple:
        return tuple(i for i, s in enumerate(self.slots) if s is None)

    def splice(self, free_entries: Sequence[int]) -> tuple:
        active = self.active_list
        if len(free_entries) != len(active):
            raise ValueError(
                f"restriction has {len(active)} active slots, got {len(free_entries)} entries"
            )
        filled = list(self.slots)
        for i, d in zip(active, free_entries):
            filled[i] = int(d)
        return tuple(filled)


def _check_pair(cliffords: Sequence[int], paulis: Sequence[int]) -> int:
    n = len(cliffords)
    if n < 1:
        raise ValueError("need at least one position")
    if len(paulis) != n:
        raise ValueError(f"length mismatch: {n} Cliffords vs {len(paulis)} Paulis")
    return n


def _fold(table: GroupTable, cliffords: Sequence[int], paulis: Sequence[int]) -> int:
    # class of P_{n-1}C_{n-1}...P_0C_0, accumulated left-to-right in j
    m = table.names["I"]
    for c, p in zip(cliffords, paulis):
        m = int(table.mult[table.pauli_class[p], table.mult[c, m]])
    return m


def _outcome_from_trace_class(table: GroupTable, cls: int, n: int) -> RelationOutcome:
    ats = int(table.abs_trace_sq[cls])  # 0, 1, 2 or 4
    if ats == 0:
        return RelationOutcome(valid=False, prob_num=0, prob_den_log2=0)
    return RelationOutcome(valid=True, prob_num=1, prob_den_log2=2 * n - ats.bit_length() + 1)


def verify(cliffords: Sequence[int], paulis: Sequence[int]) -> RelationOutcome:
    """Exact acceptance check plus outcome probability for the pair (C, P)."""
    n = _check_pair(cliffords, paulis)
    table = build_group_table()
    return _outcome_from_trace_class(table, _fold(table, cliffords, paulis), n)


def full_distribution(cliffords: Sequence[int]) -> dict:
    """Exact distribution over all 4^n Pauli tuples; values are Fractions summing to 1.

    Bounded at n <= 8 to keep enumeration cheap.
    """
    n = len(cliffords)
    if n < 1:
        raise ValueError("need at least one position")
    if n > _ENUM_LIMIT:
        raise ValueError(f"enumeration supports n <= {_ENUM_LIMIT}, got {n}")
    table = build_group_table()
    pcls = table.pauli_class

    # classes[t] = trace class for prefix tuple t, digits little-endian in P_j
    classes = np.array([table.names["I"]], dtype=np.int8)
    for c in cliffords:
        cm = table.mult[int(c), classes]
        classes = table.mult[pcls[:, None], cm[None, :]].reshape(-1)

    ats = table.abs_trace_sq[classes]
    den = 4**n
    dist = {}
    for t in range(4**n):
        key = tuple((t >> (2 * j)) & 3 for j in range(n))
        dist[key] = Fraction(int(ats[t]), den)
    assert sum(dist.values()) == 1
    return dist


def _final_weights(table: GroupTable, prefix_class: int, last_clifford: int) -> list:
    # integer weights (summing to 4) for the last Pauli given the prefix fold
    a = table.mult[int(last_clifford), prefix_class]
    return [int(table.abs_trace_sq[table.mult[table.pauli_class[p], a]]) for p in range(4)]


def sample_ideal(cliffords: Sequence[int], rng: np.random.Generator) -> tuple:
    """Draw one Pauli tuple from the ideal outcome distribution, exactly.

    The first n-1 Paulis are uniform i.i.d.; the last is drawn from the
    conditional weights |tr(P A)|^2 / 4 where A folds everything before it.
    No state vectors: a single table fold plus one 4-way exact draw.
    """
    n = len(cliffords)
    if n < 1:
        raise ValueError("need at least one position")
    table = build_group_table()
    prefix = [int(x) for x in rng.integers(0, 4, size=n - 1)]
    m = _fold(table, cliffords[:-1], prefix)
    weights = _final_weights(table, m, cliffords[-1])
    v = int(rng.integers(0, 4))  # weights are integers summing to 4: exact draw
    acc = 0
    for p in range(4):
        acc += weights[p]
        if v < acc:
            return tuple(prefix) + (p,)
    raise AssertionError("weights did not sum to 4")


def sample_ideal_batch(
    cliffords: Sequence[int], rng: np.random.Generator, size: int
) -> np.ndarray:
    """Vectorized sample_ideal: returns a (size, n) uint8 array of Pauli tuples."""
    n = len(cliffords)
    if n < 1:
        raise ValueError("need at least one position")
    table = build_group_table()
    out = np.empty((size, n), dtype=np.uint8)
    out[:, : n - 1] = rng.integers(0, 4, size=(size, n - 1), dtype=np.uint8)

    m = np.full(size, table.names["I"], dtype=np.int8)
    for j in range(n - 1):
        m = table.mult[table.pauli_class[out[:, j]], table.mult[int(cliffords[j]), m]]
    a = table.mult[int(cliffords[-1]), m]
    weights = table.abs_trace_sq[table.mult[table.pauli_class[:, None], a[None, :]]]
    cum = np.cumsum(weights, axis=0)  # (4, size), last row all 4
    v = rng.integers(0, 4, size=size)
    out[:, n - 1] = (cum <= v[None, :]).sum(axis=0)
    return out


def normal_form_trace(
    cliffords: Sequence[int], paulis: Sequence[int], j: int, k: int
) -> RelationOutcome:
    """Evaluate the acceptance trace after commuting Paulis out of two arcs.

    Picks out positions j < k and rewrites the cyclic product as

        (C_j K) (Ptil_{j-1} ... Ptil_k) (C_k L) (Ptil_{k-1} ... Ptil_j)

    where K and L collect the Clifford factors of the two arcs (k, j) and
    (j, k), and each Ptil_s is P_s conjugated back through the Clifford
    prefix of its arc.  Paulis multiply in the symplectic representation;
    the +-1 collected while reordering them is tracked but cannot change
    the result, since |trace| ignores sign.  Agrees with verify exactly.
    """
    n = _check_pair(cliffords, paulis)
    if not (0 <= j < k < n):
        raise ValueError(f"need 0 <= j < k < n, got j={j}, k={k}, n={n}")
    table = build_group_table()

    def arc(start: int, stop: int) -> list:
        # cyclic index run [start, ..., stop-1 mod n], ascending
        out = []
        s = start % n
        while s != stop % n:
            out.append(s)
            s = (s + 1) % n
        return out

    def tilde_paulis(arc_indices: Iterable[int]) -> list:
        # conjugate each arc P_s by the inverse of the accumulated arc prefix
        tilded = []
        w = table.names["I"]
        for s in arc_indices:
            w = table.compose(int(cliffords[s]), w)
            q, _sign = table.conjugate_pauli(table.inverse(w), int(paulis[s]))
            tilded.append(q)
        return tilded

    def pauli_product(classes: Sequence[int]) -> tuple:
        # product classes[-1] * ... * classes[0] in the symplectic picture;
        # the sign is bookkeeping only, |trace| never sees it
        from .pauli_clifford import CODE_TO_PAULI, PAULI_CODE

        s1 = s2 = 0
        sign = 1
        for q in classes:
            q1, q2 = PAULI_CODE[q]
            # commuting the new Z^q1 past the accumulated X^s2 costs (-1)^(q1*s2)
            if q1 & s2:
                sign = -sign
            s1 ^= q1
            s2 ^= q2
        return CODE_TO_PAULI[(s1, s2)], sign

    outer = arc(k + 1, j)  # indices strictly between k and j, cyclically
    inner = arc(j + 1, k)  # indices strictly between j and k

    # positions j and k anchor the rewrite and keep their Paulis untouched
    p_outer = [int(paulis[k])] + tilde_paulis(outer)
    p_inner = [int(paulis[j])] + tilde_paulis(inner)

    k_cls = table.names["I"]
    for u in outer:
        k_cls = table.compose(int(cliffords[u]), k_cls)
    l_cls = table.names["I"]
    for u in inner:
        l_cls = table.compose(int(cliffords[u]), l_cls)

    q_prod, _ = pauli_product(p_outer)
    p_prod, _ = pauli_product(p_inner)

    m = table.names["I"]
    m = table.compose(table.pauli_class[p_prod], m)
    m = table.compose(l_cls, m)
    m = table.compose(int(cliffords[k]), m)
    m = table.compose(table.pauli_class[q_prod], m)
    m = table.compose(k_cls, m)
    m = table.compose(int(cliffords[j]), m)
    return _outcome_from_trace_class(table, m, n)


def verify_restricted(
    restriction: CliffordRestriction, free_entries: Sequence[int], paulis: Sequence[int]
) -> RelationOutcome:
    """Fill the restriction's active slots with free_entries, then verify."""
    return verify(restriction.splice(free_entries), paulis)


def rotate(entries: Sequence[int], r: int) -> tuple:
    """Cyclic rotation: rotate(x, r)[i] = x[(i + r) mod n]."""
    n = len(entries)
    r %= n
    return tuple(entries[(i + r) % n] for i in range(n))


def pauli_tuple_from_string(text: str) -> tuple:
    """Parse a string like 'XZIY' into a Pauli tuple."""
    try:
        return tuple(PAULI_NAMES.index(ch) for ch in text.upper())
    except ValueError:
        raise ValueError(f"Pauli string may only contain I, X, Y, Z: {text!r}") from None


def pauli_tuple_to_string(paulis: Sequence[int]) -> str:
    return "".join(PAULI_NAMES[p] for p in paulis)


def clifford_tuple_from_names(text: str) -> tuple:
    """Parse comma-separated generator words: 'H,SH,I' -> three class indices."""
    from .pauli_clifford import class_from_name

    return tuple(class_from_name(word.strip()) for word in text.split(","))
