"""Exact algebra of the single-qubit Pauli and Clifford groups modulo phase.

The 24 Clifford classes are enumerated by closing {I, H, S, X, Z} under
multiplication with exact arithmetic (Gaussian-integer matrices scaled by
powers of 1/sqrt(2)), then quotienting by global phase.  A class is named by
its canonical form: the signed images of X and Z under conjugation, which is
phase-free data.  All group operations are precomputed lookup tables.

Paulis are indexed 0..3 in the order I, X, Y, Z.  The two-bit code of a Pauli
is (s1, s2) meaning X^s2 Z^s1, so I=(0,0), X=(0,1), Y=(1,1), Z=(1,0), and
composition of codes is bitwise XOR.
"""

from __future__ import annotations

import json
from dataclasses import dataclass
from fractions import Fraction
from functools import lru_cache

import numpy as np

PAULI_NAMES = "IXYZ"
# pauli index -> (s1, s2) with the X^s2 Z^s1 convention
PAULI_CODE = ((0, 0), (0, 1), (1, 1), (1, 0))
CODE_TO_PAULI = {code: idx for idx, code in enumerate(PAULI_CODE)}


def pauli_mul(a: int, b: int) -> int:
    """Product of two Pauli classes (phase dropped): XOR of codes."""
    s1 = PAULI_CODE[a][0] ^ PAULI_CODE[b][0]
    s2 = PAULI_CODE[a][1] ^ PAULI_CODE[b][1]
    return CODE_TO_PAULI[(s1, s2)]


class ExactUnitary2:
    """2x2 matrix of Gaussian integers times an overall factor 2^(-k/2).

    entries holds (re, im) integer pairs row-major; scale is k.  Products are
    exact; trace-zero decisions never touch floating point.
    """

    __slots__ = ("entries", "scale")

    def __init__(self, entries, scale=0):
        self.entries = tuple(tuple(int(v) for v in e) for e in entries)
        self.scale = int(scale)

    def __matmul__(self, other: "ExactUnitary2") -> "ExactUnitary2":
        a, b = self.entries, other.entries
        out = []
        for i in range(2):
            for j in range(2):
                re = im = 0
                for l in range(2):
                    pr, pi = a[2 * i + l]
                    qr, qi = b[2 * l + j]
                    re += pr * qr - pi * qi
                    im += pr * qi + pi * qr
                out.append((re, im))
        return ExactUnitary2(out, self.scale + other.scale)

    def dagger(self) -> "ExactUnitary2":
        (ar, ai), (br, bi), (cr, ci), (dr, di) = self.entries
        return ExactUnitary2(
            [(ar, -ai), (cr, -ci), (br, -bi), (dr, -di)], self.scale
        )

    def scaled_by_int(self, s: int) -> "ExactUnitary2":
        return ExactUnitary2([(s * re, s * im) for re, im in self.entries], self.scale)

    def trace(self):
        (ar, ai), _, _, (dr, di) = self.entries
        return (ar + dr, ai + di)

    def trace_is_zero(self) -> bool:
        tr, ti = self.trace()
        return tr == 0 and ti == 0

    def abs_trace_sq(self) -> Fraction:
        """|trace|^2 of the represented operator, exact (phase invariant)."""
        tr, ti = self.trace()
        return Fraction(tr * tr + ti * ti, 1) / Fraction(2) ** self.scale

    def reduce(self) -> "ExactUnitary2":
        """Factor out (1+i) from all entries while possible, decrementing k.

        Each step multiplies the represented operator by a phase e^(-i pi/4),
        so reduction is only valid on phase classes; |trace|^2 is preserved.
        """
        entries = [list(e) for e in self.entries]
        scale = self.scale
        while True:
            if all((re + im) % 2 == 0 for re, im in entries):
                if all(re == 0 and im == 0 for re, im in entries):
                    break
                # z / (1+i) = ((re+im) + (im-re) i) / 2
                entries = [[(re + im) // 2, (im - re) // 2] for re, im in entries]
                scale -= 1
            else:
                break
        return ExactUnitary2(entries, scale)

    def __eq__(self, other) -> bool:
        return (
            isinstance(other, ExactUnitary2)
            and self.entries == other.entries
            and self.scale == other.scale
        )

    def __hash__(self):
        return hash((self.entries, self.scale))

    def __repr__(self):
        return f"ExactUnitary2({self.entries}, scale={self.scale})"


def _u(entries, scale=0):
    return ExactUnitary2(entries, scale)


U_I = _u([(1, 0), (0, 0), (0, 0), (1, 0)])
U_X = _u([(0, 0), (1, 0), (1, 0), (0, 0)])
U_Y = _u([(0, 0), (0, -1), (0, 1), (0, 0)])
U_Z = _u([(1, 0), (0, 0), (0, 0), (-1, 0)])
U_H = _u([(1, 0), (1, 0), (1, 0), (-1, 0)], scale=1)
U_S = _u([(1, 0), (0, 0), (0, 0), (0, 1)])

PAULI_UNITARIES = (U_I, U_X, U_Y, U_Z)


def rotation_for_pauli(p: int) -> ExactUnitary2:
    """(1/sqrt 2)(I - i P) for P in {X, Y, Z}: quarter turn about the P axis."""
    if p not in (1, 2, 3):
        raise ValueError("rotation axis must be X, Y or Z")
    mat = PAULI_UNITARIES[p]
    entries = []
    for (ir, ii), (pr, pi) in zip(U_I.entries, mat.entries):
        # I - i P entrywise: (ir + pi) + (ii - pr) i
        entries.append((ir + pi, ii - pr))
    return ExactUnitary2(entries, scale=1)


def conjugation_image(u: ExactUnitary2, p: int):
    """Return (q, sign) with u P u^dag = sign * Q exactly, for P = Pauli p.

    Works on any phase representative: u P u^dag is phase-free.  The product
    has scale 2k, and 2^k * (sign Q) is an integer matrix, so equality is an
    exact integer comparison (no reduction, so no phase ambiguity).
    """
    if p == 0:
        return 0, 1
    w = u @ PAULI_UNITARIES[p] @ u.dagger()
    assert w.scale % 2 == 0
    two_k = 2 ** (w.scale // 2)
    for q in (1, 2, 3):
        target = PAULI_UNITARIES[q]
        if w.entries == target.scaled_by_int(two_k).entries:
            return q, 1
        if w.entries == target.scaled_by_int(-two_k).entries:
            return q, -1
    raise AssertionError("conjugation image is not a signed Pauli")


def canonical_form(u: ExactUnitary2):
    """Phase-free class label: signed conjugation images of X and Z."""
    qx, sx = conjugation_image(u, 1)
    qz, sz = conjugation_image(u, 3)
    # sign encoded 0 for +, 1 for -, so tuples sort deterministically
    return (qx, 0 if sx > 0 else 1, qz, 0 if sz > 0 else 1)


@dataclass(frozen=True)
class EncodingMap:
    """Five-bit encoding of Clifford classes.

    iota(c) is the 5-bit binary of the class index, so the image is the
    strings with value < 24.  completion maps the remaining 8 values 24..31
    to arbitrary classes; enc_apply(x) is iota-inverse on the image and the
    completion entry elsewhere.
    """

    completion: tuple

    def __post_init__(self):
        if len(self.completion) != 8:
            raise ValueError("completion needs exactly 8 entries")

    def apply(self, x: int) -> int:
        if not 0 <= x < 32:
            raise ValueError("encoding input must be a 5-bit value")
        if x < 24:
            return x
        return self.completion[x - 24]

    def table(self) -> np.ndarray:
        return np.array([self.apply(x) for x in range(32)], dtype=np.int8)


def iota(c: int) -> str:
    if not 0 <= c < 24:
        raise ValueError("class index out of range")
    return format(c, "05b")


def iota_value(c: int) -> int:
    return int(c)


def enc_random(rng) -> EncodingMap:
    return EncodingMap(tuple(int(v) for v in rng.integers(0, 24, size=8)))


@dataclass
class GroupTable:
    """Precomputed lookup tables for the 24-class Clifford group mod phase."""

    reps: list
    canon: list
    mult: np.ndarray          # (24, 24) class of a.b
    inv: np.ndarray           # (24,)
    conj_pauli: np.ndarray    # (24, 4) image Pauli index of c P c^dag
    conj_sign: np.ndarray     # (24, 4) sign of c P c^dag in {+1, -1}
    traceless: np.ndarray     # (24,) bool
    abs_trace_sq: np.ndarray  # (24,) values in {0, 1, 2, 4}
    pauli_class: np.ndarray   # (4,) class index of each Pauli
    names: dict               # generator name -> class index

    def compose(self, a: int, b: int) -> int:
        return int(self.mult[a, b])

    def inverse(self, a: int) -> int:
        return int(self.inv[a])

    def conjugate_pauli(self, c: int, p: int):
        return int(self.conj_pauli[c, p]), int(self.conj_sign[c, p])

    def trace_is_zero(self, g: int) -> bool:
        return bool(self.traceless[g])

    def class_of_unitary(self, u: ExactUnitary2) -> int:
        return self._canon_index[canonical_form(u)]

    def dump_json(self) -> str:
        rows = []
        for idx in range(24):
            qx, sx, qz, sz = self.canon[idx]
            rows.append(
                {
                    "index": idx,
                    "image_of_X": ("-" if sx else "+") + PAULI_NAMES[qx],
                    "image_of_Z": ("-" if sz else "+") + PAULI_NAMES[qz],
                    "traceless": bool(self.traceless[idx]),
                    "abs_trace_sq": int(self.abs_trace_sq[idx]),
                }
            )
        return json.dumps(rows, indent=1)


def _bfs_closure():
    """Breadth-first closure of {I,H,S,X,Z} under right multiplication.

    Level 0 is the seed set sorted by canonical form; each next level is the
    set of newly reached classes, again sorted by canonical form.  This fixed
    enumeration order defines iota.
    """
    seeds = [U_I, U_H, U_S, U_X, U_Z]
    generators = [U_H, U_S, U_X, U_Z]
    seen = {}
    level = sorted(
        {canonical_form(u): u for u in seeds}.items(), key=lambda kv: kv[0]
    )
    order = []
    while level:
        for form, rep in level:
            seen[form] = rep.reduce()
            order.append(form)
        new = {}
        for form in [f for f, _ in level]:
            rep = seen[form]
            for g in generators:
                prod = rep @ g
                pform = canonical_form(prod)
                if pform not in seen and pform not in new:
                    new[pform] = prod.reduce()
        level = sorted(new.items(), key=lambda kv: kv[0])
    return order, seen


@lru_cache(maxsize=1)
def build_group_table() -> GroupTable:
    order, reps_by_form = _bfs_closure()
    if len(order) != 24:
        raise AssertionError(f"closure produced {len(order)} classes, expected 24")
    canon = list(order)
    index = {form: i for i, form in enumerate(order)}
    reps = [reps_by_form[form] for form in order]

    mult = np.zeros((24, 24), dtype=np.int8)
    for a in range(24):
        for b in range(24):
            mult[a, b] = index[canonical_form(reps[a] @ reps[b])]

    ident = index[canonical_form(U_I)]
    inv = np.zeros(24, dtype=np.int8)
    for a in range(24):
        hits = np.nonzero(mult[a] == ident)[0]
        assert len(hits) == 1
        inv[a] = hits[0]

    conj_pauli = np.zeros((24, 4), dtype=np.int8)
    conj_sign = np.zeros((24, 4), dtype=np.int8)
    for c in range(24):
        for p in range(4):
            q, s = conjugation_image(reps[c], p)
            conj_pauli[c, p] = q
            conj_sign[c, p] = s

    abs_tr = np.zeros(24, dtype=np.int8)
    for c in range(24):
        v = reps[c].abs_trace_sq()
        # |tr|^2 over the 24 classes: 4 (identity), 2 (quarter turns),
        # 1 (order-3 axis cyclers), 0 (half turns); all powers of two or zero,
        # so relation probabilities 4^-n |tr|^2 stay dyadic.
        if v.denominator != 1 or v.numerator not in (0, 1, 2, 4):
            raise AssertionError(f"|trace|^2 of class {c} is {v}, not in 0/1/2/4")
        abs_tr[c] = v.numerator
    traceless = abs_tr == 0

    pauli_class = np.array(
        [index[canonical_form(PAULI_UNITARIES[p])] for p in range(4)], dtype=np.int8
    )
    names = {
        "I": index[canonical_form(U_I)],
        "H": index[canonical_form(U_H)],
        "S": index[canonical_form(U_S)],
        "X": index[canonical_form(U_X)],
        "Y": index[canonical_form(U_Y)],
        "Z": index[canonical_form(U_Z)],
    }

    table = GroupTable(
        reps=reps,
        canon=canon,
        mult=mult,
        inv=inv,
        conj_pauli=conj_pauli,
        conj_sign=conj_sign,
        traceless=traceless,
        abs_trace_sq=abs_tr,
        pauli_class=pauli_class,
        names=names,
    )
    table._canon_index = index
    return table


def conjugate_pauli(c: int, p: int):
    """(Q, sign) with C P C^dag = sign Q, via the precomputed table."""
    return build_group_table().conjugate_pauli(c, p)


def trace_is_zero(g: int) -> bool:
    return build_group_table().trace_is_zero(g)


def enc_apply(e: EncodingMap, x: int) -> int:
    return e.apply(x)


def class_from_name(name: str) -> int:
    """Class index of a word over I, H, S, X, Y, Z (left factor applied last)."""
    t = build_group_table()
    idx = t.names["I"]
    for ch in reversed(name):
        idx = t.compose(t.names[ch], idx)
    return idx
