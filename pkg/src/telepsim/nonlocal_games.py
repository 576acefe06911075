"""Bell-pair pseudo-telepathy games with single-qubit control.

Two players share two maximally entangled pairs.  Each applies a fixed
single-qubit rotation chosen by a trit input (alpha for the first player,
beta for the second), then Bell-measures their two halves.  Outcomes are
Pauli labels: the bit pair (s1, s2) names the Pauli X^s2 Z^s1.  The joint
outcome distribution is a 16-entry dyadic map per input pair, and local
post-processing of the outcome bits yields a winning assignment for the
magic-square parity game on every outcome of nonzero probability.

This module carries the exact distribution, the post-processing tables,
brute-force classical-value oracles, and the counting bounds used for
strategies keyed by Clifford or 5-bit-string inputs.
"""

from __future__ import annotations

import itertools
from fractions import Fraction
from typing import Callable, Sequence

import numpy as np

from .pauli_clifford import (
    CODE_TO_PAULI,
    PAULI_CODE,
    EncodingMap,
    build_group_table,
    class_from_name,
    rotation_for_pauli,
)


def pauli_to_bits(p: int) -> tuple:
    """Pauli class -> Bell outcome bits (s1, s2) with P = X^s2 Z^s1."""
    return PAULI_CODE[p]


def bits_to_pauli(s1: int, s2: int) -> int:
    return CODE_TO_PAULI[(s1, s2)]


def constants_UV() -> tuple:
    """The six rotation classes: three per player, exactly composed."""
    table = build_group_table()
    rx, ry, rz = (rotation_for_pauli(p) for p in (1, 2, 3))
    z = table.reps[table.names["Z"]]
    i2 = table.reps[table.names["I"]]
    u1 = table.class_of_unitary(rx)
    u2 = table.class_of_unitary(z @ ry.dagger())
    u3 = table.class_of_unitary(rz.dagger())
    v1 = table.class_of_unitary(i2)
    v2 = table.class_of_unitary(rz @ ry.dagger())
    v3 = table.class_of_unitary(rx.dagger() @ ry)
    return (u1, u2, u3, v1, v2, v3)


def _check_input(alpha: int, beta: int) -> None:
    if alpha not in (1, 2, 3) or beta not in (1, 2, 3):
        raise ValueError(f"inputs must lie in {{1,2,3}}, got ({alpha}, {beta})")


def game_distribution(alpha: int, beta: int) -> dict:
    """Exact outcome distribution: maps (P, Q) -> probability.

    P is the first player's Bell outcome, Q the second player's.  In the
    four-factor trace evaluating the probability, each player's rotation
    meets the *other* player's outcome Pauli (the entangled pairs cross):
    p(P, Q) = |tr(U_alpha Q V_beta P)|^2 / 16.  Probabilities are dyadic
    and sum to exactly 1.
    """
    _check_input(alpha, beta)
    table = build_group_table()
    u1, u2, u3, v1, v2, v3 = constants_UV()
    ua = (u1, u2, u3)[alpha - 1]
    vb = (v1, v2, v3)[beta - 1]
    dist = {}
    for p in range(4):
        for q in range(4):
            m = table.compose(
                ua,
                table.compose(
                    table.pauli_class[q], table.compose(vb, table.pauli_class[p])
                ),
            )
            dist[(p, q)] = Fraction(int(table.abs_trace_sq[m]), 16)
    assert sum(dist.values()) == 1
    return dist


def postprocess_alice(alpha: int, u: Sequence[int]) -> tuple:
    """Eigenvalue triple for row alpha from the first player's outcome bits.

    Each triple multiplies to +1; the two measured bits fill the two slots
    whose observables the measurement fixes, the third is their product.
    """
    u1, u2 = (int(u[0]) & 1, int(u[1]) & 1)
    s1, s2, s12 = (-1) ** u1, (-1) ** u2, (-1) ** (u1 ^ u2)
    if alpha == 1:
        return (s1, s2, s12)
    if alpha == 2:
        return (s12, s1, s2)
    if alpha == 3:
        return (s2, s12, s1)
    raise ValueError(f"alpha must lie in {{1,2,3}}, got {alpha}")


def postprocess_bob(beta: int, v: Sequence[int]) -> tuple:
    """Eigenvalue triple for column beta from the second player's outcome bits.

    Each triple multiplies to -1.  The bit-to-slot assignment follows the
    position, within the column, of the observable each bit measures; the
    remaining slot is forced by the column parity.
    """
    v1, v2 = (int(v[0]) & 1, int(v[1]) & 1)
    s1, s2, s12 = (-1) ** v1, (-1) ** v2, (-1) ** (v1 ^ v2)
    if beta == 1:
        return (s1, -s12, s2)
    if beta == 2:
        return (-s12, s2, s1)
    if beta == 3:
        return (s2, s1, -s12)
    raise ValueError(f"beta must lie in {{1,2,3}}, got {beta}")


postprocess = postprocess_alice


def wins_magic_square(alpha: int, beta: int, x: Sequence[int], y: Sequence[int]) -> bool:
    """The parity-game win predicate on post-processed triples."""
    return (
        x[0] * x[1] * x[2] == 1
        and y[0] * y[1] * y[2] == -1
        and y[alpha - 1] * x[beta - 1] == 1
    )


def outcome_wins(alpha: int, beta: int, p: int, q: int) -> bool:
    """Win predicate applied to raw Pauli outcomes (first player p, second q)."""
    x = postprocess_alice(alpha, pauli_to_bits(p))
    y = postprocess_bob(beta, pauli_to_bits(q))
    return wins_magic_square(alpha, beta, x, y)


def win_on_support() -> bool:
    """Every nonzero-probability outcome wins, for all nine input pairs."""
    for alpha, beta in itertools.product((1, 2, 3), repeat=2):
        dist = game_distribution(alpha, beta)
        for (p, q), prob in dist.items():
            if prob > 0 and not outcome_wins(alpha, beta, p, q):
                return False
    return True


def quantum_strategy_winrate(trials: int, rng: np.random.Generator) -> float:
    """Empirical win rate of the ideal strategy; must come out exactly 1.

    Outcomes are drawn exactly: the 16 dyadic weights are integers over 16,
    so one uniform draw from {0..15} suffices per round.
    """
    if trials < 1:
        raise ValueError("need at least one trial")
    dists = {
        (a, b): list(game_distribution(a, b).items())
        for a, b in itertools.product((1, 2, 3), repeat=2)
    }
    wins = 0
    inputs = rng.integers(1, 4, size=(trials, 2))
    draws = rng.integers(0, 16, size=trials)
    for (alpha, beta), v in zip(inputs, draws):
        acc = 0
        for (p, q), prob in dists[(int(alpha), int(beta))]:
            acc += int(prob * 16)
            if v < acc:
                break
        wins += outcome_wins(int(alpha), int(beta), p, q)
    return wins / trials


_PLUS_TRIPLES = [t for t in itertools.product((1, -1), repeat=3) if t[0] * t[1] * t[2] == 1]
_MINUS_TRIPLES = [t for t in itertools.product((1, -1), repeat=3) if t[0] * t[1] * t[2] == -1]


def magic_square_classical_value() -> Fraction:
    """Exact classical value of the parity game: max wins/9 over all strategies.

    Deterministic strategies suffice (shared randomness is a convex mixture):
    4 parity-respecting triples per input and player, 64 x 64 pairs total.
    """
    best = 0
    for xrows in itertools.product(_PLUS_TRIPLES, repeat=3):
        for ycols in itertools.product(_MINUS_TRIPLES, repeat=3):
            wins = sum(
                ycols[beta - 1][alpha - 1] * xrows[alpha - 1][beta - 1] == 1
                for alpha in (1, 2, 3)
                for beta in (1, 2, 3)
            )
            best = max(best, wins)
    return Fraction(best, 9)


def game_classical_value() -> Fraction:
    """Exact classical value of the possibilistic game: brute force, reported.

    Players answer with Bell-outcome bit pairs as functions of their own
    trit; a round is won when the answered pair has nonzero probability.
    """
    support = {
        (a, b): {k for k, prob in game_distribution(a, b).items() if prob > 0}
        for a, b in itertools.product((1, 2, 3), repeat=2)
    }
    best = 0
    for fa in itertools.product(range(4), repeat=3):
        for fb in itertools.product(range(4), repeat=3):
            wins = sum(
                (fa[alpha - 1], fb[beta - 1]) in support[(alpha, beta)]
                for alpha in (1, 2, 3)
                for beta in (1, 2, 3)
            )
            best = max(best, wins)
    return Fraction(best, 9)


def _traceless_four_factor() -> np.ndarray:
    # zero[a, p, b, q] = trace of U_a P V_b Q vanishes
    table = build_group_table()
    u1, u2, u3, v1, v2, v3 = constants_UV()
    zero = np.zeros((3, 4, 3, 4), dtype=bool)
    for ai, ua in enumerate((u1, u2, u3)):
        for p in range(4):
            for bi, vb in enumerate((v1, v2, v3)):
                for q in range(4):
                    m = table.compose(
                        ua,
                        table.compose(
                            table.pauli_class[p],
                            table.compose(vb, table.pauli_class[q]),
                        ),
                    )
                    zero[ai, p, bi, q] = bool(table.traceless[m])
    return zero


def strategy_witness_counts() -> np.ndarray:
    """For each of the 4096 strategy-function pairs, the number of
    input pairs whose four-factor trace vanishes; all entries must be >= 1."""
    zero = _traceless_four_factor()
    counts = np.empty((64, 64), dtype=np.int32)
    fs = list(itertools.product(range(4), repeat=3))
    for i, f in enumerate(fs):
        sub = zero[np.arange(3), f]  # (3 alphas, 3 betas, 4 qs)
        for j, g in enumerate(fs):
            counts[i, j] = int(sub[:, np.arange(3), g].sum())
    return counts


def all_strategies_have_witness() -> bool:
    """Every pair of Pauli-valued trit strategies has a vanishing-trace witness."""
    return bool((strategy_witness_counts() >= 1).all())


def gamma_bound_check(fprime: Sequence[int], gprime: Sequence[int]) -> tuple:
    """Count Clifford input pairs whose dressed trace vanishes; bound is 16.

    fprime, gprime: Pauli class per Clifford class (length 24).  Counts
    (U, V) with tr(U fprime(U) V gprime(V)) = 0 over all 576 pairs; the
    count never drops below 16 (probability 1/36).
    """
    table = build_group_table()
    fp = np.asarray(fprime, dtype=np.int64)
    gp = np.asarray(gprime, dtype=np.int64)
    if fp.shape != (24,) or gp.shape != (24,):
        raise ValueError("strategies must assign a Pauli to each of 24 classes")
    m1 = table.mult[np.arange(24), table.pauli_class[fp]]
    m2 = table.mult[np.arange(24), table.pauli_class[gp]]
    count = int(table.traceless[table.mult[m1[:, None], m2[None, :]]].sum())
    return count, count >= 16


def encoded_bound_check(
    enc1: EncodingMap,
    enc2: EncodingMap,
    f: Sequence[int],
    g: Sequence[int],
) -> Fraction:
    """Exact vanishing-trace probability for 5-bit-string inputs.

    f, g: Pauli class per 5-bit string (length 32).  Each string decodes to
    a Clifford through its encoding map; returns the fraction of the 1024
    string pairs whose dressed trace vanishes.  Always >= 1/81 (in fact the
    string pairs decoding injectively cover a 9/16 fraction, so the
    Clifford-level 1/36 bound already gives 1/64).
    """
    table = build_group_table()
    fa = np.asarray(f, dtype=np.int64)
    ga = np.asarray(g, dtype=np.int64)
    if fa.shape != (32,) or ga.shape != (32,):
        raise ValueError("strategies must assign a Pauli to each of 32 strings")
    c1 = enc1.table().astype(np.int64)
    c2 = enc2.table().astype(np.int64)
    m1 = table.mult[c1, table.pauli_class[fa]]
    m2 = table.mult[c2, table.pauli_class[ga]]
    count = int(table.traceless[table.mult[m1[:, None], m2[None, :]]].sum())
    return Fraction(count, 1024)
