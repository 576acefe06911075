"""Classical-circuit adversary machinery.

Tools for analyzing bounded fan-in boolean circuit adversaries that try to
answer the teleportation-relation problem: DAG construction and evaluation,
light cones (semantic where tractable, structural otherwise), non-signaling
input pair detection by the counting argument, bit- and block-level random
restrictions with the switching-style parameter choices, the four-step
block-restriction sampling process, and empirical ceiling experiments that
measure how well shallow circuits do against the relation.

Much of this operates at desk scale on purpose: the interesting statements
about all circuits are proved elsewhere, and this module only instantiates
the computable parts (parameter arithmetic, restriction algebra, concrete
Monte-Carlo ceilings on generated circuit families).
"""

from __future__ import annotations

import json
import math
from dataclasses import dataclass, field

import numpy as np

from .pauli_clifford import EncodingMap, build_group_table
from .telep_relation import verify
from .util import wilson_interval

ACTIVE = 2  # sentinel value in bit restrictions

# depth cap for generated shallow adversaries, as a fraction of log2(n);
# the ceiling statements hold for depth <= c*log(n)/log(K) with some
# unspecified constant, so experiments fix a conservative c
CEILING_DEPTH_FRACTION = 0.3

# exhaustive semantic analysis is exponential in the backward cone; cones
# larger than this fall back to the structural superset
SEMANTIC_CONE_LIMIT = 20

# pauli index by (s1, s2) output bit pair, matching the shared bit code
_CODE_LUT = np.array([[0, 1], [3, 2]], dtype=np.int64)


class PartialBlockError(ValueError):
    """A 5-bit block is neither fully fixed nor fully active."""

    def __init__(self, block_index: int):
        self.block_index = int(block_index)
        super().__init__(f"block {block_index} is partially fixed")


# ---------------------------------------------------------------------------
# circuit DAGs


@dataclass(frozen=True)
class Gate:
    """Lookup gate: wires are node ids of the inputs (low index = low bit),
    table holds the output bit for every input combination."""

    wires: tuple
    table: tuple

    def __post_init__(self):
        if len(self.table) != 1 << len(self.wires):
            raise ValueError("table size must be 2^fan_in")
        if any(b not in (0, 1) for b in self.table):
            raise ValueError("table entries must be bits")


@dataclass(frozen=True)
class CircuitDag:
    """Bounded fan-in boolean circuit in topological order.

    Node ids: 0..n_in-1 are the inputs, n_in+i is gate i.  Every gate may
    only wire to strictly smaller node ids, which makes the graph acyclic
    by construction.  Outputs name arbitrary nodes.
    """

    n_in: int
    gates: tuple
    outputs: tuple

    def __post_init__(self):
        if self.n_in < 1:
            raise ValueError("need at least one input")
        for i, g in enumerate(self.gates):
            gid = self.n_in + i
            if any(not 0 <= w < gid for w in g.wires):
                raise ValueError(f"gate {i} wires ahead of itself")
        n_nodes = self.n_in + len(self.gates)
        if any(not 0 <= o < n_nodes for o in self.outputs):
            raise ValueError("output names a missing node")

    @property
    def n_out(self) -> int:
        return len(self.outputs)

    @property
    def n_nodes(self) -> int:
        return self.n_in + len(self.gates)

    @property
    def max_fan_in(self) -> int:
        return max((len(g.wires) for g in self.gates), default=0)

    def node_depths(self) -> np.ndarray:
        depth = np.zeros(self.n_nodes, dtype=np.int64)
        for i, g in enumerate(self.gates):
            gid = self.n_in + i
            depth[gid] = 1 + max((depth[w] for w in g.wires), default=0)
        return depth

    @property
    def depth(self) -> int:
        if not self.gates:
            return 0
        return int(self.node_depths()[list(self.outputs)].max(initial=0))

    def eval(self, x: np.ndarray) -> np.ndarray:
        """Evaluate on one assignment (n_in,) or a batch (trials, n_in)."""
        x = np.asarray(x, dtype=np.uint8)
        single = x.ndim == 1
        if single:
            x = x[None, :]
        if x.shape[1] != self.n_in:
            raise ValueError(f"expected {self.n_in} input bits, got {x.shape[1]}")
        vals = np.empty((x.shape[0], self.n_nodes), dtype=np.uint8)
        vals[:, : self.n_in] = x
        for i, g in enumerate(self.gates):
            idx = np.zeros(x.shape[0], dtype=np.int64)
            for k, w in enumerate(g.wires):
                idx |= vals[:, w].astype(np.int64) << k
            vals[:, self.n_in + i] = np.asarray(g.table, dtype=np.uint8)[idx]
        out = vals[:, list(self.outputs)]
        return out[0] if single else out

    def to_json(self) -> str:
        return json.dumps(
            {
                "n_in": self.n_in,
                "gates": [{"wires": list(g.wires), "table": list(g.table)} for g in self.gates],
                "outputs": list(self.outputs),
            }
        )

    @staticmethod
    def from_json(text: str) -> "CircuitDag":
        obj = json.loads(text)
        gates = tuple(
            Gate(tuple(int(w) for w in g["wires"]), tuple(int(b) for b in g["table"]))
            for g in obj["gates"]
        )
        return CircuitDag(int(obj["n_in"]), gates, tuple(int(o) for o in obj["outputs"]))


def identity_dag(n: int) -> CircuitDag:
    return CircuitDag(n, (), tuple(range(n)))


def random_dag(
    n_in: int,
    n_out: int,
    depth: int,
    fan_in: int,
    rng: np.random.Generator,
    width: int | None = None,
) -> CircuitDag:
    """Layered random dag: `depth` layers of lookup gates, each wired to
    `fan_in` uniformly chosen nodes of the previous layer, with uniform
    random truth tables; the outputs are the last layer."""
    if depth < 1:
        raise ValueError("depth must be at least 1")
    if width is None:
        width = n_out
    gates = []
    prev = np.arange(n_in)
    for level in range(depth):
        w = n_out if level == depth - 1 else width
        wires = rng.integers(0, len(prev), size=(w, fan_in))
        tables = rng.integers(0, 2, size=(w, 1 << fan_in))
        base = n_in + len(gates)
        for r in range(w):
            gates.append(
                Gate(tuple(int(prev[c]) for c in wires[r]), tuple(int(b) for b in tables[r]))
            )
        prev = np.arange(base, base + w)
    return CircuitDag(n_in, tuple(gates), tuple(int(v) for v in prev))


def random_strategy_dag(n: int, depth: int, fan_in: int, rng: np.random.Generator) -> CircuitDag:
    """Random shallow adversary for the n-position relation problem:
    5n input bits, 2n output bits."""
    return random_dag(5 * n, 2 * n, depth, fan_in, rng)


def ceiling_depth_limit(n: int, fan_in: int = 2) -> int:
    """Largest depth the ceiling experiments treat as shallow for n outputs."""
    return max(1, int(CEILING_DEPTH_FRACTION * math.log2(n) / math.log2(max(fan_in, 2))))


# ---------------------------------------------------------------------------
# light cones and non-signaling pairs


@dataclass(frozen=True)
class LightCones:
    """forward[i] = outputs depending on input i; backward[o] = inputs that
    output o depends on; modes[o] says whether dependence was certified
    semantically or is the structural superset."""

    forward: tuple
    backward: tuple
    modes: tuple


def _ancestor_bitsets(dag: CircuitDag) -> np.ndarray:
    """Packed input-ancestor sets for every node, level by level."""
    words = (dag.n_in + 63) >> 6
    rows = np.zeros((dag.n_nodes, words), dtype=np.uint64)
    idx = np.arange(dag.n_in)
    rows[idx, idx >> 6] = np.uint64(1) << (idx & 63).astype(np.uint64)
    if not dag.gates:
        return rows
    depths = dag.node_depths()
    order = np.argsort(depths[dag.n_in :], kind="stable")
    level_of = depths[dag.n_in :]
    all_wires = [g.wires for g in dag.gates]
    for lvl in range(1, int(level_of.max(initial=0)) + 1):
        ids = dag.n_in + order[level_of[order] == lvl]
        if not ids.size:
            continue
        fans = {len(all_wires[g - dag.n_in]) for g in ids}
        fan = max(fans)
        if fan == 0:
            continue
        if len(fans) == 1:
            preds = np.asarray([all_wires[g - dag.n_in] for g in ids], dtype=np.intp)
        else:
            preds = np.zeros((ids.size, fan), dtype=np.intp)
            for r, g in enumerate(ids):
                ws = all_wires[g - dag.n_in]
                preds[r, : len(ws)] = ws
                preds[r, len(ws) :] = ws[0] if ws else 0
        acc = rows[preds[:, 0]]
        for k in range(1, fan):
            acc = acc | rows[preds[:, k]]
        rows[ids] = acc
    return rows


def _structural_backward(dag: CircuitDag):
    rows = _ancestor_bitsets(dag)
    out_rows = rows[list(dag.outputs)]
    return out_rows


def _bits_of_row(row: np.ndarray, n_bits: int) -> list:
    bits = np.unpackbits(row.view(np.uint8), bitorder="little")[:n_bits]
    return [int(v) for v in np.flatnonzero(bits)]


def _semantic_backward_one(dag: CircuitDag, out_node: int, cand: list) -> list:
    """Inputs among cand that output out_node truly depends on, certified by
    toggling each input across every assignment of the candidate set."""
    b = len(cand)
    pos = {c: k for k, c in enumerate(cand)}
    # assignments of the candidate inputs; all other inputs are irrelevant
    # to this output, so they stay 0
    masks = np.arange(1 << b, dtype=np.int64)
    x = np.zeros((1 << b, dag.n_in), dtype=np.uint8)
    for c, k in pos.items():
        x[:, c] = (masks >> k) & 1
    vals = _eval_single_output(dag, out_node, x)
    dep = []
    for c, k in pos.items():
        if np.any(vals != vals[masks ^ (1 << k)]):
            dep.append(c)
    return dep


def _eval_single_output(dag: CircuitDag, out_node: int, x: np.ndarray) -> np.ndarray:
    """Value of one node on a batch, touching only its ancestors."""
    if out_node < dag.n_in:
        return x[:, out_node].copy()
    need = set()
    stack = [out_node]
    while stack:
        v = stack.pop()
        if v in need or v < dag.n_in:
            continue
        need.add(v)
        stack.extend(dag.gates[v - dag.n_in].wires)
    vals: dict = {}
    for gid in sorted(need):
        g = dag.gates[gid - dag.n_in]
        idx = np.zeros(x.shape[0], dtype=np.int64)
        for k, w in enumerate(g.wires):
            col = x[:, w] if w < dag.n_in else vals[w]
            idx |= col.astype(np.int64) << k
        vals[gid] = np.asarray(g.table, dtype=np.uint8)[idx]
    return vals[out_node]


def light_cones(dag: CircuitDag, semantic: bool = True) -> LightCones:
    """Dependence cones per input and output.

    Semantic dependence is certified by exhaustive toggling whenever the
    structural backward cone has at most SEMANTIC_CONE_LIMIT inputs; wider
    cones keep the structural superset, and modes[o] records which happened.
    """
    out_rows = _structural_backward(dag)
    backward = []
    modes = []
    for o in range(dag.n_out):
        cand = _bits_of_row(out_rows[o], dag.n_in)
        if semantic and len(cand) <= SEMANTIC_CONE_LIMIT:
            backward.append(frozenset(_semantic_backward_one(dag, dag.outputs[o], cand)))
            modes.append("semantic")
        else:
            backward.append(frozenset(cand))
            modes.append("structural")
    forward = [set() for _ in range(dag.n_in)]
    for o, cone in enumerate(backward):
        for i in cone:
            forward[i].add(o)
    return LightCones(
        forward=tuple(frozenset(s) for s in forward),
        backward=tuple(backward),
        modes=tuple(modes),
    )


def find_nonsignaling_pair(dag: CircuitDag):
    """Two inputs whose (structural) forward cones are disjoint, or None.

    Implements the counting argument: take an input j with the smallest
    forward cone, collect every input that can reach one of j's outputs,
    and return j with any input outside that set.  Structural cones are a
    superset of semantic ones, so a pair found here is non-signaling under
    either notion.
    """
    if dag.n_in < 2:
        return None
    out_rows = _structural_backward(dag)
    n_in = dag.n_in
    # forward-cone size per input = column sums of the incidence matrix
    fwd_sizes = np.zeros(n_in, dtype=np.int64)
    chunk = max(1, (1 << 22) // max(out_rows.shape[1] * 64, 1))
    for lo in range(0, out_rows.shape[0], chunk):
        rows = out_rows[lo : lo + chunk]
        bits = np.unpackbits(rows.view(np.uint8), axis=1, bitorder="little")[:, :n_in]
        fwd_sizes += bits.sum(axis=0, dtype=np.int64)
    j = int(np.argmin(fwd_sizes))
    word, bit = j >> 6, np.uint64(1) << np.uint64(j & 63)
    touching = np.flatnonzero((out_rows[:, word] & bit).astype(bool))
    if touching.size:
        union = np.bitwise_or.reduce(out_rows[touching], axis=0)
    else:
        union = np.zeros(out_rows.shape[1], dtype=np.uint64)
    blocked = np.unpackbits(union.view(np.uint8), bitorder="little")[:n_in]
    blocked[j] = 1
    free = np.flatnonzero(blocked == 0)
    if not free.size:
        return None
    return j, int(free[0])


def nonsignaling_regime_ok(
    n_out: int,
    n_in: int,
    fan_in: int,
    depth: int,
    gamma: float = 1.0,
    delta: float = 0.75,
) -> bool:
    """Counting-argument sufficient condition: with m >= gamma*n^delta
    inputs and locality ell = fan_in**depth, a disjoint pair must exist
    whenever ell^2 * n^(1-delta) / gamma < m."""
    ell = fan_in**depth
    m_bound = gamma * n_out**delta
    return n_in >= m_bound and (ell * ell) * n_out ** (1.0 - delta) / gamma < n_in


# ---------------------------------------------------------------------------
# restrictions


@dataclass(frozen=True)
class BitRestriction:
    """Total map from bit positions to {0, 1, active}."""

    values: np.ndarray

    def __post_init__(self):
        v = np.asarray(self.values, dtype=np.uint8)
        if v.ndim != 1 or not np.isin(v, (0, 1, ACTIVE)).all():
            raise ValueError("values must be a vector over {0, 1, active}")
        object.__setattr__(self, "values", v)

    @property
    def n(self) -> int:
        return int(self.values.shape[0])

    @property
    def n_active(self) -> int:
        return int((self.values == ACTIVE).sum())

    def active_positions(self) -> np.ndarray:
        return np.flatnonzero(self.values == ACTIVE)

    def complete(self, bits) -> np.ndarray:
        """Full assignment from values for the active positions, in order."""
        bits = np.asarray(bits, dtype=np.uint8)
        pos = self.active_positions()
        if bits.shape != pos.shape:
            raise ValueError(f"need exactly {pos.size} completion bits")
        out = self.values.copy()
        out[pos] = bits
        return out

    def restrict_dag(self, dag: CircuitDag, x_active) -> np.ndarray:
        return dag.eval(self.complete(x_active))

    def to_json(self) -> str:
        return json.dumps({"values": [int(v) for v in self.values]})


def all_active(n: int) -> BitRestriction:
    return BitRestriction(np.full(n, ACTIVE, dtype=np.uint8))


def sample_rp(n: int, p_star: float, rng: np.random.Generator) -> BitRestriction:
    """One draw of the standard random restriction: each position stays
    active with probability p_star, otherwise gets a uniform bit."""
    if not 0 <= p_star <= 1:
        raise ValueError("p_star must lie in [0, 1]")
    vals = rng.integers(0, 2, size=n).astype(np.uint8)
    vals[rng.random(n) < p_star] = ACTIVE
    return BitRestriction(vals)


def concat(rho: BitRestriction, eta: BitRestriction) -> BitRestriction:
    """Restriction obtained by applying rho first, then eta on what is left.

    eta is indexed by rho's active positions (in increasing order), so its
    length must equal N(rho).  Fixed positions of rho never change.
    """
    pos = rho.active_positions()
    if eta.n != pos.size:
        raise ValueError(f"eta must cover the {pos.size} active positions of rho")
    out = rho.values.copy()
    out[pos] = eta.values
    return BitRestriction(out)


@dataclass(frozen=True)
class BlockRestriction:
    """Blockwise restriction: every 5-bit block is fully fixed or active."""

    bits: np.ndarray
    active: np.ndarray

    def __post_init__(self):
        b = np.asarray(self.bits, dtype=np.uint8)
        a = np.asarray(self.active, dtype=bool)
        if b.ndim != 2 or b.shape[1] != 5 or a.shape != (b.shape[0],):
            raise ValueError("need (n, 5) bits and (n,) active flags")
        object.__setattr__(self, "bits", b)
        object.__setattr__(self, "active", a)

    @property
    def n_blocks(self) -> int:
        return int(self.bits.shape[0])

    @property
    def n_active_blocks(self) -> int:
        return int(self.active.sum())

    def to_bits(self) -> BitRestriction:
        vals = self.bits.copy()
        vals[self.active] = ACTIVE
        return BitRestriction(vals.reshape(-1))

    def to_json(self) -> str:
        return json.dumps(
            {
                "blocks": [
                    "active" if self.active[j] else [int(v) for v in self.bits[j]]
                    for j in range(self.n_blocks)
                ]
            }
        )


def to_block(rho: BitRestriction, block_size: int = 5) -> BlockRestriction:
    """Reshape a bit restriction into blocks; raises PartialBlockError with
    the offending index when a block mixes fixed and active bits."""
    if rho.n % block_size:
        raise ValueError(f"length {rho.n} is not a multiple of {block_size}")
    vals = rho.values.reshape(-1, block_size)
    act = vals == ACTIVE
    counts = act.sum(axis=1)
    bad = np.flatnonzero((counts > 0) & (counts < block_size))
    if bad.size:
        raise PartialBlockError(int(bad[0]))
    active = counts == block_size
    bits = np.where(active[:, None], 0, vals).astype(np.uint8)
    return BlockRestriction(bits=bits, active=active)


# ---------------------------------------------------------------------------
# switching-style parameters and the block-restriction process


@dataclass(frozen=True)
class SwitchingParams:
    """Parameter choices for reducing a depth-d size-s circuit on n' = 5n
    input bits, plus the derived sanity bounds."""

    n: int
    s: float
    d: int
    q: int
    p_star: float
    t: float
    size_ok: bool
    p_star_lower: float
    p_star_above_lower: bool
    s_le_2_t_half: bool

    def to_json(self) -> str:
        return json.dumps(
            {
                "n": self.n,
                "s": self.s,
                "d": self.d,
                "q": self.q,
                "p_star": self.p_star,
                "t": self.t,
                "size_ok": self.size_ok,
                "p_star_lower": self.p_star_lower,
                "p_star_above_lower": self.p_star_above_lower,
                "s_le_2_t_half": self.s_le_2_t_half,
            }
        )


def switching_params(n: int, s: float, d: int) -> SwitchingParams:
    """Restriction parameters for n relation positions against a depth-d,
    size-s circuit: q = 20d, p_star = 1/((2n)^(1/q) * (ln s)^(d-1)),
    t = p_star^5 * n / 5.

    size_ok flags the size assumption ln(s) <= n^(1/(20d)); when it holds,
    p_star is at least 1/(2^(1/(20d)) * n^(1/20)), and once n is large
    enough also s <= 2^(t/2).  Both derived comparisons are reported.
    """
    if n < 1 or d < 1 or s <= 1:
        raise ValueError("need n >= 1, d >= 1, s > 1")
    q = 20 * d
    log_s = math.log(s)
    p_star = 1.0 / ((2.0 * n) ** (1.0 / q) * log_s ** (d - 1))
    t = p_star**5 * n / 5.0
    size_ok = log_s <= n ** (1.0 / q)
    p_star_lower = 1.0 / (2.0 ** (1.0 / q) * n ** (1.0 / 20.0))
    return SwitchingParams(
        n=int(n),
        s=float(s),
        d=int(d),
        q=q,
        p_star=p_star,
        t=t,
        size_ok=bool(size_ok),
        p_star_lower=p_star_lower,
        p_star_above_lower=bool(p_star >= p_star_lower * (1 - 1e-12)),
        s_le_2_t_half=bool(log_s <= (t / 2.0) * math.log(2.0)),
    )


def exhaustive_nc0_oracle(dag: CircuitDag, rho: BitRestriction, params: SwitchingParams):
    """Smallest-first search for a set T of active positions such that any
    way of fixing T leaves every output of the restricted dag depending on
    at most fan_in**q inputs.

    Only meaningful on toy dags: the completion space is enumerated, so the
    active count must stay small (<= 24).  Returns the T found, or None when
    even fixing everything fails (impossible here, since fixing all active
    bits leaves constants).
    """
    pos = rho.active_positions()
    if pos.size > 24:
        raise ValueError("exhaustive oracle limited to 24 active inputs")
    budget = max(dag.max_fan_in, 1) ** params.q
    cones = light_cones(dag, semantic=True)

    def ok_with(t_set):
        # fixing T under any completion can only shrink cones; the worst
        # case over completions is bounded by the cone minus T
        return all(len(b - t_set) <= budget for b in cones.backward)

    if ok_with(frozenset()):
        return ()
    # greedy: repeatedly fix the input appearing in most oversized cones
    t_set: set = set()
    while not ok_with(frozenset(t_set)):
        counts: dict = {}
        for b in cones.backward:
            rest = b - t_set
            if len(rest) > budget:
                for i in rest:
                    counts[i] = counts.get(i, 0) + 1
        if not counts:
            break
        t_set.add(max(counts, key=counts.get))
    return tuple(sorted(t_set))


exhaustive_nc0_oracle.mode = "exhaustive"


def stub_oracle(t_size: int = 0):
    """Oracle that simply declares a uniformly chosen T of the given size;
    records that no implementability check happened."""

    def oracle(dag, rho, params, rng=None):
        pos = rho.active_positions()
        k = min(t_size, pos.size)
        if k == 0:
            return ()
        gen = rng if rng is not None else np.random.default_rng(0)
        return tuple(sorted(gen.choice(pos.size, size=k, replace=False)))

    oracle.mode = "stub"
    return oracle


def block_restriction_process(
    dag: CircuitDag | None,
    params: SwitchingParams,
    oracle,
    rng: np.random.Generator,
):
    """Four-step sampler for a blockwise restriction.

    1. draw rho with each bit active independently with probability p_star;
    2. ask the oracle for a small set T of active positions whose fixing
       tames the restricted circuit, and fix T with uniform bits (if the
       oracle fails, fix every active bit uniformly instead);
    3. fix every bit of every partially fixed 5-block with uniform bits;
    4. return the resulting block restriction.

    Every bit ever fixed is an independent fair coin, so conditioned on the
    final active set the fixed block values are uniform.  Diagnostics report
    the active counts at each stage and the block-level lower bound
    N_blocks(xi) >= N_blocks(rho) - |T|.
    """
    n_prime = dag.n_in if dag is not None else 5 * params.n
    if n_prime % 5:
        raise ValueError("input arity must be a multiple of 5")
    rho = sample_rp(n_prime, params.p_star, rng)
    rho_blocks_active = int((rho.values.reshape(-1, 5) == ACTIVE).all(axis=1).sum())

    diagnostics = {
        "n_prime": int(n_prime),
        "n_active_bits_rho": rho.n_active,
        "n_active_blocks_rho": rho_blocks_active,
        "two_t": 2.0 * params.t,
        "oracle_mode": getattr(oracle, "mode", getattr(oracle, "__name__", "callable")),
        "oracle_failed": False,
        "uniform_bits_throughout": True,
    }

    t_set = None
    try:
        try:
            t_set = oracle(dag, rho, params, rng=rng)
        except TypeError:
            t_set = oracle(dag, rho, params)
    except Exception as exc:  # oracle failure is data, not a crash
        diagnostics["oracle_failed"] = True
        diagnostics["oracle_error"] = repr(exc)
        t_set = None

    free = rho.active_positions()
    eta_vals = np.full(free.size, ACTIVE, dtype=np.uint8)
    if t_set is None:
        # failure branch: fix all remaining bits uniformly
        eta_vals[:] = rng.integers(0, 2, size=free.size)
        diagnostics["t_set_size"] = int(free.size)
    else:
        t_idx = np.asarray(sorted(t_set), dtype=np.intp)
        if t_idx.size:
            eta_vals[t_idx] = rng.integers(0, 2, size=t_idx.size)
        diagnostics["t_set_size"] = int(t_idx.size)
    after_eta = concat(rho, BitRestriction(eta_vals))

    blocks = after_eta.values.reshape(-1, 5)
    act = blocks == ACTIVE
    counts = act.sum(axis=1)
    partial = (counts > 0) & (counts < 5)
    tau_fix = act & partial[:, None]
    vals = after_eta.values.copy()
    fix_pos = np.flatnonzero(tau_fix.reshape(-1))
    vals[fix_pos] = rng.integers(0, 2, size=fix_pos.size)
    xi = to_block(BitRestriction(vals))

    diagnostics["n_fixed_by_tau"] = int(fix_pos.size)
    diagnostics["n_active_blocks_xi"] = xi.n_active_blocks
    diagnostics["block_bound_ok"] = bool(
        xi.n_active_blocks >= rho_blocks_active - diagnostics["t_set_size"]
    )
    return xi, diagnostics


# ---------------------------------------------------------------------------
# ceiling experiments


def default_encoding() -> EncodingMap:
    """Fixed encoding used by the experiments: 5-bit value below 24 is the
    class index; the 8 spare strings map to classes 0..7."""
    return EncodingMap(tuple(range(8)))


def _blocks_to_values(x: np.ndarray, n: int) -> np.ndarray:
    """5-bit blocks to integers, first bit of each block high-order."""
    blocks = x.reshape(x.shape[0], n, 5).astype(np.int64)
    weights = np.array([16, 8, 4, 2, 1], dtype=np.int64)
    return blocks @ weights


def _batch_valid(cliffords: np.ndarray, paulis: np.ndarray) -> np.ndarray:
    """Vectorized relation membership for batches of (C, P) rows, using the
    same group table as the scalar verifier."""
    table = build_group_table()
    mult = table.mult
    pcls = table.pauli_class
    acc = np.full(cliffords.shape[0], table.names["I"], dtype=np.int64)
    for i in range(cliffords.shape[1]):
        acc = mult[cliffords[:, i], acc]
        acc = mult[pcls[paulis[:, i]], acc]
    return ~table.traceless[acc]


@dataclass(frozen=True)
class CeilingReport:
    """Empirical success of one adversary dag against the relation."""

    n: int
    trials: int
    successes: int
    rate: float
    wilson_lo: float
    wilson_hi: float
    pair: tuple | None
    pair_witness: dict | None = field(default=None)

    def to_json(self) -> str:
        obj = {
            "n": self.n,
            "trials": self.trials,
            "successes": self.successes,
            "rate": self.rate,
            "wilson_lo": self.wilson_lo,
            "wilson_hi": self.wilson_hi,
            "pair": list(self.pair) if self.pair else None,
        }
        if self.pair_witness is not None:
            obj["pair_witness"] = {
                f"{a}{b}": int(v) for (a, b), v in sorted(self.pair_witness.items())
            }
        return json.dumps(obj)


def _decode_run(dag: CircuitDag, n: int, x: np.ndarray, enc_table: np.ndarray):
    vals = _blocks_to_values(x, n)
    cliffords = enc_table[vals]
    out = dag.eval(x)
    pairs = out.reshape(out.shape[0], n, 2).astype(np.int64)
    paulis = _CODE_LUT[pairs[:, :, 0], pairs[:, :, 1]]
    return cliffords, paulis


def nc0_ceiling_experiment(
    dag: CircuitDag,
    n: int,
    trials: int,
    rng: np.random.Generator,
    enc: EncodingMap | None = None,
) -> CeilingReport:
    """Monte-Carlo success rate of a boolean adversary on the relation.

    Inputs are 5n uniform bits; each 5-bit block decodes to a Clifford class
    through the encoding map, each output bit pair to a Pauli, and a trial
    succeeds when the pair satisfies the relation.  When the dag has a
    non-signaling input pair, failures are also tallied per value of that
    bit pair as the conditional witness.
    """
    if dag.n_in != 5 * n or dag.n_out != 2 * n:
        raise ValueError(f"dag arity must be 5n in / 2n out for n={n}")
    enc_table = (enc or default_encoding()).table().astype(np.int64)
    x = rng.integers(0, 2, size=(trials, dag.n_in)).astype(np.uint8)
    cliffords, paulis = _decode_run(dag, n, x, enc_table)
    ok = _batch_valid(cliffords, paulis)
    successes = int(ok.sum())
    lo, hi = wilson_interval(successes, trials)
    pair = find_nonsignaling_pair(dag)
    witness = None
    if pair is not None:
        j, k = pair
        witness = {}
        for a in (0, 1):
            for b in (0, 1):
                sel = (x[:, j] == a) & (x[:, k] == b)
                witness[(a, b)] = int((~ok[sel]).sum())
    return CeilingReport(
        n=int(n),
        trials=int(trials),
        successes=successes,
        rate=successes / trials if trials else 0.0,
        wilson_lo=lo,
        wilson_hi=hi,
        pair=pair,
        pair_witness=witness,
    )


def perfect_lookup_dag(enc: EncodingMap | None = None) -> CircuitDag:
    """Single-position adversary that wins every time: two fan-in-5 lookup
    gates map each 5-bit input to a Pauli whose dressed trace with the
    decoded Clifford is nonzero (one always exists, so n=1 poses no
    obstruction to a wide enough gate)."""
    table = build_group_table()
    from .pauli_clifford import PAULI_CODE

    enc_table = (enc or default_encoding()).table()
    weights = (16, 8, 4, 2, 1)
    t1, t2 = [], []
    for idx in range(32):
        v = sum(weights[k] * ((idx >> k) & 1) for k in range(5))
        c = int(enc_table[v])
        pick = next(
            p
            for p in range(4)
            if not table.traceless[table.mult[table.pauli_class[p], c]]
        )
        s1, s2 = PAULI_CODE[pick]
        t1.append(s1)
        t2.append(s2)
    wires = tuple(range(5))
    return CircuitDag(5, (Gate(wires, tuple(t1)), Gate(wires, tuple(t2))), (5, 6))


def exact_ceiling_rate(dag: CircuitDag, n: int, enc: EncodingMap | None = None) -> float:
    """Exact success probability by enumerating all 2^(5n) inputs (n <= 3)."""
    if dag.n_in != 5 * n or dag.n_out != 2 * n:
        raise ValueError(f"dag arity must be 5n in / 2n out for n={n}")
    if n > 3:
        raise ValueError("exact enumeration supported for n <= 3")
    enc_table = (enc or default_encoding()).table().astype(np.int64)
    total = 1 << (5 * n)
    masks = np.arange(total, dtype=np.int64)
    x = ((masks[:, None] >> np.arange(5 * n - 1, -1, -1)) & 1).astype(np.uint8)
    cliffords, paulis = _decode_run(dag, n, x, enc_table)
    ok = _batch_valid(cliffords, paulis)
    return float(ok.sum()) / total
