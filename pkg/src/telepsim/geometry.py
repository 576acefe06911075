"""3D placement of the wedge ring and locality verification.

The fault-tolerant ring of ``surface_code.build_uext`` is realised in real
space as an amphitheatre wall: n identical wedge blocks, each a triangular
prism of cluster sites, arranged around a vertical axis.  The prism's stack
axis runs tangentially, so the output face of wedge j sits one lattice step
away from the input face of wedge j+1 and the pairwise readout between them
is nearest-neighbour.  Every coupling used anywhere in the protocol (cluster
edges, fold-partner gates on the faces, junction readout pairs) appears in
the layout's edge set, and all of them fit inside a ball whose radius does
not grow with n.

Site spacing along the wall is delta_out on the outer circle; the wall is
L radial steps of delta_r deep, which fixes the inner circle.  Growing n
adds wedges at constant spacing by growing the radius, so the geometry
scales to any ring size with a single locality bound.
"""

from __future__ import annotations

import json
import math
from dataclasses import dataclass

import numpy as np

from .surface_code import WedgeLayout, build_wedge

__all__ = [
    "Layout3D",
    "LocalityReport",
    "colosseum_layout",
    "wedge_layout",
    "check_locality",
]

# ball occupancy observed for unit spacings is 25; the cap leaves headroom
# for denser spacing ratios without admitting growth in n
DEFAULT_OCCUPANCY_LIMIT = 72


@dataclass(frozen=True)
class Layout3D:
    """Placed sites and the couplings the protocol may use between them.

    Site ids group by wedge: wedge j owns ids [j*V, (j+1)*V) in the same
    order as the wedge-local layout, faces first (left block then right
    block).  meta carries the placement parameters and derived radii.
    """

    coords: np.ndarray
    roles: tuple
    edges: tuple
    meta: dict

    @property
    def n_sites(self) -> int:
        return int(self.coords.shape[0])

    def wedge_site(self, j: int, local_id: int) -> int:
        v = self.meta["sites_per_wedge"]
        if not 0 <= local_id < v:
            raise ValueError("local site id out of range")
        return j % self.meta["n"] * v + local_id

    def face_qubit_site(self, uext_qubit: int) -> int:
        """Layout site of a face qubit, by its ring-circuit qubit index.

        The ring circuit numbers face qubits [L_0 R_0 L_1 R_1 ...] with m
        qubits per face; within each wedge those same qubits are the first
        2m local sites, in the same order.
        """
        m = self.meta["patch_qubits"]
        j, r = divmod(int(uext_qubit), 2 * m)
        if not 0 <= j < self.meta["n"]:
            raise ValueError("qubit index outside the ring")
        return self.wedge_site(j, r)

    def edge_set(self) -> frozenset:
        return frozenset((min(a, b), max(a, b)) for a, b in self.edges)

    def to_json(self) -> str:
        return json.dumps(
            {
                "sites": [
                    {"id": i, "pos": [float(v) for v in self.coords[i]], "role": self.roles[i]}
                    for i in range(self.n_sites)
                ],
                "edges": [[int(a), int(b)] for a, b in self.edges],
                "meta": self.meta,
            }
        )


@dataclass(frozen=True)
class LocalityReport:
    kappa: float
    max_edge_length: float
    max_ball_occupancy: int
    occupancy_limit: int
    passed: bool

    def to_json(self) -> str:
        return json.dumps(
            {
                "kappa": self.kappa,
                "max_edge_length": self.max_edge_length,
                "max_ball_occupancy": self.max_ball_occupancy,
                "occupancy_limit": self.occupancy_limit,
                "passed": self.passed,
            }
        )


def _fold_pair_edges(wedge: WedgeLayout, base: int):
    """Fold-partner couplings on one face (offset base into the wedge).

    Transversal logical gates on a folded patch touch at most a qubit and
    its mirror image, so these pairs are the only two-qubit gates a face
    ever needs beyond the junction readout.
    """
    out = []
    for q in range(wedge.patch.m):
        p = int(wedge.patch.fold[q])
        if p > q:
            out.append((base + q, base + p))
    return out


def _local_frame(wedge: WedgeLayout):
    """Split wedge-local coordinates into (radial u, vertical v, stack z)."""
    u = wedge.coords[:, 0].astype(float)
    v = wedge.coords[:, 1].astype(float)
    z = wedge.coords[:, 2].astype(float)
    return u, v, z


def kappa_bound(delta_out: float, delta_r: float) -> float:
    # local edge vectors have squared length <= 2.25 lattice steps; chords
    # around the circle never exceed the arc, so the flat-space bound holds
    # at every radius and every ring size
    return 1.5 * max(delta_out, delta_r)


def wedge_layout(d: int, rounds: int | None = None) -> Layout3D:
    """Single wedge in its local frame, as a Layout3D (unit spacing)."""
    wedge = build_wedge(d, rounds)
    u, v, z = _local_frame(wedge)
    coords = np.column_stack([u, v, z])
    edges = [tuple(int(x) for x in e) for e in wedge.edges]
    for base in (0, wedge.patch.m):
        edges.extend(_fold_pair_edges(wedge, base))
    meta = {
        "n": 1,
        "d": int(d),
        "rounds": int(wedge.rounds),
        "sites_per_wedge": wedge.n_sites,
        "patch_qubits": wedge.patch.m,
        "kappa_bound": kappa_bound(1.0, 1.0),
    }
    return Layout3D(coords=coords, roles=tuple(wedge.roles), edges=tuple(edges), meta=meta)


def colosseum_layout(
    n: int,
    d: int,
    delta_out: float = 1.0,
    delta_r: float = 0.25,
    rounds: int | None = None,
) -> Layout3D:
    """Place n wedges around a vertical axis at constant site spacing.

    Each wedge is a rigid body: its stack axis becomes the tangential
    direction (L = stack length slots per wedge on the circle), its first
    lattice axis points radially inward from the outer circle with step
    delta_r, and the fold axis is vertical.  The outer circle has L*n slots
    of spacing delta_out, which fixes r_out; the inner circle sits L radial
    steps further in, giving spacing delta_in = delta_out - 2*pi*delta_r/n.

    Raises ValueError when n < 3, a spacing is non-positive, or the inner
    spacing would close up (delta_r too large for this n).
    """
    if n < 3:
        raise ValueError("a ring needs at least 3 wedges")
    if delta_out <= 0 or delta_r <= 0:
        raise ValueError("spacings must be positive")
    wedge = build_wedge(d, rounds)
    slots = 2 * wedge.rounds + 1
    r_out = slots * n * delta_out / (2.0 * math.pi)
    r_in = r_out - slots * delta_r
    delta_in = 2.0 * math.pi * r_in / (slots * n)
    if delta_in <= 0:
        raise ValueError(
            f"inner spacing {delta_in:.6g} is not positive; "
            f"need delta_r < {n * delta_out / (2.0 * math.pi):.6g}"
        )

    u, v, z = _local_frame(wedge)
    vsites = wedge.n_sites
    coords = np.empty((n * vsites, 3), dtype=float)
    step = 2.0 * math.pi / (slots * n)
    rho = r_out - u * delta_r
    height = v * delta_r
    for j in range(n):
        theta = (j * slots + z) * step
        block = slice(j * vsites, (j + 1) * vsites)
        coords[block, 0] = rho * np.cos(theta)
        coords[block, 1] = rho * np.sin(theta)
        coords[block, 2] = height

    m = wedge.patch.m
    edges = []
    local_edges = [tuple(int(x) for x in e) for e in wedge.edges]
    local_folds = _fold_pair_edges(wedge, 0) + _fold_pair_edges(wedge, m)
    for j in range(n):
        off = j * vsites
        edges.extend((a + off, b + off) for a, b in local_edges)
        edges.extend((a + off, b + off) for a, b in local_folds)
        # pairwise readout couples each output-face qubit to the matching
        # input-face qubit of the next wedge around the ring
        noff = ((j + 1) % n) * vsites
        edges.extend(
            (off + int(wedge.right_ids[q]), noff + int(wedge.left_ids[q])) for q in range(m)
        )

    meta = {
        "n": int(n),
        "d": int(d),
        "rounds": int(wedge.rounds),
        "sites_per_wedge": vsites,
        "patch_qubits": m,
        "slots_per_wedge": slots,
        "delta_out": float(delta_out),
        "delta_r": float(delta_r),
        "delta_in": float(delta_in),
        "r_out": float(r_out),
        "r_in": float(r_in),
        "kappa_bound": kappa_bound(delta_out, delta_r),
    }
    roles = tuple(wedge.roles) * n
    return Layout3D(coords=coords, roles=roles, edges=tuple(edges), meta=meta)


def check_locality(
    layout: Layout3D,
    kappa: float | None = None,
    occupancy_limit: int = DEFAULT_OCCUPANCY_LIMIT,
) -> LocalityReport:
    """Measure the longest coupling and the densest kappa-ball.

    Passes when every edge fits within kappa and no ball of radius kappa
    holds more than occupancy_limit sites.  kappa defaults to the layout's
    own bound.  Ball counting uses a hash grid of cell size kappa, so the
    cost stays linear in the number of sites.
    """
    if kappa is None:
        kappa = layout.meta["kappa_bound"]
    kappa = float(kappa)
    if kappa <= 0:
        raise ValueError("kappa must be positive")
    pts = layout.coords
    max_edge = 0.0
    if layout.edges:
        idx = np.asarray(layout.edges, dtype=np.intp)
        diffs = pts[idx[:, 0]] - pts[idx[:, 1]]
        max_edge = float(np.sqrt((diffs**2).sum(axis=1).max()))

    cells: dict = {}
    keys = np.floor(pts / kappa).astype(np.int64)
    for i, key in enumerate(map(tuple, keys)):
        cells.setdefault(key, []).append(i)
    max_occ = 0
    k2 = kappa * kappa
    for key, members in cells.items():
        neigh = []
        for dx in (-1, 0, 1):
            for dy in (-1, 0, 1):
                for dz in (-1, 0, 1):
                    neigh.extend(cells.get((key[0] + dx, key[1] + dy, key[2] + dz), ()))
        cand = pts[neigh]
        for i in members:
            occ = int(((cand - pts[i]) ** 2).sum(axis=1).__le__(k2).sum())
            if occ > max_occ:
                max_occ = occ
    passed = max_edge <= kappa + 1e-12 and max_occ <= occupancy_limit
    return LocalityReport(
        kappa=kappa,
        max_edge_length=max_edge,
        max_ball_occupancy=max_occ,
        occupancy_limit=occupancy_limit,
        passed=bool(passed),
    )
