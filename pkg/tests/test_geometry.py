"""Amphitheatre layout tests: spacing formula, bounded couplings, density."""

import json
import math

import numpy as np
import pytest

from telepsim.geometry import (
    DEFAULT_OCCUPANCY_LIMIT,
    Layout3D,
    check_locality,
    colosseum_layout,
    kappa_bound,
    wedge_layout,
)
from telepsim.surface_code import build_uext, build_wedge


def _delta_in(n, delta_out=1.0, delta_r=0.25):
    return delta_out - 2.0 * math.pi * delta_r / n


# ---------------------------------------------------------------------------
# spacing formula


@pytest.mark.parametrize("n", [8, 16, 32])
def test_inner_spacing_formula(n):
    layout = colosseum_layout(n, 3)
    formula = _delta_in(n)
    assert abs(layout.meta["delta_in"] - formula) / abs(formula) <= 1e-12


def test_inner_spacing_formula_large_ring():
    layout = colosseum_layout(100, 1, delta_out=1.0, delta_r=1.0)
    got = layout.meta["delta_in"]
    assert abs(got - (1.0 - 2.0 * math.pi / 100.0)) <= 1e-15
    assert got == pytest.approx(0.9371681469282042, abs=1e-15)


def test_inner_spacing_measured_from_coords():
    # adjacent wall slots on the inner rim really sit delta_in apart
    n, d = 8, 2
    layout = colosseum_layout(n, d)
    r_in = layout.meta["r_in"]
    slots = layout.meta["slots_per_wedge"]
    step = 2.0 * math.pi / (slots * n)
    chord = 2.0 * r_in * math.sin(step / 2.0)
    arc = r_in * step
    assert arc == pytest.approx(layout.meta["delta_in"], rel=1e-12)
    assert chord <= arc <= chord * 1.01


# ---------------------------------------------------------------------------
# locality certificate


def test_kappa_bound_helper():
    assert kappa_bound(1.0, 0.25) == 1.5
    assert kappa_bound(0.5, 2.0) == 3.0


@pytest.mark.parametrize("n", [8, 16, 32])
def test_single_kappa_certifies_all_ring_sizes(n):
    layout = colosseum_layout(n, 3)
    assert layout.meta["kappa_bound"] == 1.5
    report = check_locality(layout)
    assert report.passed
    assert report.max_edge_length <= 1.5
    assert report.max_ball_occupancy <= DEFAULT_OCCUPANCY_LIMIT


def test_occupancy_pinned_values():
    # regression pin: density must not creep up with ring size
    occ = [check_locality(colosseum_layout(n, 3)).max_ball_occupancy for n in (8, 16, 32)]
    assert occ == [60, 55, 52]


def test_stretched_layout_fails():
    layout = colosseum_layout(8, 3)
    stretched = Layout3D(
        coords=layout.coords * 3.0,
        roles=layout.roles,
        edges=layout.edges,
        meta=dict(layout.meta),
    )
    report = check_locality(stretched, kappa=1.5)
    assert not report.passed
    assert report.max_edge_length > 1.5


def test_single_wedge_layout_passes():
    layout = wedge_layout(3)
    report = check_locality(layout)
    assert report.passed
    w = build_wedge(3)
    assert layout.n_sites == w.n_sites
    assert check_locality(layout, kappa=0.9).passed is False  # unit edges exist


def test_check_locality_rejects_bad_kappa():
    layout = wedge_layout(1)
    with pytest.raises(ValueError):
        check_locality(layout, kappa=0.0)


def test_ball_occupancy_matches_brute_force():
    layout = colosseum_layout(3, 1)
    report = check_locality(layout, kappa=1.5)
    pts = layout.coords
    d2 = ((pts[:, None, :] - pts[None, :, :]) ** 2).sum(axis=2)
    brute = int((d2 <= 1.5 * 1.5).sum(axis=1).max())
    assert report.max_ball_occupancy == brute


# ---------------------------------------------------------------------------
# every gate runs on an edge


def _site_of(layout, j, q):
    return layout.wedge_site(j, q)


@pytest.mark.parametrize("n,d", [(3, 1), (4, 2), (8, 3)])
def test_all_two_qubit_gates_land_on_edges(n, d):
    layout = colosseum_layout(n, d)
    edges = layout.edge_set()
    w = build_wedge(d)
    checked = 0
    for j in range(n):
        for layer in w.circuit.layers:
            for gate in layer:
                if gate[0] in ("CNOT", "CZ"):
                    a = _site_of(layout, j, gate[1])
                    b = _site_of(layout, j, gate[2])
                    assert (min(a, b), max(a, b)) in edges
                    checked += 1
    ring = build_uext(n, d)
    words = [(0,) * n, (3,) * n, (4,) * n, (17,) * n]
    rng = np.random.default_rng(9)
    words.append(tuple(int(v) for v in rng.integers(0, 24, n)))
    for b in words:
        circ = ring.junction_circuit(b)
        for layer in circ.layers:
            for gate in layer:
                if gate[0] in ("CNOT", "CZ"):
                    a = layout.face_qubit_site(gate[1])
                    bb = layout.face_qubit_site(gate[2])
                    assert (min(a, bb), max(a, bb)) in edges
                    checked += 1
    assert checked > 0


def test_face_qubit_site_blocks():
    n, d = 4, 2
    layout = colosseum_layout(n, d)
    m = build_wedge(d).patch.m
    v = layout.meta["sites_per_wedge"]
    for j in range(n):
        assert layout.face_qubit_site(2 * j * m) == j * v
        assert layout.face_qubit_site(2 * j * m + 2 * m - 1) == j * v + 2 * m - 1


# ---------------------------------------------------------------------------
# validation and serialization


def test_preconditions():
    with pytest.raises(ValueError):
        colosseum_layout(2, 3)
    with pytest.raises(ValueError):
        colosseum_layout(8, 3, delta_out=0.0)
    with pytest.raises(ValueError):
        colosseum_layout(8, 3, delta_r=-1.0)
    with pytest.raises(ValueError):
        # inner rim would close up: delta_out < 2 pi delta_r / n
        colosseum_layout(3, 1, delta_out=0.1, delta_r=1.0)


def test_layout_meta_and_json():
    n, d = 8, 3
    layout = colosseum_layout(n, d)
    need = {
        "n",
        "d",
        "rounds",
        "sites_per_wedge",
        "patch_qubits",
        "slots_per_wedge",
        "delta_out",
        "delta_r",
        "delta_in",
        "r_out",
        "r_in",
        "kappa_bound",
    }
    assert need <= set(layout.meta)
    assert layout.meta["slots_per_wedge"] == 2 * build_wedge(d).rounds + 1
    assert layout.n_sites == n * layout.meta["sites_per_wedge"]
    doc = json.loads(layout.to_json())
    assert set(doc) == {"sites", "edges", "meta"}
    assert len(doc["sites"]) == layout.n_sites
    report = check_locality(layout)
    rep = json.loads(report.to_json())
    assert set(rep) == {
        "kappa",
        "max_edge_length",
        "max_ball_occupancy",
        "occupancy_limit",
        "passed",
    }


def test_coordinates_unique_and_roles_sized():
    layout = colosseum_layout(6, 2)
    assert len({tuple(c) for c in map(tuple, layout.coords)}) == layout.n_sites
    assert len(layout.roles) == layout.n_sites
