"""Gate-teleportation relation problem: simulation, verification, adversary analysis."""

from . import (
    adversary_toolkit,
    geometry,
    noise_model,
    nonlocal_games,
    pauli_clifford,
    stabilizer_sim,
    surface_code,
    telep_relation,
    util,
)

__all__ = [
    "adversary_toolkit",
    "geometry",
    "noise_model",
    "nonlocal_games",
    "pauli_clifford",
    "stabilizer_sim",
    "surface_code",
    "telep_relation",
    "util",
]

__version__ = "0.1.0"
