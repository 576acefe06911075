"""Command-line experiment runner.

Every subcommand reads its parameters from flags, from a JSON config file
(--config), or both (flags win).  Stochastic commands require --seed and
replay byte-for-byte: grids derive one child generator per cell from the
master seed via util.cell_rng(seed, d_index, p_index), so cells are
reproducible in isolation and in any order.

Outputs are JSON for single reports and CSV for scans (columns: n, d, p,
trials, successes, rate, wilson_lo, wilson_hi, seed).  Exit codes: 0 on
success, 1 when a --check assertion fails, 2 on configuration errors.
"""

from __future__ import annotations

import argparse
import json
import math
import sys
from fractions import Fraction

import numpy as np

CONFIG_SCHEMA = 1

_STOCHASTIC = {"sample", "threshold-scan", "restrictions", "adversary"}


class ConfigError(Exception):
    pass


class CheckFailure(Exception):
    pass


def _emit(text: str, out_path):
    if out_path:
        with open(out_path, "w") as fh:
            fh.write(text)
    else:
        sys.stdout.write(text)
        if not text.endswith("\n"):
            sys.stdout.write("\n")


def _float_cell(x: float) -> str:
    # fixed shortest-repr formatting keeps CSV replays byte-identical
    return format(float(x), ".10g")


def _rows_to_csv(rows, columns) -> str:
    lines = [",".join(columns)]
    for row in rows:
        cells = []
        for c in columns:
            v = row[c]
            cells.append(_float_cell(v) if isinstance(v, float) else str(v))
        lines.append(",".join(cells))
    return "\n".join(lines) + "\n"


def _parse_grid(text: str):
    """Comma list of floats, or 'A..B' / 'A..B:K' for K geometric points."""
    text = text.strip()
    if ".." in text:
        span, _, k = text.partition(":")
        a, _, b = span.partition("..")
        try:
            lo, hi = float(a), float(b)
            k = int(k) if k else 5
        except ValueError as exc:
            raise ConfigError(f"bad grid spec {text!r}") from exc
        if lo <= 0 or hi <= lo or k < 2:
            raise ConfigError("grid needs 0 < A < B and at least 2 points")
        return [float(v) for v in np.geomspace(lo, hi, k)]
    try:
        values = [float(v) for v in text.split(",") if v]
    except ValueError as exc:
        raise ConfigError(f"bad grid spec {text!r}") from exc
    if not values:
        raise ConfigError("grid is empty")
    return values


def _parse_int_list(text: str):
    try:
        return [int(v) for v in str(text).split(",") if v]
    except ValueError as exc:
        raise ConfigError(f"bad integer list {text!r}") from exc


def _load_config(ns: argparse.Namespace, parser_defaults: dict):
    """Overlay config-file values under explicit flags."""
    if not getattr(ns, "config", None):
        return ns
    try:
        with open(ns.config) as fh:
            obj = json.load(fh)
    except (OSError, json.JSONDecodeError) as exc:
        raise ConfigError(f"cannot read config: {exc}") from exc
    if not isinstance(obj, dict):
        raise ConfigError("config must be a JSON object")
    schema = obj.pop("schema", CONFIG_SCHEMA)
    if schema != CONFIG_SCHEMA:
        raise ConfigError(f"unsupported config schema {schema}")
    obj.pop("subcommand", None)
    for key, value in obj.items():
        attr = key.replace("-", "_")
        if attr not in parser_defaults:
            raise ConfigError(f"unknown config key {key!r}")
        # a flag left at its default is overridden by the config value
        if getattr(ns, attr) == parser_defaults[attr]:
            setattr(ns, attr, value)
    return ns


def _require_seed(ns):
    if getattr(ns, "seed", None) is None:
        raise ConfigError("--seed is required for this subcommand")
    return int(ns.seed)


def _require(ns, *names):
    for name in names:
        if getattr(ns, name, None) is None:
            raise ConfigError(f"--{name.replace('_', '-')} is required (flag or config)")


# ---------------------------------------------------------------------------
# subcommand bodies


def _cmd_verify(ns) -> int:
    from .telep_relation import clifford_tuple_from_names, pauli_tuple_from_string, verify

    _require(ns, "cliffords", "paulis")
    cliffords = clifford_tuple_from_names(ns.cliffords)
    paulis = pauli_tuple_from_string(ns.paulis)
    if ns.n is not None and int(ns.n) != len(cliffords):
        raise ConfigError(f"--n {ns.n} disagrees with {len(cliffords)} Clifford entries")
    out = verify(cliffords, paulis)
    prob = out.prob_num / (1 << out.prob_den_log2) if out.valid else 0.0
    _emit(
        json.dumps(
            {
                "n": len(cliffords),
                "cliffords": ns.cliffords,
                "paulis": ns.paulis,
                "valid": out.valid,
                "probability": prob,
                "probability_exact": f"{out.prob_num}/{1 << out.prob_den_log2}"
                if out.valid
                else "0",
            }
        ),
        ns.out,
    )
    if ns.check and not out.valid:
        raise CheckFailure("pair is not in the relation")
    return 0


def _cmd_sample(ns) -> int:
    from .telep_relation import clifford_tuple_from_names, pauli_tuple_to_string, verify
    from .telep_relation import sample_ideal
    from .stabilizer_sim import run_telep_circuit

    seed = _require_seed(ns)
    _require(ns, "cliffords")
    cliffords = clifford_tuple_from_names(ns.cliffords)
    rng = np.random.default_rng(seed)
    draw = sample_ideal if ns.route == "ideal" else run_telep_circuit
    counts: dict = {}
    invalid = 0
    for _ in range(int(ns.trials)):
        p = tuple(draw(cliffords, rng))
        counts[p] = counts.get(p, 0) + 1
        if not verify(cliffords, p).valid:
            invalid += 1
    report = {
        "route": ns.route,
        "cliffords": ns.cliffords,
        "trials": int(ns.trials),
        "seed": seed,
        "invalid": invalid,
        "counts": {pauli_tuple_to_string(k): v for k, v in sorted(counts.items())},
    }
    _emit(json.dumps(report), ns.out)
    if ns.check and invalid:
        raise CheckFailure(f"{invalid} sampled outcomes violate the relation")
    return 0


def _cmd_distribution(ns) -> int:
    from .telep_relation import clifford_tuple_from_names, full_distribution, pauli_tuple_to_string

    _require(ns, "cliffords")
    cliffords = clifford_tuple_from_names(ns.cliffords)
    dist = full_distribution(cliffords)
    _emit(
        json.dumps(
            {
                "cliffords": ns.cliffords,
                "distribution": {
                    pauli_tuple_to_string(k): str(v) for k, v in sorted(dist.items()) if v
                },
            }
        ),
        ns.out,
    )
    return 0


def _cmd_games(ns) -> int:
    from .nonlocal_games import game_classical_value, quantum_strategy_winrate

    report: dict = {}
    if ns.brute_force:
        value = game_classical_value()
        report["classical_value"] = str(value)
        report["classical_value_float"] = float(value)
    if ns.trials:
        seed = _require_seed(ns)
        rng = np.random.default_rng(seed)
        report["quantum_winrate"] = quantum_strategy_winrate(int(ns.trials), rng)
        report["trials"] = int(ns.trials)
        report["seed"] = seed
    if not report:
        raise ConfigError("nothing to do: pass --brute-force and/or --trials")
    _emit(json.dumps(report), ns.out)
    if ns.check and ns.brute_force and Fraction(report["classical_value"]) != Fraction(8, 9):
        raise CheckFailure("classical value is not 8/9")
    return 0


def _cmd_threshold_scan(ns) -> int:
    from .surface_code import DecoderChoice, scan_thresholds

    seed = _require_seed(ns)
    _require(ns, "n", "d", "p", "trials")
    distances = _parse_int_list(ns.d)
    strengths = _parse_grid(ns.p)
    rows = scan_thresholds(
        int(ns.n),
        distances,
        strengths,
        int(ns.trials),
        seed,
        decoder=DecoderChoice(kind=ns.decoder),
    )
    columns = ["n", "d", "p", "trials", "successes", "rate", "wilson_lo", "wilson_hi", "seed"]
    _emit(_rows_to_csv(rows, columns), ns.out)
    if ns.check:
        by_d: dict = {}
        for row in rows:
            by_d.setdefault(row["d"], []).append(row)
        for d, cells in by_d.items():
            cells.sort(key=lambda r: r["p"])
            for a, b in zip(cells, cells[1:]):
                if b["wilson_lo"] > a["wilson_hi"]:
                    raise CheckFailure(
                        f"rate increased with p at d={d}: "
                        f"p={a['p']:g} -> {b['p']:g} beyond CI"
                    )
    return 0


def _cmd_locality_check(ns) -> int:
    from .geometry import check_locality, colosseum_layout

    _require(ns, "n", "d")
    layout = colosseum_layout(int(ns.n), int(ns.d), float(ns.delta_out), float(ns.delta_r))
    report = check_locality(layout, kappa=ns.kappa)
    formula = float(ns.delta_out) - 2.0 * math.pi * float(ns.delta_r) / int(ns.n)
    rel_err = abs(layout.meta["delta_in"] - formula) / abs(formula)
    obj = json.loads(report.to_json())
    obj["meta"] = layout.meta
    obj["delta_in_formula"] = formula
    obj["delta_in_rel_err"] = rel_err
    _emit(json.dumps(obj), ns.out)
    if ns.check and (not report.passed or rel_err > 1e-12):
        raise CheckFailure("locality or spacing-formula check failed")
    return 0


def _cmd_restrictions(ns) -> int:
    from .adversary_toolkit import block_restriction_process, stub_oracle, switching_params

    seed = _require_seed(ns)
    _require(ns, "n")
    params = switching_params(int(ns.n), float(ns.s), int(ns.depth))
    rng = np.random.default_rng(seed)
    oracle = stub_oracle(int(ns.t_size))
    bound_failures = 0
    active_blocks = []
    for _ in range(int(ns.trials)):
        xi, diag = block_restriction_process(None, params, oracle, rng)
        active_blocks.append(diag["n_active_blocks_xi"])
        if not diag["block_bound_ok"]:
            bound_failures += 1
    report = {
        "params": json.loads(params.to_json()),
        "trials": int(ns.trials),
        "seed": seed,
        "t_size": int(ns.t_size),
        "bound_failures": bound_failures,
        "active_blocks_mean": float(np.mean(active_blocks)),
        "active_blocks_min": int(min(active_blocks)),
        "active_blocks_max": int(max(active_blocks)),
    }
    _emit(json.dumps(report), ns.out)
    if ns.check and bound_failures:
        raise CheckFailure(f"{bound_failures} runs broke the block-count bound")
    return 0


def _cmd_adversary(ns) -> int:
    from .adversary_toolkit import (
        CircuitDag,
        nc0_ceiling_experiment,
        random_strategy_dag,
    )
    from .util import cell_rng

    seed = _require_seed(ns)
    _require(ns, "n")
    n = int(ns.n)
    reports = []
    ceiling = 80.0 / 81.0
    violations = 0
    if ns.dag_file:
        with open(ns.dag_file) as fh:
            dags = [CircuitDag.from_json(fh.read())]
    else:
        gen = cell_rng(seed, 0)
        dags = [
            random_strategy_dag(n, int(ns.dag_depth), int(ns.fan_in), gen)
            for _ in range(int(ns.dags))
        ]
    for i, dag in enumerate(dags):
        rng = cell_rng(seed, 1, i)
        rep = nc0_ceiling_experiment(dag, n, int(ns.trials), rng)
        obj = json.loads(rep.to_json())
        obj["dag_index"] = i
        reports.append(obj)
        if rep.pair is not None:
            sigma = math.sqrt(max(rep.rate * (1 - rep.rate), 1e-12) / rep.trials)
            if rep.rate > ceiling + 3 * sigma:
                violations += 1
    _emit(
        json.dumps(
            {
                "n": n,
                "trials": int(ns.trials),
                "seed": seed,
                "ceiling": ceiling,
                "violations": violations,
                "max_rate": max((r["rate"] for r in reports), default=0.0),
                "reports": reports,
            }
        ),
        ns.out,
    )
    if ns.check and violations:
        raise CheckFailure(f"{violations} dags with a non-signaling pair beat the ceiling")
    return 0


# ---------------------------------------------------------------------------
# parser


def _add_common(sp):
    sp.add_argument("--config", help="JSON config file; explicit flags win")
    sp.add_argument("--out", help="output path (default stdout)")
    sp.add_argument("--seed", type=int, default=None, help="master seed")
    sp.add_argument(
        "--check",
        action="store_true",
        help="assertion mode: exit 1 when the subcommand's invariant fails",
    )


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="telepsim",
        description=__doc__,
        formatter_class=argparse.RawDescriptionHelpFormatter,
    )
    sub = parser.add_subparsers(dest="subcommand", required=True)

    p = sub.add_parser("verify", help="exact relation membership for one (C, P) pair")
    p.add_argument("--n", type=int, default=None)
    p.add_argument("--cliffords", default=None, help="comma or bare word list, e.g. H,SS,I")
    p.add_argument("--paulis", default=None, help="string like XIZ or comma list")
    _add_common(p)
    p.set_defaults(func=_cmd_verify)

    p = sub.add_parser("sample", help="draw outcome tuples and tally them")
    p.add_argument("--cliffords", default=None)
    p.add_argument("--trials", type=int, default=1000)
    p.add_argument("--route", choices=("ideal", "stabilizer"), default="ideal")
    _add_common(p)
    p.set_defaults(func=_cmd_sample)

    p = sub.add_parser("distribution", help="exact outcome distribution (n <= 8)")
    p.add_argument("--cliffords", default=None)
    _add_common(p)
    p.set_defaults(func=_cmd_distribution)

    p = sub.add_parser("games", help="game values: brute-force classical, sampled quantum")
    p.add_argument("--brute-force", action="store_true")
    p.add_argument("--trials", type=int, default=0)
    _add_common(p)
    p.set_defaults(func=_cmd_games)

    p = sub.add_parser("threshold-scan", help="success-rate grid over (d, p), CSV")
    p.add_argument("--n", type=int, default=None)
    p.add_argument("--d", default=None, help="comma list of distances, e.g. 3,5")
    p.add_argument("--p", default=None, help="comma list or A..B[:K] geometric grid")
    p.add_argument("--trials", type=int, default=None)
    p.add_argument("--decoder", default="auto", choices=("auto", "exhaustive", "union-find", "matching"))
    _add_common(p)
    p.set_defaults(func=_cmd_threshold_scan)

    p = sub.add_parser("locality-check", help="build a ring layout and verify locality")
    p.add_argument("--n", type=int, default=None)
    p.add_argument("--d", type=int, default=None)
    p.add_argument("--delta-out", type=float, default=1.0)
    p.add_argument("--delta-r", type=float, default=0.25)
    p.add_argument("--kappa", type=float, default=None)
    _add_common(p)
    p.set_defaults(func=_cmd_locality_check)

    p = sub.add_parser("restrictions", help="run the block-restriction process")
    p.add_argument("--n", type=int, default=None, help="number of 5-bit blocks")
    p.add_argument("--s", type=float, default=64.0, help="circuit size parameter")
    p.add_argument("--depth", type=int, default=1, help="circuit depth parameter d")
    p.add_argument("--trials", type=int, default=1000)
    p.add_argument("--t-size", type=int, default=0, help="stub oracle T-set size")
    _add_common(p)
    p.set_defaults(func=_cmd_restrictions)

    p = sub.add_parser("adversary", help="empirical ceiling for shallow circuit adversaries")
    p.add_argument("--n", type=int, default=None, help="relation positions")
    p.add_argument("--trials", type=int, default=10000)
    p.add_argument("--dags", type=int, default=10)
    p.add_argument("--dag-depth", type=int, default=2)
    p.add_argument("--fan-in", type=int, default=2)
    p.add_argument("--dag-file", default=None, help="JSON dag to test instead of random ones")
    _add_common(p)
    p.set_defaults(func=_cmd_adversary)

    return parser


def main(argv=None) -> int:
    parser = build_parser()
    ns = parser.parse_args(argv)
    defaults = {
        a.dest: a.default
        for a in parser._subparsers._group_actions[0].choices[ns.subcommand]._actions
        if a.dest != "help"
    }
    try:
        ns = _load_config(ns, defaults)
        return ns.func(ns)
    except ConfigError as exc:
        print(f"config error: {exc}", file=sys.stderr)
        return 2
    except CheckFailure as exc:
        print(f"check failed: {exc}", file=sys.stderr)
        return 1
    except ValueError as exc:
        print(f"config error: {exc}", file=sys.stderr)
        return 2


if __name__ == "__main__":
    raise SystemExit(main())
