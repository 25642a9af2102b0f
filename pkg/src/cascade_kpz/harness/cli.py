"""Command line entry point: ``cascade-kpz <subcommand> [flags]``.

Exit status is 0 on success, 1 when a statistical or theorem check fails and
2 on usage or configuration errors.  The JSON summary goes to stdout; CSV
detail goes to ``--out-dir``.
"""

from __future__ import annotations

import argparse
import json
import sys
from pathlib import Path

import numpy as np

from ..cascade import CascadeRealization, DepthExceededError, level_masses, row_fsum
from ..dimension import PartitionProfiles, aligned_levels, estimate_from_profiles, euclid_dimension
from ..fractal_sets import zeta0 as set_zeta0
from ..kpz import solve_zeta
from ..weights import InvalidModelError, moment_report, validate
from .config import ConfigError, ExperimentConfig, read_config_file, read_seeds_file
from .experiments import (
    DIAGNOSTICS,
    ExperimentError,
    ExperimentReport,
    _json_safe,
    map_seed_chunks,
    provenance,
    run_energy,
    run_kpz_experiment,
    summarize,
)

SUBCOMMANDS = {
    "validate-weights": "check a weight law and tabulate its moments",
    "simulate": "level-n totals and largest cells; CSV dumps with --out-dir",
    "dim-euclid": "box-counting dimension of a digit set",
    "dim-quantum": "partition-function dimension of a digit set in the cascade metric",
    "kpz-solve": "solve zeta0 = phi(zeta) for zeta",
    "kpz-experiment": "quantum dimension estimate against the solved prediction",
    "diagnostics": "mean-one, atom, negative-moment, recursion, tilt and rho-moment checks",
    "energy": "tilted Frostman energies across levels",
}

# CLI flag -> config key
FLAG_KEYS = {
    "model": "model", "set": "set", "seed": "master_seed", "replicates": "replicates",
    "nmin": "n_min", "nmax": "n_max", "s": "s", "zeta0": "zeta0", "level": "level", "r": "r",
    "tolerance": "tolerance", "tail_depth": "tail_depth", "aggregate": "aggregate",
    "max_level": "max_level", "out_dir": "out_dir", "threads": "threads",
}


class _Parser(argparse.ArgumentParser):
    def error(self, message):
        self.print_usage(sys.stderr)
        raise ConfigError(message)


def build_parser() -> argparse.ArgumentParser:
    common = argparse.ArgumentParser(add_help=False)
    common.add_argument("--config", help="key=value config file")
    common.add_argument("--model", help="e.g. 'family=lognormal sigma2=0.693'")
    common.add_argument("--set", help="e.g. 'set=digits b=2 allow=00,11'")
    common.add_argument("--seed", help="master seed (decimal or 0x hex)")
    common.add_argument("--seeds-file", help="explicit replicate seeds, one or more per line")
    common.add_argument("--replicates", help="number of derived seeds")
    common.add_argument("--nmin", help="lowest fit level")
    common.add_argument("--nmax", help="highest fit level")
    common.add_argument("--s", help="comma separated s values")
    common.add_argument("--zeta0", help="Euclidean dimension to solve for")
    common.add_argument("--level", help="cascade level for single-level quantities")
    common.add_argument("--r", help="negative moment order")
    common.add_argument("--tolerance", help="pass tolerance of the dimension gap")
    common.add_argument("--tail-depth", help="extra levels below each cover cell")
    common.add_argument("--aggregate", choices=("mean_slope", "per_realization"))
    common.add_argument("--max-level", help="deepest admissible cascade level")
    common.add_argument("--out-dir", help="directory for CSV detail")
    common.add_argument("--threads", help="worker threads or 'auto'")
    common.add_argument("--json", metavar="PATH", help="also write the JSON summary to PATH")

    parser = _Parser(prog="cascade-kpz", description="Multiplicative cascade dimension experiments.")
    sub = parser.add_subparsers(dest="command", required=True, parser_class=_Parser)
    for name, text in SUBCOMMANDS.items():
        p = sub.add_parser(name, parents=[common], help=text, description=text)
        if name == "diagnostics":
            p.add_argument("--which", default="all",
                           help="comma separated subset of: " + ",".join(DIAGNOSTICS))
    return parser


def build_config(args) -> ExperimentConfig:
    mapping, base_dir = {}, None
    if args.config:
        mapping = read_config_file(args.config)
        base_dir = str(Path(args.config).resolve().parent)
    for flag, key in FLAG_KEYS.items():
        value = getattr(args, flag, None)
        if value is not None:
            mapping[key] = value
    if args.seeds_file:
        mapping["seeds"] = read_seeds_file(args.seeds_file)
    mapping.setdefault("base_dir", base_dir)
    return ExperimentConfig.from_mapping(mapping)


def cmd_validate_weights(config: ExperimentConfig) -> dict:
    model = config.weight_model()
    report = validate(model)
    grid = sorted(set(config.s) | {0.0, 1.0})
    moments = [vars(moment_report(model, s)) for s in grid] if report.valid else []
    return {"name": "validate-weights", "passed": report.valid, "model": model.spec(),
            "validation": report.as_dict(), "moments": moments}


def cmd_simulate(config: ExperimentConfig) -> dict:
    model = config.weight_model()
    seeds = config.seed_list()
    n = config.level
    if n > config.max_level:
        raise DepthExceededError(f"level {n} exceeds max_level {config.max_level}")

    def chunk_stats(c):
        mu = level_masses(model, c, n)
        return np.column_stack([row_fsum(mu), mu.max(axis=1)])

    stats = map_seed_chunks(chunk_stats, seeds, config.thread_count())
    if config.out_dir:
        if n > 16:
            raise ConfigError("realization dumps are limited to levels <= 16")
        out = Path(config.out_dir)
        out.mkdir(parents=True, exist_ok=True)
        for seed in seeds:
            CascadeRealization(model, seed, config.max_level).dump_csv(
                out / f"realization_{seed:016x}.csv", range(n + 1))
    report = ExperimentReport(
        name="simulate",
        quantities={"level": n, "ell_n": summarize(stats[:, 0]), "max_atom": summarize(stats[:, 1]),
                    "ell_n_values": stats[:, 0].tolist()},
        checks=[],
        provenance=provenance(config, seeds),
    )
    return report.as_dict()


def cmd_dim_euclid(config: ExperimentConfig) -> dict:
    dset = config.digit_set()
    est = euclid_dimension(dset, config.n_min, config.n_max)
    return {"name": "dim-euclid", "passed": True, "set": dset.spec(), "exact": set_zeta0(dset),
            "estimate": est.as_dict()}


def cmd_dim_quantum(config: ExperimentConfig) -> dict:
    model = config.weight_model()
    dset = config.digit_set()
    seeds = config.seed_list()
    levels = aligned_levels(dset, config.n_min, config.n_max)
    if config.n_max + config.tail_depth > config.max_level:
        raise DepthExceededError("n_max + tail_depth exceeds max_level")
    if len(levels) < 2:
        raise ConfigError("fewer than two block-aligned levels in the level range")
    prof = PartitionProfiles(model, seeds, dset, levels, config.tail_depth, normalize=True,
                             threads=config.thread_count())
    est = estimate_from_profiles(prof, tol=1e-3, aggregate=config.aggregate, on_error="skip")
    report = ExperimentReport(
        name="dim-quantum",
        quantities={"quantum_dimension": est.as_dict()},
        checks=[],
        warnings=[str(f) for f in est.failures],
        provenance=provenance(config, seeds),
    )
    return report.as_dict()


def cmd_kpz_solve(config: ExperimentConfig) -> dict:
    z0 = config.zeta0 if config.zeta0 is not None else set_zeta0(config.digit_set())
    return solve_zeta(config.weight_model(), z0).as_dict()


def cmd_kpz_experiment(config: ExperimentConfig) -> dict:
    return run_kpz_experiment(config).as_dict()


def cmd_energy(config: ExperimentConfig) -> dict:
    return run_energy(config).as_dict()


def cmd_diagnostics(config: ExperimentConfig, which: str) -> dict:
    names = list(DIAGNOSTICS) if which == "all" else [w.strip() for w in which.split(",") if w.strip()]
    unknown = [w for w in names if w not in DIAGNOSTICS]
    if unknown:
        raise ConfigError(f"unknown diagnostics {unknown}; choose from {list(DIAGNOSTICS)}")
    reports = {name: DIAGNOSTICS[name](config).as_dict() for name in names}
    return {"name": "diagnostics", "passed": all(r["passed"] for r in reports.values()), "reports": reports}


COMMANDS = {
    "validate-weights": cmd_validate_weights,
    "simulate": cmd_simulate,
    "dim-euclid": cmd_dim_euclid,
    "dim-quantum": cmd_dim_quantum,
    "kpz-solve": cmd_kpz_solve,
    "kpz-experiment": cmd_kpz_experiment,
    "energy": cmd_energy,
}


def dumps(summary: dict) -> str:
    return json.dumps(_json_safe(summary), sort_keys=True, indent=2)


def main(argv=None) -> int:
    try:
        args = build_parser().parse_args(argv)
        config = build_config(args)
        if args.command == "diagnostics":
            summary = cmd_diagnostics(config, args.which)
        else:
            summary = COMMANDS[args.command](config)
    except SystemExit as exc:  # --help
        return 0 if exc.code in (0, None) else 2
    except ExperimentError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 1
    except (ConfigError, InvalidModelError, DepthExceededError, ValueError, OSError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 2
    text = dumps(summary)
    print(text)
    if args.json:
        Path(args.json).write_text(text + "\n")
    return 0 if summary.get("passed", True) else 1


__all__ = ["build_parser", "main"]


if __name__ == "__main__":
    sys.exit(main())
