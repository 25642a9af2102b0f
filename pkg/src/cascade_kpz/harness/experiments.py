"""Monte Carlo experiments and diagnostics, each returning an ExperimentReport.

Every report is a pure function of its config: replicate seeds are processed
in fixed chunks and collected in seed-list order, so the thread count only
changes wall time.  Pass/fail thresholds (4 standard errors, strictly
decreasing medians, bounded ratios) are harness policy and are written into
each check.
"""

from __future__ import annotations

import csv
import json
import math
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field
from pathlib import Path

import numpy as np

from .. import __version__
from ..cascade import CascadeRealization, as_seed_array, level_masses, level_totals
from ..dimension import PartitionProfiles, aligned_levels, estimate_from_profiles, euclid_dimension, partition_rows
from ..dimension import rho_moment_check
from ..fractal_sets import zeta0
from ..frostman import lower_bound_evidence, tilted_totals
from ..kpz import solve_zeta
from ..stats import mean_stderr
from ..weights import neg_moment, require_valid
from .config import ExperimentConfig

CHUNK = 256
Z_GATE = 4.0
ATOM_LEVELS = (4, 8, 12, 16)
NEG_MOMENT_LEVELS = (4, 8, 12)
NEG_MOMENT_RATIO = 4.0
RECURSION_LEVELS = (1, 4, 8)
RECURSION_TOL = 1e-11
MAX_FAILURE_FRACTION = 0.2


class ExperimentError(RuntimeError):
    pass


def summarize(values) -> dict:
    mean, se = mean_stderr(values)
    return {"n": int(np.size(values)), "mean": mean, "stderr": se, "ci95": [mean - 1.96 * se, mean + 1.96 * se]}


def check(name, passed, value, threshold, policy) -> dict:
    return {"name": name, "passed": bool(passed), "value": value, "threshold": threshold, "policy": policy}


def _json_safe(obj):
    if isinstance(obj, dict):
        return {str(k): _json_safe(v) for k, v in obj.items()}
    if isinstance(obj, (list, tuple)):
        return [_json_safe(v) for v in obj]
    if isinstance(obj, (np.floating, float)):
        f = float(obj)
        return f if math.isfinite(f) else repr(f)
    if isinstance(obj, (np.integer,)):
        return int(obj)
    if isinstance(obj, np.bool_):
        return bool(obj)
    return obj


@dataclass
class ExperimentReport:
    name: str
    quantities: dict
    checks: list
    provenance: dict
    details: dict = field(default_factory=dict)
    warnings: list = field(default_factory=list)

    @property
    def passed(self) -> bool:
        return all(c["passed"] for c in self.checks)

    def as_dict(self) -> dict:
        return _json_safe({
            "name": self.name,
            "passed": self.passed,
            "quantities": self.quantities,
            "checks": self.checks,
            "details": self.details,
            "warnings": self.warnings,
            "provenance": self.provenance,
        })

    def to_json(self) -> str:
        return json.dumps(self.as_dict(), sort_keys=True, indent=2)


def provenance(config: ExperimentConfig, seeds) -> dict:
    return {
        "config_hash": config.config_hash(),
        "config": config.canonical(),
        "seeds": [int(s) for s in seeds],
        "version": __version__,
    }


def map_seed_chunks(fn, seeds, threads: int = 1) -> np.ndarray:
    """Apply ``fn(chunk)`` to fixed-size seed chunks and concatenate in order."""
    seeds = as_seed_array(seeds)
    chunks = [seeds[i:i + CHUNK] for i in range(0, seeds.size, CHUNK)]
    if threads <= 1:
        parts = [fn(c) for c in chunks]
    else:
        with ThreadPoolExecutor(max_workers=threads) as pool:
            parts = list(pool.map(fn, chunks))
    return np.concatenate(parts, axis=0)


def write_csv(path, header, rows) -> None:
    path = Path(path)
    path.parent.mkdir(parents=True, exist_ok=True)
    with open(path, "w", newline="") as fh:
        out = csv.writer(fh, quoting=csv.QUOTE_MINIMAL)
        out.writerow(header)
        for row in rows:
            out.writerow([repr(x) if isinstance(x, float) else x for x in row])


def run_kpz_experiment(config: ExperimentConfig) -> ExperimentReport:
    """Quantum dimension of a digit set against the solution of zeta0 = phi(zeta)."""
    model = config.weight_model()
    require_valid(model)
    dset = config.digit_set()
    seeds = config.seed_list()
    z0 = zeta0(dset)
    warnings = []
    if config.zeta0 is not None and abs(config.zeta0 - z0) > 1e-12:
        warnings.append(f"zeta0={config.zeta0} overrides the set's Euclidean dimension {z0}")
        z0 = config.zeta0
    prediction = solve_zeta(model, z0)
    levels = aligned_levels(dset, config.n_min, config.n_max)
    if len(levels) < 2:
        raise ExperimentError("fewer than two block-aligned levels in the level range")
    if config.n_max + config.tail_depth > config.max_level:
        raise ExperimentError("n_max + tail_depth exceeds max_level")
    prof = PartitionProfiles(model, seeds, dset, levels, config.tail_depth, normalize=True,
                             threads=config.thread_count())
    est = estimate_from_profiles(prof, tol=1e-3, aggregate=config.aggregate, on_error="skip")
    fail_frac = len(est.failures) / len(seeds)
    if fail_frac > MAX_FAILURE_FRACTION:
        raise ExperimentError(f"{len(est.failures)} of {len(seeds)} realizations had no sign change")
    gap = est.value - prediction.zeta
    if est.stderr > 0:
        zscore = gap / est.stderr
    else:
        zscore = 0.0 if gap == 0 else math.copysign(math.inf, gap)
    euclid = euclid_dimension(dset, config.n_min, config.n_max)
    mean_log2z = np.mean(prof.log2_Z(est.value), axis=0)
    if config.out_dir:
        write_csv(Path(config.out_dir) / "partition_levels.csv", ["n", "s", "log2_Z", "realization_id"],
                  partition_rows(prof, est.value))
    warnings += [str(f) for f in est.failures]
    return ExperimentReport(
        name="kpz_experiment",
        quantities={
            "quantum_dimension": est.as_dict(),
            "euclid_dimension": euclid.as_dict(),
            "zeta0": z0,
            "predicted_zeta": prediction.zeta,
            "gap": gap,
            "z_score": zscore,
        },
        checks=[check("kpz_gap", abs(gap) <= config.tolerance, abs(gap), config.tolerance,
                      "|estimate - predicted zeta| <= tolerance")],
        details={"levels": levels, "mean_log2_Z_at_estimate": mean_log2z.tolist(),
                 "failure_fraction": fail_frac},
        warnings=warnings,
        provenance=provenance(config, seeds),
    )


def diag_mean_ell(config: ExperimentConfig) -> ExperimentReport:
    """Replicate mean of ell_n against its exact expectation 1."""
    model = config.weight_model()
    seeds = config.seed_list()
    n = config.level
    ells = map_seed_chunks(lambda c: level_totals(model, c, [n])[:, 0], seeds, config.thread_count())
    q = summarize(ells)
    dev = abs(q["mean"] - 1.0)
    return ExperimentReport(
        name="diag_mean_ell",
        quantities={"ell_n": q, "level": n},
        checks=[check("mean_ell_is_one", dev <= Z_GATE * q["stderr"], dev, Z_GATE * q["stderr"],
                      f"|mean - 1| <= {Z_GATE} stderr")],
        provenance=provenance(config, seeds),
    )


def diag_atoms(config: ExperimentConfig) -> ExperimentReport:
    """Median of the largest cell mass should decrease strictly with level."""
    model = config.weight_model()
    seeds = config.seed_list()
    levels = [n for n in ATOM_LEVELS if n <= config.max_level]

    def chunk_max(c):
        return np.column_stack([level_masses(model, c, n).max(axis=1) for n in levels])

    atoms = map_seed_chunks(chunk_max, seeds, config.thread_count())
    medians = np.median(atoms, axis=0).tolist()
    decreasing = all(a > b for a, b in zip(medians, medians[1:]))
    warnings = ["single replicate: medians are single draws"] if len(seeds) == 1 else []
    return ExperimentReport(
        name="diag_atoms",
        quantities={"levels": levels, "median_max_atom": medians,
                    "mean_max_atom": np.mean(atoms, axis=0).tolist()},
        checks=[check("median_max_atom_decreasing", decreasing, medians, None,
                      "median max cell mass strictly decreasing in level")],
        warnings=warnings,
        provenance=provenance(config, seeds),
    )


def diag_neg_moments(config: ExperimentConfig) -> ExperimentReport:
    """Replicate means of ell_n^-r stay bounded across levels."""
    model = config.weight_model()
    seeds = config.seed_list()
    r = config.r
    levels = [n for n in NEG_MOMENT_LEVELS if n <= config.max_level]
    warnings = []
    if not math.isfinite(neg_moment(model, r)):
        warnings.append(f"E[W^-{r}] is infinite; boundedness is not expected")
    ells = map_seed_chunks(lambda c: level_totals(model, c, levels), seeds, config.thread_count())
    with np.errstate(divide="ignore"):  # ell_n = 0 is possible when W can vanish
        stats = [summarize(ells[:, j] ** -r) for j in range(len(levels))]
    means = [q["mean"] for q in stats]
    ratio = max(means) / min(means)
    return ExperimentReport(
        name="diag_neg_moments",
        quantities={"r": r, "levels": levels, "mean_ell_neg": stats, "ratio": ratio},
        checks=[check("neg_moment_bounded", ratio <= NEG_MOMENT_RATIO, ratio, NEG_MOMENT_RATIO,
                      "max/min of replicate means over levels <= threshold")],
        warnings=warnings,
        provenance=provenance(config, seeds),
    )


def diag_recursion(config: ExperimentConfig) -> ExperimentReport:
    """ell_n = W_root (ell' + ell'') / 2 with independently rebuilt half-trees."""
    model = config.weight_model()
    seeds = config.seed_list()
    levels = [n for n in RECURSION_LEVELS if n <= config.max_level]
    worst = 0.0
    for seed in seeds:
        real = CascadeRealization(model, seed, config.max_level)
        for n in levels:
            worst = max(worst, real.recursion_check(n) / real.ell_n(n))
    return ExperimentReport(
        name="diag_recursion",
        quantities={"levels": levels, "max_relative_error": worst},
        checks=[check("recursion_identity", worst <= RECURSION_TOL, worst, RECURSION_TOL,
                      "max relative recursion error")],
        provenance=provenance(config, seeds),
    )


def diag_tilt_martingale(config: ExperimentConfig) -> ExperimentReport:
    """Total mass of the tilted Frostman measure has mean-zero increments."""
    model = config.weight_model()
    dset = config.digit_set()
    seeds = config.seed_list()
    s = config.s[0]
    levels = aligned_levels(dset, 0, config.level)
    totals = map_seed_chunks(
        lambda c: np.column_stack([tilted_totals(model, c, dset, s, n) for n in levels]),
        seeds, config.thread_count())
    checks, incs = [], []
    for j in range(1, len(levels)):
        q = summarize(totals[:, j] - totals[:, j - 1])
        incs.append(q)
        checks.append(check(f"increment_{levels[j - 1]}_{levels[j]}", abs(q["mean"]) <= Z_GATE * q["stderr"],
                            abs(q["mean"]), Z_GATE * q["stderr"], f"|mean increment| <= {Z_GATE} stderr"))
    return ExperimentReport(
        name="diag_tilt_martingale",
        quantities={"s": s, "levels": levels, "totals": [summarize(totals[:, j]) for j in range(len(levels))],
                    "increments": incs},
        checks=checks,
        provenance=provenance(config, seeds),
    )


def run_energy(config: ExperimentConfig) -> ExperimentReport:
    """Tilted-measure energies across levels (lower-bound evidence)."""
    model = config.weight_model()
    dset = config.digit_set()
    seeds = config.seed_list()
    levels = aligned_levels(dset, config.n_min, config.n_max)
    s = config.s[0]
    rep = lower_bound_evidence(model, seeds, dset, s, levels)
    if config.out_dir:
        write_csv(Path(config.out_dir) / "energy.csv", ["n", "s", "mean_energy", "stderr", "replicates"],
                  ([r["n"], r["s"], r["mean_energy"], r["stderr"], r["replicates"]] for r in rep.rows))
    return ExperimentReport(
        name="energy",
        quantities={"lower_bound": rep.as_dict(), "rows": rep.rows},
        checks=[check("energy_bounded", rep.bounded, rep.ratio, rep.ratio_threshold,
                      "max/min of mean energies over the upper half of levels <= threshold")],
        warnings=list(rep.warnings),
        provenance=provenance(config, seeds),
    )


def run_rho_moment(config: ExperimentConfig, ks=(2, 4, 6)) -> ExperimentReport:
    """Monte Carlo E[rho(0, 2^-k)^s] against 8 * 2^(-k phi(s))."""
    model = config.weight_model()
    seeds = config.seed_list()
    pairs = [(0.0, 2.0**-k) for k in ks]
    rows = rho_moment_check(model, seeds, config.s, pairs, depth=config.level)
    return ExperimentReport(
        name="rho_moment",
        quantities={"rows": rows},
        checks=[check(f"bound_s{r['s']}_dx{r['y'] - r['x']}", r["ok"], r["ci_upper"], r["bound"],
                      "upper 95% confidence limit <= 8 |x - y|^phi(s)") for r in rows],
        provenance=provenance(config, seeds),
    )


DIAGNOSTICS = {
    "mean-ell": diag_mean_ell,
    "atoms": diag_atoms,
    "neg-moments": diag_neg_moments,
    "recursion": diag_recursion,
    "tilt": diag_tilt_martingale,
    "rho-moment": run_rho_moment,
}
