import json
import math

import pytest

from cascade_kpz.harness.config import ExperimentConfig
from cascade_kpz.harness.experiments import (
    ExperimentError,
    diag_atoms,
    diag_mean_ell,
    diag_neg_moments,
    diag_recursion,
    diag_tilt_martingale,
    map_seed_chunks,
    run_energy,
    run_kpz_experiment,
    run_rho_moment,
    summarize,
)

FLAT = "family=twopoint sigma=0"
LN = "family=lognormal sigma2=0.6931471805599453"
HALF = "set=digits b=2 allow=00,11"


def cfg(**kw):
    return ExperimentConfig(**kw)


def test_summarize_ci():
    q = summarize([1.0, 2.0, 3.0])
    assert q["ci95"] == [q["mean"] - 1.96 * q["stderr"], q["mean"] + 1.96 * q["stderr"]]
    assert q["stderr"] >= 0


def test_map_seed_chunks_order(monkeypatch):
    import numpy as np

    import cascade_kpz.harness.experiments as ex

    monkeypatch.setattr(ex, "CHUNK", 3)
    out = map_seed_chunks(lambda c: c.astype(float), list(range(10)), threads=4)
    assert out.tolist() == list(range(10))
    assert isinstance(out, np.ndarray)


def test_kpz_degenerate_gap_zero():
    rep = run_kpz_experiment(cfg(model=FLAT, set=HALF, replicates=3))
    assert rep.quantities["gap"] == 0.0 and rep.quantities["z_score"] == 0.0
    assert rep.passed


def test_kpz_experiment_report(tmp_path):
    rep = run_kpz_experiment(cfg(model=LN, set=HALF, replicates=20, n_min=6, n_max=12, out_dir=str(tmp_path)))
    q = rep.quantities
    assert q["predicted_zeta"] == pytest.approx((3 - math.sqrt(5)) / 2, abs=1e-12)
    assert q["gap"] == pytest.approx(q["quantum_dimension"]["value"] - q["predicted_zeta"])
    lines = (tmp_path / "partition_levels.csv").read_text().splitlines()
    assert lines[0] == "n,s,log2_Z,realization_id" and len(lines) == 1 + 20 * 4
    d = json.loads(rep.to_json())
    assert d["provenance"]["config_hash"] == cfg(model=LN, set=HALF, replicates=20, n_min=6, n_max=12).config_hash()
    assert len(d["provenance"]["seeds"]) == 20


def test_kpz_failure_fraction_gate():
    c = cfg(model=LN, set="set=full", replicates=30, n_min=2, n_max=4, aggregate="per_realization")
    import cascade_kpz.harness.experiments as ex

    orig = ex.PartitionProfiles

    class Raw(orig):
        def __init__(self, *a, **kw):
            kw["normalize"] = False
            super().__init__(*a, **kw)

    ex.PartitionProfiles = Raw
    try:
        with pytest.raises(ExperimentError):
            run_kpz_experiment(c)
    finally:
        ex.PartitionProfiles = orig


def test_kpz_rejects_invalid_model():
    from cascade_kpz.weights import InvalidModelError

    with pytest.raises(InvalidModelError):
        run_kpz_experiment(cfg(model="family=twopoint sigma=1", set=HALF))


def test_degenerate_diagnostics_zero_variance():
    c = cfg(model=FLAT, set=HALF, replicates=5, level=8)
    rep = diag_mean_ell(c)
    assert rep.quantities["ell_n"]["mean"] == 1.0 and rep.quantities["ell_n"]["stderr"] == 0.0 and rep.passed
    rep = diag_atoms(c)
    assert rep.quantities["median_max_atom"] == [2.0**-4, 2.0**-8, 2.0**-12, 2.0**-16] and rep.passed
    rep = diag_neg_moments(c)
    assert all(q["mean"] == 1.0 for q in rep.quantities["mean_ell_neg"]) and rep.passed
    assert diag_recursion(c).passed
    rep = diag_tilt_martingale(c)
    assert rep.passed and all(q["stderr"] == 0.0 for q in rep.quantities["increments"])


def test_mean_ell_level_zero():
    rep = diag_mean_ell(cfg(model=LN, replicates=4, level=0))
    assert rep.quantities["ell_n"]["mean"] == 1.0 and rep.passed


def test_neg_moment_r_zero():
    rep = diag_neg_moments(cfg(model=LN, replicates=4, r=0.0))
    assert all(q["mean"] == 1.0 for q in rep.quantities["mean_ell_neg"])


def test_neg_moment_warning_when_infinite():
    rep = diag_neg_moments(cfg(model="family=empirical values=0,2 probs=0.5,0.5", replicates=4))
    assert rep.warnings


def test_single_replicate_atoms_warns():
    rep = diag_atoms(cfg(model=LN, replicates=1))
    assert rep.warnings


def test_lognormal_diagnostics_small():
    c = cfg(model=LN, set=HALF, replicates=300, level=6, s=(0.3,))
    for fn in (diag_mean_ell, diag_recursion, diag_tilt_martingale, diag_neg_moments):
        assert fn(c).passed, fn.__name__


def test_energy_and_rho_reports(tmp_path):
    c = cfg(model=LN, set=HALF, replicates=20, n_min=2, n_max=6, s=(0.3,), out_dir=str(tmp_path))
    rep = run_energy(c)
    assert rep.passed
    lines = (tmp_path / "energy.csv").read_text().splitlines()
    assert lines[0] == "n,s,mean_energy,stderr,replicates" and len(lines) == 4
    rep = run_rho_moment(cfg(model=LN, replicates=500, level=8, s=(0.3, 0.7)))
    assert len(rep.checks) == 6 and rep.passed


def test_report_json_is_stable():
    a = diag_mean_ell(cfg(model=LN, replicates=10, threads="1")).to_json()
    b = diag_mean_ell(cfg(model=LN, replicates=10, threads="4")).to_json()
    assert a == b
    d = json.loads(a)
    assert list(d) == sorted(d)
