import pytest

from cascade_kpz.fractal_sets import DigitRestrictionSet
from cascade_kpz.harness.config import (
    ConfigError,
    ExperimentConfig,
    parse_model,
    parse_seed,
    parse_set,
    read_config_file,
    read_seeds_file,
)
from cascade_kpz.weights import Empirical, LogNormal, TwoPoint


def test_parse_model():
    assert parse_model("family=lognormal sigma2=0.5") == LogNormal(0.5)
    assert parse_model("family=lognormal sigma=0.5") == LogNormal(0.25)
    assert parse_model("family=twopoint sigma=0.3") == TwoPoint(0.3)
    assert parse_model("family=empirical values=0.5,1.5 probs=0.5,0.5") == Empirical((0.5, 1.5), (0.5, 0.5))
    for bad in ("family=gamma k=2", "family=twopoint", "family=lognormal sigma2=-1", "nonsense"):
        with pytest.raises(ConfigError):
            parse_model(bad)


def test_parse_model_file_relative_to_base(tmp_path):
    (tmp_path / "w.csv").write_text("value,prob\n0.5,0.5\n1.5,0.5\n")
    assert parse_model("family=empirical file=w.csv", base_dir=tmp_path) == Empirical((0.5, 1.5), (0.5, 0.5))


def test_parse_set():
    assert parse_set("full") == DigitRestrictionSet.full()
    assert parse_set("set=point") == DigitRestrictionSet.point()
    assert parse_set("set=digits b=2 allow=00,11") == DigitRestrictionSet(2, ("00", "11"))
    for bad in ("set=digits b=2", "set=cantor", "set=digits b=2 allow=0x"):
        with pytest.raises(ConfigError):
            parse_set(bad)


def test_parse_seed():
    assert parse_seed("17") == 17
    assert parse_seed("0xff") == 255
    assert parse_seed(str(2**64 - 1)) == 2**64 - 1
    for bad in ("-1", str(2**64), "abc"):
        with pytest.raises(ConfigError):
            parse_seed(bad)


def test_files(tmp_path):
    cfg = tmp_path / "run.cfg"
    cfg.write_text("# experiment\nmodel = family=twopoint sigma=0.2\nreplicates=5  # small\n\nn-max = 10\n")
    assert read_config_file(cfg) == {"model": "family=twopoint sigma=0.2", "replicates": "5", "n_max": "10"}
    seeds = tmp_path / "seeds.txt"
    seeds.write_text("1 2\n0x10, 7  # four\n")
    assert read_seeds_file(seeds) == (1, 2, 16, 7)
    (tmp_path / "bad.cfg").write_text("model\n")
    with pytest.raises(ConfigError):
        read_config_file(tmp_path / "bad.cfg")


def test_config_invariants():
    with pytest.raises(ConfigError):
        ExperimentConfig(replicates=0)
    with pytest.raises(ConfigError):
        ExperimentConfig(n_max=30, max_level=24)
    with pytest.raises(ConfigError):
        ExperimentConfig(seeds=(1, 1))
    with pytest.raises(ConfigError):
        ExperimentConfig.from_mapping({"colour": "red"})


def test_from_mapping_and_seeds():
    c = ExperimentConfig.from_mapping({"seed": "0x2a", "replicates": "4", "s": "0.3,0.7", "n-min": "2"})
    assert c.master_seed == 42 and c.s == (0.3, 0.7) and c.n_min == 2
    assert len(c.seed_list()) == 4 and len(set(c.seed_list())) == 4
    c = ExperimentConfig.from_mapping({"seeds": "5 6 7"})
    assert c.seed_list() == [5, 6, 7]


def test_hash_ignores_runtime_fields():
    a = ExperimentConfig(threads="1", out_dir="/tmp/a")
    b = ExperimentConfig(threads="auto", out_dir=None)
    assert a.config_hash() == b.config_hash()
    assert a.config_hash() != ExperimentConfig(replicates=7).config_hash()
    assert b.thread_count() >= 1
