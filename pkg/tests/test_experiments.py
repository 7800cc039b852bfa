import math

import numpy as np
import pytest

from latlab import experiments as ex
from latlab.errors import BadDensity, NumZero, SpecError

SMALL = {
    "secondmoment": dict(bigT=20.0, samples_t=6, samples_x=20),
    "gdecay": dict(bigT=50.0, samples_t=6, kmax=32),
    "orbitclt": dict(lattice="quad:sqrt:2,-sqrt:2!unimodular", r="10,20", trials=500),
    "zsquare": dict(x=0.25, bigT=1e3, samples_t=2000),
    "voracle": dict(t_list="10,50,100"),
}


def small(name, seed=1, **kw):
    return ex.ExperimentConfig(name, seed, **(SMALL[name] | kw))


def test_parse_config():
    text = """
    # second moment run
    experiment = secondmoment
    seed = 7
    lattice = quad:sqrt:2,-sqrt:2
    bigT = 100      # window upper end
    samples-t = 12
    --samples-x = 30
    rho = window:0.5
    """
    cfg = ex.parse_config(text)
    assert (cfg.experiment, cfg.seed, cfg.bigT, cfg.samples_t, cfg.samples_x) == ("secondmoment", 7, 100.0, 12, 30)
    assert cfg.density.alpha == 0.5


def test_parse_config_lists():
    cfg = ex.parse_config("experiment = orbitclt\nseed = 0\nr = 25, 50,100\nk-list = 0,2")
    assert cfg.r == (25.0, 50.0, 100.0)
    assert cfg.k_list == (0, 2)


@pytest.mark.parametrize(
    "text",
    [
        "experiment = secondmoment",  # no seed
        "seed = 3",  # no experiment
        "experiment = plots\nseed = 1",
        "experiment = gdecay\nseed = 1\ncolour = red",
        "experiment = gdecay\nseed = 1\nsamples_t = 0",
        "experiment = gdecay\nseed = -1",
        "experiment = gdecay\nseed 1",
    ],
)
def test_parse_config_rejects(text):
    with pytest.raises(SpecError):
        ex.parse_config(text)


def test_bad_density_in_config():
    with pytest.raises(BadDensity):
        ex.parse_config("experiment = gdecay\nseed = 1\nrho = window:2")


def test_default_density_per_experiment():
    assert ex.ExperimentConfig("zsquare", 0).density.kind == "uniform"
    assert ex.ExperimentConfig("secondmoment", 0).density.alpha == 0.5


def test_seed_required():
    with pytest.raises(SpecError):
        ex.ExperimentConfig("secondmoment", None)


def test_second_moment_target_constant():
    rep = ex.run_experiment(small("secondmoment"))
    assert rep.stats["target"][0] == pytest.approx(1 / (32 * math.pi**4), rel=1e-12)
    assert rep.stats["target"][0] == pytest.approx(3.2083e-4, rel=1e-4)
    assert rep.columns == ["t", "V", "m2_over_V"]
    assert len(rep.rows) == 6
    t = rep.column("t")
    assert np.all((t >= 10) & (t <= 20))


def test_second_moment_numzero_guidance():
    with pytest.raises(NumZero, match="zsquare"):
        ex.run_experiment(small("secondmoment", lattice="zsquare"))


def test_gdecay_identities():
    rep = ex.run_experiment(small("gdecay"))
    assert rep.columns[:6] == ["t", "V", "G1_over_V", "abs_G2_over_V", "abs_G3_over_V", "abs_G4_over_V"]
    assert rep.stats["max_identity_residual"][0] <= 1e-10
    assert np.all(rep.column("abs_G4_over_V") >= 0)
    with pytest.raises(NumZero, match="zsquare"):
        ex.run_experiment(small("gdecay", lattice="zsquare"))


def test_orbit_rows():
    rep = ex.run_experiment(small("orbitclt"))
    assert rep.columns == ["r", "count", "v_tilde", "ks", "be_bound", "trials", "seed"]
    assert [row[0] for row in rep.rows] == [10.0, 20.0]
    assert [row[1] for row in rep.rows] == [15, 29]


def test_zsquare_rows():
    rep = ex.run_experiment(small("zsquare"))
    assert rep.rows[-1][0] == "ks"
    k2 = [row for row in rep.rows if row[0] == 2][0]
    assert k2[1] == pytest.approx(4 / 3)
    assert "lattice" not in rep.metadata


def test_voracle_rows():
    rep = ex.run_experiment(small("voracle"))
    assert rep.metadata["C"] == pytest.approx(1.0)
    r = rep.column("V_over_oracle")
    assert np.all((r > 0.1) & (r < 10))


def test_csv_round_trip(tmp_path):
    rep = ex.MomentReport(["t", "value"])
    rep.rows.append((1.5, 1 / 3))
    rep.add_stat("mean", 0.1, 0.01)
    rep.metadata = {"seed": 3, "lattice": "zsquare"}
    path = tmp_path / "r.csv"
    ex.emit_csv(rep, path)
    meta, header, rows = ex.read_csv(path)
    assert header == ["t", "value"]
    assert len(rows) == 1 and float(rows[0][1]) == 1 / 3
    assert meta["seed"] == "3" and meta["stat.mean"] == "0.10000000000000001,0.01"
    raw = path.read_bytes()
    assert b"\r" not in raw and raw.endswith(b"\n")


def test_empty_report(tmp_path):
    path = tmp_path / "e.csv"
    ex.emit_csv(ex.MomentReport(["a", "b"], metadata={"seed": 0}), path)
    assert path.read_text() == "# seed=0\na,b\n"


def test_negative_stderr_rejected():
    with pytest.raises(ValueError):
        ex.MomentReport(["a"]).add_stat("x", 1.0, -1.0)


@pytest.mark.parametrize("name", ex.EXPERIMENTS)
def test_rerun_byte_identical(tmp_path, name):
    a, b = tmp_path / "a.csv", tmp_path / "b.csv"
    ex.run_experiment(small(name, out=str(a)))
    ex.run_experiment(small(name, out=str(b)))
    assert a.read_bytes() == b.read_bytes()


def test_seed_changes_output():
    a = ex.format_csv(ex.run_experiment(small("zsquare", seed=1)))
    b = ex.format_csv(ex.run_experiment(small("zsquare", seed=2)))
    assert a != b


@pytest.mark.parametrize("name", ["secondmoment", "gdecay"])
def test_parallel_matches_serial(name):
    s = ex.run_experiment(small(name))
    p = ex.run_experiment(small(name, workers=3))
    for key, (v, se) in s.stats.items():
        assert p.stats[key][0] == pytest.approx(v, rel=1e-9, abs=1e-300)


def test_work_cap():
    from latlab.errors import BallTooLarge

    with pytest.raises(BallTooLarge):
        ex.run_experiment(ex.ExperimentConfig("secondmoment", 0, bigT=1e6, samples_t=1000, samples_x=1000))
