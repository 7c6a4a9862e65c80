import io

import numpy as np
import pytest

from sbmspec.config import ConfigError, build_config, load_config, parse_key_values
from sbmspec.experiments import (
    ANALYTIC_COLUMNS,
    SWEEP_COLUMNS,
    derive_seed,
    run_analytic_accuracy,
    run_experiment,
    run_ratio_surface,
    run_sweep,
    run_zero_comm,
    summarize_sweep,
    sweep_replicate,
    transfer_labels,
)
from sbmspec.clustering import spectral_cluster, spectral_embedding
from sbmspec.metrics import misclassification_rate
from sbmspec.sbm import BlockModelParams, sample, sparse_limit_ratio


# config parsing

def test_parse_key_values_comments_and_blanks():
    kv = parse_key_values("# c\nn = 10\n\nalpha=0.1  # trailing\n")
    assert kv == {"n": "10", "alpha": "0.1"}


@pytest.mark.parametrize("text,where", [("n=1\nn=2\n", "line 2"), ("n\n", "line 1"), ("=3\n", "line 1")])
def test_parse_key_values_diagnostics(text, where):
    with pytest.raises(ConfigError, match=where):
        parse_key_values(text)


def test_config_defaults_and_grids():
    cfg = build_config("sweep-gamma-alpha", {"seed": "4", "alpha": "0.01:0.02:3"})
    assert cfg.seed == 4 and cfg.replicates == 20
    assert cfg.grid("alpha") == pytest.approx([0.01, 0.015, 0.02])
    assert cfg.scalar("n") == 1000


@pytest.mark.parametrize("kind,values,field", [
    ("nope", {}, "kind"),
    ("sweep-n", {"replicates": "0"}, "replicates"),
    ("sweep-n", {"replicates": "x"}, "replicates"),
    ("sweep-n", {"alpha": "1.5"}, "alpha"),
    ("sweep-n", {"n": "10.5"}, "n"),
    ("sweep-n", {"bogus": "1"}, "bogus"),
    ("ratio-surface", {"x": "a,b"}, "x"),
    ("ratio-surface", {"x": ""}, "x"),
    ("linkpred", {}, "manifest"),
    ("zero-comm", {"transfer": "teleport"}, "transfer"),
])
def test_config_errors_name_field(kind, values, field):
    with pytest.raises(ConfigError, match=field):
        build_config(kind, values)


def test_load_config_kind_from_file(tmp_path):
    p = tmp_path / "c.cfg"
    p.write_text("kind=zero-comm\nreplicates=2\n")
    cfg = load_config(str(p), overrides={"seed": "7"})
    assert cfg.kind == "zero-comm" and cfg.replicates == 2 and cfg.seed == 7
    with pytest.raises(ConfigError):
        load_config("replicates=2\n")


def test_derive_seed_distinct_and_stable():
    assert derive_seed(1, 2, 3) == derive_seed(1, 2, 3)
    seeds = {derive_seed(0, c, r) for c in range(20) for r in range(20)}
    assert len(seeds) == 400


# ratio surface

def test_ratio_surface_rows():
    cfg = build_config("ratio-surface", {"alpha": "0.2,1.0", "x": "0,0.5,1,2"})
    rows = run_ratio_surface(cfg)
    by = {(r["alpha"], r["x"]): r for r in rows}
    assert by[(0.2, 0.0)]["sparse_limit_ratio"] == 0.25
    assert by[(0.2, 1.0)]["skipped"] == "degenerate"
    assert by[(1.0, 2.0)]["skipped"] == "gamma>1"
    assert by[(0.2, 2.0)]["sparse_limit_ratio"] == pytest.approx(sparse_limit_ratio(0.5))
    assert all(r["schema"] == 1 for r in rows)


def test_ratio_surface_dense_max_default_grid():
    rows = run_ratio_surface(build_config("ratio-surface", {"alpha": "0.01:1:34", "x": "0.01:2:60"}))
    dense = [r["dense_ratio"] for r in rows if r["dense_ratio"] != ""]
    assert max(dense) <= 1.315


# sweeps

def test_sweep_replicate_separated_model():
    res = sweep_replicate(BlockModelParams(300, 0.5, 0.1, 0.1, 0.005), seed=3)
    assert res["unnorm"] < 0.05 and res["norm"] < 0.05
    assert res["train_giant_fraction"] >= 0.95


def test_sweep_replicate_skips_fragmented():
    res = sweep_replicate(BlockModelParams(300, 0.5, 0.005, 0.005, 0.001), seed=3)
    assert "skipped" in res and "norm" not in res


def test_transfer_refit_and_procrustes_agree_on_easy_case():
    p = BlockModelParams(300, 0.5, 0.12, 0.12, 0.01)
    g_tr, truth = sample(p, 1)
    g_te, _ = sample(p, 2)
    nodes = np.arange(300)
    a, emb = spectral_cluster(g_tr, 2, True, seed=0)
    emb_te = spectral_embedding(g_te, 2, True)
    for strategy in ("procrustes", "refit"):
        pred = transfer_labels(emb, a, nodes, emb_te, nodes, strategy=strategy)
        assert misclassification_rate(pred, truth) < 0.05
    with pytest.raises(ValueError):
        transfer_labels(emb, a, nodes, emb_te, nodes, strategy="magic")


def test_run_sweep_rows_and_summary():
    cfg = build_config("sweep-n", {"n": "300,400", "alpha": "0.06", "beta": "0.06", "gamma": "0.01",
                                   "replicates": "2", "seed": "5"})
    rows = run_sweep(cfg)
    assert len(rows) == 2 * 2 * 2
    assert all(set(SWEEP_COLUMNS) == set(r) for r in rows)
    summ = summarize_sweep(rows)
    assert {k[-1] for k in summ} == {"norm", "unnorm"}
    assert all(count == 2 for _, count in summ.values())


def test_sweep_csv_bit_identical():
    cfg = build_config("sweep-gamma-alpha", {"alpha": "0.05", "x": "0.1", "n": "250", "replicates": "2",
                                             "seed": "11"})
    a, b = io.StringIO(), io.StringIO()
    run_experiment(cfg, a)
    run_experiment(cfg, b)
    assert a.getvalue() == b.getvalue()
    assert a.getvalue().splitlines()[0] == ",".join(SWEEP_COLUMNS)


def test_sweep_pool_matches_serial():
    values = {"alpha": "0.05", "x": "0.1,0.3", "n": "200", "replicates": "2", "seed": "3"}
    serial = run_sweep(build_config("sweep-gamma-alpha", values))
    pooled = run_sweep(build_config("sweep-gamma-alpha", dict(values, workers="2")))
    assert serial == pooled


# zero communication and analytic accuracy

def test_zero_comm_rows():
    cfg = build_config("zero-comm", {"n": "400", "alpha": "0.08", "beta": "0.08", "replicates": "3", "seed": "2"})
    rows = run_zero_comm(cfg)
    assert [r["seed"] for r in rows] == [2, 3, 0]
    ratios = [r["ratio_d11_unnorm_over_norm"] for r in rows]
    assert 2.5 < np.median(ratios) < 6
    for r in rows:
        assert 0.5 <= r["r1_unnorm_sq"] / r["r1_unnorm_sq_predicted"] <= 2


def test_analytic_accuracy_small_grid():
    cfg = build_config("analytic-accuracy", {"n": "300", "alpha": "0.5", "beta": "0.5,0.7",
                                             "x": "0.25,1.0,1.5,3.0", "seed": "1"})
    rows = run_analytic_accuracy(cfg)
    cells = [r for r in rows if r["row_type"] == "cell"]
    summary = rows[-1]
    assert summary["row_type"] == "summary"
    # x=1 with alpha=beta is degenerate; x=3 puts gamma above 1
    assert summary["skipped_cells"] == 3 and summary["cells"] == len(cells) == 5
    assert all(isinstance(r["seed"], int) for r in rows)
    assert set(rows[0]) <= set(ANALYTIC_COLUMNS)
    assert summary["mean_d12"] < 0.05
