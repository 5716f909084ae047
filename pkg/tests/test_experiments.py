import csv
import os

import numpy as np
import pytest

from sorted_l1l2 import cli
from sorted_l1l2.experiments import (
    ConfigError,
    ExperimentConfig,
    aggregate,
    build_config,
    parse_config_text,
    run_convergence,
    run_noisy_table,
    run_phase,
    run_toy,
    toy_argmins,
)
from sorted_l1l2.metrics import TrialRecord


def _read(path):
    with open(path) as fh:
        return list(csv.DictReader(fh))


def test_parse_config():
    vals = parse_config_text('# comment\ntrials = 3\nsolvers = ["l1", "sorted"]\n\nalpha = 0.5\n')
    assert vals == {"trials": 3, "solvers": ["l1", "sorted"], "alpha": 0.5}
    with pytest.raises(ConfigError, match="unknown key"):
        parse_config_text("trails = 3")
    with pytest.raises(ConfigError, match="JSON"):
        parse_config_text("solvers = [l1]")
    with pytest.raises(ConfigError):
        parse_config_text("just words")


def test_config_validation():
    with pytest.raises(ConfigError):
        build_config("phase", {"trials": 0})
    with pytest.raises(ConfigError):
        build_config("phase", {"sparsities": []})
    with pytest.raises(ConfigError):
        build_config("phase", solvers=["lp-half"])
    with pytest.raises(ConfigError):
        build_config("noisy_table", {"noise_sigma": 0.0})
    assert build_config("support").coherence_params == [0.1]
    assert set(ExperimentConfig.keys()) >= {"seed", "out", "threads", "solvers"}


def test_toy_argmins():
    rows = {(r["a"], r["model"]): r for r in toy_argmins()}
    assert rows[(-3.0, "l1")]["argmin_k"] == -0.33
    assert rows[(-3.0, "l1l2")]["argmin_is_zero"]
    assert not rows[(3.5, "l1l2")]["argmin_is_zero"]
    assert rows[(4.0, "l1")]["n_minimizers"] > 1
    assert all(not rows[(a, "l1-l2")]["argmin_is_zero"] for a in (-3.0, 3.5, 4.0))


def test_run_toy_writes_csv(tmp_path):
    paths = run_toy(build_config("toy", out=str(tmp_path)))
    objs = _read(paths[0])
    assert len(objs) == 3 * 6 * 401
    assert {r["model"] for r in objs} == {"l1", "l1-l2", "l1l2", "sorted_t2_r1", "sorted_t2_r5", "sorted_t2_r10"}
    assert os.path.exists(tmp_path / "meta.json")


def _phase_cfg(tmp_path, **kw):
    vals = dict(sparsities=[6, 14], trials=3, solvers=["l1", "sorted"], m=32, n=128, out=str(tmp_path))
    vals.update(kw)
    return build_config("phase", vals)


def test_run_phase_outputs(tmp_path):
    trials_path, agg_path = run_phase(_phase_cfg(tmp_path))
    rows = _read(trials_path)
    assert list(rows[0]) == TrialRecord.columns()
    assert len(rows) == 2 * 2 * 3
    for r in rows:
        assert r["success"] == str(int(float(r["rel_err"]) < 1e-3))
    agg = _read(agg_path)
    assert len(agg) == 4
    for a in agg:
        cell = [r for r in rows if r["solver"] == a["solver"] and r["sparsity"] == a["sparsity"]]
        assert float(a["success_mean"]) == pytest.approx(np.mean([int(r["success"]) for r in cell]))
        assert a["trials"] == "3"


def test_phase_deterministic_across_workers(tmp_path):
    a = run_phase(_phase_cfg(tmp_path / "a", threads=1))
    b = run_phase(_phase_cfg(tmp_path / "b", threads=3))
    for pa, pb in zip(a, b):
        with open(pa, "rb") as fa, open(pb, "rb") as fb:
            assert fa.read() == fb.read()


def test_run_noisy_table_small(tmp_path, caplog):
    cfg = build_config("noisy_table", {"m_list": [100], "n": 200, "sparsities": [10], "trials": 2,
                                       "solvers": ["l1", "sorted"], "out": str(tmp_path)})
    paths = run_noisy_table(cfg)
    table = _read(paths[-1])
    assert [r["solver"] for r in table] == ["l1", "sorted"]
    for r in table:
        assert float(r["mse_over_oracle"]) == pytest.approx(float(r["mse_mean"]) / float(r["oracle_mse"]))


def test_run_convergence(tmp_path, caplog):
    cfg = build_config("convergence", {"inner_max_list": [1, 20], "noisy_m": 100, "noisy_n": 200,
                                       "noisy_sparsity": 10, "out": str(tmp_path)})
    rows = _read(run_convergence(cfg)[0])
    assert {r["setting"] for r in rows} == {"noisefree", "noisy"}
    assert {r["inner_max"] for r in rows if r["setting"] == "noisy"} == {"1", "20"}


def test_aggregate_population_std():
    recs = [TrialRecord("l1", "dct", 5.0, 4, 8, 2, s, e, 0.0, e < 1e-3, 1.0, 1.0, 1.0, 1, 0.0)
            for s, e in enumerate([0.0, 1.0])]
    _, rows = aggregate(recs)
    assert rows[0]["rel_err_mean"] == 0.5 and rows[0]["rel_err_std"] == 0.5
    assert rows[0]["success_mean"] == 0.5


def test_cli_exit_codes(tmp_path, capsys):
    assert cli.main(["toy", "--out", str(tmp_path)]) == 0
    bad = tmp_path / "bad.cfg"
    bad.write_text("sparsitys = [4]\n")
    assert cli.main(["phase", "--config", str(bad)]) == 1
    assert cli.main(["phase", "--config", str(tmp_path / "missing.cfg")]) == 1
    assert cli.main(["phase", "--solver", "nope"]) == 1


def test_cli_overrides(tmp_path):
    cfgf = tmp_path / "p.cfg"
    cfgf.write_text('sparsities = [4]\ntrials = 1\nm = 16\nn = 48\nsolvers = ["sorted"]\nseed = 1\n')
    out = tmp_path / "out"
    assert cli.main(["phase", "--config", str(cfgf), "--solver", "l1,sorted-1stage", "--seed", "9",
                     "--out", str(out)]) == 0
    rows = _read(out / "trials.csv")
    assert [r["solver"] for r in rows] == ["l1", "sorted-1stage"]


@pytest.mark.parametrize("name", sorted(os.listdir(os.path.join(os.path.dirname(__file__), "..", "scripts", "configs"))))
def test_shipped_configs_parse(name):
    path = os.path.join(os.path.dirname(__file__), "..", "scripts", "configs", name)
    with open(path) as fh:
        values = parse_config_text(fh.read())
    kind = {"toy": "toy", "phase": "phase", "stages": "phase", "noisy": "noisy_table",
            "support": "support", "convergence": "convergence"}[name.split("_")[0].removesuffix(".cfg")]
    build_config(kind, values)
