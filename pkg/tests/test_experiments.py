import json

import pytest

from hypnls.cli import main
from hypnls.errors import ConfigurationError
from hypnls.experiments import EXPERIMENTS, ExperimentConfig, clear_cache, load_config, run, sweep

SMALL = dict(r_max=40.0, n=1024, t_end=1.0)


def test_defaults():
    cfg = ExperimentConfig.preset("plancherel")
    assert (cfg.params.d, cfg.params.sigma, cfg.grid, cfg.solver.dt) == (3, 0.5, (40.0, 4096), 1e-3)


@pytest.mark.parametrize("flat, field", [
    ({"sigma": -1}, "sigma"),
    ({"d": 1}, "d"),
    ({"n": 2}, "n"),
    ({"dt": 0}, "dt"),
    ({"seed": -3}, "seed"),
    ({"bogus": 1}, "bogus"),
    ({"options": {"nope": 1}}, "options.nope"),
])
def test_invalid_config_names_field(flat, field):
    with pytest.raises(ConfigurationError) as exc:
        ExperimentConfig.preset("conservation", **flat)
    assert exc.value.field == field


def test_unknown_experiment():
    with pytest.raises(ConfigurationError):
        ExperimentConfig.preset("nope")


def test_json_round_trip(tmp_path):
    cfg = ExperimentConfig.preset("scatter", sigma=0.3, options={"checkpoints": [1, 2, 4]})
    path = tmp_path / "c.json"
    path.write_text(cfg.to_json())
    assert load_config(path) == cfg
    assert load_config(cfg.to_json()) == cfg
    with pytest.raises(ConfigurationError):
        load_config("{not json")


def test_plancherel_row():
    rep = run(ExperimentConfig.preset("plancherel", options={"eigen_ns": [512, 1024]}), write=False)
    row = rep.get("round_trip_rel_err")
    assert row.flag() == "pass" and row.tolerance == 1e-8


def test_zero_data_conservation():
    clear_cache()
    rep = run(ExperimentConfig.preset("conservation", options={"data": "zero"}, **SMALL), write=False)
    assert rep.value("mass_drift") == 0 and rep.value("energy_drift") == 0


def test_contaminated_run_is_a_failed_row():
    clear_cache()
    cfg = ExperimentConfig.preset("scatter", r_max=8.0, n=256, t_end=4.0, options={"checkpoints": [1, 2, 4]})
    rep = run(cfg, write=False)
    assert not rep.all_passed
    assert not rep.get("boundary_fraction_max").passed


def test_empty_sweep():
    rep = sweep(ExperimentConfig.preset("conservation", **SMALL), "dt", [])
    assert len(rep) == 0 and rep.all_passed


def test_unknown_axis():
    with pytest.raises(ConfigurationError):
        sweep(ExperimentConfig.preset("conservation"), "colour", [1])


def test_sweep_dt_order_and_ordering():
    clear_cache()
    base = ExperimentConfig.preset("conservation", options={"order_check": False}, **SMALL)
    values = [4e-3, 2e-3, 1e-3]
    rep = sweep(base, "dt", values, threads=2)
    tags = [r.experiment for r in rep if r.quantity == "mass_drift"]
    assert tags == [f"conservation[dt={v:.6g}]" for v in values]
    fit = rep.get("energy_drift_order_fit")
    assert fit.value == pytest.approx(2.0, abs=0.2) and fit.passed


def test_sweep_sigma_scatter():
    clear_cache()
    base = ExperimentConfig.preset("scatter", r_max=100.0, n=2048, t_end=8.0, dt=5e-3,
                                   options={"checkpoints": [1.0, 2.0, 4.0, 8.0]})
    rep = sweep(base, "sigma", [0.3, 0.5, 2 / 3])
    assert rep.value("sections") == 3
    # distances already decrease on this short horizon; the final/first gate needs T = 40
    assert all(r.passed for r in rep if r.quantity == "min_consecutive_decrease")
    assert len([r for r in rep if r.quantity == "min_consecutive_decrease"]) == 3
    assert rep.get("all_cauchy_monotone").tolerance == 1.0


def test_cli_run_and_exit_codes(tmp_path, capsys, monkeypatch):
    monkeypatch.setenv("HYPNLS_OUT", str(tmp_path / "env"))
    code = main(["run", "plancherel", "--set", "options.eigen_ns=[512,1024]"])
    out = capsys.readouterr().out
    assert code == 0 and out.startswith("experiment,quantity,value")
    assert (tmp_path / "env" / "plancherel.csv").read_text() == out
    # the gated Kunze-Stein spread fails, so the exit status is 1
    assert main(["run", "kunze_stein", "--out", str(tmp_path / "ks")]) == 1
    assert main(["run", "conservation", "--set", "sigma=-1"]) == 2
    assert "sigma" in capsys.readouterr().err
    assert main(["sweep", "conservation", "--axis", "dt", "--values", ""]) == 0


def test_cli_config_file(tmp_path, capsys):
    cfg = tmp_path / "c.json"
    cfg.write_text(json.dumps({"d": 3, "n": 1024, "t_end": 0.5, "options": {"data": "zero"}}))
    assert main(["run", "conservation", "--config", str(cfg), "--out", str(tmp_path)]) == 0
    assert (tmp_path / "conservation_series.csv").exists()
    assert (tmp_path / "conservation_snapshots.bin").exists()
    capsys.readouterr()
    assert main(["list"]) == 0
    listed = capsys.readouterr().out.splitlines()
    assert [line.split(":")[0] for line in listed] == list(EXPERIMENTS)


def test_cli_usage_errors(capsys):
    with pytest.raises(SystemExit) as exc:
        main(["sweep", "conservation", "--axis", "colour", "--values", "1"])
    assert exc.value.code == 2
    assert main(["run", "conservation", "--set", "nokey"]) == 2


def test_determinism(tmp_path):
    cfg = dict(seed=3, options={"checkpoints": [0.2, 0.5, 1.0]}, **SMALL)
    outs = []
    for k in range(2):
        clear_cache()
        run(ExperimentConfig.preset("scatter", output_dir=str(tmp_path / str(k)), **cfg))
        outs.append([(tmp_path / str(k) / f).read_bytes() for f in
                     ("scatter.csv", "scatter_series.csv", "scatter_snapshots.bin")])
    assert outs[0] == outs[1]
