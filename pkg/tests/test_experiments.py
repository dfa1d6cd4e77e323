"""Config ingestion, experiment orchestration, outputs and the CLI."""

import dataclasses
import json

import numpy as np
import pytest

from ifgame import (ConfigError, is_feasible, load_config, run_analyze,
                    run_simulate, run_solve, run_sweep, serialize_config,
                    write_outputs)
from ifgame.cli import main
from ifgame.config import SimulateConfig, SweepConfig
from ifgame.experiments import build_game, ne_outcome_for_simulation

EXAMPLE1 = {
    "game": {"players": 3, "direct_gains": [3.0, 1.5],
             "cross_gains": [0.1, 0.5], "link_probs": "uniform", "pbar": 1.0},
    "solver": {"which": "all"},
    "output": {"dir": "out", "formats": ["csv", "json"]},
}

EXAMPLE2 = {
    "game": {"players": 3, "direct_gains": [0.3, 1.0],
             "cross_gains": [0.2, 0.1], "link_probs": "uniform", "pbar": 2.0},
    "solver": {"which": "all"},
    "output": {"dir": "out", "formats": ["csv", "json"]},
}

SMALL = {
    "game": {"players": 2, "direct_gains": [2.0, 1.0],
             "cross_gains": [0.3], "pbar": 1.0},
    "solver": {"which": "all", "pareto": {"starts": 3, "seed": 4}},
    "output": {"dir": "out", "formats": ["csv", "json"]},
}


def cfg(doc, **game_overrides):
    doc = json.loads(json.dumps(doc))
    doc["game"].update(game_overrides)
    return load_config(json.dumps(doc))


def test_config_round_trip():
    config = cfg(EXAMPLE1)
    text = serialize_config(config)
    again = load_config(text)
    assert again == config
    assert serialize_config(again) == text


def test_config_missing_pbar_names_field():
    doc = json.loads(json.dumps(EXAMPLE1))
    del doc["game"]["pbar"]
    with pytest.raises(ConfigError, match="pbar"):
        load_config(json.dumps(doc))


def test_config_negative_gain_rejected():
    with pytest.raises(ConfigError, match="direct_gains"):
        cfg(EXAMPLE1, direct_gains=[3.0, -1.5])


def test_config_unknown_key_rejected():
    doc = json.loads(json.dumps(EXAMPLE1))
    doc["game"]["bandwidth"] = 5.0
    with pytest.raises(ConfigError, match="bandwidth"):
        load_config(json.dumps(doc))
    doc = json.loads(json.dumps(EXAMPLE1))
    doc["solver"]["vi"] = {"epsilon": 1.0}
    with pytest.raises(ConfigError, match="epsilon"):
        load_config(json.dumps(doc))


def test_config_parse_error_reports_line():
    with pytest.raises(ConfigError, match="line 2"):
        load_config('{\n  "game": [,]\n}')


def test_config_dimension_mismatch():
    with pytest.raises(ConfigError, match="pbar"):
        cfg(EXAMPLE1, pbar=[1.0, 2.0])


def test_run_analyze_example_values():
    rep1 = run_analyze(cfg(EXAMPLE1))
    assert rep1.rho_smax == pytest.approx(0.6667, abs=1e-3)
    assert rep1.rho_hhat == pytest.approx(0.6667, abs=1e-3)
    assert rep1.contraction_ok
    rep2 = run_analyze(cfg(EXAMPLE2))
    assert rep2.rho_smax == pytest.approx(1.3333, abs=1e-3)
    assert not rep2.contraction_ok
    assert rep2.htilde_pd
    repc = run_analyze(cfg(EXAMPLE1, direct_gains=[0.3, 0.6],
                           cross_gains=[0.2, 0.1]))
    assert repc.rho_hhat > 1.0 and repc.htilde_pd


def test_run_analyze_equivalences_end_to_end():
    # the contraction/radius identities hold through the config layer too
    rng = np.random.default_rng(31)
    from util_random import random_spec
    for _ in range(10):
        spec = random_spec(rng, state_limit=400)
        doc = {
            "game": {"players": spec.n_players,
                     "direct_gains": spec.gains.direct.tolist(),
                     "cross_gains": spec.gains.cross.tolist(),
                     "link_probs": {"direct": spec.dists.direct.tolist(),
                                    "cross": spec.dists.cross.tolist()},
                     "pbar": spec.pbar.tolist()},
        }
        report = run_analyze(load_config(json.dumps(doc)))
        assert report.rho_hhat == pytest.approx(report.rho_smax, abs=1e-9)
        assert report.contraction_ok == (report.rho_smax < 1.0)
        if spec.n_players > 1:
            assert report.rho_smax == pytest.approx(report.ratio_bound, abs=1e-9)


def test_run_solve_single_user_all_solvers_agree():
    config = cfg(SMALL, players=1, direct_gains=[2.0, 0.5],
                 cross_gains=[1.0], pbar=1.0)
    result = run_solve(config)
    profiles = {name: s.profile.powers for name, s in result.solvers.items()}
    assert set(profiles) == {"iwf", "vi", "pareto"}
    assert result.all_converged
    assert np.abs(profiles["iwf"] - profiles["vi"]).max() < 1e-5
    assert np.abs(profiles["iwf"] - profiles["pareto"]).max() < 5e-3
    rates = {name: s.sum_rate for name, s in result.solvers.items()}
    assert rates["pareto"] == pytest.approx(rates["iwf"], abs=1e-5)


def test_run_solve_small_game_outcomes():
    result = run_solve(cfg(SMALL))
    assert result.all_converged
    iwf, vi, pareto = (result.solvers[k] for k in ("iwf", "vi", "pareto"))
    assert abs(iwf.sum_rate - vi.sum_rate) < 1e-4
    assert pareto.sum_rate >= vi.sum_rate - 1e-9
    spec, space = build_game(cfg(SMALL))
    for outcome in result.solvers.values():
        assert is_feasible(space, outcome.profile, spec.pbar).all()


def test_run_sweep_single_point_matches_solve():
    base = cfg(SMALL)
    config = dataclasses.replace(base, sweep=SweepConfig(values=[1.0]))
    sweep = run_sweep(config)
    solve = run_solve(base)
    assert len(sweep.sweep_rows) == 1
    row = sweep.sweep_rows[0]
    assert row["ne_iwf"] == pytest.approx(solve.solvers["iwf"].sum_rate, abs=1e-12)
    assert row["ne_vi"] == pytest.approx(solve.solvers["vi"].sum_rate, abs=1e-12)
    assert row["pareto"] == pytest.approx(solve.solvers["pareto"].sum_rate,
                                          abs=1e-12)


def test_run_sweep_pareto_nondecreasing_in_budget():
    config = dataclasses.replace(cfg(SMALL),
                                 sweep=SweepConfig(values=[0.5, 1.0, 2.0]))
    result = run_sweep(config)
    assert len(result.sweep_rows) == 3
    pareto = [row["pareto"] for row in result.sweep_rows]
    assert pareto[0] <= pareto[1] + 1e-9 <= pareto[2] + 2e-9
    for row in result.sweep_rows:
        assert row["pareto"] >= row["ne_vi"] - 1e-9


def test_run_simulate_singleton_exact():
    config = dataclasses.replace(
        cfg(SMALL, players=1, direct_gains=[2.0], cross_gains=[1.0]),
        simulate=SimulateConfig(slots=1, seed=0))
    spec, space = build_game(config)
    from ifgame import PowerProfile
    profile = PowerProfile(powers=np.array([[1.0]]))
    summary = run_simulate(config, profile)
    assert summary.empirical_rate == pytest.approx(summary.analytic_rate)
    assert summary.empirical_power == pytest.approx(summary.analytic_power)


def test_run_simulate_requires_feasible_profile():
    config = dataclasses.replace(cfg(SMALL), simulate=SimulateConfig(slots=10))
    _, space = build_game(config)
    from ifgame import PowerProfile
    bad = PowerProfile(powers=np.full((2, space.n_states), 100.0))
    with pytest.raises(ValueError, match="feasible"):
        run_simulate(config, bad)


def test_run_simulate_close_to_analytic():
    config = dataclasses.replace(cfg(SMALL),
                                 simulate=SimulateConfig(slots=200_000, seed=11))
    report, outcome = ne_outcome_for_simulation(config)
    assert outcome.name == "iwf" and report.contraction_ok
    summary = run_simulate(config, outcome.profile)
    assert np.all(summary.rate_rel_gap < 0.01)
    assert np.all(summary.empirical_power <= 1.01 * summary.analytic_power)


def test_write_outputs_and_feasible_profiles(tmp_path):
    config = cfg(SMALL)
    result = run_solve(config)
    written = write_outputs(result, config, tmp_path)
    names = {p.name for p in written}
    assert {"result.json", "conditions.csv", "sum_rates.csv",
            "profile_iwf.csv", "profile_vi.csv", "profile_pareto.csv",
            "vi_eps_path.csv", "pareto_starts.csv"} <= names
    spec, space = build_game(config)
    for name in ("iwf", "vi", "pareto"):
        rows = (tmp_path / f"profile_{name}.csv").read_text().strip().splitlines()
        data = np.array([[float(v) for v in line.split(",")[1:]]
                         for line in rows[1:]])
        assert is_feasible(space, data.T, spec.pbar).all()
    doc = json.loads((tmp_path / "result.json").read_text())
    assert set(doc["solvers"]) == {"iwf", "vi", "pareto"}
    assert doc["condition"]["contraction_ok"] is True


def test_cli_analyze_exit_zero(tmp_path, capsys):
    path = tmp_path / "c.json"
    path.write_text(json.dumps(EXAMPLE1))
    code = main(["analyze", "--config", str(path), "--out", str(tmp_path / "o")])
    assert code == 0
    out = capsys.readouterr().out
    assert "0.666667" in out
    assert (tmp_path / "o" / "conditions.csv").exists()


def test_cli_bad_config_exit_one(tmp_path, capsys):
    path = tmp_path / "bad.json"
    path.write_text('{"game": {"players": 2}}')
    assert main(["analyze", "--config", str(path), "--out", str(tmp_path)]) == 1
    # alphabetically first missing required key is reported
    assert "cross_gains" in capsys.readouterr().err


def test_cli_nonconvergence_exit_two(tmp_path):
    doc = json.loads(json.dumps(EXAMPLE2))
    doc["solver"]["which"] = "iwf"
    path = tmp_path / "c.json"
    path.write_text(json.dumps(doc))
    code = main(["solve", "--config", str(path), "--out", str(tmp_path / "o")])
    assert code == 2
    assert (tmp_path / "o" / "sum_rates.csv").exists()  # partial outputs written


def test_cli_solver_and_seed_overrides(tmp_path):
    path = tmp_path / "c.json"
    path.write_text(json.dumps(SMALL))
    code = main(["solve", "--config", str(path), "--out", str(tmp_path / "o"),
                 "--solver", "iwf", "--format", "csv"])
    assert code == 0
    assert (tmp_path / "o" / "profile_iwf.csv").exists()
    assert not (tmp_path / "o" / "result.json").exists()
    assert not (tmp_path / "o" / "profile_vi.csv").exists()


def test_cli_outputs_are_deterministic(tmp_path):
    doc = json.loads(json.dumps(SMALL))
    doc["simulate"] = {"slots": 5000, "seed": 3}
    path = tmp_path / "c.json"
    path.write_text(json.dumps(doc))
    dirs = [tmp_path / "r1", tmp_path / "r2"]
    for d in dirs:
        assert main(["solve", "--config", str(path), "--out", str(d)]) == 0
        assert main(["simulate", "--config", str(path),
                     "--out", str(d / "mc")]) == 0
    files = sorted(p.relative_to(dirs[0]) for p in dirs[0].rglob("*") if p.is_file())
    assert files
    for rel in files:
        assert (dirs[0] / rel).read_bytes() == (dirs[1] / rel).read_bytes(), rel
