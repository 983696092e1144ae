import json
import math
import os
import subprocess

import pytest

import _rdbp

TAU_STAR = 0.87421746579871708
ALPHA_STAR = 0.87976875437614344

HOME = {
    "label": "home",
    "offspring": {"family": "poisson", "mean": 2.0},
    "resource": {"family": "deterministic", "value": 0.9},
    "claims": {"family": "uniform", "lower": 0.0, "upper": 1.0},
}
INTRUDER = {
    "label": "intruder",
    "offspring": {"family": "poisson", "mean": 3.0},
    "resource": {"family": "deterministic", "value": 0.5},
    "claims": {"family": "exponential", "rate": 1.0},
}


def test_claim_distribution():
    exp = _rdbp.ClaimDistribution({"family": "exponential", "rate": 1.0})
    assert exp.cdf(0.87) == pytest.approx(0.58104845075236102, abs=1e-12)
    assert exp.partial_mean(0.87) == pytest.approx(0.21656060290691510, abs=1e-12)
    assert exp.quantile(exp.cdf(0.5)) == pytest.approx(0.5, abs=1e-9)
    assert exp.mean() == pytest.approx(1.0)
    assert exp.absolutely_continuous()
    draws = exp.sample(42, 1000)
    assert len(draws) == 1000
    assert draws == exp.sample(42, 1000)


def test_solve_equilibrium():
    res = _rdbp.solve_equilibrium(
        _rdbp.SubPopulationSpec(HOME), _rdbp.SubPopulationSpec(INTRUDER)
    )
    assert len(res["solutions"]) == 1
    sol = res["solutions"][0]
    assert sol["classification"] == "strict"
    assert sol["tau"] == pytest.approx(TAU_STAR, abs=1e-9)
    assert sol["alpha"] == pytest.approx(ALPHA_STAR, abs=1e-9)
    assert res["dropped_roots"] == []


def test_allocation_and_trajectory():
    alloc = _rdbp.allocate_weakest_first([[0.5, 1.0], [2.0]], 1.6)
    assert alloc["served_counts"] == [2, 0]
    assert alloc["threshold"] == 1.0

    out = _rdbp.run_trajectory(
        [_rdbp.SubPopulationSpec(HOME), _rdbp.SubPopulationSpec(INTRUDER)],
        [200, 200],
        horizon=10,
        seed=7,
        population_cap=50_000,
    )
    assert out["status"] in ("all_survived", "extinct")
    assert len(out["trace"]) >= 1
    rerun = _rdbp.run_trajectory(
        [_rdbp.SubPopulationSpec(HOME), _rdbp.SubPopulationSpec(INTRUDER)],
        [200, 200],
        horizon=10,
        seed=7,
        population_cap=50_000,
    )
    assert out["final_counts"] == rerun["final_counts"]


def test_monte_carlo():
    s = _rdbp.monte_carlo(
        [_rdbp.SubPopulationSpec(HOME), _rdbp.SubPopulationSpec(INTRUDER)],
        [100, 100],
        horizon=5,
        runs=4,
        base_seed=11,
        population_cap=10_000,
    )
    assert s["runs"] == 4
    assert len(s["per_run"]) == 4
    assert 0.0 <= s["joint_survival_fraction"] <= 1.0


def test_brs():
    u = _rdbp.ClaimDistribution({"family": "uniform", "lower": 0.0, "upper": 1.0})
    assert _rdbp.brs_tau(u, 100, 2.0) == pytest.approx(0.2, abs=1e-9)
    res = _rdbp.brs_check(u, 100, 2.0, runs=2000, seed=5)
    assert res["bound"] == pytest.approx(20.0, abs=1e-9)
    assert res["estimate"] <= res["bound"] + res["ci_halfwidth"]
    assert _rdbp.greedy_count([0.5, 0.2, 0.9], 0.8) == 2


def test_transport():
    assert _rdbp.check_monge([[0.0, 1.0], [1.0, 0.0]])
    assert not _rdbp.check_monge([[1.0, 0.0], [0.0, 1.0]])
    plan = _rdbp.northwest_plan([2.0, 1.0], [1.0, 2.0])
    assert plan["flows"] == [[1.0, 1.0], [0.0, 1.0]]

    u1 = _rdbp.ClaimDistribution({"family": "uniform", "lower": 0.0, "upper": 1.0})
    u2 = _rdbp.ClaimDistribution({"family": "uniform", "lower": 0.0, "upper": 2.0})
    assert _rdbp.quantile_coupling_cost(u1, u2, 2.0) == pytest.approx(1 / 3, abs=1e-6)

    grid = [
        _rdbp.ClaimDistribution({"family": "uniform", "lower": 0.0, "upper": 0.5 + 0.1 * k})
        for k in range(16)
    ]
    ranking = _rdbp.control_search(
        u1, grid, _rdbp.SubPopulationSpec(HOME), _rdbp.SubPopulationSpec(INTRUDER)
    )
    assert ranking
    assert ranking[0]["grid_index"] == 5
    assert ranking[0]["transport_cost"] == 0.0
    costs = [c["transport_cost"] for c in ranking]
    assert costs == sorted(costs)


def test_cli_roundtrip(tmp_path):
    cli = os.environ.get("RDBP_CLI")
    if not cli:
        pytest.skip("RDBP_CLI not set")
    cfg = {
        "seed": 3,
        "horizon": 5,
        "runs": 2,
        "population_cap": 10_000,
        "subpopulations": [
            dict(HOME, initial_count=100),
            dict(INTRUDER, initial_count=100),
        ],
    }
    cfg_path = tmp_path / "cfg.json"
    cfg_path.write_text(json.dumps(cfg))
    summary_path = tmp_path / "summary.json"
    subprocess.run(
        [cli, "simulate", "--config", str(cfg_path), "--summary", str(summary_path)],
        check=True,
        capture_output=True,
    )
    summary = json.loads(summary_path.read_text())
    assert summary["runs"] == 2
    assert len(summary["per_run"]) == 2

    out = subprocess.run(
        [cli, "equilibrium", "--config", str(cfg_path)],
        check=True,
        capture_output=True,
        text=True,
    )
    sols = json.loads(out.stdout)
    assert any(
        math.isclose(s["tau"], TAU_STAR, abs_tol=1e-6) for s in sols["solutions"]
    )
