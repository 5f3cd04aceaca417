import json
import math

import numpy as np
import pytest

import avrc


def test_prediction_set_and_risk():
    gamma, members = avrc.build_prediction_set([0.6, 0.3, 0.1], 0.85)
    assert gamma == pytest.approx(0.3)
    assert members == [0, 1]
    assert avrc.miscoverage_risk([0.6, 0.3, 0.1], 2, 0.85) == 1
    assert avrc.miscoverage_risk([0.6, 0.3, 0.1], 1, 0.85) == 0
    with pytest.raises(avrc.DataError):
        avrc.build_prediction_set([0.5, 0.4], 0.5)


def test_wealth_update_and_rejection():
    grid = avrc.BetaGrid.uniform(10)
    w = avrc.WealthGrid(grid, 0.05)
    bets = np.full(len(grid), 1.0)
    risk = np.zeros(len(grid))
    for _ in range(40):
        w.update_plain(0.1, bets, risk)
    assert all(w.rejected)
    assert w.beta_hat == 0.0
    # frozen at the first crossing of 1/alpha = 20, step 32
    assert w.log_wealth[0] == pytest.approx(32 * math.log(1.1))


def test_closed_form_oracles():
    assert avrc.oracle_lambda_star(0.5, 0.0, 0.0, 0.0, 1.0) == pytest.approx(1.0)
    assert avrc.simulation_beta_star(0.1) == pytest.approx(1 - math.sqrt(0.2))
    assert avrc.oracle_rho_simulation(0.0) == pytest.approx(0.5)
    q, mean, top = avrc.oracle_optimal_policy(lambda x: 1.0, 0.3)
    assert q(0.2) == pytest.approx(0.3)


def test_simulation_stream_is_reproducible():
    x1, y1 = avrc.simulate_stream(11, 1000)
    x2, y2 = avrc.simulate_stream(11, 1000)
    assert np.array_equal(x1, x2) and np.array_equal(y1, y2)
    assert 0.45 < x1.mean() < 0.55


def test_trial_and_experiment():
    cfg = avrc.TrialConfig("pretrain")
    cfg.max_labels = 200
    cfg.seed = 5
    rec = avrc.run_simulation_trial(cfg)
    assert rec.labels == 200
    assert rec.final_beta_hat <= 1.0
    betas = [b for _, _, b in rec.path]
    assert betas == sorted(betas, reverse=True)
    again = avrc.run_simulation_trial(cfg)
    assert rec.to_jsonl() == again.to_jsonl()

    base = avrc.TrialConfig()
    base.max_labels = 100
    recs = avrc.run_simulation_experiment(base, ["all", "oblivious"], 3, jobs=1)
    assert [r.method for r in recs] == ["all"] * 3 + ["oblivious"] * 3
    summary = json.loads(avrc.summary_json(recs))
    assert [m["method"] for m in summary["methods"]] == ["all", "oblivious"]
    assert 0.0 <= avrc.evaluate_safety_simulation(recs, 0.1) <= 1.0


def test_score_file_roundtrip(tmp_path):
    data = avrc.generate_synthetic_scores(50, 4, 0.5, 3)
    path = tmp_path / "s.bin"
    avrc.write_score_binary(str(path), data)
    back = avrc.ingest_scores(str(path))
    assert len(back) == 50 and back.num_classes == 4
    assert np.allclose(back.probs, data.probs, atol=1e-7)
    bad = tmp_path / "bad.csv"
    bad.write_text("id,label,p0,p1\na,0,0.5,0.4\n")
    with pytest.raises(avrc.DataError, match="row 1"):
        avrc.ingest_scores(str(bad))


def test_config_errors():
    cfg = avrc.TrialConfig()
    cfg.theta = 0.0
    with pytest.raises(ValueError):
        cfg.validate()
