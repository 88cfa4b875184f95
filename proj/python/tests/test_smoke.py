import math

import numpy as np
import pytest

import cobra_anomaly as cobra


def test_scoring_examples():
    s = cobra.cobra_score([[0.7, 0.2, 0.1], [0.4, 0.5, 0.1]], relevant=[0, 1], num_classes=3)
    assert s["score"] == pytest.approx(0.6)
    assert s["n_relevant"] == 2
    assert cobra.cobra_score([[0.1, 0.9]], [0], 2)["score"] is None
    assert cobra.predict_class([0.4, 0.4, 0.2]) == 0
    assert cobra.confidence([0.7, 0.2, 0.1]) == 0.7


def test_errors_carry_codes():
    with pytest.raises(cobra.CobraError, match="SumOutOfTolerance"):
        cobra.validate_record([0.5, 0.6], 2)
    with pytest.raises(cobra.CobraError, match="EmptyRelevantSubset"):
        cobra.cobra_score([[0.1, 0.9]], [0], 2, missing_policy="error")


def test_cohort_scores():
    scores = cobra.cohort_scores(
        [("A", [[0.7, 0.2, 0.1], [0.4, 0.5, 0.1]]), ("B", [[1, 0, 0]])], [0, 1], 3
    )
    assert [s["subject_id"] for s in scores] == ["A", "B"]
    assert scores[1]["score"] == 1.0


def test_statistics():
    assert cobra.pearson([1, 2, 3, 4], [1, 3, 2, 4]) == pytest.approx(0.8)
    lo, hi = cobra.fisher_ci(0.814, 55)
    assert abs(lo - 0.700) <= 0.002 and abs(hi - 0.888) <= 0.002
    rng = np.random.default_rng(0)
    x = rng.normal(size=60)
    y = 0.8 * x + 0.6 * rng.normal(size=60)
    report = cobra.correlate(x.tolist(), y.tolist(), ci="bootstrap", seed=7)
    assert report["ci_low"] < report["rho"] < report["ci_high"]
    assert cobra.bootstrap_ci(x.tolist(), y.tolist(), seed=7) == (report["ci_low"], report["ci_high"])


def test_kde_integrates_to_one():
    curve = cobra.kde(np.random.default_rng(1).normal(size=100).tolist())
    assert len(curve["grid"]) == 512
    grid, density = np.asarray(curve["grid"]), np.asarray(curve["density"])
    area = np.sum(np.diff(grid) * (density[1:] + density[:-1]) / 2)
    assert area == pytest.approx(1.0, abs=0.02)


def test_frechet():
    assert cobra.frechet_distance_gaussian(
        np.array([0.0]), np.array([[1.0]]), np.array([1.0]), np.array([[4.0]])
    ) == pytest.approx(2.0, abs=1e-8)
    root = cobra.matrix_sqrt_psd(np.array([[2.0, 1.0], [1.0, 2.0]]))
    assert root[0, 0] == pytest.approx((math.sqrt(3) + 1) / 2)
    feats = np.random.default_rng(2).normal(size=(50, 3))
    assert cobra.frechet_distance(feats, feats) == pytest.approx(0.0, abs=1e-8)


def test_cli_pipeline(tmp_path):
    code, _, err = cobra.run_cli(
        ["simulate", "-o", str(tmp_path / "sim")]
    )
    assert code == 0, err
    code, _, err = cobra.run_cli(
        ["train", str(tmp_path / "sim" / "healthy.csv"), "-o", str(tmp_path / "m.txt"), "--epochs", "5"]
    )
    assert code == 0, err
    code, _, _ = cobra.run_cli(["score", str(tmp_path / "missing.csv"), "-o", str(tmp_path / "s.csv")])
    assert code == 2
