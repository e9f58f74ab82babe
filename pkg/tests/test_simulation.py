import json

import numpy as np
import pytest
from scipy import stats

from symggm import (
    RconParams,
    RcorParams,
    ScenarioConfig,
    assemble_concentration,
    build_true_model,
    evaluate_fit,
    preset,
    random_coloring,
    run_experiment,
    sample_gaussian,
)
from symggm.exceptions import DataError
from symggm.simulation import RCON_EDGE, RCON_VERTEX


def test_single_class_coloring():
    scheme = random_coloring(5, 1, 1, 0)
    assert scheme.n_edge_classes == 1 and len(scheme.edge_classes[0]) == 10
    assert scheme.vertex_classes == ((0, 1, 2, 3, 4),)


def test_coloring_reproducible_and_nonempty():
    a = random_coloring(40, 30, 20, 7)
    b = random_coloring(40, 30, 20, 7)
    assert a.edge_classes == b.edge_classes and a.vertex_classes == b.vertex_classes
    assert min(a.edge_sizes) > 0 and min(a.vertex_sizes) > 0
    assert random_coloring(40, 30, 20, 8).edge_classes != a.edge_classes


@pytest.mark.parametrize("args", [(5, 11, 1), (5, 2, 6), (5, 2, 0)])
def test_infeasible_class_counts(args):
    with pytest.raises(DataError):
        random_coloring(*args, rng=0)


def test_true_edge_count_near_reference():
    """Five of 30 classes nonzero on p=40: about 130 pairs, 260 ordered entries."""
    nz = np.array(RCON_EDGE) != 0
    counts = [random_coloring(40, 30, 20, s).edge_sizes[nz].sum() for s in range(50)]
    assert abs(2 * np.mean(counts) - 256.7) / 256.7 < 0.05


def test_class_occupancy_uniform():
    sizes = np.sum([random_coloring(12, 6, 3, s).edge_sizes for s in range(200)], axis=0)
    _, pval = stats.chisquare(sizes)
    assert pval > 0.001


def test_diagonal_truth_needs_no_inflation():
    scheme = random_coloring(6, 3, 2, 0)
    tm = build_true_model(RconParams(np.zeros(3), [1.0, 2.0]), scheme)
    assert not tm.inflated and tm.inflation == 1.0


def test_reference_truth_needs_at_most_one_step():
    scheme = random_coloring(40, 30, 20, 0)
    tm = build_true_model(RconParams(RCON_EDGE, RCON_VERTEX), scheme)
    assert tm.inflation_steps <= 1
    assert np.linalg.eigvalsh(tm.theta)[0] >= 0.05
    for s, cls in enumerate(scheme.edge_classes):
        assert {tm.theta[i, j] for i, j in cls} == {tm.params.theta_E[s]}
    for m, cls in enumerate(scheme.vertex_classes):
        assert {tm.theta[j, j] for j in cls} == {tm.params.theta_V[m]}


def test_inflation_limit_and_rcor_rejection():
    scheme = random_coloring(10, 1, 1, 0)
    with pytest.raises(DataError):
        build_true_model(RconParams([50.0], [1.0]), scheme)
    with pytest.raises(DataError):
        build_true_model(RcorParams([0.9], [1.0]), scheme)


def test_sample_gaussian_properties():
    X = sample_gaussian(np.eye(4), 20000, 1)
    np.testing.assert_allclose(X.T @ X / len(X), np.eye(4), atol=0.05)
    np.testing.assert_array_equal(sample_gaussian(np.eye(3), 5, 9), sample_gaussian(np.eye(3), 5, 9))
    rng = np.random.default_rng(0)
    p = 10
    scheme = random_coloring(p, 5, 3, rng)
    theta = build_true_model(RconParams(rng.uniform(-0.2, 0.2, 5), [1.5, 2.0, 1.0]), scheme).theta
    X = sample_gaussian(theta, 5000, rng)
    quad = np.einsum("ni,ij,nj->n", X, theta, X) / p
    assert abs(quad.mean() - 1) < 0.05
    Sigma = np.linalg.inv(theta)
    X = sample_gaussian(theta, 50 * p, rng)
    assert np.linalg.norm(X.T @ X / len(X) - Sigma) / np.linalg.norm(Sigma) < 0.2
    with pytest.raises(DataError):
        sample_gaussian(-np.eye(2), 3)


def test_evaluate_fit_edge_cases():
    scheme = random_coloring(40, 30, 20, 0)
    truth = RconParams(RCON_EDGE, RCON_VERTEX)
    perfect = evaluate_fit(truth, truth, scheme)
    assert perfect["sse"] == perfect["sse_matrix"] == perfect["fn"] == perfect["fp"] == 0
    empty = evaluate_fit(RconParams(np.zeros(30), RCON_VERTEX), truth, scheme)
    assert empty["fn"] == scheme.edge_sizes[25:].sum() == empty["n_true_edges"]
    assert empty["fp"] == 0
    full = evaluate_fit(RconParams(np.full(30, 0.01), RCON_VERTEX), truth, scheme)
    assert full["fp"] == empty["n_zero_edges"] == 780 - empty["n_true_edges"]


def test_sse_matrix_consistency(rng):
    scheme = random_coloring(12, 8, 4, rng)
    truth = RconParams(rng.normal(size=8) * 0.1, rng.uniform(1, 2, 4))
    est = RconParams(rng.normal(size=8) * 0.1, rng.uniform(1, 2, 4))
    direct = np.sum((assemble_concentration(est, scheme) - assemble_concentration(truth, scheme)) ** 2)
    d = est.as_vector() - truth.as_vector()
    by_class = 2 * np.sum(scheme.edge_sizes * d[:8] ** 2) + np.sum(scheme.vertex_sizes * d[8:] ** 2)
    out = evaluate_fit(est, truth, scheme)
    assert out["sse_matrix"] == pytest.approx(direct, rel=1e-12)
    assert out["sse_matrix"] == pytest.approx(by_class, rel=1e-12)
    assert out["sse"] == pytest.approx(d @ d)


def test_evaluate_fit_rcor_metrics():
    scheme = random_coloring(6, 3, 2, 0)
    truth = RcorParams([0.1, 0.0, -0.2], [1.0, 4.0])
    est = RcorParams([0.1, 0.05, -0.2], [1.0, 1.0])
    out = evaluate_fit(est, truth, scheme)
    assert out["rho_error"] == pytest.approx(0.05)
    assert out["sqrt_sigma_error"] == pytest.approx(1.0)
    assert out["fp"] == scheme.edge_sizes[1] and out["fn"] == 0
    with pytest.raises(DataError):
        evaluate_fit(RconParams([0, 0, 0], [1, 1]), truth, scheme)


def test_trivial_experiment_single_row():
    cfg = ScenarioConfig(n=50, p=4, edge_values=[0.0], vertex_values=[1.0], replicates=1,
                         estimators=["composite"])
    rep = run_experiment(cfg)
    assert len(rep.rows) == 1 and not rep.failures
    row = rep.rows[0]
    assert row["fp"] >= 0 and row["fn"] == 0 and row["inflation"] == 1.0


def test_experiment_deterministic_across_workers():
    cfg = ScenarioConfig(n=200, p=10, edge_values=[0.0, 0.0, 0.2, -0.15], vertex_values=[1.5, 2.0],
                         replicates=4, estimators=["composite", "naive", "penalized"], grid_size=8)
    a = run_experiment(cfg, workers=1).to_dict()
    b = run_experiment(cfg, workers=3).to_dict()
    assert json.dumps(a, sort_keys=True) == json.dumps(b, sort_keys=True)


def test_failed_replicates_are_recorded():
    cfg = ScenarioConfig(n=50, p=6, model="rcor", edge_values=[0.95], vertex_values=[1.0],
                         replicates=2, max_redraws=2)
    rep = run_experiment(cfg)
    assert len(rep.failures) == len(rep.rows) == 4
    assert rep.summary()[0]["replicates_ok"] == 0


def test_config_validation_and_json(tmp_path):
    with pytest.raises(DataError):
        ScenarioConfig(n=10, p=3, edge_values=[0.1] * 4, vertex_values=[1.0])
    with pytest.raises(DataError):
        ScenarioConfig(n=10, p=3, estimators=["magic"], edge_values=[0.1], vertex_values=[1.0])
    with pytest.raises(DataError):
        ScenarioConfig.from_dict({"n": 10, "p": 3, "colour": 1})
    path = tmp_path / "s.json"
    path.write_text(json.dumps({"preset": "rcon-compare", "replicates": 3}))
    cfg = ScenarioConfig.from_json(path)
    assert cfg.replicates == 3 and cfg.p == 40 and cfg.n_edge_classes == 30
    assert ScenarioConfig.from_dict(cfg.to_dict()) == cfg


def test_presets():
    sel = preset("rcon-select")
    assert (sel.n, sel.p, sel.estimators) == (500, 60, ["penalized"])
    assert preset("rcor-compare").model == "rcor"
    with pytest.raises(DataError):
        preset("no-such-preset")
