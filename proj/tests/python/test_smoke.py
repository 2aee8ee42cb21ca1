import math

import numpy as np
import pytest

import qcsmooth as qc


@pytest.fixture(scope="module")
def params():
    return qc.fluor.FluorParams(omega=1.0, gamma=1.0, eta=0.8)


@pytest.fixture(scope="module")
def hybrid(params):
    return qc.build(qc.fluor.build_hybrid(params))


def test_vectorize_round_trip():
    rng = np.random.default_rng(1)
    blocks = [rng.normal(size=(2, 2)) + 1j * rng.normal(size=(2, 2)) for _ in range(3)]
    h = qc.HybridOperator(blocks)
    back = qc.devectorize(qc.vectorize(h), 3, 2)
    for a, b in zip(back.blocks, blocks):
        np.testing.assert_allclose(a, b, atol=0.0)


def test_generators_split(hybrid):
    np.testing.assert_allclose(hybrid.L.matrix, hybrid.D.matrix + hybrid.J.matrix, atol=1e-15)


def test_steady_state(params, hybrid):
    times = [0.0, 30.0, 60.0]
    states = qc.master_solve(hybrid, hybrid.initial, times)
    rho = qc.reduce_quantum(states[-1])
    np.testing.assert_allclose(rho, qc.fluor.steady_state(params), atol=1e-9)
    p_d = qc.reduce_classical(states[-1])[0]
    assert abs(p_d - params.eta) < 1e-6


def test_measurement_map_resets(hybrid):
    out = qc.measurement_map(hybrid, qc.HybridOperator.identity(2, 2))
    np.testing.assert_allclose(out.block(0), np.diag([0.0, 1.0]), atol=1e-15)
    np.testing.assert_allclose(out.block(1), np.zeros((2, 2)), atol=1e-15)


def test_waiting_time_law(params):
    law = qc.fluor.WaitingTimeLaw(params)
    t = np.linspace(0.0, 60.0, 6001)
    f = law.density(t)
    mass = float(np.sum(0.5 * (f[1:] + f[:-1]) * np.diff(t)))
    assert mass == pytest.approx(1.0, abs=1e-5)
    assert law.cdf(np.array([1e9]))[0] == pytest.approx(1.0)
    samples = qc.fluor.thinning_samples(params, 4000, seed=7)
    mean = qc.fluor.mean_waiting_time(params)
    se = samples.std(ddof=1) / math.sqrt(samples.size)
    assert abs(samples.mean() - mean) < 4.0 * se


def test_missing_detections_raise(params):
    with pytest.raises(qc.InvalidModel):
        qc.fluor.FluorParams(omega=1.0, gamma=1.0, eta=0.0)


def test_trajectory_filter_and_smooth(hybrid):
    traj = qc.sample_trajectory(hybrid, hybrid.initial, 10.0, seed=11)
    assert all(0.0 < t <= 10.0 for t in traj.jump_times)
    path = qc.filter_trajectory(hybrid, hybrid.initial, traj, 0.05)
    assert len(path.states) == 201
    for s in path.states:
        assert s.is_state()
    zero = qc.smooth_path(hybrid, path, 0.0)
    for rec, f in zip(zero, path.states):
        np.testing.assert_allclose(rec.classical_dist, qc.reduce_classical(f), atol=1e-12)
    records = qc.smooth_path(hybrid, path, 2.0)
    assert len(records) == 161
    for rec in records:
        assert 0.5 - 1e-12 <= rec.quantum_purity <= 1.0 + 1e-12
        assert sum(rec.classical_dist) == pytest.approx(1.0)


def test_ensemble_and_csv(tmp_path):
    cfg = qc.RunConfig()
    cfg.t_total = 4.0
    cfg.lag = 1.0
    cfg.n_traj = 20
    cfg.dt = 0.05
    stats = qc.run_ensemble(cfg)
    assert len(stats) == 81
    assert stats.smoothed_rows == 61
    cols = stats.columns
    assert cols["t"][-1] == pytest.approx(4.0)
    assert np.all(np.isfinite(cols["pop_f"]))
    path = tmp_path / "ensemble.csv"
    qc.emit_csv(stats, str(path))
    back = qc.read_csv(str(path))
    np.testing.assert_allclose(back.columns["pop_f"], cols["pop_f"], atol=1e-10)


def test_property_suite():
    results = qc.run_property_suite()
    failed = [r for r in results if not r[1]]
    assert not failed, failed
