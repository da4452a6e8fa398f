import dataclasses

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st
from numpy.testing import assert_allclose, assert_array_equal

from iaware.association import AssociationTooLargeError
from iaware.lmb import (
    BirthModel,
    FilterConfig,
    FilterState,
    FrameOrderError,
    PredictStats,
    Scan,
    append_birth,
    predict,
    prune,
    resample,
    run_filter,
    step,
    update,
)
from iaware.motion import make_ncv
from iaware.rfs import BernoulliTrack, Label, LMBDensity, MultiTargetEstimate
from iaware.rng import RandomSource

from .oracles import missed_detection_r


def one_track(r=0.5, particles=None, weights=None, label=(0, 0)):
    if particles is None:
        particles = np.random.default_rng(0).normal(0, 1, (200, 4))
    particles = np.asarray(particles, float)
    if weights is None:
        weights = np.full(len(particles), 1.0 / len(particles))
    return LMBDensity((BernoulliTrack(Label(*label), r, particles, weights),))


def test_predict_existence_and_uniform_weights():
    cfg = FilterConfig()
    out = predict(one_track(0.5), MultiTargetEstimate(), cfg, RandomSource(0))
    t = out.tracks[0]
    assert t.r == pytest.approx(0.495, abs=1e-15)
    assert_array_equal(t.weights, np.full(200, 1 / 200))


def swarm_pair(particles, subject_prev, neighbor_prev):
    """A subject track, and previous estimates with its neighbor."""
    subj, nb = Label(0, 0), Label(0, 1)
    est = MultiTargetEstimate.from_items([(subj, subject_prev), (nb, neighbor_prev)])
    return one_track(0.5, particles, label=subj), est


def test_predict_common_factor_cancels():
    cfg = FilterConfig(motion=make_ncv(1.0, 0.0)).with_interaction(enabled_model="swarm", sigma_d=2.0)
    # particles at the same distance from the (static) neighbor as before
    angles = np.linspace(0, 2 * np.pi, 8, endpoint=False)
    particles = np.column_stack([10 * np.cos(angles), np.zeros(8), 10 * np.sin(angles), np.zeros(8)])
    lmb, est = swarm_pair(particles, [10, 0, 0, 0], [0, 0, 0, 0])
    out = predict(lmb, est, cfg, RandomSource(0))
    assert_array_equal(out.tracks[0].weights, np.full(8, 1 / 8))


def test_predict_two_to_one_factor_normalizes():
    sd = 2.0
    cfg = FilterConfig(motion=make_ncv(1.0, 0.0)).with_interaction(enabled_model="swarm", sigma_d=sd)
    # e = 0 for the first particle and e = sd*sqrt(2 ln 2) for the second: g1 = 2 g2
    e2 = sd * np.sqrt(2 * np.log(2))
    particles = np.array([[10.0, 0, 0, 0], [10.0 + e2, 0, 0, 0]])
    lmb, est = swarm_pair(particles, [10, 0, 0, 0], [0, 0, 0, 0])
    out = predict(lmb, est, cfg, RandomSource(0))
    assert_allclose(out.tracks[0].weights, [2 / 3, 1 / 3], rtol=0, atol=1e-12)


def test_predict_underflow_keeps_prior_weights():
    cfg = FilterConfig(motion=make_ncv(1.0, 0.0)).with_interaction(enabled_model="swarm", sigma_d=1e-3)
    # factors are taken relative to the best particle, so the sum can only
    # underflow when that particle carries a negligible prior weight
    particles = np.array([[10.0, 0, 0, 0], [2000.0, 0, 0, 0]])
    lmb, est = swarm_pair(particles, [10, 0, 0, 0], [0, 0, 0, 0])
    stats = PredictStats()
    w = np.array([1e-310, 1.0])
    lmb = LMBDensity((lmb.tracks[0].replace(weights=w),))
    out = predict(lmb, est, cfg, RandomSource(0), stats=stats)
    assert_array_equal(out.tracks[0].weights, w)
    assert stats.underflow[Label(0, 0)] == 1


def test_predict_skips_tracks_without_previous_estimate():
    cfg = FilterConfig(motion=make_ncv(1.0, 0.0)).with_interaction(enabled_model="swarm", sigma_d=1.0)
    particles = np.array([[1.0, 0, 0, 0], [5.0, 0, 0, 0]])
    est = MultiTargetEstimate.from_items([(Label(0, 1), [0, 0, 0, 0])])
    stats = PredictStats()
    out = predict(one_track(0.5, particles), est, cfg, RandomSource(0), stats=stats)
    assert_array_equal(out.tracks[0].weights, [0.5, 0.5])
    assert stats.interaction_pairs == 0


def test_birth():
    lmb = one_track()
    assert append_birth(lmb, FilterConfig(), 3, RandomSource(0)) is lmb
    birth = BirthModel.from_diagonal([([0, 1, 0, 1], [1, 1, 1, 1])], r_b=0.2)
    out = append_birth(LMBDensity(), FilterConfig(birth=birth), 3, RandomSource(0))
    (t,) = out.tracks
    assert t.label == Label(3, 0) and t.r == 0.2
    assert t.particles.shape == (200, 4)
    assert_array_equal(t.weights, np.full(200, 1 / 200))
    twice = append_birth(out, FilterConfig(birth=birth), 4, RandomSource(0))
    assert twice.labels == [Label(3, 0), Label(4, 0)]


@pytest.mark.parametrize("r", [0.1, 0.5, 0.9])
def test_missed_detection_matches_two_hypothesis_oracle(r):
    cfg = FilterConfig(p_d=0.995)
    out = update(one_track(r), Scan(0), cfg)
    assert out.tracks[0].r == pytest.approx(missed_detection_r(r, 0.995), abs=1e-12)


def test_missed_detection_frozen_value():
    assert missed_detection_r(0.5, 0.995) == pytest.approx(0.004975124378109453, abs=1e-15)


def test_tiny_detection_probability_is_nearly_a_no_op():
    lmb = one_track(0.5)
    cfg = FilterConfig(p_d=1e-12, clutter_rate=1.0)
    out = update(lmb, Scan(0, [[0.0, 0.0], [3.0, 1.0]]), cfg)
    assert out.tracks[0].r == pytest.approx(0.5, abs=1e-9)
    assert_allclose(out.tracks[0].weights, lmb.tracks[0].weights, atol=1e-9)


def test_measurement_at_mean_confirms_track():
    rng = np.random.default_rng(1)
    particles = rng.normal(0, 2, (500, 4))
    lmb = one_track(0.5, particles)
    cfg = FilterConfig(clutter_rate=1e-6, obs_noise_var=1.0)
    out = update(lmb, Scan(0, [[0.0, 0.0]]), cfg).tracks[0]
    assert out.r > 0.999
    d2 = particles[:, 0] ** 2 + particles[:, 2] ** 2
    near, far = d2 < 1, d2 > 9
    assert out.weights[near].mean() > out.weights[far].mean() * 10
    # two-hypothesis oracle: r' = L / (L + kappa (1 - r p_d) / (r p_d)) with L the predicted likelihood
    L = np.mean(np.exp(-0.5 * d2) / (2 * np.pi))
    kappa = cfg.clutter_intensity
    expected = (0.5 * 0.995 * L) / (0.5 * 0.995 * L + kappa * (1 - 0.5 * 0.995) + 0.5 * (1 - 0.995) * kappa)
    assert out.r == pytest.approx(expected, rel=1e-9)


def test_update_rejects_oversized_group():
    particles = np.zeros((10, 4))
    tracks = tuple(
        BernoulliTrack(Label(0, i), 0.5, particles + [i * 0.1, 0, 0, 0], np.full(10, 0.1)) for i in range(3)
    )
    cfg = FilterConfig(max_group_tracks=2)
    with pytest.raises(AssociationTooLargeError):
        update(LMBDensity(tracks), Scan(0, [[0.1, 0.0]]), cfg)


def test_prune_examples():
    lmb = LMBDensity((one_track(1e-5).tracks[0], one_track(0.3, label=(0, 1)).tracks[0]))
    assert prune(lmb, 0.0) == lmb
    assert prune(lmb, 1e-4).labels == [Label(0, 1)]
    assert len(prune(lmb, 0.9)) == 0


def test_resample_degenerate_and_uniform():
    rng = np.random.default_rng(0)
    X = np.arange(20.0).reshape(5, 4)
    one_hot = BernoulliTrack(Label(0, 0), 0.5, X, [0, 0, 1, 0, 0])
    out = resample(one_hot, rng, 7)
    assert_array_equal(out.particles, np.repeat(X[2:3], 7, axis=0))
    uni = BernoulliTrack(Label(0, 0), 0.5, X, np.full(5, 0.2))
    out = resample(uni, rng)
    assert_array_equal(out.weights, np.full(5, 0.2))
    assert all(any(np.array_equal(p, x) for x in X) for p in out.particles)


def test_resample_frequencies():
    X = np.array([[0.0, 0, 0, 0], [1.0, 0, 0, 0]])
    t = BernoulliTrack(Label(0, 0), 0.5, X, [0.75, 0.25])
    out = resample(t, np.random.default_rng(4), 10_000)
    assert np.mean(out.particles[:, 0] == 0) == pytest.approx(0.75, abs=0.02)


def test_empty_everything_stays_empty():
    state = step(FilterState(), Scan(0), FilterConfig(), RandomSource(0))
    assert len(state.posterior) == 0 and len(state.estimates) == 0


def test_frames_must_increase():
    state = step(FilterState(), Scan(3), FilterConfig(), RandomSource(0))
    with pytest.raises(FrameOrderError):
        step(state, Scan(3), FilterConfig(), RandomSource(0))


def single_target_scans(n, seed):
    rng = np.random.default_rng(seed)
    x = np.array([20.0, 3.0, 0.0, 1.0])
    truth, scans = [], []
    for k in range(n):
        truth.append(x.copy())
        scans.append(Scan(k, (x[[0, 2]] + rng.normal(0, np.sqrt(3.0), 2))[None, :]))
        x = x @ make_ncv(1.0, 0.0).F.T
    return np.array(truth), scans


def test_single_target_tracking_accuracy():
    truth, scans = single_target_scans(20, 2)
    birth = BirthModel.from_diagonal([([20, 3, 0, 1], [5, 2, 5, 2])], r_b=0.2)
    cfg = FilterConfig(birth=birth, clutter_rate=1.0, clutter_region=(-50, 150, -50, 50))
    estimates, _, _ = run_filter(scans, cfg, RandomSource(0))
    err = []
    for k, est in enumerate(estimates[5:], 5):
        assert len(est) == 1
        s = est.states[0]
        err.append((s[0] - truth[k, 0]) ** 2 + (s[2] - truth[k, 2]) ** 2)
    rmse = np.sqrt(np.mean(err) / 2)
    assert rmse < 3 * np.sqrt(3.0)


def test_run_is_reproducible():
    _, scans = single_target_scans(10, 3)
    birth = BirthModel.from_diagonal([([20, 3, 0, 1], [5, 2, 5, 2])], r_b=0.2)
    cfg = FilterConfig(birth=birth)
    _, _, a = run_filter(scans, cfg, RandomSource(9))
    _, _, b = run_filter(scans, cfg, RandomSource(9))
    assert a.posterior == b.posterior


@settings(max_examples=25, deadline=None)
@given(st.floats(0.01, 0.99), st.integers(0, 3), st.integers(0, 1000))
def test_update_keeps_invariants(r, n_meas, seed):
    rng = np.random.default_rng(seed)
    tracks = tuple(
        BernoulliTrack(Label(0, i), r, rng.normal([i * 5, 0, 0, 0], 2, (50, 4)), np.full(50, 0.02)) for i in range(3)
    )
    z = rng.uniform(-5, 15, (n_meas, 2))
    out = update(LMBDensity(tracks), Scan(0, z), FilterConfig(clutter_region=(-20, 20, -20, 20)))
    assert out.labels == [t.label for t in tracks]
    for t in out:
        assert 0 <= t.r <= 1
        assert abs(t.weights.sum() - 1) <= 1e-9


def test_config_validation():
    with pytest.raises(ValueError):
        FilterConfig(p_d=0)
    with pytest.raises(ValueError):
        FilterConfig(clutter_region=(0, 0, 0, 1))
    FilterConfig(clutter_rate=0, clutter_region=(0, 0, 0, 0))
    with pytest.raises(ValueError):
        dataclasses.replace(FilterConfig(), num_particles=0)
