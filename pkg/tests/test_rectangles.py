import dataclasses
import math

import numpy as np
import pytest

from riscov.blockage import los_outdoor_static
from riscov.errors import GeometryError, InvariantError
from riscov.rectangles import (RectangleProcess, end_to_end_blockage_curve,
                               estimate_joint_stats, indoor_process,
                               outdoor_process, path_segments,
                               sample_blockage_realization,
                               sample_blocked_matrix, segment_rectangle_hits,
                               survival_sampler, window_for)
from riscov.rng import substream
from riscov.scenario import (IndoorBlockageParams, OutdoorBlockageParams,
                             Scenario)
from riscov.scene import build_geometry

COREL_SCENARIO = dataclasses.replace(
    Scenario(), n_sensors=36,
    outdoor_blockage=OutdoorBlockageParams(lambda_st_out=25e-6, mean_len=10.0,
                                           mean_wid=10.0, eta1=0.5))


# -------------------------------------------------- intersection predicate

def test_hits_against_shapely_oracle():
    shapely = pytest.importorskip("shapely")
    from shapely.affinity import rotate, translate
    from shapely.geometry import LineString, box

    rng = np.random.default_rng(123)
    k = 400
    centers = rng.uniform(-20, 20, (k, 2))
    angles = rng.uniform(0, np.pi, k)
    lengths = rng.uniform(0.2, 15.0, k)
    widths = rng.uniform(0.2, 8.0, k)
    segments = rng.uniform(-25, 25, (5, 2, 2))

    got = segment_rectangle_hits(segments, centers, angles, lengths, widths)
    for i in range(k):
        rect = box(-lengths[i] / 2, -widths[i] / 2, lengths[i] / 2, widths[i] / 2)
        rect = translate(rotate(rect, angles[i], use_radians=True),
                         centers[i, 0], centers[i, 1])
        for p in range(segments.shape[0]):
            seg = LineString([segments[p, 0], segments[p, 1]])
            assert got[i, p] == rect.intersects(seg), (i, p)


def test_hits_handles_degenerate_cases():
    seg = np.array([[[0.0, 0.0], [10.0, 0.0]]])
    # rectangle aligned with the segment, fully containing it
    hit = segment_rectangle_hits(seg, np.array([[5.0, 0.0]]), np.array([0.0]),
                                 np.array([100.0]), np.array([100.0]))
    assert hit[0, 0]
    # segment completely inside a small box
    hit = segment_rectangle_hits(np.array([[[4.0, 0.0], [6.0, 0.0]]]),
                                 np.array([[5.0, 0.0]]), np.array([0.0]),
                                 np.array([4.0]), np.array([1.0]))
    assert hit[0, 0]
    # far away rectangle
    hit = segment_rectangle_hits(seg, np.array([[50.0, 50.0]]), np.array([1.0]),
                                 np.array([2.0]), np.array([2.0]))
    assert not hit[0, 0]


# -------------------------------------------------- sampling basics

def test_zero_density_never_blocks():
    sc = dataclasses.replace(
        COREL_SCENARIO,
        outdoor_blockage=OutdoorBlockageParams(lambda_st_out=0.0))
    geo = build_geometry(sc)
    proc = outdoor_process(sc, geo)
    sample = sample_blockage_realization(proc, geo, "outdoor", substream(0, 9))
    assert not sample.blocked.any()


def test_total_obstruction_blocks_everything():
    geo = build_geometry(COREL_SCENARIO)
    segs = path_segments(geo, "outdoor")
    # one rectangle covering the whole window, eta implicitly 1 via direct hit
    hits = segment_rectangle_hits(segs, np.array([[0.0, -30.0]]),
                                  np.array([0.1]), np.array([1e4]),
                                  np.array([1e4]))
    assert hits.all()


def test_same_seed_same_realization():
    geo = build_geometry(COREL_SCENARIO)
    proc = outdoor_process(COREL_SCENARIO, geo)
    a = sample_blockage_realization(proc, geo, "outdoor", substream(7, 1))
    b = sample_blockage_realization(proc, geo, "outdoor", substream(7, 1))
    np.testing.assert_array_equal(a.blocked, b.blocked)


def test_window_too_small_rejected():
    geo = build_geometry(COREL_SCENARIO)
    proc = dataclasses.replace(outdoor_process(COREL_SCENARIO, geo),
                               region=(-1.0, -1.0, 1.0, 1.0))
    with pytest.raises(GeometryError):
        sample_blockage_realization(proc, geo, "outdoor", substream(0, 0))


def test_window_pads_three_mean_lengths():
    geo = build_geometry(COREL_SCENARIO)
    segs = path_segments(geo, "outdoor")
    region = window_for(segs, 10.0)
    pts = segs.reshape(-1, 2)
    assert region[0] == pytest.approx(pts[:, 0].min() - 30.0)
    assert region[3] == pytest.approx(pts[:, 1].max() + 30.0)


# -------------------------------------------------- marginals vs closed form

def test_marginal_los_matches_void_probability():
    """The rectangle MC reproduces exp(-eta*(kappa*r + upsilon)) per path."""
    sc = COREL_SCENARIO
    geo = build_geometry(sc)
    proc = outdoor_process(sc, geo)
    trials = 200000
    stats = estimate_joint_stats(proc, geo, "outdoor", trials, seed=31)
    closed = los_outdoor_static(geo.r1, sc.outdoor_blockage)
    resid = np.abs(stats.marginal_los - closed)
    assert np.all(resid <= 3.0 * stats.marginal_stderr + 1e-4)


def test_marginal_los_matches_void_probability_fixed_sizes():
    sc = COREL_SCENARIO
    geo = build_geometry(sc)
    proc = outdoor_process(sc, geo, size_distribution="fixed")
    stats = estimate_joint_stats(proc, geo, "outdoor", 150000, seed=13)
    closed = los_outdoor_static(geo.r1, sc.outdoor_blockage)
    resid = np.abs(stats.marginal_los - closed)
    assert np.all(resid <= 3.5 * stats.marginal_stderr + 1e-4)


# -------------------------------------------------- joint statistics

def two_segment_geometry(gap):
    """Hand-built pair of parallel unit-length segments `gap` meters apart."""
    return np.array([[[0.0, 0.0], [0.0, 30.0]],
                     [[gap, 0.0], [gap, 30.0]]])


def pair_process(window, density=2e-4, mean=5.0, eta=1.0):
    return RectangleProcess(density=density, mean_len=mean, mean_wid=mean,
                            height_factor_eta=eta, region=window)


def estimate_pair(segments, proc, trials, seed):
    clear_counts = np.zeros(2, dtype=np.int64)
    joint = 0
    block = 8192
    done = 0
    index = 0
    while done < trials:
        size = min(block, trials - done)
        gen = substream(seed, 77, index)
        blocked = sample_blocked_matrix(proc, segments, size, gen)
        clear = ~blocked
        clear_counts += clear.sum(axis=0)
        joint += int((clear[:, 0] & clear[:, 1]).sum())
        done += size
        index += 1
    return clear_counts / trials, joint / trials


def test_shared_obstacles_create_positive_association():
    segments = two_segment_geometry(gap=1.0)
    proc = pair_process(window_for(segments, 5.0))
    trials = 120000
    marg, joint = estimate_pair(segments, proc, trials, seed=3)
    prod = marg[0] * marg[1]
    se = math.sqrt(joint * (1 - joint) / trials) + math.sqrt(
        prod * (1 - prod) / trials)
    # void probability of the union beats the product of the marginals
    assert joint >= prod - 3.0 * se
    assert joint > prod  # strongly overlapping crossing regions


def test_disjoint_paths_are_uncorrelated():
    segments = two_segment_geometry(gap=2000.0)
    proc = pair_process(window_for(segments, 5.0), density=5e-5)
    trials = 120000
    marg, joint = estimate_pair(segments, proc, trials, seed=4)
    prod = marg[0] * marg[1]
    se = math.sqrt(max(joint * (1 - joint), 1e-9) / trials)
    assert abs(joint - prod) <= 3.0 * se


def test_joint_stats_zero_density():
    sc = dataclasses.replace(
        COREL_SCENARIO,
        outdoor_blockage=OutdoorBlockageParams(lambda_st_out=0.0))
    geo = build_geometry(sc)
    stats = estimate_joint_stats(outdoor_process(sc, geo), geo, "outdoor",
                                 500, seed=0)
    np.testing.assert_array_equal(stats.marginal_los, np.ones(36))
    np.testing.assert_array_equal(stats.pairwise_joint_los, np.ones((36, 36)))
    off_diag = ~np.eye(36, dtype=bool)
    assert not stats.rho_defined[off_diag].any()
    assert np.isnan(stats.correlation_rho[off_diag]).all()
    assert stats.blocked_count[0] == 500
    assert stats.blocked_count.sum() == 500


def test_joint_stats_structure():
    geo = build_geometry(COREL_SCENARIO)
    proc = outdoor_process(COREL_SCENARIO, geo)
    stats = estimate_joint_stats(proc, geo, "outdoor", 30000, seed=6)
    assert stats.trial_count == 30000
    assert int(stats.blocked_count.sum()) == 30000  # pmf sums to 1 exactly
    assert float(np.sum(stats.blocked_count_pmf)) == pytest.approx(1.0, abs=1e-12)
    np.testing.assert_allclose(stats.pairwise_joint_los,
                               stats.pairwise_joint_los.T, rtol=0, atol=0)
    np.testing.assert_allclose(np.diag(stats.correlation_rho), 1.0)
    defined = stats.rho_defined
    assert np.all(np.abs(stats.correlation_rho[defined]) <= 1.0 + 1e-12)
    # joint LoS never exceeds either marginal
    cap = np.minimum.outer(stats.marginal_los, stats.marginal_los)
    assert np.all(stats.pairwise_joint_los <= cap + 1e-12)
    assert np.all(stats.separation_angle >= 0)
    np.testing.assert_allclose(np.diag(stats.separation_angle), 0.0, atol=1e-6)


def test_joint_stats_worker_invariance():
    geo = build_geometry(COREL_SCENARIO)
    proc = outdoor_process(COREL_SCENARIO, geo)
    a = estimate_joint_stats(proc, geo, "outdoor", 20000, seed=8, workers=1)
    b = estimate_joint_stats(proc, geo, "outdoor", 20000, seed=8, workers=4)
    np.testing.assert_array_equal(a.marginal_los, b.marginal_los)
    np.testing.assert_array_equal(a.blocked_count, b.blocked_count)
    np.testing.assert_array_equal(a.pairwise_joint_los, b.pairwise_joint_los)


# -------------------------------------------------- distance curve

def test_blockage_curve_zero_densities_flat_zero():
    sc = dataclasses.replace(
        Scenario(),
        outdoor_blockage=OutdoorBlockageParams(lambda_st_out=0.0),
        indoor_blockage=IndoorBlockageParams(lambda_st_in=0.0, lambda_dy_in=0.0))
    grid = np.array([10.0, 50.0, 100.0])
    for mode in ("independent", "correlated"):
        rows = end_to_end_blockage_curve(sc, grid, 2000, mode, seed=1)
        assert [r["mean_blockage"] for r in rows] == [0.0, 0.0, 0.0]


def test_blockage_curve_monotone():
    sc = Scenario()
    grid = np.linspace(10.0, 100.0, 5)
    indep = end_to_end_blockage_curve(sc, grid, 1, "independent")
    vals = [r["mean_blockage"] for r in indep]
    assert all(b >= a for a, b in zip(vals, vals[1:]))
    corr = end_to_end_blockage_curve(sc, grid, 20000, "correlated", seed=2)
    for a, b in zip(corr, corr[1:]):
        slack = 3.0 * math.hypot(a["stderr"], b["stderr"])
        assert b["mean_blockage"] >= a["mean_blockage"] - slack


def test_blockage_curve_modes_agree_on_marginals():
    # the geometric model's marginals reproduce the closed forms, so the
    # path-averaged blockage matches between modes
    sc = Scenario()
    grid = np.array([30.0, 60.0, 90.0])
    indep = end_to_end_blockage_curve(sc, grid, 1, "independent")
    corr = end_to_end_blockage_curve(sc, grid, 40000, "correlated", seed=5)
    for a, b in zip(indep, corr):
        assert abs(a["mean_blockage"] - b["mean_blockage"]) <= \
            4.0 * b["stderr"] + 1e-3


def test_blockage_curve_input_validation():
    with pytest.raises(InvariantError):
        end_to_end_blockage_curve(Scenario(), [50.0, 10.0], 10, "independent")
    with pytest.raises(ValueError):
        end_to_end_blockage_curve(Scenario(), [10.0, 50.0], 10, "sideways")


# -------------------------------------------------- survival sampler

def test_survival_sampler_matches_marginals():
    sc = Scenario()
    geo = build_geometry(sc)
    sampler = survival_sampler(sc, geo)
    from riscov.blockage import end_to_end_blockage
    expect = 1.0 - end_to_end_blockage(geo, sc).p_e2e
    trials = 60000
    total = np.zeros(geo.n_paths, dtype=np.int64)
    for b in range(15):
        z = sampler(substream(12, 50, b), 4000)
        total += z.sum(axis=0)
    got = total / trials
    se = np.sqrt(expect * (1 - expect) / trials)
    assert np.all(np.abs(got - expect) <= 3.5 * se + 1e-3)


def test_indoor_process_window_scales_with_indoor_sizes():
    sc = Scenario()
    geo = build_geometry(sc)
    proc = indoor_process(sc, geo)
    x0, y0, x1, y1 = proc.region
    assert y1 <= sc.ue_offset + 3 * sc.indoor_blockage.mean_len_in + 1e-9
    assert proc.density == sc.indoor_blockage.lambda_st_in
