import math

import numpy as np
import pytest

from rwscenery import harness, localtime, scenery, walk


@pytest.fixture(scope="module")
def small_config(lazy_model):
    return harness.ExperimentConfig(
        walk=lazy_model, scenery=scenery.iid_scenery("rademacher"),
        n=2**12, t_grid=(0.5, 1.0), m_sceneries=300, n_omegas=3, seed=77)


def test_config_validation(lazy_model):
    with pytest.raises(ValueError):
        harness.ExperimentConfig(walk=lazy_model, scenery=scenery.iid_scenery(),
                                 n=100, t_grid=(0.5, 0.25), m_sceneries=100,
                                 n_omegas=2, seed=0)
    with pytest.raises(ValueError):
        harness.ExperimentConfig(walk=lazy_model, scenery=scenery.iid_scenery(),
                                 n=100, t_grid=(0.5, 1.5), m_sceneries=100,
                                 n_omegas=2, seed=0)


def test_fclt_report_reproducible(small_config):
    a = harness.run_fclt(small_config)
    b = harness.run_fclt(small_config)
    assert a.to_dict() == b.to_dict()


def test_fclt_internal_variance_cross_check(small_config):
    # Var_x(Y_n(1)) estimated from sceneries agrees with the exact count
    # identity within 4 standard errors of a variance estimate
    rep = harness.run_fclt(small_config)
    m = small_config.m_sceneries
    for o in rep.per_omega:
        se = o.exact_var_y1 * math.sqrt(2.0 / (m - 1))
        assert abs(o.mc_var_y1 - o.exact_var_y1) < 4 * se


def test_fclt_requires_planar_recurrent(simple3d_model):
    cfg = harness.ExperimentConfig(
        walk=simple3d_model, scenery=scenery.iid_scenery(), n=256,
        t_grid=(1.0,), m_sceneries=100, n_omegas=1, seed=1)
    with pytest.raises(ValueError):
        harness.run_fclt(cfg)


def test_fclt_grid_must_reach_one(lazy_model):
    cfg = harness.ExperimentConfig(
        walk=lazy_model, scenery=scenery.iid_scenery(), n=256,
        t_grid=(0.5,), m_sceneries=100, n_omegas=1, seed=1)
    with pytest.raises(ValueError):
        harness.run_fclt(cfg)


def test_fclt_degenerate_mode(lazy_model):
    deg = scenery.moving_average_scenery({(0, 0): 1.0, (1, 0): -1.0})
    cfg = harness.ExperimentConfig(walk=lazy_model, scenery=deg, n=2**11,
                                   t_grid=(1.0,), m_sceneries=100, n_omegas=2,
                                   seed=3)
    rep = harness.run_fclt(cfg)
    assert rep.degenerate and rep.passed is None
    assert rep.per_omega[0].ks_pvalue == []
    assert rep.pooled_exact_var_y1 < 0.7


def test_fclt_empirical_c0_mode(simple2d_model):
    cfg = harness.ExperimentConfig(
        walk=simple2d_model, scenery=scenery.iid_scenery("rademacher"),
        n=2**12, t_grid=(1.0,), m_sceneries=100, n_omegas=3, seed=5)
    rep = harness.run_fclt(cfg)
    assert rep.c0_mode == "empirical"
    assert 0.2 < rep.c0 < 1.5


def test_lln_guards(lazy_model, simple2d_model, simple3d_model):
    with pytest.raises(ValueError):
        harness.track_variance_lln(simple3d_model, [64], [(0, 0, 0)], 2, 0)
    with pytest.raises(ValueError):
        harness.track_variance_lln(simple2d_model, [64], [(0, 0)], 2, 0)  # no C0
    rep = harness.track_variance_lln(lazy_model, [256, 1024], [(0, 0)], 4, 0)
    assert set(rep.mean_ratio) == {(256, (0, 0)), (1024, (0, 0))}
    assert rep.max_ratio[(1024, (0, 0))] >= rep.mean_ratio[(1024, (0, 0))]


def test_orthogonality_window_validation(lazy_model):
    with pytest.raises(ValueError):
        harness.check_increment_orthogonality(lazy_model, [256], (0.4, 0.1, 0.6, 0.9),
                                              [(0, 0)], 2, 0)


def test_orthogonality_disjoint_windows_straight_path():
    det = walk.build_walk_model(walk.deterministic_law((1, 0)))
    rep = harness.check_increment_orthogonality(det, [512], (0.1, 0.4, 0.6, 0.9),
                                                [(0, 0)], 2, 0)
    assert rep.mean_normalized[(512, (0, 0))] == 0.0


def test_cross_count_monotone_in_window(lazy_model):
    path = walk.sample_path(lazy_model, 2048, seed=11)
    small = localtime.pair_count(path, (200, 800), (1200, 1800), (0, 0))
    bigger = localtime.pair_count(path, (100, 900), (1200, 1800), (0, 0))
    assert bigger >= small


def test_newman_wright_rejects_unsigned_ma(lazy_model):
    mixed = scenery.moving_average_scenery({(0, 0): 1.0, (1, 0): -1.0})
    path = walk.sample_path(lazy_model, 128, seed=0)
    with pytest.raises(ValueError):
        harness.check_newman_wright(mixed, path, [2.0], m_sceneries=100)


def test_newman_wright_constant_path_closed_form():
    # S_k = k X0 for the walk frozen at the origin: max |S_k| = n = ||S_n||_2,
    # so the left side is 1{lambda <= 1} and the right side 2*1{lambda <= 1+sqrt2}
    const = walk.build_walk_model(walk.deterministic_law((0, 0)))
    path = walk.sample_path(const, 50, seed=0)
    rep = harness.check_newman_wright(scenery.iid_scenery("rademacher"), path,
                                      [0.5, 2.0, 3.0], m_sceneries=500)
    assert rep.lhs == [1.0, 0.0, 0.0]
    assert rep.rhs == [2.0, 2.0, 0.0]
    assert not any(rep.violations)


def test_newman_wright_small_lambda_vacuous(lazy_model):
    path = walk.sample_path(lazy_model, 512, seed=1)
    rep = harness.check_newman_wright(scenery.iid_scenery("rademacher"), path,
                                      [1.0], m_sceneries=500)
    assert rep.rhs[0] == 2.0  # threshold below sqrt2 makes the bound vacuous
    assert not rep.violations[0]


def test_newman_wright_ma_positive_part(lazy_model):
    pos = scenery.moving_average_scenery({(0, 0): 0.5, (1, 0): 0.5})
    path = walk.sample_path(lazy_model, 512, seed=2)
    rep = harness.check_newman_wright(pos, path, [2.0, 3.0], m_sceneries=1000)
    assert not any(rep.violations)


def test_moricz_rademacher_exact_moments():
    det = walk.build_walk_model(walk.deterministic_law((1,)))
    path = walk.sample_path(det, 128, seed=0)
    iid = scenery.iid_scenery("rademacher")
    for k in (1, 2, 7, 32):
        m4 = harness._fourth_moment_window(path, iid.law, 0, k)
        assert m4 == 3 * k * k - 2 * k
    rep = harness.check_moricz(iid, path, 128, g0_kind="sqrt3k",
                               m_sceneries=800, x_seed=1)
    assert rep.super_additive and rep.hypothesis_ok
    assert rep.hypothesis_worst == pytest.approx(2.0)  # at k = 1: 3 - 1
    assert rep.violations == 0


def test_moricz_single_step_window_bound():
    # k = 1 reduces the hypothesis to E X^4 <= G0(b,1)^2
    det = walk.build_walk_model(walk.deterministic_law((1,)))
    path = walk.sample_path(det, 16, seed=0)
    iid = scenery.iid_scenery("rademacher")
    m4 = harness._fourth_moment_window(path, iid.law, 3, 1)
    assert m4 == 1.0 <= harness.MORICZ_CMAX * 3.0


def test_moricz_constant():
    assert harness.MORICZ_CMAX == pytest.approx((1 - 2 ** -0.25) ** -4)


def test_super_additivity_checker_rejects_sqrt():
    n = 16
    k = np.arange(n + 1, dtype=np.float64)
    g_bad = np.tile(np.sqrt(k), (n + 1, 1))
    assert not harness._check_super_additive(g_bad, n)
    g_good = np.tile(np.sqrt(3.0) * k, (n + 1, 1))
    assert harness._check_super_additive(g_good, n)


def test_moricz_walk_case(lazy_model):
    iid = scenery.iid_scenery("rademacher")
    path = walk.sample_path(lazy_model, 128, seed=3)
    rep = harness.check_moricz(iid, path, 128, g0_kind="self_intersection",
                               m_sceneries=800, x_seed=2)
    assert rep.super_additive and rep.hypothesis_ok
    assert rep.violations == 0
    assert rep.worst_margin_se_units > 3.0


def test_tightness_monotone_and_stride_stable(small_config):
    # halving the stride (doubling grid_points) must not change conclusions:
    # the delta-monotonicity and the ordering of the estimates are stable,
    # and the finer grid can only see more of the sup (up to window rounding)
    rep64 = harness.estimate_tightness_modulus(small_config, [0.05, 0.1, 0.2],
                                               epsilon=0.6, grid_points=64)
    rep128 = harness.estimate_tightness_modulus(small_config, [0.05, 0.1, 0.2],
                                                epsilon=0.6, grid_points=128)
    assert rep64.monotone_in_delta and rep128.monotone_in_delta
    for d in rep64.delta_ladder:
        assert rep128.estimates[d] >= rep64.estimates[d] - 0.05
    anchor = harness.estimate_tightness_modulus(small_config, [1.0], epsilon=0.6,
                                                grid_points=64)
    assert anchor.estimates[1.0] >= rep64.estimates[0.2] - 1e-12


def test_tightness_degenerate_scenery_collapses(lazy_model):
    deg = scenery.moving_average_scenery({(0, 0): 1.0, (1, 0): -1.0})
    cfg = harness.ExperimentConfig(walk=lazy_model, scenery=deg, n=2**12,
                                   t_grid=(1.0,), m_sceneries=200, n_omegas=2,
                                   seed=9)
    rep = harness.estimate_tightness_modulus(cfg, [0.1], epsilon=3.0,
                                             grid_points=64)
    assert rep.estimates[0.1] == 0.0


def test_erdos_taylor_guards(simple2d_model):
    det = walk.build_walk_model(walk.deterministic_law((1, 0)))
    with pytest.raises(ValueError):
        harness.track_erdos_taylor(det, [256], 2, 0)
    rep = harness.track_erdos_taylor(simple2d_model, [256, 1024], 3, 0)
    assert rep.mean_log_ratio[256] > 0
    assert len(rep.quantiles_log_ratio[1024]) == 3


def test_transient_check_guards_and_trivial_bound(simple3d_model, lazy_model):
    iid = scenery.iid_scenery("rademacher")
    with pytest.raises(ValueError):
        harness.transient_variance_check(iid, lazy_model, 256, 10, 0)
    rep = harness.transient_variance_check(iid, simple3d_model, 2**12, 100, 1,
                                           n_omegas=4, k_max=30)
    assert rep.exact_mean >= 1.0  # indicator term of the series
    assert rep.series_truncated >= 1.0


def test_truncation_ladder_report(lazy_model, sl3_pair):
    from rwscenery import trigpoly

    poly = trigpoly.cosine_polynomial([(1, 0, 0), (0, 1, 0), (0, 0, 1)],
                                      amplitudes=[1.0, 0.5, 0.25])
    tor = scenery.toral_scenery(sl3_pair, poly, q_mod=2**31 - 1)
    cfg = harness.ExperimentConfig(walk=lazy_model, scenery=tor, n=2**10,
                                   t_grid=(1.0,), m_sceneries=100, n_omegas=2,
                                   seed=13)
    rep = harness.run_truncation_ladder(cfg, [2, 4, 6])
    assert rep.norm_c_dropped[0] > rep.norm_c_dropped[-1] == 0.0
    assert rep.density_sup_bound == [v**2 for v in rep.norm_c_dropped]
    assert len(rep.var_y1) == 3
