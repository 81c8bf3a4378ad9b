import itertools
import math

import numpy as np
import pytest
from scipy.integrate import quad
from scipy.stats import norm

from rwscenery import algebra, localtime, scenery, trigpoly, walk


@pytest.fixture(scope="module")
def toral(sl3_pair, four_term_poly):
    return scenery.toral_scenery(sl3_pair, four_term_poly, q_mod=2**31 - 1)


def test_base_laws_centered_unit_variance():
    gen = np.random.default_rng(0)
    words = gen.integers(0, 2**64, size=200000, dtype=np.uint64)
    for name in ("rademacher", "uniform", "gaussian"):
        law = scenery.base_law(name)
        x = law.values(words)
        assert abs(x.mean()) < 0.02
        assert x.var() == pytest.approx(1.0, abs=0.02)
        assert law.moment(1) == 0.0
        assert law.moment(2) == pytest.approx(1.0)
    tg = scenery.base_law("truncated_gaussian", level=1.0)
    x = tg.values(words)
    assert abs(x.mean()) < 0.02
    assert x.var() == pytest.approx(1.0, abs=0.02)
    assert tg.moment(2) == pytest.approx(1.0, abs=1e-9)


def test_law_fourth_moments():
    assert scenery.base_law("rademacher").fourth_moment == 1.0
    assert scenery.base_law("uniform").fourth_moment == pytest.approx(9.0 / 5.0)
    assert scenery.base_law("gaussian").fourth_moment == 3.0


def test_gaussian_partial_moments_vs_quadrature():
    g = scenery.base_law("gaussian")
    for level in (-0.7, 0.3, 1.5):
        for k in range(5):
            direct, _ = quad(lambda x: x**k * norm.pdf(x), -40, level)
            assert g.partial_moment(k, level) == pytest.approx(direct, abs=1e-9)


def test_ma_flags():
    ma = scenery.moving_average_scenery({(0, 0): 1.0, (1, 0): 1.0})
    assert not ma.degenerate and ma.coeff_sum == 2.0
    deg = scenery.moving_average_scenery({(0, 0): 1.0, (1, 0): -1.0})
    assert deg.degenerate


def test_association_certificates(sl3_pair, four_term_poly):
    assert scenery.is_associated(scenery.iid_scenery("gaussian"))
    assert scenery.is_associated(scenery.moving_average_scenery({(0, 0): 1.0, (1, 0): 2.0}))
    assert scenery.is_associated(scenery.moving_average_scenery({(0, 0): -1.0, (1, 0): -2.0}))
    assert not scenery.is_associated(scenery.moving_average_scenery({(0, 0): 1.0, (1, 0): -2.0}))
    assert not scenery.is_associated(
        scenery.toral_scenery(sl3_pair, four_term_poly, q_mod=2**31 - 1))


def test_spectral_density_ma():
    ma1 = scenery.moving_average_scenery({(0, 0): 1.0})
    assert scenery.spectral_density(ma1).fourier == {(0, 0): 1.0}
    ma = scenery.moving_average_scenery({(0, 0): 1.0, (1, 0): 1.0})
    sd = scenery.spectral_density(ma)
    assert sd.at_zero() == pytest.approx(4.0)
    assert sd.evaluate((0.0, 0.0)) == pytest.approx(4.0)
    t1 = 0.3
    assert sd.evaluate((t1, 0.0)) == pytest.approx(2 + 2 * math.cos(2 * math.pi * t1))
    # |sum a_q e(...)|^2 is nonnegative on a grid
    for t in np.linspace(0, 1, 23):
        assert sd.evaluate((t, 0.17)) >= -1e-9


def test_spectral_density_toral_single_character(sl3_pair):
    g = trigpoly.cosine_polynomial([(1, 0, 0)])
    tor = scenery.toral_scenery(sl3_pair, g, q_mod=2**31 - 1)
    sd = scenery.spectral_density(tor)
    assert sd.fourier == {(0, 0): 0.5}


def test_spectral_density_toral_nonnegative_on_grid(toral):
    sd = scenery.spectral_density(toral)
    for t in np.linspace(0, 1, 17):
        assert sd.evaluate((t, 0.31)) >= -1e-9


def test_orbit_exit_guard(sl3_pair, four_term_poly):
    tor = scenery.ToralScenery(pair=sl3_pair, poly=four_term_poly,
                               q_mod=2**31 - 1, orbit_box=1)
    # a box of 1 cannot certify closure (any nonzero correlation would sit
    # beyond half the box); the single-character table here is {0: ...} so
    # closure holds trivially -- force a failure with an overlap polynomial
    k0 = (1, 0, 0)
    k1 = algebra.dual_orbit(sl3_pair, k0, (1, 0))
    f = trigpoly.TrigPolynomial({k0: 0.5, tuple(-x for x in k0): 0.5,
                                 k1: 0.25, tuple(-x for x in k1): 0.25})
    bad = scenery.ToralScenery(pair=sl3_pair, poly=f, q_mod=2**31 - 1, orbit_box=1)
    with pytest.raises(scenery.OrbitExitError):
        scenery.toral_correlations(bad)
    ok = scenery.ToralScenery(pair=sl3_pair, poly=f, q_mod=2**31 - 1, orbit_box=8)
    table = scenery.toral_correlations(ok)
    assert table[(1, 0)] == pytest.approx(0.25)


def test_q_mod_validation(sl3_pair, four_term_poly):
    with pytest.raises(ValueError):
        scenery.toral_scenery(sl3_pair, four_term_poly, q_mod=2**31 - 2)  # composite
    with pytest.raises(ValueError):
        scenery.toral_scenery(sl3_pair, four_term_poly, q_mod=2**61 - 1)  # too large


def test_asymptotic_variance_recurrent(lazy_model):
    ma = scenery.moving_average_scenery({(0, 0): 1.0, (1, 0): 1.0})
    est = scenery.asymptotic_variance(ma, lazy_model)
    assert est.regime == "recurrent" and est.value == pytest.approx(4.0)
    assert not est.degenerate
    iid = scenery.iid_scenery("rademacher")
    assert scenery.asymptotic_variance(iid, lazy_model).value == pytest.approx(1.0)
    deg = scenery.moving_average_scenery({(0, 0): 1.0, (1, 0): -1.0})
    est_deg = scenery.asymptotic_variance(deg, lazy_model)
    assert est_deg.degenerate and est_deg.value == pytest.approx(0.0)


def test_asymptotic_variance_transient(simple3d_model):
    iid = scenery.iid_scenery("rademacher")
    est = scenery.asymptotic_variance(iid, simple3d_model, k_max=40)
    gs = walk.green_series(simple3d_model, (0, 0, 0), k_max=40)
    assert est.regime == "transient"
    assert est.value == pytest.approx(gs.value, abs=1e-12)
    assert est.tail_estimate == pytest.approx(gs.tail_estimate, abs=1e-12)
    assert est.value >= 1.0  # the k=0 indicator term alone contributes 1


def test_variance_identity_exhaustive_tiny(lazy_model):
    iid = scenery.iid_scenery("rademacher")
    for seed in range(5):
        path = walk.sample_path(lazy_model, 8, seed=seed)
        tab = localtime.local_times(path, (0, 8))
        weights = tab.counts
        total = 0
        for signs in itertools.product((-1, 1), repeat=len(weights)):
            s = int(np.dot(signs, weights))
            total += s * s
        exact = total / 2 ** len(weights)
        assert exact == localtime.self_intersections(path, 8)
        assert scenery.quenched_variance(iid, path, (0, 8)) == exact


def test_field_sum_constant_path():
    const = walk.build_walk_model(walk.deterministic_law((0, 0)))
    path = walk.sample_path(const, 25, seed=0)
    iid = scenery.iid_scenery("rademacher")
    s = scenery.sample_field_sum(iid, path, [1.0], x_seed=42)
    assert abs(s[0]) == 25.0


def test_field_sum_cumulative_grid(lazy_model):
    iid = scenery.iid_scenery("gaussian")
    path = walk.sample_path(lazy_model, 1000, seed=8)
    full = scenery.sample_field_sum(iid, path, [0.25, 0.5, 1.0], x_seed=3)
    tail = scenery.sample_field_sum(iid, path, [1.0], x_seed=3)
    assert full[-1] == pytest.approx(tail[0], abs=1e-9)
    assert full.shape == (3,)


def test_ma_identity_filter_matches_iid(lazy_model):
    path = walk.sample_path(lazy_model, 500, seed=4)
    iid = scenery.iid_scenery("uniform")
    ma = scenery.moving_average_scenery({(0, 0): 1.0}, law="uniform")
    a = scenery.field_increments(iid, path, [0.5, 1.0], range(8))
    b = scenery.field_increments(ma, path, [0.5, 1.0], range(8))
    assert np.allclose(a, b)


def test_ma_correlation_identity_monte_carlo(lazy_model):
    # empirical <Xi_l, Xi_0> against sum_q a_q a_{q-l}
    coeffs = {(0, 0): 1.0, (1, 0): 0.5, (0, 1): -0.25}
    ma = scenery.moving_average_scenery(coeffs, law="gaussian")
    sd = scenery.spectral_density(ma)
    m = 40000
    gen_sites = np.array([[0, 0], [1, 0], [0, 1], [1, 1], [-1, 0], [0, -1],
                          [2, 0], [-1, -1]], dtype=np.int64)
    from rwscenery.rng import hash_sites, splitmix64
    base = {tuple(s): hash_sites(0, s.reshape(1, 2))[0] for s in gen_sites}
    # realize Xi at l = 0 and l = (1,0) for m sceneries
    vals = {}
    for ell in [(0, 0), (1, 0)]:
        acc = np.zeros(m)
        for q, a in coeffs.items():
            site = (ell[0] - q[0], ell[1] - q[1])
            word = hash_sites(0, np.array(site, dtype=np.int64).reshape(1, 2))[0]
            seeds = np.arange(m, dtype=np.uint64)
            acc += a * ma.law.values(splitmix64(np.uint64(word) ^ seeds))
        vals[ell] = acc
    emp = float(np.mean(vals[(0, 0)] * vals[(1, 0)]))
    expect = sd.fourier[(1, 0)]
    se = float(np.std(vals[(0, 0)] * vals[(1, 0)], ddof=1) / math.sqrt(m))
    assert abs(emp - expect) < 4 * se


def test_toral_exact_phase_equality(sl3_pair, four_term_poly, toral):
    # modular evaluation and dual-orbit transport produce the same integer
    # phase mod q, hence identical values at the same rational point
    q = toral.q_mod
    p = np.array([123456789, 987654321, 555555555], dtype=np.uint64)
    for ell in [(3, -2), (5, 5), (-4, 1)]:
        m = algebra.mat_pow_pair(sl3_pair, ell)
        y = tuple(sum(int(m[i][j]) * int(p[j]) for j in range(3)) % q for i in range(3))
        for k in four_term_poly.support:
            kk = algebra.dual_orbit(sl3_pair, k, ell)
            phase_transport = sum(int(a) * int(b) for a, b in zip(kk, p)) % q
            phase_modular = sum(int(a) * int(b) for a, b in zip(k, y)) % q
            assert phase_transport == phase_modular


def test_toral_empirical_correlation_matches_table(sl3_pair, toral):
    # a_l = <A^l f, f> against a lattice Monte Carlo estimate
    f = toral.poly
    q = toral.q_mod
    gen = np.random.default_rng(7)
    pts = gen.integers(0, q, size=(20000, 3), dtype=np.uint64)
    v0 = f.evaluate_lattice(pts, q)
    for ell in [(0, 0), (1, 0), (2, -1)]:
        m = np.asarray(algebra.mat_pow_pair(sl3_pair, ell), dtype=object)
        moved = (pts.astype(object) @ m.T.astype(object)) % q
        vl = f.evaluate_lattice(moved.astype(np.uint64), q)
        prod = vl * v0
        se = float(prod.std(ddof=1) / math.sqrt(len(prod)))
        expect = algebra.toral_correlation(sl3_pair, f, ell)
        assert abs(float(prod.mean()) - expect) < 4 * se + 1e-9


def test_toral_quenched_variance_vs_monte_carlo(lazy_model, toral):
    path = walk.sample_path(lazy_model, 800, seed=5)
    exact = scenery.quenched_variance(toral, path, (0, 800))
    inc = scenery.field_increments(toral, path, [1.0], range(4000))
    mc = float(inc[:, 0].var(ddof=1))
    se = exact * math.sqrt(2.0 / 3999)
    assert abs(mc - exact) < 4 * se


def test_truncation_pathwise_decomposition(lazy_model):
    g = scenery.iid_scenery("gaussian")
    hat, tail = scenery.truncate_field(g, 1.0)
    path = walk.sample_path(lazy_model, 300, seed=6)
    xs = scenery.field_increments(g, path, [0.5, 1.0], range(40))
    xh = scenery.field_increments(hat, path, [0.5, 1.0], range(40))
    xt = scenery.field_increments(tail, path, [0.5, 1.0], range(40))
    assert np.allclose(xs, xh + xt, atol=1e-10)


def test_truncation_tail_variance_gaussian():
    g = scenery.iid_scenery("gaussian")
    _, tail = scenery.truncate_field(g, 1.0)
    # quadrature oracle for E[X^2; X>1] - E[X; X>1]^2
    m2, _ = quad(lambda x: x * x * norm.pdf(x), 1.0, 40.0)
    m1, _ = quad(lambda x: x * norm.pdf(x), 1.0, 40.0)
    expect = m2 - m1 * m1
    assert tail.law.variance == pytest.approx(expect, abs=1e-9)
    # Monte Carlo within 3 standard errors
    gen = np.random.default_rng(1)
    words = gen.integers(0, 2**64, size=100000, dtype=np.uint64)
    sample = tail.law.values(words)
    se = sample.var(ddof=1) * math.sqrt(2.0 / (len(sample) - 1))
    assert abs(sample.var(ddof=1) - expect) < 3 * se


def test_truncation_tail_vanishes_for_bounded_laws():
    r = scenery.iid_scenery("rademacher")
    _, tail = scenery.truncate_field(r, 2.0)
    gen = np.random.default_rng(2)
    words = gen.integers(0, 2**64, size=1000, dtype=np.uint64)
    assert np.allclose(tail.law.values(words), 0.0)
    assert tail.law.variance == pytest.approx(0.0, abs=1e-12)


def test_truncation_tail_variance_monotone_in_level():
    g = scenery.iid_scenery("gaussian")
    variances = []
    for level in (0.5, 1.0, 2.0, 3.0):
        _, tail = scenery.truncate_field(g, level)
        variances.append(tail.law.variance)
    assert all(b < a for a, b in zip(variances, variances[1:]))


def test_truncate_field_rejects_non_iid():
    ma = scenery.moving_average_scenery({(0, 0): 1.0})
    with pytest.raises(ValueError):
        scenery.truncate_field(ma, 1.0)


def test_window_boundaries_validation():
    with pytest.raises(ValueError):
        scenery.window_boundaries(100, [0.5, 0.25])
    with pytest.raises(ValueError):
        scenery.window_boundaries(100, [0.0, 0.5])
    assert scenery.window_boundaries(100, [0.25, 1.0]) == [0, 25, 100]


def test_scenery_serialization_round_trip(toral):
    for scen in (scenery.iid_scenery("gaussian"),
                 scenery.moving_average_scenery({(0, 0): 1.0, (1, 0): -1.0}),
                 toral):
        doc = scenery.scenery_to_dict(scen)
        again = scenery.scenery_from_dict(doc)
        assert scenery.scenery_to_dict(again) == doc


def test_two_primes_give_consistent_statistics(sl3_pair, four_term_poly, lazy_model):
    path = walk.sample_path(lazy_model, 600, seed=9)
    t1 = scenery.toral_scenery(sl3_pair, four_term_poly, q_mod=2**31 - 1)
    t2 = scenery.toral_scenery(sl3_pair, four_term_poly, q_mod=2147483629)
    a = scenery.field_increments(t1, path, [1.0], range(3000))
    b = scenery.field_increments(t2, path, [1.0], range(3000))
    va, vb = a.var(), b.var()
    exact = scenery.quenched_variance(t1, path, (0, 600))
    se = exact * math.sqrt(2.0 / 2999)
    assert abs(va - vb) < 6 * se
