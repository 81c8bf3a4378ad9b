import numpy as np
import pytest

from rwscenery import trigpoly


def test_validation():
    with pytest.raises(ValueError):
        trigpoly.TrigPolynomial({})
    with pytest.raises(ValueError):
        trigpoly.TrigPolynomial({(0, 0): 1.0})  # zero frequency
    with pytest.raises(ValueError):
        trigpoly.TrigPolynomial({(1, 0): 1.0})  # missing conjugate
    with pytest.raises(ValueError):
        trigpoly.TrigPolynomial({(1, 0): 1.0, (-1, 0): 2.0})  # not Hermitian


def test_norms_and_moments(four_term_poly):
    f = four_term_poly
    assert f.norm_c() == pytest.approx(2.0)
    assert f.norm_l2_sq() == pytest.approx(1.0)
    # f = cos(2 pi x1) + cos(2 pi x2): E f^4 = 3/8 + 6/4 + 3/8
    assert f.fourth_moment() == pytest.approx(2.25, abs=1e-12)


def test_evaluate_matches_cosines(four_term_poly):
    x = (0.13, 0.72, 0.4)
    expect = np.cos(2 * np.pi * 0.13) + np.cos(2 * np.pi * 0.72)
    assert four_term_poly.evaluate(x) == pytest.approx(expect, abs=1e-12)


def test_lattice_evaluation_matches_float(four_term_poly):
    q = 2**31 - 1
    gen = np.random.default_rng(0)
    p = gen.integers(0, q, size=(20, 3), dtype=np.uint64)
    lattice_vals = four_term_poly.evaluate_lattice(p, q)
    for row, lv in zip(p, lattice_vals):
        assert lv == pytest.approx(four_term_poly.evaluate(row.astype(float) / q),
                                   abs=1e-9)


def test_truncate_keeps_largest_pairs():
    f = trigpoly.cosine_polynomial([(1, 0), (0, 1), (1, 1)],
                                   amplitudes=[1.0, 0.5, 0.25])
    top2 = f.truncate_to(2)  # one conjugate pair
    assert set(top2.coeffs) == {(1, 0), (-1, 0)}
    top4 = f.truncate_to(4)
    assert set(top4.coeffs) == {(1, 0), (-1, 0), (0, 1), (0, -1)}


def test_list_round_trip(four_term_poly):
    items = four_term_poly.to_list()
    again = trigpoly.trig_from_list(items)
    assert again.coeffs == four_term_poly.coeffs
