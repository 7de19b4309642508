import pytest
from hypothesis import given, settings, strategies as st

from sl2limits import archimedean as ar

mp = ar.mp


@settings(max_examples=30)
@given(st.floats(-3, 3), st.floats(-3, 3), st.floats(-3, 3))
def test_rotation_closed_form_matches_product(a, b, c):
    if abs(a) < 0.1:
        return
    d = (1 + b * c) / a
    direct = ar.rotated_real_subgroup_element(a, b, c, d)
    closed = ar.rotated_real_closed_form(a, b, c, d)
    assert (direct - closed).norm() < mp.mpf("1e-40")


def test_rotation_inverse():
    assert (ar.ROT @ ar.ROT_INV - ar.CMat2(1, 0, 0, 1)).norm() < mp.mpf("1e-50")


def test_non_sl2_input_rejected():
    with pytest.raises(ValueError):
        ar.rotated_real_subgroup_element(1, 1, 1, 1)


def test_conjugation_scales_off_diagonal():
    g = ar.CMat2(1, 2, 3, 4)
    h = ar.conjugate_by_exp(g, 2)
    assert abs(h.e12 - 2 * mp.exp(4)) < mp.mpf("1e-40")
    assert abs(h.e21 - 3 * mp.exp(-4)) < mp.mpf("1e-40")


def test_target_must_be_on_the_circle():
    with pytest.raises(ValueError):
        ar.RealTarget(1, 1, 0)


@pytest.mark.parametrize("target", ar.default_targets(), ids=lambda t: mp.nstr(t.a, 3))
def test_sequence_stays_in_sl2r_and_converges(target):
    for n in (5, 10, 15):
        a, b, c, d = ar.real_limit_sequence(target, n)
        assert abs(a * d - b * c - 1) < mp.mpf("1e-40")
    rep = ar.verify_real_convergence(target)
    if rep["slope"] is not None:
        assert -2.2 <= rep["slope"] <= -1.8
    assert rep["conjugate_gap"] <= 1e-9
    assert rep["det_ok"]


def test_limit_diagonal_entries_are_conjugate():
    t = ar.RealTarget("0.6", "-0.8", 1 + 2j)
    L = t.limit_element()
    assert abs(L.e22 - mp.conj(L.e11)) < mp.mpf("1e-50")
    assert abs(L.e11 * L.e22 - 1) < mp.mpf("1e-40")
    # the upper-right entry is z1 + i z2 / 2
    assert abs(L.e12 - mp.mpc(1, 1)) < mp.mpf("1e-50")


def test_exact_target_has_zero_error():
    rep = ar.verify_real_convergence(ar.RealTarget(1, 0, 0))
    assert rep["slope"] is None
    assert all(mp.mpf(r["error"]) == 0 for r in rep["records"])

