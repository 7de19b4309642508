import random

import pytest
from hypothesis import given, settings, strategies as st

from sl2limits import chabauty, cli, sl2
from sl2limits.chabauty import (LimitGroupDescriptor, LimitTarget, RotationContext, Shape,
                                conjugate_by_diag_power, limit_membership_defect,
                                limit_sequence_for_target, polar_decompose, polar_pair)
from sl2limits.padic import HenselConditionFailed, PrimeContext, class_representative
from sl2limits.sl2 import Mat2

CTX = PrimeContext(5, 40)
KINDS = ["unram", "ram-p", "ram-ps"]


@settings(max_examples=20, deadline=None)
@given(st.integers(0, 10 ** 6), st.sampled_from(KINDS))
def test_rotation_closed_form_matches_product(seed, kind):
    E = CTX.ext(kind)
    h = sl2.random_sl2(CTX.qp, random.Random(seed), length=2)
    direct = chabauty.rotated_subgroup_element(h, RotationContext(E))
    closed = chabauty.rotated_closed_form(h, E.alpha)
    assert (direct - closed).is_zero()


@pytest.mark.parametrize("kind", KINDS)
def test_rotation_inverse_and_factor_endpoints(kind):
    E = CTX.ext(kind)
    rot = RotationContext(E)
    assert (rot.M @ rot.M_inv - Mat2.identity(E)).is_zero()
    top, bottom = rot.first.apply((1, 0))
    assert (bottom - E.alpha * top).is_zero()
    # the product itself does not send [1:0] to [1:alpha]
    top, bottom = rot.M.apply((1, 0))
    assert not (bottom - E.alpha * top).is_zero()


def test_diagonal_conjugation_against_matrix_product():
    E = CTX.ext("ram-p")
    g = sl2.random_sl2(E, random.Random(4), length=1)
    w = E.uniformizer
    D, Di = Mat2.diag(w ** 3, (w ** 3).inv()), Mat2.diag((w ** 3).inv(), w ** 3)
    assert (conjugate_by_diag_power(g, 3) - D @ g @ Di).is_zero()


def test_weyl_flip_turns_lower_into_upper():
    g = Mat2(1, 0, 7, 1, field=CTX.qp)
    f = chabauty.weyl_flip(g)
    assert f.e21.is_zero() and (f.e12 + 7).is_zero()


def test_sequence_matches_the_quadratic_recipe():
    # C = alpha, b = 0, n = 3 at p = 5 unramified: d solves X^2 + 5^6 X - 1
    E = CTX.ext("unram")
    t = LimitTarget(E, E.element(0, 1), 0)
    h = limit_sequence_for_target(t, 3)
    d = h.e22
    assert (d * d + 5 ** 6 * d - 1).valuation() >= CTX.N - sl2.SLACK
    assert (h.det() - 1).valuation() >= CTX.N - sl2.SLACK


@pytest.mark.parametrize("kind", KINDS)
def test_targets_lie_in_the_limit_group(kind):
    E = CTX.ext(kind)
    L = LimitGroupDescriptor(Shape.LOWER_TRIANGULAR_NORM1, E)
    for t in chabauty.target_grid(E):
        assert chabauty.is_member(t.element(), L)
        assert (t.a * t.a - E.s * t.b * t.b - 1).is_zero()


def test_target_grid_has_27_points():
    assert len(chabauty.target_grid(CTX.ext("unram"))) == 27


def test_non_member_has_small_defect():
    E = CTX.ext("unram")
    L = LimitGroupDescriptor(Shape.LOWER_TRIANGULAR_NORM1, E)
    assert limit_membership_defect(Mat2(1, 1, 0, 1, field=E), L) == 0


@pytest.mark.parametrize("kind", KINDS)
def test_convergence_rate_two(kind):
    # frozen from the experiment: slope exactly 2 and c = 0 on this target
    ctx = PrimeContext(5, 70)
    E = ctx.ext(kind)
    t = LimitTarget(E, E.element(2, 5), 5)
    L = LimitGroupDescriptor(Shape.LOWER_TRIANGULAR_NORM1, E)
    rep = chabauty.verify_convergence(lambda n: limit_sequence_for_target(t, n), range(1, 11),
                                      L, t.element(), RotationContext(E), E)
    assert rep.slope == pytest.approx(2.0)
    assert rep.c == 0.0
    assert rep.monotone and not rep.skipped
    assert all(r["target_defect"] >= 2 * r["n"] for r in rep.records)


def test_padic_experiment_summary():
    res = chabauty.padic_limit_experiment(5, "ram-ps", 40, 6, 20, seed=1, limit=3)
    assert len(res["targets"]) == 3
    assert res["c"] == 0.0
    assert not res["sweep"]["violations"]
    assert all(t["slope"] == pytest.approx(2.0) for t in res["targets"])


def test_condition2_sweep_has_no_violations():
    E = CTX.ext("unram")
    sw = chabauty.condition2_sweep(E, random.Random(2), 30, range(1, 6), 0.0)
    assert sw["violations"] == [] and sw["samples"] > 0


def test_htheta_sequences_converge_at_rate_four():
    # frozen: the conjugated sequences close 4 digits per step
    runs = chabauty.htheta_limit_experiment(5, 40, 8)
    assert len(runs) == 8
    for r in runs:
        assert r["mu2"]
        assert r["slope"] == pytest.approx(4.0)
        last = r["report"].matrices[-1]
        s = r["sign"]
        assert (last.e11 - s).valuation() >= 1 and (last.e21 - 1).valuation() >= 30


def test_htheta_sequence_is_in_the_fixed_group():
    F = CTX.qp
    for label in ("1", "S", "ω", "Sω"):
        a = F.coerce(class_representative(CTX, label))
        theta = sl2.involution_f2(F, a)
        for sign in (1, -1):
            h = chabauty.htheta_limit_sequence(a, 1, sign, 2)
            assert sl2.fixed_point_test(theta, h)[0]


def test_htheta_sequence_needs_small_y():
    F = CTX.qp
    with pytest.raises(HenselConditionFailed):
        chabauty.htheta_limit_sequence(F.coerce(5 ** 3), 1, 1, 0)


# polar decomposition

@pytest.mark.parametrize("kind", KINDS)
def test_polar_reconstructs_E_over_F(kind):
    pair = polar_pair("SL2E/SL2F", CTX.ext(kind))
    rng = random.Random(7)
    for _ in range(15):
        g = cli.random_polar_input(pair.E, rng)
        dec = polar_decompose(g, pair)
        assert (dec.reconstruct() - g).is_zero()
        assert dec.displacement <= dec.diameter
        assert dec.h.field.depth == 0 or all(e.in_parent() for e in dec.h.entries())


def test_polar_reconstructs_F_over_H_theta1():
    pair = polar_pair("SL2F/H_theta1", CTX)
    theta = sl2.involution_f2(CTX.qp, 1)
    rng = random.Random(8)
    for _ in range(15):
        g = cli.random_polar_input(CTX.qp, rng)
        dec = polar_decompose(g, pair)
        assert (dec.reconstruct() - g).is_zero()
        assert sl2.fixed_point_test(theta, dec.h)[0]


@pytest.mark.parametrize("kind", KINDS)
@pytest.mark.parametrize("m", [1, 2, 3])
def test_polar_recovers_the_exponent(kind, m):
    E = CTX.ext(kind)
    pair = polar_pair("SL2E/SL2F", E)
    rng = random.Random(m)
    for label, (_, _, a) in pair.reps.items():
        h0 = sl2.random_sl2(CTX.qp, rng, length=1).lift(E)
        g = chabauty._mat_power(a, -m) @ h0
        dec = polar_decompose(g, pair)
        assert (dec.i, dec.n) == (label, -m)
        assert (dec.reconstruct() - g).is_zero()


def test_identity_decomposes_trivially():
    pair = polar_pair("SL2E/SL2F", CTX.ext("unram"))
    dec = polar_decompose(Mat2.identity(pair.E), pair)
    assert dec.n == 0 and dec.displacement == 0


def test_polar_json_shape():
    pair = polar_pair("SL2F/H_theta1", CTX)
    dec = polar_decompose(cli.random_polar_input(CTX.qp, random.Random(1)), pair)
    doc = dec.to_json()
    assert set(doc) == {"pair", "i", "n", "k", "h", "displacement", "diameter"}


def test_unknown_pair_is_rejected():
    with pytest.raises(ValueError):
        polar_pair("SL2E/H", CTX)


# boundary disjointness

def test_boundary_check_for_level_K_certificates():
    rng = random.Random(0)
    for cert in cli.level_k_certificates(CTX):
        out = chabauty.boundary_disjointness_check(cert, 60, rng)
        assert out["passed"] and out["rational_images"] == 0


def test_boundary_check_rejects_level_E_certificate():
    E = CTX.ext("unram")
    cert = sl2.conjugator_to_sigma(sl2.involution_f1b(E, 1))
    with pytest.raises(ValueError):
        chabauty.boundary_disjointness_check(cert, 5, random.Random(0))
