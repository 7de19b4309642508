import random
from fractions import Fraction

import pytest
from hypothesis import given, settings, strategies as st

from sl2limits import sl2
from sl2limits.padic import PrimeContext, class_representative, square_class
from sl2limits.sl2 import Mat2

CTX = PrimeContext(5, 40)
E = CTX.ext("unram")
F = CTX.qp

small = st.integers(-30, 30)


def matmul_oracle(a, b):
    return [[sum(a[i][k] * b[k][j] for k in range(2)) for j in range(2)] for i in range(2)]


@given(st.lists(small, min_size=8, max_size=8))
def test_product_matches_integer_oracle(xs):
    a = [[xs[0], xs[1]], [xs[2], xs[3]]]
    b = [[xs[4], xs[5]], [xs[6], xs[7]]]
    M = Mat2(*xs[:4], field=F) @ Mat2(*xs[4:], field=F)
    want = matmul_oracle(a, b)
    assert [[M.e11.lift(), M.e12.lift()], [M.e21.lift(), M.e22.lift()]] == want


@settings(max_examples=40)
@given(st.integers(0, 10 ** 6), st.sampled_from(["qp", "unram", "ram-p", "ram-ps"]))
def test_random_sl2_has_determinant_one(seed, level):
    K = F if level == "qp" else CTX.ext(level)
    g = sl2.random_sl2(K, random.Random(seed), length=2)
    assert (g.det() - 1).is_zero()
    assert (g @ g.inv() - Mat2.identity(K)).is_zero()


@settings(max_examples=30)
@given(st.integers(0, 10 ** 6))
def test_determinant_is_multiplicative(seed):
    rng = random.Random(seed)
    a = Mat2(*(sl2.random_element(E, rng, 3) for _ in range(4)))
    b = Mat2(*(sl2.random_element(E, rng, 3) for _ in range(4)))
    assert ((a @ b).det() - a.det() * b.det()).is_zero()


def test_sigma_of_matrix_conjugates_entries():
    M = Mat2(E.element(1, 2), E.element(0, 1), 3, E.element(4, -1))
    S = M.sigma()
    assert [e.b.lift() for e in S.entries()] == [-2, -1, 0, 1]


def test_defect_counts_agreeing_digits():
    A = Mat2(1, 0, 0, 1, field=F)
    B = Mat2(1 + 5 ** 7, 0, 0, 1, field=F)
    assert A.defect(B) == 7


# involutions

def test_f1a_q_is_norm_plus_y():
    z = E.element(2, 3)
    theta = sl2.involution_f1a(E, z, 7)
    assert theta.q == z.norm() + 7
    assert sl2.verify_involution(theta) == theta.q


def test_f1a_rejects_degenerate_parameters():
    z = E.element(1, 0)
    with pytest.raises(ValueError):
        sl2.involution_f1a(E, z, -1)


def test_f1b_needs_norm_one():
    with pytest.raises(ValueError):
        sl2.involution_f1b(E, E.element(2, 0))
    w = E.element(3, 1)
    sl2.involution_f1b(E, w / w.sigma())


@pytest.mark.parametrize("seed", range(5))
def test_theta_squared_is_identity(seed):
    rng = random.Random(seed)
    for theta in (sl2.random_f1a(E, rng), sl2.random_f1b(E, rng), sl2.random_f2(F, rng)):
        sl2.verify_involution(theta, rng, trials=5)


def test_f2_representatives_cover_the_square_classes():
    labels = [square_class(CTX.scalar(a)).label for a in sl2.family_f2_representatives(CTX)]
    assert sorted(labels) == sorted(["1", "S", "ω", "Sω"])


# fixed-point groups

@pytest.mark.parametrize("label", ["1", "S", "ω", "Sω"])
def test_h_theta_a_sample_is_fixed(label):
    a = F.coerce(class_representative(CTX, label))
    theta = sl2.involution_f2(F, a)
    for h in sl2.h_theta_a_sample(F, a, 6, random.Random(0)):
        assert sl2.in_sl2(h)
        member, _ = sl2.fixed_point_test(theta, h)
        assert member


def test_non_member_is_detected():
    theta = sl2.involution_f2(F, 2)
    g = sl2.elementary_upper(F.coerce(1), F)
    member, defect = sl2.fixed_point_test(theta, g)
    assert not member and defect == 0


# certificates

@pytest.mark.parametrize("p", [5, 7])
@pytest.mark.parametrize("label", ["1", "S", "ω", "Sω"])
def test_diagonalising_conjugator(p, label):
    ctx = PrimeContext(p, 40)
    a = class_representative(ctx, label)
    cert = sl2.conjugator_to_diagonal(a, ctx)
    assert cert.verify()
    D = cert.B.inv() @ cert.theta.A.lift(cert.B.field) @ cert.B
    assert (D.e11 + D.e22).is_zero()
    ends = sl2.fixed_ends(a, ctx)
    assert len(ends) == 2 and ends[0] != ends[1]


def test_case_one_uses_identity_for_x_one():
    cert = sl2.conjugator_to_sigma(sl2.involution_f1b(E, 1))
    assert cert.case_tag == "C1"
    assert (cert.B - Mat2.identity(E)).is_zero()


def test_case_one_for_minus_one():
    cert = sl2.conjugator_to_sigma(sl2.involution_f1b(E, -1))
    assert cert.case_tag == "C1" and cert.verify()


@pytest.mark.parametrize("kind", ["unram", "ram-p", "ram-ps"])
def test_certificates_for_random_involutions(kind):
    K = CTX.ext(kind)
    rng = random.Random(11)
    for _ in range(20):
        theta = sl2.random_f1a(K, rng) if rng.random() < 0.7 else sl2.random_f1b(K, rng)
        try:
            cert = sl2.conjugator_with_retry(theta)
        except sl2.NoAdmissibleC:
            continue
        assert cert.verify()
        assert not cert.B.det().is_zero()


def test_fixed_group_conjugates_to_sigma_fixed_group():
    # g = B h B^-1 with h in SL(2,Q_p) lies in H_theta, theta = iota_A o sigma
    theta = sl2.involution_f1a(E, E.element(1, 1), 3)
    cert = sl2.conjugator_with_retry(theta)
    K = cert.B.field
    h = sl2.random_sl2(F, random.Random(2), length=1).lift(K)
    g = cert.B @ h @ cert.B.inv()
    assert sl2.h_theta_sigma_membership(cert, g)


def test_membership_needs_sigma_certificate():
    cert = sl2.conjugator_to_diagonal(2, CTX)
    with pytest.raises(ValueError):
        sl2.h_theta_sigma_membership(cert, Mat2.identity(F))


def test_certificate_json_has_case_and_level():
    cert = sl2.conjugator_to_sigma(sl2.involution_f1a(E, E.alpha, 7))
    doc = cert.to_json()
    assert doc["case"] == cert.case_tag and doc["level"] == cert.level


def test_case_undecidable_for_inexact_zero():
    z = E.element(CTX.scalar(1), CTX.approx(10, 0, 0))
    theta = sl2.involution_f1a(E, z, 3)
    with pytest.raises(sl2.CaseUndecidable):
        sl2.conjugator_to_sigma(theta)


def test_negligible_threshold():
    assert sl2.negligible(F.coerce(Fraction(5 ** 10)), 10)
    assert not sl2.negligible(F.coerce(Fraction(5 ** 9)), 10)
