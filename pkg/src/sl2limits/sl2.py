"""2x2 matrices over the tower levels, involutions of SL(2,E) and the
conjugating matrices that reduce them to sigma or to a diagonal involution.
"""

from __future__ import annotations

import enum
import math
from dataclasses import dataclass, field as dc_field
from fractions import Fraction

from .padic import (ExtKind, ExtScalar, HenselConditionFailed, LevelMismatch,
                    NonSquare, PadicScalar, TowerField, class_representative, exact_ext_dot,
                    field_of, is_square, join, sqrt, square_class)

# digits of slack allowed for accumulated products
SLACK = 4


class SingularMatrix(ArithmeticError):
    pass


class NotAnInvolution(ArithmeticError):
    pass


class CaseUndecidable(ArithmeticError):
    """A case condition compares values that are only known inexactly."""


class NoAdmissibleC(ArithmeticError):
    pass


def negligible(x, bound):
    """x is zero at precision: no known digits, or valuation at least bound."""
    return x.is_zero() or x.valuation() >= bound


class Mat2:
    """A 2x2 matrix with all four entries at one level."""

    __slots__ = ("field", "e11", "e12", "e21", "e22")

    def __init__(self, e11, e12, e21, e22, field=None):
        F = field
        for x in (e11, e12, e21, e22):
            f = field_of(x)
            if f is not None:
                F = f if F is None else join(F, f)
        if F is None:
            raise TypeError("Mat2 needs a field or at least one p-adic entry")
        self.field = F
        self.e11 = F.coerce(e11)
        self.e12 = F.coerce(e12)
        self.e21 = F.coerce(e21)
        self.e22 = F.coerce(e22)

    @classmethod
    def _raw(cls, field, e11, e12, e21, e22):
        # entries already at `field`; skips coercion
        M = object.__new__(cls)
        M.field, M.e11, M.e12, M.e21, M.e22 = field, e11, e12, e21, e22
        return M

    @classmethod
    def identity(cls, field):
        return cls(1, 0, 0, 1, field=field)

    @classmethod
    def diag(cls, x, y, field=None):
        return cls(x, 0, 0, y, field=field)

    @property
    def ctx(self):
        return self.field.ctx

    def entries(self):
        return (self.e11, self.e12, self.e21, self.e22)

    def lift(self, field):
        F = join(field, self.field)
        if F is self.field:
            return self
        return Mat2(*self.entries(), field=F)

    def _common(self, other):
        if self.field is other.field:
            return self, other
        F = join(self.field, other.field)
        return self.lift(F), other.lift(F)

    def __matmul__(self, other):
        if not isinstance(other, Mat2):
            return NotImplemented
        x, y = self._common(other)
        F = x.field
        if F.depth == 1 and F.gen_sq.is_exact:
            r1, r2, c1, c2 = (x.e11, x.e12), (x.e21, x.e22), (y.e11, y.e21), (y.e12, y.e22)
            e11 = exact_ext_dot(F, r1, c1)
            if e11 is not None:
                return Mat2._raw(F, e11, exact_ext_dot(F, r1, c2), exact_ext_dot(F, r2, c1),
                                 exact_ext_dot(F, r2, c2))
        return Mat2._raw(x.field, x.e11 * y.e11 + x.e12 * y.e21, x.e11 * y.e12 + x.e12 * y.e22,
                         x.e21 * y.e11 + x.e22 * y.e21, x.e21 * y.e12 + x.e22 * y.e22)

    def __mul__(self, c):
        if isinstance(c, Mat2):
            return NotImplemented
        return Mat2(*(e * c for e in self.entries()), field=self.field)

    __rmul__ = __mul__

    def __add__(self, other):
        x, y = self._common(other)
        return Mat2(*(a + b for a, b in zip(x.entries(), y.entries())))

    def __sub__(self, other):
        x, y = self._common(other)
        return Mat2._raw(x.field, *(a - b for a, b in zip(x.entries(), y.entries())))

    def __neg__(self):
        return Mat2(*(-e for e in self.entries()), field=self.field)

    def det(self):
        return self.e11 * self.e22 - self.e12 * self.e21

    def trace(self):
        return self.e11 + self.e22

    def inv(self):
        d = self.det()
        if d.is_zero():
            raise SingularMatrix("determinant is indistinguishable from zero")
        di = d.inv()
        return Mat2(self.e22 * di, -self.e12 * di, -self.e21 * di, self.e11 * di)

    def sigma(self):
        return Mat2(*(e.sigma() for e in self.entries()), field=self.field)

    def apply(self, vec):
        x, y = vec
        return (self.e11 * x + self.e12 * y, self.e21 * x + self.e22 * y)

    def min_valuation(self):
        return min(e.valuation() for e in self.entries())

    def defect(self, other):
        """Smallest valuation of an entry of self - other."""
        return (self - other).min_valuation()

    def relative_defect(self, other):
        """defect(other) measured relative to the size of other."""
        return self.defect(other) - other.min_valuation()

    def is_zero(self):
        return all(e.is_zero() for e in self.entries())

    def __eq__(self, other):
        if not isinstance(other, Mat2):
            return NotImplemented
        try:
            return (self - other).is_zero()
        except LevelMismatch:
            return False

    __hash__ = None

    def __repr__(self):
        return f"Mat2([[{self.e11!r}, {self.e12!r}], [{self.e21!r}, {self.e22!r}]])"

    def to_json(self):
        return [[self.e11.to_json(), self.e12.to_json()],
                [self.e21.to_json(), self.e22.to_json()]]


def in_sl2(g, N=None):
    N = g.ctx.N if N is None else N
    return negligible(g.det() - 1, N - SLACK)


def elementary_upper(x, field=None):
    return Mat2(1, x, 0, 1, field=field)


def elementary_lower(x, field=None):
    return Mat2(1, 0, x, 1, field=field)


def random_element(F, rng, digits=6, vmin=-1, vmax=3):
    """A random nonzero exact element of Q_p or E with small numerators."""
    ctx = F.ctx
    if F.depth == 0:
        return ctx.random_scalar(rng, vmin, vmax, digits)
    while True:
        a = ctx.random_scalar(rng, vmin, vmax, digits) if rng.random() < 0.9 else 0
        b = ctx.random_scalar(rng, vmin, vmax, digits) if rng.random() < 0.9 else 0
        x = F.element(a, b)
        if not x.is_zero():
            return x


def random_sl2(F, rng, length=3, digits=4):
    """Exact random element of SL(2,F) as a word in elementary matrices."""
    g = None
    for _ in range(length):
        x = random_element(F, rng, digits, 0, 2)
        y = random_element(F, rng, digits, 0, 2)
        # U(x) L(y) = [[1 + x y, x], [y, 1]]
        step = Mat2(1 + x * y, x, y, 1, field=F)
        g = step if g is None else g @ step
    u = random_element(F, rng, digits, -1, 1)
    if g is None:
        return Mat2.diag(u, u.inv(), field=F)
    ui = u.inv()
    return Mat2(g.e11 * u, g.e12 * ui, g.e21 * u, g.e22 * ui, field=F)


class Gamma(enum.Enum):
    IDENTITY = "id"
    SIGMA = "sigma"


@dataclass(frozen=True, eq=False)
class Involution:
    """theta = iota_A o gamma."""

    gamma: Gamma
    A: Mat2
    family: str
    params: dict = dc_field(default_factory=dict)
    q: object = None
    A_inv: Mat2 = dc_field(init=False, repr=False)

    def __post_init__(self):
        object.__setattr__(self, "A_inv", self.A.inv())

    @property
    def field(self):
        return self.A.field

    def __call__(self, g):
        return apply_involution(self, g)


def involution_f1a(E, z, y):
    """A = [[z, y], [1, -sigma(z)]] with y in Q_p and z sigma(z) + y != 0."""
    z = E.coerce(z)
    y = E.ctx.scalar(y)
    q = z * z.sigma() + y
    if q.is_zero():
        raise ValueError("need z sigma(z) + y != 0")
    A = Mat2(z, y, 1, -z.sigma(), field=E)
    return Involution(Gamma.SIGMA, A, "F1A", {"z": z, "y": y}, q)


def involution_f1b(E, x):
    """A = diag(x, 1) with x sigma(x) = 1."""
    x = E.coerce(x)
    if not negligible(x * x.sigma() - 1, E.ctx.N - SLACK):
        raise ValueError("need x sigma(x) = 1")
    return Involution(Gamma.SIGMA, Mat2.diag(x, 1, field=E), "F1B", {"x": x}, E.one())


def involution_f2(F, a):
    """The k-involution iota_A with A = [[0, 1], [a, 0]]."""
    a = F.coerce(a)
    if a.is_zero():
        raise ValueError("a must be nonzero")
    return Involution(Gamma.IDENTITY, Mat2(0, 1, a, 0, field=F), "F2", {"a": a}, a)


def family_f2_representatives(ctx):
    return [class_representative(ctx, label) for label in ("1", "S", "ω", "Sω")]


def _gamma(theta, g):
    if theta.gamma is Gamma.SIGMA:
        return g.sigma()
    return g


def apply_involution(theta, g):
    if g.field.depth < theta.field.depth:
        g = g.lift(theta.field)
    if theta.field.depth < g.field.depth and theta.field != g.field.ancestor(theta.field.depth):
        raise LevelMismatch("g and theta live over different fields")
    if g.field is theta.field:
        return theta.A @ _gamma(theta, g) @ theta.A_inv
    A = theta.A.lift(g.field)
    return A @ _gamma(theta, g) @ A.inv()


def verify_involution(theta, rng=None, trials=10):
    """Check A gamma(A) = q Id and theta(theta(g)) = g; return q."""
    A = theta.A
    bound = A.ctx.N - SLACK
    P = A @ _gamma(theta, A)
    q = P.e11
    if not (negligible(P.e12, bound) and negligible(P.e21, bound)
            and negligible(P.e22 - q, bound)):
        raise NotAnInvolution(f"A gamma(A) is not scalar: {P!r}")
    if rng is not None:
        for _ in range(trials):
            g = random_sl2(theta.field, rng)
            back = apply_involution(theta, apply_involution(theta, g))
            if not (back - g).is_zero() and back.defect(g) < bound:
                raise NotAnInvolution("theta^2 moves a sampled element")
    return q


def conj_cond_check(X, theta):
    """Return q with A sigma(X) = q X, or None when no such q exists."""
    if theta.gamma is not Gamma.SIGMA:
        raise ValueError("conj_cond_check needs an involution with gamma = sigma")
    F = join(X.field, theta.field)
    X = X.lift(F)
    M = theta.A.lift(F) @ X.sigma()
    pivot = min(range(4), key=lambda i: X.entries()[i].valuation())
    xp = X.entries()[pivot]
    if xp.is_zero():
        raise SingularMatrix("X is zero")
    q = M.entries()[pivot] / xp
    if (M - X * q).is_zero() or M.defect(X * q) >= F.ctx.N - SLACK:
        return q
    return None


def fixed_point_test(theta, g, bound=None):
    """(member, defect) with defect the least valuation of theta(g) - g."""
    bound = g.ctx.N - SLACK if bound is None else bound
    diff = apply_involution(theta, g) - g
    member = all(negligible(e, bound) for e in diff.entries())
    return member, diff.min_valuation()


def h_theta_a_element(a, y, sign=1, field=None):
    """[[x, y], [a y, x]] with x^2 - a y^2 = 1 and x = sign * sqrt(1 + a y^2)."""
    F = field
    for v in (a, y):
        f = field_of(v)
        if f is not None:
            F = f if F is None else join(F, f)
    a = F.coerce(a)
    y = F.coerce(y)
    x = sqrt(1 + a * y * y)
    if sign < 0:
        x = -x
    return Mat2(x, y, a * y, x)


def h_theta_a_sample(F, a, count, rng, digits=6):
    """Elements of H_theta_a with both branches x = +-1 mod p.

    y is drawn from p*O so that v(a y^2) >= 1 and the square root of
    1 + a y^2 always exists.
    """
    a = F.coerce(a)
    if a.is_zero():
        raise ValueError("a must be nonzero")
    if a.valuation() < 0:
        raise HenselConditionFailed("a must be integral for the sampler")
    out = []
    p = F.ctx.p
    for i in range(count):
        y = F.coerce(p) * random_element(F, rng, digits, 0, 2)
        out.append(h_theta_a_element(a, y, 1 if i % 2 == 0 else -1, F))
    return out


@dataclass(frozen=True, eq=False)
class ConjugatorCertificate:
    B: Mat2
    c: object
    case_tag: str
    target: str  # "SIGMA" or "DIAG"
    theta: Involution = None
    c2: object = None

    @property
    def level(self):
        return self.B.field.name

    def residual(self):
        """min valuation of A sigma(B) - c B (target SIGMA) or of the
        off-diagonal part of C^-1 A C (target DIAG)."""
        if self.target == "SIGMA":
            A = self.theta.A.lift(self.B.field)
            return (A @ self.B.sigma() - self.B * self.c).min_valuation()
        D = self.B.inv() @ self.theta.A.lift(self.B.field) @ self.B
        return min(D.e12.valuation(), D.e21.valuation(), (D.e11 + D.e22).valuation())

    def verify(self, bound=None):
        bound = self.B.ctx.N - SLACK if bound is None else bound
        if self.B.det().is_zero():
            return False
        return self.residual() >= bound

    def to_json(self):
        return {"case": self.case_tag, "target": self.target, "level": self.level,
                "B": self.B.to_json(), "c": self.c.to_json()}


def extension_for_class(label):
    """The quadratic extension of Q_p obtained by adjoining sqrt of a class."""
    return {"S": ExtKind.UNRAMIFIED, "ω": ExtKind.RAMIFIED_P,
            "Sω": ExtKind.RAMIFIED_PS}[label]


def sqrt_in_extension(a):
    """sqrt(a) for a in Q_p, in Q_p itself or in K_a = Q_p(sqrt(a))."""
    a = a.field.ctx.scalar(a) if isinstance(a, PadicScalar) else a
    try:
        return sqrt(a)
    except NonSquare as err:
        K = a.ctx.ext(extension_for_class(err.square_class.label))
        # a / s is a square in Q_p, so sqrt(a) = alpha sqrt(a / s)
        return K.alpha * sqrt(a / K.s)


def fixed_ends(a, ctx):
    """The two ends [1 : +-sqrt(a)] fixed by A = [[0, 1], [a, 0]]."""
    from .bttree import End
    a = ctx.scalar(a)
    if a.is_zero():
        raise ValueError("a must be nonzero")
    r = sqrt_in_extension(a)
    A = Mat2(0, 1, a, 0, field=r.field)
    ends = []
    for sign in (1, -1):
        x = r * sign
        img = A.apply((r.field.one(), x))
        # eigen-check: A (1, x) = x (1, x)
        if not ((img[0] - x).is_zero() and (img[1] - x * x).is_zero()):
            raise AssertionError("fixed end failed the eigen-check")
        ends.append(End.finite(x))
    return tuple(ends)


def conjugator_to_diagonal(a, ctx):
    """C = [[1, -1/sqrt(a)], [sqrt(a), 1]] with C^-1 A C = diag(sqrt a, -sqrt a)."""
    a = ctx.scalar(a)
    if a.is_zero():
        raise ValueError("a must be nonzero")
    r = sqrt_in_extension(a)
    theta = involution_f2(ctx.qp, a)
    C = Mat2(1, -r.inv(), r, 1)
    return ConjugatorCertificate(C, r, "DIAG", "DIAG", theta)


def _is_zero_decided(x):
    if x.is_zero():
        if not x.is_exact:
            raise CaseUndecidable(f"{x!r} is zero only to within precision")
        return True
    return False


def _root_of_rational(E, t):
    """A sigma-fixed c1 with c1^2 = t (t in Q_p), possibly in a tower over E."""
    ctx = E.ctx
    if _is_zero_decided(t):
        return E.zero()
    label = square_class(t).label
    if label == "1":
        return E.coerce(sqrt(t))
    if square_class(t / E.s).label == "1":
        raise NoAdmissibleC(f"sqrt({t.lift()}) is a multiple of alpha, not sigma-fixed")
    return TowerField(E, t).beta


def conjugator_to_sigma(theta, c2=0):
    """Matrix B with A sigma(B) = c B, following the case analysis."""
    if theta.gamma is not Gamma.SIGMA:
        raise ValueError("conjugator_to_sigma needs gamma = sigma")
    E = theta.field
    alpha = E.alpha
    if theta.family == "F1B":
        x = theta.params["x"]
        if _is_zero_decided(x - 1):
            # B = Id; diag(alpha, 1) only works for x = -1
            return _cert(theta, Mat2.identity(E), E.one(), "C1")
        if _is_zero_decided(x + 1):
            return _cert(theta, Mat2.diag(alpha, 1, field=E), E.one(), "C1")
        b = (x.a + 1) / x.b + alpha
        return _cert(theta, Mat2.diag(b, 1, field=E), E.one(), "C2")

    z, y = theta.params["z"], theta.params["y"]
    z1, z2 = z.a, z.b
    c2 = E.ctx.scalar(c2)
    s = E.s
    D = z2 * z2 - c2 * c2
    if not _is_zero_decided(D):
        c1 = _root_of_rational(E, z1 * z1 + y - s * D)
        K = c1.field
        a = K.coerce(alpha)
        inv = (z2 - c2).inv()
        B = Mat2(y * inv, (c1 + z1) * inv + a, (c1 - z1) * inv + a, inv, field=K)
        return _cert(theta, B, c1 + a * c2, "C4", c2)

    if _is_zero_decided(y):
        return _case_y_zero(theta, z)

    c1 = _root_of_rational(E, z1 * z1 + y)
    K = c1.field
    a = K.coerce(alpha)
    if _is_zero_decided(z2):
        B = Mat2(a * (z1 - c1), 1, a, (c1 - z1) / y, field=K)
        return _cert(theta, B, c1, "C5_3", c2)
    if _is_zero_decided(z2 - c2):
        B = Mat2(-(s * (z2 + c2) * (z1 + c1)) / y + a, s * (z2 + c2) + (z1 + c1) + a * (z1 - c1),
                 -(a * (z1 + c1)) / y, 1 + a, field=K)
        return _cert(theta, B, c1 + a * c2, "C5_1", c2)
    # z2 = -c2
    w = z1 + c1
    B = Mat2(1 + a * (2 * z2) / w, w + a * (z1 - c1 + 2 * z2), w.inv(), 1 + a, field=K)
    return _cert(theta, B, c1 + a * c2, "C5_2", c2)


def _case_y_zero(theta, z):
    E = theta.field
    alpha = E.alpha
    # normalise A by -1/sigma(z): A' = [[x, 0], [w, 1]]
    lam = -z.sigma().inv()
    x = z * lam
    w = lam
    c = -z.sigma()
    if not _is_zero_decided(z.a) and not _is_zero_decided(z.b):
        B = Mat2((1 + x.a) / x.b + alpha, 0, alpha * (w.b / x.b), 1, field=E)
        return _cert(theta, B, c, "C5_4a", z.b)
    if _is_zero_decided(z.a):
        B = Mat2(1, 0, alpha * (w.b / 2), 1, field=E)
        return _cert(theta, B, c, "C5_4b", z.b)
    B = Mat2(alpha, alpha, 1 - alpha * (w.a / 2), -1 - alpha * (w.a / 2), field=E)
    return _cert(theta, B, c, "C5_4c", z.b)


def _cert(theta, B, c, tag, c2=None):
    cert = ConjugatorCertificate(B, B.field.coerce(c), tag, "SIGMA", theta, c2)
    if not cert.verify():
        raise AssertionError(f"certificate for {tag} failed its residual check")
    return cert


def conjugator_with_retry(theta, c2_values=range(0, 16)):
    """conjugator_to_sigma, re-choosing c2 while NoAdmissibleC is raised."""
    last = None
    for c2 in c2_values:
        try:
            return conjugator_to_sigma(theta, c2)
        except NoAdmissibleC as err:
            last = err
    raise last


def h_theta_sigma_membership(cert, g, bound=None):
    """True iff B^-1 g B has sigma-fixed entries."""
    if cert.target != "SIGMA":
        raise ValueError("membership needs a certificate with target SIGMA")
    bound = g.ctx.N - SLACK if bound is None else bound
    B = cert.B
    M = B.inv() @ g.lift(B.field) @ B
    return all(negligible(e - e.sigma(), bound) for e in M.entries())


def random_f1a(E, rng, digits=4):
    while True:
        z = random_element(E, rng, digits, 0, 2)
        y = E.ctx.random_scalar(rng, 0, 2, digits) if rng.random() < 0.9 else E.ctx.scalar(0)
        if not (z * z.sigma() + y).is_zero():
            return involution_f1a(E, z, y)


def random_f1b(E, rng, digits=4):
    w = random_element(E, rng, digits, 0, 2)
    return involution_f1b(E, w / w.sigma())


def random_f2(F, rng, digits=4):
    return involution_f2(F, random_element(F, rng, digits, 0, 2))
