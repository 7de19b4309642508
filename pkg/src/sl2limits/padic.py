"""Fixed-precision arithmetic for Q_p, quadratic extensions E = Q_p(alpha)
and biquadratic towers K = E(beta) with beta^2 in Q_p.

A PadicScalar is either exact (a rational number, stored as a Fraction) or
approximate: p^v * u with u a unit known modulo p^m.  Approximate values
propagate precision pessimistically, so cancellation shows up as a loss of
known digits instead of as fake digits.  An approximate value whose known
digits are all zero is an "inexact zero": it only carries a lower bound on
its valuation.

Extension elements are pairs over the level below, x = a + gen*b.
"""

from __future__ import annotations

import enum
import math
from dataclasses import dataclass
from fractions import Fraction


class PadicError(ArithmeticError):
    pass


class DivisionByInexactZero(PadicError, ZeroDivisionError):
    """Raised when inverting a value whose known digits are all zero."""


class LevelMismatch(PadicError, TypeError):
    pass


class HenselConditionFailed(PadicError):
    pass


class PrecisionExhausted(PadicError):
    pass


class ZeroHasNoClass(PadicError, ValueError):
    pass


class NonSquare(PadicError, ValueError):
    def __init__(self, value, square_class):
        super().__init__(f"{value} is not a square (class {square_class.label})")
        self.value = value
        self.square_class = square_class


class _ExactZero:
    def __repr__(self):
        return "EXACT_ZERO"


EXACT_ZERO = _ExactZero()


def _split(n, p):
    """Return (k, n / p^k) with p not dividing the second entry."""
    k = 0
    while n % p == 0:
        n //= p
        k += 1
    return k, n


def is_prime(n):
    if n < 2:
        return False
    i = 2
    while i * i <= n:
        if n % i == 0:
            return False
        i += 1
    return True


class PrimeContext:
    """The prime p, the working precision N and the unit non-square S."""

    def __init__(self, p, N=40):
        if not isinstance(p, int) or p < 3 or not is_prime(p):
            raise ValueError(f"p must be an odd prime, got {p!r}")
        if N < 8:
            raise ValueError(f"precision N must be at least 8, got {N}")
        self.p = p
        self.N = N
        self._squares = frozenset(i * i % p for i in range(1, p))
        # smallest positive non-residue, found by exhaustive squaring
        self.S = next(s for s in range(2, p) if s not in self._squares)
        self.qp = QpField(self)
        self._ext = {}

    def __repr__(self):
        return f"PrimeContext(p={self.p}, N={self.N})"

    def is_qr(self, r):
        r %= self.p
        if r == 0:
            raise ValueError("zero residue has no quadratic character")
        return r in self._squares

    def scalar(self, x):
        return self.qp.coerce(x)

    def approx(self, v, u, m):
        return PadicScalar.approx(self, v, u, m)

    def ext(self, kind):
        kind = ExtKind.parse(kind)
        if kind not in self._ext:
            self._ext[kind] = ExtensionDescriptor(self, kind)
        return self._ext[kind]

    # random samplers, all exact so that residuals can be checked exactly

    def random_unit(self, rng, digits=None):
        digits = self.N if digits is None else digits
        while True:
            u = rng.randrange(1, self.p ** digits)
            if u % self.p:
                return u

    def random_scalar(self, rng, vmin=-2, vmax=4, digits=None):
        v = rng.randint(vmin, vmax)
        return self.scalar(Fraction(self.p) ** v * self.random_unit(rng, digits))

    def random_integral(self, rng, digits=None):
        digits = self.N if digits is None else digits
        return self.scalar(rng.randrange(self.p ** digits))


class PadicScalar:
    """An element of Q_p, exact or known to relative precision m."""

    __slots__ = ("ctx", "_exact", "_v", "u", "m")

    def __init__(self, ctx, exact=None, v=None, u=None, m=None):
        self.ctx = ctx
        if exact is not None:
            # the valuation of an exact value is computed on first use;
            # integers stay plain ints, which keeps the common case fast
            t = type(exact)
            if t is not int:
                if t is not Fraction:
                    exact = Fraction(exact)
                if exact.denominator == 1:
                    exact = exact.numerator
            self._exact = exact
            self._v = None
            self.u = None
            self.m = None
        else:
            self._exact = None
            self._v = v
            self.u = u
            self.m = m

    @property
    def v(self):
        if self._v is None:
            x = self._exact
            if x == 0:
                self._v = EXACT_ZERO
            else:
                vn, _ = _split(x.numerator, self.ctx.p)
                vd, _ = _split(x.denominator, self.ctx.p)
                self._v = vn - vd
        return self._v

    @classmethod
    def approx(cls, ctx, v, u, m):
        """p^v * u with u known mod p^m, normalised so u is a unit."""
        return cls._from_digits(ctx, v, u, m)

    @classmethod
    def _from_digits(cls, ctx, w, X, r):
        # value p^w * X where X is known mod p^r
        p = ctx.p
        if r <= 0:
            return cls(ctx, v=w + max(r, 0), u=0, m=0)
        X %= p ** r
        if X == 0:
            return cls(ctx, v=w + r, u=0, m=0)
        t, X = _split(X, p)
        m = r - t
        return cls(ctx, v=w + t, u=X % p ** m, m=m)

    # inspection

    @property
    def field(self):
        return self.ctx.qp

    @property
    def is_exact(self):
        return self._exact is not None

    def is_exact_zero(self):
        return self._exact is not None and self._exact == 0

    def is_zero(self):
        """True when the value is indistinguishable from zero."""
        if self._exact is not None:
            return self._exact == 0
        return self.m == 0

    def valuation(self):
        """v(p) = 1; math.inf for an exact zero, the bound for an inexact one."""
        if self.is_exact_zero():
            return math.inf
        return self.v

    def local_valuation(self):
        return self.valuation()

    def absprec(self):
        if self._exact is not None:
            return math.inf
        return self.v + self.m

    def relprec(self):
        if self._exact is not None:
            return math.inf
        return self.m

    def _unit_mod(self, k):
        # unit part mod p^k; caller guarantees enough digits are known
        pk = self.ctx.p ** k
        if self._exact is not None:
            p = self.ctx.p
            _, n = _split(self._exact.numerator, p)
            _, d = _split(self._exact.denominator, p)
            return n * pow(d, -1, pk) % pk
        return self.u % pk

    def digits(self, w, r):
        """x / p^w mod p^r as an int; needs v(x) >= w and absprec >= w + r."""
        if r <= 0 or self.is_zero():
            if not self.is_exact and self.absprec() < w + r:
                raise PrecisionExhausted("not enough known digits")
            return 0
        if self.v < w:
            raise ValueError(f"valuation {self.v} below requested base {w}")
        if self.absprec() < w + r:
            raise PrecisionExhausted("not enough known digits")
        shift = self.v - w
        if shift >= r:
            return 0
        p = self.ctx.p
        return p ** shift * self._unit_mod(r - shift) % p ** r

    def residue_mod(self, k):
        """x mod p^k for integral x."""
        return self.digits(0, k)

    def unit_residue(self):
        if self.is_zero():
            raise ZeroHasNoClass("zero has no unit part")
        return self._unit_mod(1)

    def lift(self):
        """A rational representative of the value."""
        if self._exact is not None:
            return Fraction(self._exact)
        if self.m == 0:
            return Fraction(0)
        return Fraction(self.ctx.p) ** self.v * self.u

    def exact_lift(self):
        return PadicScalar(self.ctx, exact=self.lift())

    def truncate(self, A):
        """Forget everything beyond absolute precision A."""
        if self.is_exact_zero():
            return PadicScalar(self.ctx, v=A, u=0, m=0)
        if not self.is_exact:
            A = min(A, self.absprec())
        if self.is_zero() or self.v >= A:
            return PadicScalar(self.ctx, v=min(A, self.valuation()), u=0, m=0)
        r = A - self.v
        return PadicScalar(self.ctx, v=self.v, u=self._unit_mod(r), m=r)

    def with_relprec(self, m):
        if self.is_zero():
            return self
        return self.truncate(self.v + m)

    # arithmetic

    def _coerce(self, other):
        if isinstance(other, PadicScalar):
            if other.ctx.p != self.ctx.p:
                raise LevelMismatch("scalars over different primes")
            return other
        if isinstance(other, (int, Fraction)):
            return PadicScalar(self.ctx, exact=other)
        return None

    def __add__(self, other):
        if (type(other) is PadicScalar and other.ctx is self.ctx
                and self._exact is not None and other._exact is not None):
            return PadicScalar(self.ctx, exact=self._exact + other._exact)
        other = self._coerce(other)
        if other is None:
            return NotImplemented
        if self.is_exact and other.is_exact:
            return PadicScalar(self.ctx, exact=self._exact + other._exact)
        if self.is_exact_zero():
            return other
        if other.is_exact_zero():
            return self
        A = min(self.absprec(), other.absprec())
        w = min(self.valuation(), other.valuation())
        if w >= A:
            return PadicScalar(self.ctx, v=A, u=0, m=0)
        r = A - w
        X = self.digits(w, r) + other.digits(w, r)
        return PadicScalar._from_digits(self.ctx, w, X, r)

    __radd__ = __add__

    def __neg__(self):
        if self.is_exact:
            return PadicScalar(self.ctx, exact=-self._exact)
        if self.m == 0:
            return self
        pm = self.ctx.p ** self.m
        return PadicScalar(self.ctx, v=self.v, u=-self.u % pm, m=self.m)

    def __pos__(self):
        return self

    def __sub__(self, other):
        other = self._coerce(other)
        if other is None:
            return NotImplemented
        return self + (-other)

    def __rsub__(self, other):
        other = self._coerce(other)
        if other is None:
            return NotImplemented
        return other + (-self)

    def __mul__(self, other):
        if (type(other) is PadicScalar and other.ctx is self.ctx
                and self._exact is not None and other._exact is not None):
            return PadicScalar(self.ctx, exact=self._exact * other._exact)
        other = self._coerce(other)
        if other is None:
            return NotImplemented
        if self.is_exact and other.is_exact:
            return PadicScalar(self.ctx, exact=self._exact * other._exact)
        if self.is_exact_zero() or other.is_exact_zero():
            return PadicScalar(self.ctx, exact=0)
        if self.is_zero() or other.is_zero():
            return PadicScalar(self.ctx, v=self.valuation() + other.valuation(), u=0, m=0)
        m = min(self.relprec(), other.relprec())
        u = self._unit_mod(m) * other._unit_mod(m)
        return PadicScalar(self.ctx, v=self.v + other.v, u=u % self.ctx.p ** m, m=m)

    __rmul__ = __mul__

    def inv(self):
        if self.is_exact:
            if self._exact == 0:
                raise ZeroDivisionError("inverse of exact zero")
            return PadicScalar(self.ctx, exact=Fraction(1) / self._exact)
        if self.m == 0:
            raise DivisionByInexactZero(f"all known digits of {self!r} are zero")
        pm = self.ctx.p ** self.m
        return PadicScalar(self.ctx, v=-self.v, u=pow(self.u, -1, pm), m=self.m)

    def __truediv__(self, other):
        other = self._coerce(other)
        if other is None:
            return NotImplemented
        return self * other.inv()

    def __rtruediv__(self, other):
        other = self._coerce(other)
        if other is None:
            return NotImplemented
        return other * self.inv()

    def __pow__(self, n):
        return _power(self, n)

    def __eq__(self, other):
        try:
            other = self._coerce(other)
        except LevelMismatch:
            return False
        if other is None:
            return NotImplemented
        return (self - other).is_zero()

    __hash__ = None

    def __repr__(self):
        if self.is_exact:
            return f"PadicScalar({self._exact}, p={self.ctx.p})"
        if self.m == 0:
            return f"O({self.ctx.p}^{self.v})"
        return f"PadicScalar(v={self.v}, u={self.u} mod {self.ctx.p}^{self.m})"

    def to_json(self):
        if self.is_exact:
            return str(self._exact)
        return {"v": self.v, "u": self.u, "m": self.m}

    # field-level operations

    def sigma(self):
        raise LevelMismatch("sigma is not defined on Q_p")

    def norm(self):
        raise LevelMismatch("no level below Q_p")

    def coords(self):
        return [self]

    def square_class(self):
        return square_class(self)

    def sqrt(self):
        return sqrt(self)


def _power(x, n):
    if n < 0:
        return _power(x.inv(), -n)
    result = x.field.one()
    base = x
    while n:
        if n & 1:
            result = result * base
        base = base * base
        n >>= 1
    return result


class ExtKind(enum.Enum):
    UNRAMIFIED = "unram"
    RAMIFIED_P = "ram-p"
    RAMIFIED_PS = "ram-ps"

    @classmethod
    def parse(cls, value):
        if isinstance(value, cls):
            return value
        for kind in cls:
            if value in (kind.value, kind.name):
                return kind
        raise ValueError(f"unknown extension kind {value!r}")


class _Level:
    """Common behaviour of Q_p, E and K."""

    depth = 0
    parent = None

    def __eq__(self, other):
        return self is other or (isinstance(other, _Level) and self.key == other.key)

    def __hash__(self):
        return hash(self.key)

    def ancestor(self, depth):
        f = self
        while f.depth > depth:
            f = f.parent
        return f

    def zero(self):
        return self.coerce(0)

    def one(self):
        return self.coerce(1)


class QpField(_Level):
    e = 1
    name = "QP"

    def __init__(self, ctx):
        self.ctx = ctx
        self.key = ("QP", ctx.p)

    def __repr__(self):
        return f"Q_{self.ctx.p}"

    def coerce(self, x):
        if isinstance(x, PadicScalar):
            if x.ctx.p != self.ctx.p:
                raise LevelMismatch("scalars over different primes")
            return x
        if isinstance(x, (int, Fraction)):
            return PadicScalar(self.ctx, exact=x)
        if isinstance(x, ExtScalar):
            raise LevelMismatch(f"cannot view an element of {x.field} in {self}")
        raise TypeError(f"cannot coerce {type(x).__name__} to {self}")

    @property
    def uniformizer(self):
        return self.coerce(self.ctx.p)


class _ExtLevel(_Level):

    def coerce(self, x):
        if isinstance(x, ExtScalar):
            if x.field is self or x.field == self:
                return x
            if x.field.depth >= self.depth:
                raise LevelMismatch(f"cannot view an element of {x.field} in {self}")
        return ExtScalar(self, self.parent.coerce(x), self.parent.zero())

    def element(self, a, b=0):
        return ExtScalar(self, self.parent.coerce(a), self.parent.coerce(b))

    @property
    def gen(self):
        return self.element(0, 1)


class ExtensionDescriptor(_ExtLevel):
    """E = Q_p(alpha) with alpha^2 = s in {S, p, pS}."""

    depth = 1

    def __init__(self, ctx, kind):
        self.ctx = ctx
        self.kind = ExtKind.parse(kind)
        s = {ExtKind.UNRAMIFIED: ctx.S,
             ExtKind.RAMIFIED_P: ctx.p,
             ExtKind.RAMIFIED_PS: ctx.p * ctx.S}[self.kind]
        self.s = ctx.scalar(s)
        self.e = 1 if self.kind is ExtKind.UNRAMIFIED else 2
        self.parent = ctx.qp
        self.gen_sq = self.s
        self.key = ("E", ctx.p, self.kind)
        self.name = "E"

    def __repr__(self):
        return f"Q_{self.ctx.p}(sqrt({self.s.lift()}))"

    @property
    def alpha(self):
        return self.gen

    @property
    def uniformizer(self):
        if self.e == 1:
            return self.coerce(self.ctx.p)
        return self.alpha


class TowerField(_ExtLevel):
    """K = E(beta) with beta^2 = t in Q_p, t not a square in E."""

    depth = 2

    def __init__(self, E, t):
        self.ctx = E.ctx
        self.parent = E
        self.E = E
        t = E.ctx.scalar(t)
        if not t.is_exact or t.is_zero():
            raise ValueError("tower parameter t must be an exact nonzero rational")
        if is_square(E.coerce(t)):
            raise ValueError(f"t = {t.lift()} is already a square in {E}")
        self.t = t
        self.gen_sq = E.coerce(t)
        odd_t = t.valuation() % 2 == 1
        self.e = 2 if (E.e == 2 or odd_t) else 1
        self.key = ("K", E.key, t.lift())
        self.name = "K"

    def __repr__(self):
        return f"{self.E}(sqrt({self.t.lift()}))"

    @property
    def beta(self):
        return self.gen

    @property
    def uniformizer(self):
        if self.E.e == 2:
            return self.coerce(self.E.alpha)
        if self.e == 1:
            return self.coerce(self.ctx.p)
        j = (self.t.valuation() - 1) // 2
        return self.beta * Fraction(self.ctx.p) ** (-j)


def join(f1, f2):
    """Smallest level containing both f1 and f2 (they must be nested)."""
    if f1 is f2:
        return f1
    if f1.depth < f2.depth:
        f1, f2 = f2, f1
    if f1.ancestor(f2.depth) != f2:
        raise LevelMismatch(f"{f1} and {f2} are not nested")
    return f1


def field_of(x):
    if isinstance(x, (PadicScalar, ExtScalar)):
        return x.field
    return None


def _exact_ext_product(ctx, xa, xb, ya, yb, d):
    # (xa + g xb)(ya + g yb) with g^2 = d over a common denominator, so that
    # each coordinate is normalised once
    an, ad = xa.numerator, xa.denominator
    bn, bd = xb.numerator, xb.denominator
    cn, cd = ya.numerator, ya.denominator
    en, ed = yb.numerator, yb.denominator
    dn, dd = d.numerator, d.denominator
    den = ad * bd * cd * ed
    if den == 1 and dd == 1:
        return (PadicScalar(ctx, exact=an * cn + dn * bn * en),
                PadicScalar(ctx, exact=an * en + bn * cn))
    first = Fraction(an * cn * bd * ed * dd + dn * bn * en * ad * cd, den * dd)
    second = Fraction(an * en * bd * cd + bn * cn * ad * ed, den)
    return PadicScalar(ctx, exact=first), PadicScalar(ctx, exact=second)


def _nd(x):
    if type(x) is int:
        return x, 1
    return x.numerator, x.denominator


def exact_ext_dot(field, xs, ys):
    """sum x*y over a depth-one level, normalising each coordinate once.

    Returns None unless every coordinate is exact.
    """
    parts = []
    for x, y in zip(xs, ys):
        if type(x) is not ExtScalar or type(y) is not ExtScalar \
                or x.field is not field or y.field is not field:
            return None
        for c in (x.a, x.b, y.a, y.b):
            if c._exact is None:
                return None
        parts.append((_nd(x.a._exact), _nd(x.b._exact), _nd(y.a._exact), _nd(y.b._exact)))
    dn_, dd_ = _nd(field.gen_sq._exact)
    fn, fd, sn, sd = 0, 1, 0, 1
    for (an, ad), (bn, bd), (cn, cd), (en, ed) in parts:
        # a c + d b e and a e + b c, accumulated without gcds
        tn, td = an * cn * bd * ed * dd_ + dn_ * bn * en * ad * cd, ad * bd * cd * ed * dd_
        fn, fd = fn * td + tn * fd, fd * td
        tn, td = an * en * bd * cd + bn * cn * ad * ed, ad * bd * cd * ed
        sn, sd = sn * td + tn * sd, sd * td
    ctx = field.ctx
    first = fn if fd == 1 else Fraction(fn, fd)
    second = sn if sd == 1 else Fraction(sn, sd)
    return ExtScalar(field, PadicScalar(ctx, exact=first), PadicScalar(ctx, exact=second))


class ExtScalar:
    """a + gen*b with a, b in the parent level."""

    __slots__ = ("field", "a", "b")

    def __init__(self, field, a, b):
        self.field = field
        self.a = a
        self.b = b

    @property
    def ctx(self):
        return self.field.ctx

    def _pair(self, other):
        if type(other) is ExtScalar and other.field is self.field:
            return self, other
        if isinstance(other, (int, Fraction)):
            return self, self.field.coerce(other)
        if isinstance(other, (PadicScalar, ExtScalar)):
            F = join(self.field, other.field)
            return F.coerce(self), F.coerce(other)
        return None

    def __add__(self, other):
        pair = self._pair(other)
        if pair is None:
            return NotImplemented
        x, y = pair
        return ExtScalar(x.field, x.a + y.a, x.b + y.b)

    __radd__ = __add__

    def __neg__(self):
        return ExtScalar(self.field, -self.a, -self.b)

    def __pos__(self):
        return self

    def __sub__(self, other):
        pair = self._pair(other)
        if pair is None:
            return NotImplemented
        x, y = pair
        return ExtScalar(x.field, x.a - y.a, x.b - y.b)

    def __rsub__(self, other):
        pair = self._pair(other)
        if pair is None:
            return NotImplemented
        x, y = pair
        return ExtScalar(x.field, y.a - x.a, y.b - x.b)

    def __mul__(self, other):
        pair = self._pair(other)
        if pair is None:
            return NotImplemented
        x, y = pair
        d = x.field.gen_sq
        if x.field.depth == 1:
            parts = (x.a._exact, x.b._exact, y.a._exact, y.b._exact, d._exact)
            if all(v is not None for v in parts):
                return ExtScalar(x.field, *_exact_ext_product(x.field.ctx, *parts))
        return ExtScalar(x.field, x.a * y.a + d * (x.b * y.b), x.a * y.b + x.b * y.a)

    __rmul__ = __mul__

    def conj(self):
        """Conjugation over the parent level (gen -> -gen)."""
        return ExtScalar(self.field, self.a, -self.b)

    def norm(self):
        """Relative norm to the parent level: a^2 - gen^2 b^2."""
        return self.a * self.a - self.field.gen_sq * (self.b * self.b)

    def inv(self):
        n = self.norm()
        if n.is_zero():
            if n.is_exact:
                raise ZeroDivisionError("inverse of exact zero")
            raise DivisionByInexactZero(f"norm of {self!r} has no known digits")
        ninv = n.inv()
        return ExtScalar(self.field, self.a * ninv, -(self.b * ninv))

    def __truediv__(self, other):
        pair = self._pair(other)
        if pair is None:
            return NotImplemented
        x, y = pair
        return x * y.inv()

    def __rtruediv__(self, other):
        pair = self._pair(other)
        if pair is None:
            return NotImplemented
        x, y = pair
        return y * x.inv()

    def __pow__(self, n):
        return _power(self, n)

    def sigma(self):
        if self.field.depth == 1:
            return ExtScalar(self.field, self.a, -self.b)
        return ExtScalar(self.field, self.a.sigma(), self.b.sigma())

    def is_zero(self):
        return self.a.is_zero() and self.b.is_zero()

    def is_exact_zero(self):
        return self.a.is_exact_zero() and self.b.is_exact_zero()

    @property
    def is_exact(self):
        return self.a.is_exact and self.b.is_exact

    def in_parent(self):
        """True when the gen-part is indistinguishable from zero."""
        return self.b.is_zero()

    def valuation(self):
        """Rational valuation with v(p) = 1."""
        if self.is_exact_zero():
            return math.inf
        if self.field.depth == 1:
            return min(self.a.valuation(), self.b.valuation() + self._half())
        return Fraction(self.norm().valuation()) / 2

    def local_valuation(self):
        v = self.valuation()
        if v == math.inf:
            return v
        w = v * self.field.e
        return int(w) if Fraction(w).denominator == 1 else w

    def _half(self):
        # valuation of the generator
        if self.field.depth == 1:
            return Fraction(self.field.s.valuation(), 2)
        return Fraction(self.field.t.valuation(), 2)

    def absprec(self):
        return min(self.a.absprec(), self.b.absprec() + self._half())

    def coords(self):
        return self.a.coords() + self.b.coords()

    def exact_lift(self):
        return ExtScalar(self.field, self.a.exact_lift(), self.b.exact_lift())

    def truncate(self, A):
        return ExtScalar(self.field, self.a.truncate(A), self.b.truncate(A))

    def __eq__(self, other):
        try:
            pair = self._pair(other)
        except LevelMismatch:
            return False
        if pair is None:
            return NotImplemented
        x, y = pair
        return (x - y).is_zero()

    __hash__ = None

    def __repr__(self):
        g = {1: "alpha", 2: "beta"}[self.field.depth]
        return f"({self.a!r} + {g}*{self.b!r})"

    def to_json(self):
        return [self.a.to_json(), self.b.to_json()]

    def square_class(self):
        return square_class(self)

    def sqrt(self):
        return sqrt(self)


@dataclass(frozen=True)
class SquareClass:
    vparity: int
    unitclass: str  # "QR" or "NQR"

    @property
    def label(self):
        return {(0, "QR"): "1", (1, "QR"): "ω",
                (0, "NQR"): "S", (1, "NQR"): "Sω"}[(self.vparity, self.unitclass)]

    def __str__(self):
        return self.label


SQUARE_CLASS_LABELS = ("1", "ω", "S", "Sω")


def class_representative(ctx, label):
    """The rational representative of a Q_p square class: 1, p, S or Sp."""
    return {"1": 1, "ω": ctx.p, "S": ctx.S, "Sω": ctx.S * ctx.p}[label]


def _unit_part(x):
    """(k, y) with x = omega^k * y and y a unit, at levels Q_p and E."""
    F = x.field
    if F.depth > 1:
        raise NotImplementedError("unit decomposition is only implemented for Q_p and E")
    if x.is_zero():
        raise ZeroHasNoClass("zero has no square class")
    k = x.local_valuation()
    return k, x * F.uniformizer ** (-k)


def _unit_is_square(y):
    ctx = y.ctx
    if isinstance(y, PadicScalar):
        return ctx.is_qr(y.unit_residue())
    if y.field.e == 1:
        # a unit of F_{p^2} is a square iff its norm to F_p is
        return ctx.is_qr(y.norm().residue_mod(1))
    return ctx.is_qr(y.a.residue_mod(1))


def square_class(x):
    """Class of x in F*/F*^2 for F = Q_p or E."""
    k, y = _unit_part(x)
    return SquareClass(int(k % 2), "QR" if _unit_is_square(y) else "NQR")


def is_square(x):
    return square_class(x).label == "1"


def _horner(coeffs, x):
    acc = coeffs[-1]
    for c in reversed(coeffs[:-1]):
        acc = acc * x + c
    return acc


def _derivative(coeffs):
    return [c * i for i, c in enumerate(coeffs)][1:] or [coeffs[0] * 0]


def _round_fraction(q, p, A):
    """Nearest representative of q mod p^A with a bounded numerator."""
    if q == 0:
        return Fraction(0)
    vn, n = _split(q.numerator, p)
    vd, d = _split(q.denominator, p)
    v = vn - vd
    if v >= A:
        return Fraction(0)
    r = A - v
    return Fraction(p) ** v * (n * pow(d, -1, p ** r) % p ** r)


def _round(x, A):
    if isinstance(x, PadicScalar):
        return PadicScalar(x.ctx, exact=_round_fraction(x.lift(), x.ctx.p, A))
    return ExtScalar(x.field, _round(x.a, A), _round(x.b, A))


def hensel_root(coeffs, start, N=None):
    """Root of sum(coeffs[i] X^i) near `start`, by Newton iteration.

    Requires integral coefficients and |f(a)| < |f'(a)|^2.  The root is
    returned to relative precision N (default ctx.N); an exact start that
    is already a root comes back unchanged.
    """
    F = field_of(start)
    for c in coeffs:
        f = field_of(c)
        if f is not None:
            F = f if F is None else join(F, f)
    if F is None:
        raise TypeError("need at least one p-adic value to fix the level")
    cs = [F.coerce(c) for c in coeffs]
    a = F.coerce(start)
    ctx = F.ctx
    N = ctx.N if N is None else N
    if any(c.valuation() < 0 for c in cs) or a.valuation() < 0:
        raise ValueError("hensel_root needs integral coefficients and start")
    fa = _horner(cs, a)
    if fa.is_exact_zero():
        return a
    dcs = _derivative(cs)
    fpa = _horner(dcs, a)
    if fpa.is_zero():
        raise HenselConditionFailed("f'(a) vanishes")
    k = fpa.valuation()
    if not fa.valuation() > 2 * k:
        raise HenselConditionFailed(
            f"|f(a)| < |f'(a)|^2 fails: v(f(a)) = {fa.valuation()}, v(f'(a)) = {k}")
    W = N + 2 * math.ceil(k) + 4
    ecs = [c.exact_lift() for c in cs]
    edcs = _derivative(ecs)
    x = a.exact_lift()
    for _ in range(4 * W):
        fx = _horner(ecs, x)
        if fx.valuation() >= W:
            break
        x = _round(x - fx / _horner(edcs, x), W)
    else:
        raise PrecisionExhausted("Newton iteration did not stabilise")
    coef_prec = min(c.absprec() for c in cs)
    vx = x.valuation()
    target = (vx if vx != math.inf else 0) + N
    out = min(target, coef_prec - k)
    if out < min(4, N // 2):
        raise PrecisionExhausted(f"only {out} digits of the root are determined")
    root = x.truncate(math.floor(out))
    if not _horner(cs, root).is_zero():
        raise PrecisionExhausted("root does not survive truncation")
    return root


def _residue_sqrt_qp(ctx, r):
    r %= ctx.p
    for c in range(1, (ctx.p - 1) // 2 + 1):
        if c * c % ctx.p == r:
            return c
    raise AssertionError("caller checked the residue is a square")


def sqrt(x):
    """Square root with the canonical branch (unit residue in [1, (p-1)/2]).

    Raises NonSquare carrying the square class when no root exists.
    """
    F = x.field
    if F.depth > 1:
        raise NotImplementedError("square roots are implemented for Q_p and E only")
    if x.is_zero():
        raise ValueError("sqrt needs a nonzero argument")
    cls = square_class(x)
    if cls.label != "1":
        raise NonSquare(x, cls)
    k, y = _unit_part(x)
    ctx = F.ctx
    if F.depth == 0:
        start = _residue_sqrt_qp(ctx, y.unit_residue())
    elif F.e == 2:
        start = F.element(_residue_sqrt_qp(ctx, y.a.residue_mod(1)))
    else:
        start = _residue_sqrt_unram(F, y)
    r = hensel_root([-y, 0, 1], start, N=ctx.N)
    return r * F.uniformizer ** (k // 2)


def _residue_sqrt_unram(E, y):
    p = E.ctx.p
    a0, b0 = y.a.residue_mod(1), y.b.residue_mod(1)
    s = E.ctx.S
    for c1 in range(p):
        for c2 in range(p):
            if (c1 * c1 + s * c2 * c2 - a0) % p == 0 and (2 * c1 * c2 - b0) % p == 0:
                # canonical branch: first nonzero coordinate in [1, (p-1)/2]
                lead = c1 if c1 else c2
                if 1 <= lead <= (p - 1) // 2:
                    return E.element(c1, c2)
    raise AssertionError("caller checked the residue is a square")
