"""The Bruhat-Tits tree of SL(2) over Q_p and over E: vertices, ends,
distances, the group action, the subtree T_F inside T_E, hyperbolic data
and orbit invariants of ends.

A vertex is stored in the normal form (k, u): the homothety class of the
lattice spanned by the columns of [[omega^k, u], [0, 1]], with u reduced
modulo omega^k.  k may be negative.  The end that vertices (k, u) approach
as k grows is the column (u, 1).
"""

from __future__ import annotations

import itertools
import math
from collections import deque
from dataclasses import dataclass, field as dc_field
from fractions import Fraction

from .padic import (ExtScalar, NonSquare, PadicScalar, PrecisionExhausted,
                    _split, class_representative, field_of, join, sqrt,
                    square_class)
from .sl2 import SLACK, Mat2, SingularMatrix, negligible


class EigenvalueExtensionRequired(ArithmeticError):
    pass


class ProjectionRadiusExceeded(RuntimeError):
    pass


class InternalInvariantViolation(AssertionError):
    pass


def _frac_mod(q, p, j):
    """Representative of q modulo p^j Z_p: the part of q below p^j."""
    y = q / Fraction(p) ** j
    e, d = _split(y.denominator, p)
    if e == 0:
        return Fraction(0)
    pe = p ** e
    return Fraction(y.numerator * pow(d, -1, pe) % pe, pe) * Fraction(p) ** j


def _reduce_qp(x, j):
    if not x.is_exact and x.absprec() < j:
        raise PrecisionExhausted(f"need {j} digits to reduce, have {x.absprec()}")
    return PadicScalar(x.ctx, exact=_frac_mod(x.lift(), x.ctx.p, j))


def reduce_mod_omega(x, k):
    """u mod omega^k for u in Q_p or E (k any integer)."""
    F = x.field
    if F.depth == 0:
        return _reduce_qp(x, k)
    if F.depth > 1:
        raise NotImplementedError("trees are implemented over Q_p and E only")
    if F.e == 1:
        return F.element(_reduce_qp(x.a, k), _reduce_qp(x.b, k))
    j = k // 2
    if k % 2 == 0:
        return F.element(_reduce_qp(x.a, j), _reduce_qp(x.b, j))
    return F.element(_reduce_qp(x.a, j + 1), _reduce_qp(x.b, j))


def _key_of(x):
    return tuple(c.lift() for c in x.coords())


@dataclass(frozen=True)
class TreeVertex:
    k: int
    key: tuple
    u: object = dc_field(compare=False, hash=False)
    field: object = dc_field(compare=False, hash=False)

    @classmethod
    def make(cls, field, k, u):
        u = reduce_mod_omega(field.coerce(u), k)
        return cls(k, (field.key,) + _key_of(u), u, field)

    @property
    def type_parity(self):
        return self.k % 2

    def matrix(self):
        F = self.field
        return Mat2(F.uniformizer ** self.k, self.u, 0, 1, field=F)

    def neighbours(self):
        F = self.field
        out = [TreeVertex.make(F, self.k - 1, self.u)]
        step = F.uniformizer ** self.k
        for r in residue_representatives(F):
            out.append(TreeVertex.make(F, self.k + 1, self.u + r * step))
        return out

    def __repr__(self):
        coords = ", ".join(str(c) for c in self.key[1:])
        return f"TreeVertex(k={self.k}, u=({coords}))"

    def to_json(self):
        return {"k": self.k, "u": [str(c) for c in self.key[1:]]}


def residue_representatives(F):
    p = F.ctx.p
    if F.depth == 0 or F.e == 2:
        return [F.coerce(r) for r in range(p)]
    return [F.element(a, b) for a in range(p) for b in range(p)]


def base_vertex(F):
    return TreeVertex.make(F, 0, 0)


def canonical_vertex(M):
    """Normal form (k, u mod omega^k) of the lattice spanned by M's columns."""
    F = M.field
    d = M.det()
    if d.is_zero():
        raise SingularMatrix("lattice basis is singular")
    x1, y1, x2, y2 = M.e11, M.e21, M.e12, M.e22
    # pivot on the column whose bottom entry is larger
    if y1.local_valuation() < y2.local_valuation():
        x1, y1, x2, y2 = x2, y2, x1, y1
    if y2.is_zero():
        raise PrecisionExhausted("both bottom entries vanish")
    k = d.local_valuation() - 2 * y2.local_valuation()
    return TreeVertex.make(F, int(k), x2 / y2)


def distance(v1, v2):
    if v1.field != v2.field:
        raise ValueError("vertices of different trees")
    diff = v1.u - v2.u
    m = min(v1.k, v2.k)
    if not diff.is_zero():
        m = min(m, diff.local_valuation())
    return int(v1.k + v2.k - 2 * m)


def elementary_divisor_distance(M1, M2):
    """|v(d1) - v(d2)| for the elementary divisors of M1^-1 M2."""
    X = M1.inv() @ M2
    return int(X.det().local_valuation() - 2 * min(e.local_valuation() for e in X.entries()))


def act_vertex(g, v):
    return canonical_vertex(g.lift(v.field) @ v.matrix())


@dataclass(frozen=True, eq=False)
class End:
    """[1 : x] for finite x, or INF = [0 : 1]."""

    tag: str
    x: object = None

    @classmethod
    def finite(cls, x):
        return cls("FINITE", x)

    @classmethod
    def from_column(cls, top, bottom):
        if top.is_zero():
            if bottom.is_zero():
                raise PrecisionExhausted("both coordinates vanish")
            if not top.is_exact:
                raise PrecisionExhausted("top coordinate is zero only to within precision")
            return INF
        return cls.finite(bottom / top)

    @classmethod
    def ball_point(cls, u):
        """The end approached by the vertices (k, u) as k grows."""
        return cls.from_column(u, u.field.one())

    @property
    def is_inf(self):
        return self.tag == "INF"

    def column(self, F):
        if self.is_inf:
            return (F.zero(), F.one())
        return (F.one(), F.coerce(self.x))

    def ball_coordinate(self):
        """u with column (u, 1); None for the end [1 : 0]."""
        if self.is_inf:
            return 0
        if self.x.is_zero():
            return None
        return self.x.inv()

    def __eq__(self, other):
        if not isinstance(other, End):
            return NotImplemented
        if self.is_inf or other.is_inf:
            return self.is_inf and other.is_inf
        try:
            return (self.x - other.x).is_zero()
        except Exception:
            return False

    __hash__ = None

    def fingerprint(self, A):
        if self.is_inf:
            return ("INF",)
        return ("FIN",) + tuple(_round_frac(c, A) for c in self.x.coords())

    def __repr__(self):
        return "End(INF)" if self.is_inf else f"End([1 : {self.x!r}])"

    def to_json(self):
        return "INF" if self.is_inf else self.x.to_json()


INF = End("INF")


def _round_frac(c, A):
    from .padic import _round_fraction
    return _round_fraction(c.lift(), c.ctx.p, A)


def act_end(g, e):
    F = g.field if e.is_inf else join(g.field, e.x.field)
    top, bottom = g.lift(F).apply(e.column(F))
    return End.from_column(top, bottom)


@dataclass(frozen=True, eq=False)
class HyperbolicData:
    length: int
    attracting: End
    repelling: End
    eigenvalues: tuple

    def axis_vertex(self):
        F = self.eigenvalues[0].field
        a, b = self.attracting.column(F), self.repelling.column(F)
        return canonical_vertex(Mat2(a[0], b[0], a[1], b[1], field=F))


ELLIPTIC = "ELLIPTIC"


def _eigen_end(g, lam):
    a, b, c, d = g.entries()
    v1 = (b, lam - a)
    v2 = (lam - d, c)
    size1 = min(v1[0].valuation(), v1[1].valuation())
    size2 = min(v2[0].valuation(), v2[1].valuation())
    top, bottom = v1 if size1 <= size2 else v2
    return End.from_column(top, bottom)


def hyperbolic_data(g):
    """Translation length and eigen-ends, or ELLIPTIC when v(tr g) >= 0."""
    t = g.trace()
    if t.is_zero() or t.local_valuation() >= 0:
        return ELLIPTIC
    disc = t * t - 4
    try:
        r = sqrt(disc)
    except NonSquare as err:
        raise EigenvalueExtensionRequired(str(err)) from err
    lam1, lam2 = (t + r) / 2, (t - r) / 2
    big, small = (lam1, lam2) if lam1.valuation() < lam2.valuation() else (lam2, lam1)
    return HyperbolicData(int(-2 * t.local_valuation()), _eigen_end(g, big),
                          _eigen_end(g, small), (big, small))


@dataclass(frozen=True)
class OrbitLabel:
    variant: str  # RATIONAL, CLASS, END_ZERO, END_INF
    m: str = None

    def __str__(self):
        return f"CLASS({self.m})" if self.variant == "CLASS" else self.variant


def end_orbit_label_diag(e):
    if e.is_inf:
        return OrbitLabel("END_INF")
    if e.x.is_zero():
        return OrbitLabel("END_ZERO")
    return OrbitLabel("CLASS", square_class(e.x).label)


def transitivity_witness_diag(e1, e2):
    """diag(d^-1, d) carrying [1 : x1] to [1 : x2] = [1 : d^2 x1]."""
    l1, l2 = end_orbit_label_diag(e1), end_orbit_label_diag(e2)
    if l1 != l2 or l1.variant != "CLASS":
        raise ValueError(f"ends carry different labels {l1} and {l2}")
    try:
        d = sqrt(e2.x / e1.x)
    except NonSquare as err:
        raise InternalInvariantViolation("equal labels but non-square ratio") from err
    g = Mat2.diag(d.inv(), d)
    if not act_end(g, e1) == e2:
        raise InternalInvariantViolation("witness does not carry e1 to e2")
    return g


def hilbert_symbol(a, b):
    """(a, b) for a, b in Q_p^*, p odd."""
    ctx = a.ctx
    p = ctx.p
    va, vb = a.valuation(), b.valuation()
    ua, ub = a.unit_residue(), b.unit_residue()
    sign = -1 if (va * vb * ((p - 1) // 2)) % 2 else 1
    leg = lambda u: 1 if ctx.is_qr(u) else -1
    return sign * leg(ua) ** (vb % 2) * leg(ub) ** (va % 2)


def norm_coset_label(w, E):
    """First of 1, omega, S, S omega in the class of w modulo N(E^*)."""
    ctx = E.ctx
    for label in ("1", "ω", "S", "Sω"):
        r = ctx.scalar(class_representative(ctx, label))
        if hilbert_symbol(w / r, E.s) == 1:
            return label
    raise InternalInvariantViolation("no representative found")


def end_orbit_label_slF(e):
    """RATIONAL for ends of the F-subtree, else the norm coset of w2."""
    if e.is_inf or e.x.field.depth == 0 or e.x.in_parent():
        return OrbitLabel("RATIONAL")
    return OrbitLabel("CLASS", norm_coset_label(e.x.b, e.x.field))


def _norm_solution(E, r):
    """y in E with N(y) = r, by a small search; None if r is not a norm."""
    ctx = E.ctx
    s = E.s
    for twist in (E.one(), E.alpha):
        target = r / twist.norm()
        if target.valuation() % 2:
            continue
        j = target.valuation() // 2
        scale = Fraction(ctx.p) ** j
        for b in range(ctx.p):
            rhs = target + s * (b * scale) ** 2
            if rhs.is_zero():
                continue
            try:
                a = sqrt(rhs)
            except NonSquare:
                continue
            return E.element(a, b * scale) * twist
    return None


def _to_infinity_F(e, F):
    # element of SL(2,F) sending e to INF
    if e.is_inf:
        return Mat2.identity(F)
    return Mat2(e.x, -1, 1, 0, field=F)


def _rational_end(e):
    if e.is_inf or e.x.field.depth == 0:
        return e
    return End.finite(e.x.a)


def slF_transport(e1, e2, F=None):
    """g in SL(2,F) with g e1 = e2, for ends with equal SL(2,F)-labels."""
    l1, l2 = end_orbit_label_slF(e1), end_orbit_label_slF(e2)
    if l1 != l2:
        raise ValueError(f"ends carry different labels {l1} and {l2}")
    if l1.variant == "RATIONAL":
        for e in (e1, e2):
            if not e.is_inf:
                F = e.x.field.ancestor(0)
        if F is None:
            raise ValueError("need the base field when both ends are INF")
        r1, r2 = _rational_end(e1), _rational_end(e2)
        return _to_infinity_F(r2, F).inv() @ _to_infinity_F(r1, F)
    E = e1.x.field
    F = E.parent
    m1, m2 = e1.x.b, e2.x.b
    T1 = Mat2(1, 0, -e1.x.a, 1, field=F)
    T2 = Mat2(1, 0, e2.x.a, 1, field=F)
    y = _norm_solution(E, m1 / m2)
    if y is None:
        raise InternalInvariantViolation("equal labels but ratio is not a norm")
    a, b = y.a, y.b / m1
    N = a * a - E.s * b * b * m1 * m1
    G = Mat2(a, b, E.s * b * m1 * m1 / N, a / N, field=F)
    g = T2 @ G @ T1
    if not act_end(g, e1) == e2:
        raise InternalInvariantViolation("transport does not carry e1 to e2")
    return g


def h_theta_witness(a, e1, e2):
    """h = [[x, y], [a y, x]] in H_theta_a with h e1 = e2, or None."""
    F = a.field
    v1, v2 = e1.column(F), e2.column(F)
    P = v1[0] * v2[1] - v1[1] * v2[0]
    Q = a * v1[0] * v2[0] - v1[1] * v2[1]
    n = Q * Q - a * P * P
    if n.is_zero():
        return None
    try:
        r = sqrt(n)
    except NonSquare:
        return None
    x, y = Q / r, P / r
    h = Mat2(x, y, a * y, x)
    if not _same_line(h.apply(v1), v2, F.ctx.N - SLACK):
        return None
    return h


def _same_line(w, v, bound):
    # projective check: normalising h e1 can fail when its top is an inexact zero
    cross = w[0] * v[1] - w[1] * v[0]
    if cross.is_zero():
        return True
    scale = min(x.valuation() for x in w) + min(x.valuation() for x in v)
    return cross.valuation() - scale >= bound


class UnionFind:
    def __init__(self):
        self.parent = []

    def add(self):
        self.parent.append(len(self.parent))
        return len(self.parent) - 1

    def find(self, i):
        while self.parent[i] != i:
            self.parent[i] = self.parent[self.parent[i]]
            i = self.parent[i]
        return i

    def union(self, i, j):
        ri, rj = self.find(i), self.find(j)
        if ri == rj:
            return False
        self.parent[max(ri, rj)] = min(ri, rj)
        return True

    def roots(self):
        return sorted({self.find(i) for i in range(len(self.parent))})


def orbit_experiment(generators, ends, steps, connect=None, precision=None):
    """Union-find closure of `ends` under the generators and their inverses.

    Each round applies every generator to one representative per class and
    merges images with their source; `connect(e1, e2)`, when given, is a
    witness search returning a group element carrying e1 to e2 (or None)
    and is used to merge class representatives.  The class count after
    each round is an upper bound on the number of orbits met by `ends`.
    """
    gens = []
    for g in generators:
        gens.append(g)
        gens.append(g.inv())
    A = precision
    if A is None:
        A = (generators[0].ctx.N if generators else 20) - SLACK
    uf = UnionFind()
    items = []
    index = {}
    skipped = 0

    def intern(e):
        fp = e.fingerprint(A)
        if fp not in index:
            index[fp] = uf.add()
            items.append(e)
        return index[fp]

    for e in ends:
        intern(e)
    history = [len(uf.roots())]
    merges = []
    for _ in range(steps):
        reps = uf.roots()
        for r in reps:
            for g in gens:
                try:
                    img = act_end(g, items[r])
                except PrecisionExhausted:
                    skipped += 1
                    continue
                j = intern(img)
                if uf.union(r, j):
                    merges.append((r, j, "generator"))
        if connect is not None:
            anchors = []
            for r in uf.roots():
                for s in anchors:
                    if connect(items[s], items[r]) is not None:
                        uf.union(s, r)
                        merges.append((s, r, "witness"))
                        break
                else:
                    anchors.append(r)
        history.append(len(uf.roots()))
    return {"class_count": history[-1], "history": history, "merges": merges,
            "skipped": skipped, "size": len(items),
            "representatives": [items[r] for r in uf.roots()]}


def subtree_membership_TF(v):
    """v is a vertex of T_F inside T_E: F-rational u and k divisible by e."""
    if v.field.depth == 0:
        return True
    return v.k % v.field.e == 0 and v.u.b.is_zero()


def on_subtree_realisation(v):
    """v lies on the geometric copy of T_F (midpoints included)."""
    return v.field.depth == 0 or v.u.b.is_zero()


def foot(v):
    """Closest point of the geometric copy of T_F to v (may be a midpoint)."""
    if on_subtree_realisation(v):
        return v
    F = v.field
    delta = int((F.alpha * v.u.b).local_valuation())
    if delta >= v.k:
        return v
    return TreeVertex.make(F, delta, v.u.a)


def project_to_subtree(v, R=12, budget=200000):
    """Nearest T_F member by breadth-first search (ties: smaller k, then key)."""
    if subtree_membership_TF(v):
        return v
    seen = {v}
    frontier = [v]
    for _ in range(R):
        nxt = []
        for w in frontier:
            for n in w.neighbours():
                if n not in seen:
                    seen.add(n)
                    nxt.append(n)
        members = [n for n in nxt if subtree_membership_TF(n)]
        if members:
            return min(members, key=lambda n: (n.k, str(n.key)))
        if len(seen) > budget:
            break
        frontier = nxt
    raise ProjectionRadiusExceeded(f"no T_F vertex within radius {R}")


def ball(v, R):
    """All vertices within distance R of v, as a BFS-ordered list."""
    seen = {v: 0}
    order = [v]
    queue = deque([v])
    while queue:
        w = queue.popleft()
        if seen[w] == R:
            continue
        for n in w.neighbours():
            if n not in seen:
                seen[n] = seen[w] + 1
                order.append(n)
                queue.append(n)
    return order


def tree_dot(F, R=2):
    """DOT text for the ball of radius R about the base vertex.

    Edges of the F-subtree are red, the others blue.
    """
    verts = ball(base_vertex(F), R)
    names = {v: f"v{i}" for i, v in enumerate(verts)}
    lines = ["graph tree {", "  node [shape=point];"]
    for v in verts:
        label = f"{v.k}:{','.join(str(c) for c in v.key[1:])}"
        lines.append(f'  {names[v]} [xlabel="{label}"];')
    done = set()
    for v in verts:
        for n in v.neighbours():
            if n in names and (n, v) not in done:
                done.add((v, n))
                red = on_subtree_realisation(v) and on_subtree_realisation(n)
                lines.append(f"  {names[v]} -- {names[n]} [color={'red' if red else 'blue'}];")
    lines.append("}")
    return "\n".join(lines)
