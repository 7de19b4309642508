"""Chabauty-limit experiments for SL(2,F) inside SL(2,E) and for the
fixed groups H_theta_a inside SL(2,F).

Everything here measures convergence through valuation defects: a
sequence converges to a limit element when the entrywise difference has
valuation growing without bound.  All defects are local valuations, i.e.
counted in powers of the uniformizer of the level they live on.
"""

from __future__ import annotations

import enum
import math
import random
import statistics
from dataclasses import dataclass, field as dc_field

from .bttree import (End, TreeVertex, act_vertex, base_vertex, canonical_vertex,
                     distance, end_orbit_label_slF, foot, slF_transport)
from .padic import (ExtKind, HenselConditionFailed, PrecisionExhausted, PrimeContext,
                    class_representative, hensel_root, sqrt, square_class)
from .sl2 import SLACK, Mat2


def _lv(x):
    """Local valuation; the known bound for an inexact zero."""
    return x.local_valuation()


def _cap(ctx, F):
    # local precision below which a defect is meaningful
    return F.e * (ctx.N - SLACK)


# rotation of SL(2,F) inside SL(2,E)

class RotationContext:
    """M_rot = [[(2 alpha)^-1, 1], [0, 2 alpha]] . [[1, 0], [alpha, 1]]."""

    def __init__(self, E):
        self.E = E
        a = E.alpha
        self.first = Mat2(1, 0, a, 1)
        self.second = Mat2((2 * a).inv(), 1, 0, 2 * a)
        self.M = self.second @ self.first
        self.M_inv = Mat2(2 * a, -1, -2 * a * a, a + (2 * a).inv())
        self.x0 = base_vertex(E)
        self._check()

    def _check(self):
        a = self.E.alpha
        if not (self.M @ self.M_inv - Mat2.identity(self.E)).is_zero():
            raise AssertionError("closed-form inverse of M_rot is wrong")
        top, bottom = self.first.apply((1, 0))
        if not (bottom - a * top).is_zero():
            raise AssertionError("first factor does not send [1:0] to [1:alpha]")
        top, bottom = self.second.apply((0, 1))
        if not (bottom - 2 * a * top).is_zero():
            raise AssertionError("second factor does not send [0:1] to [1:2 alpha]")


def rotated_closed_form(h, alpha):
    """Entries of M_rot h M_rot^-1 written out in a, b, c, d and alpha."""
    a, b, c, d = (alpha.field.coerce(x) for x in h.entries())
    q = (2 * alpha).inv() + alpha
    al2 = alpha * alpha
    e11 = a + 2 * a * al2 - 2 * d * al2 + alpha * (2 * c - b - 2 * b * al2)
    e12 = q * (b * q + d - a) - c
    e21 = 4 * c * al2 - 4 * b * al2 * al2 + alpha * (4 * a * al2 - 4 * d * al2)
    e22 = -2 * a * al2 + 2 * d * al2 + d + alpha * (b + 2 * b * al2 - 2 * c)
    return Mat2(e11, e12, e21, e22)


def rotated_subgroup_element(h, rot):
    if not isinstance(rot, RotationContext):
        rot = RotationContext(rot)
    return rot.M @ h.lift(rot.E) @ rot.M_inv


def conjugate_by_diag_power(g, n, level=None):
    """diag(w^n, w^-n) g diag(w^-n, w^n) for the uniformizer w of `level`."""
    F = g.field if level is None else level
    g = g.lift(F)
    w2n = F.uniformizer ** (2 * n) if n >= 0 else (F.uniformizer ** (-2 * n)).inv()
    out = Mat2(g.e11, g.e12 * w2n, g.e21 / w2n, g.e22, field=F)
    for e in out.entries():
        if not e.is_exact and e.absprec() <= 0 and e.is_zero():
            raise PrecisionExhausted(f"conjugation by the {n}-th power lost every digit")
    return out


def weyl_flip(g):
    """w g w^-1 with w = [[0, 1], [-1, 0]]: lower triangular to upper."""
    return Mat2(g.e22, -g.e21, -g.e12, g.e11, field=g.field)


# limit groups

class Shape(enum.Enum):
    LOWER_TRIANGULAR_NORM1 = "lower-norm1"
    UNIPOTENT_MU2 = "unipotent-mu2"
    CONJUGATE_OF_H = "conjugate-of-h"


@dataclass(frozen=True, eq=False)
class LimitGroupDescriptor:
    shape: Shape
    field: object = None
    witness: Mat2 = None

    def to_json(self):
        out = {"shape": self.shape.value}
        if self.witness is not None:
            out["witness"] = self.witness.to_json()
        return out


def limit_membership_defect(g, L):
    """Least local valuation among the algebraic conditions defining L."""
    if L.shape is Shape.LOWER_TRIANGULAR_NORM1:
        F = L.field or g.field
        g = g.lift(F)
        # the norm lives in Q_p, so rescale its valuation to E-units
        return min(_lv(g.e12), _lv(g.e22 - g.e11.sigma()), F.e * (g.e11.norm() - 1).valuation())
    if L.shape is Shape.UNIPOTENT_MU2:
        best = -math.inf
        for s in (1, -1):
            best = max(best, min(_lv(g.e12), _lv(g.e11 - s), _lv(g.e22 - s)))
        return best
    W = L.witness.lift(g.field) if g.field.depth > L.witness.field.depth else L.witness
    X = W.inv() @ g.lift(W.field) @ W
    return min(_lv(e - e.sigma()) for e in X.entries())


def is_member(g, L):
    F = L.field or g.field
    return limit_membership_defect(g, L) >= _cap(g.ctx, F)


# Hensel-lifted sequences

@dataclass(frozen=True, eq=False)
class LimitTarget:
    """The element [[a - alpha b, 0], [4 alpha^2 C, a + alpha b]] with a^2 - s b^2 = 1."""

    E: object
    C: object
    b: object
    a: object = None
    sign: int = 1

    def __post_init__(self):
        E = self.E
        object.__setattr__(self, "C", E.coerce(self.C))
        object.__setattr__(self, "b", E.ctx.scalar(self.b))
        if self.a is None:
            a = hensel_root([-(1 + E.s * self.b * self.b), 0, 1], self.sign)
        else:
            a = E.ctx.scalar(self.a)
            if not (a * a - E.s * self.b * self.b - 1).is_zero():
                raise ValueError("a^2 - s b^2 must equal 1")
        object.__setattr__(self, "a", a)

    @property
    def z(self):
        return 4 * self.E.s * self.C

    def element(self):
        E, a, b = self.E, self.a, self.b
        al = E.alpha
        return Mat2(a - al * b, 0, self.z, a + al * b, field=E)

    def to_json(self):
        return {"C": self.C.to_json(), "b": self.b.to_json(), "a": self.a.to_json(),
                "z": self.z.to_json()}


def _omega_sq_power(E, n):
    # omega_E^(2n) as an element of Q_p
    return (E.uniformizer ** 2).a ** n


def _hensel(coeffs, start):
    try:
        return hensel_root(coeffs, start)
    except ValueError as err:
        raise HenselConditionFailed(str(err)) from err


def limit_sequence_for_target(target, n):
    """h_n in SL(2,F) whose rotated conjugates converge to target.element()."""
    E = target.E
    w = _omega_sq_power(E, n)
    C1, C2, b = target.C.a, target.C.b, target.b
    s = E.s
    d = _hensel([-(s * b * b) - w * C1 * b - 1, w * C2, 1], target.a.exact_lift())
    a_n = d + w * C2
    c_n = b * s + w * C1
    return Mat2(a_n, b, c_n, d)


def htheta_limit_sequence(a, z, sign, n):
    """[[x_n, y_n], [a y_n, x_n]] with y_n = (z / a) p^(2n) and x_n = +-1 mod p."""
    F = a.field
    a = F.coerce(a)
    z = F.coerce(z)
    p = F.ctx.p
    y = z / a * F.coerce(p) ** (2 * n)
    if not y.is_zero() and y.valuation() < 1:
        raise HenselConditionFailed(f"y_n = {y.lift()} is not in pO for n = {n}")
    start = 1 if sign > 0 else p - 1
    x = _hensel([-1 - a * y * y, 0, 1], start)
    return Mat2(x, y, a * y, x)


# convergence reports

@dataclass
class ConvergenceReport:
    records: list
    slope: float = None
    intercept: float = None
    c: float = None
    monotone: bool = True
    skipped: list = dc_field(default_factory=list)
    precision: int = None
    matrices: list = dc_field(default_factory=list, repr=False)

    @property
    def fitted(self):
        return [r for r in self.records
                if r["target_defect"] is not None and r["target_defect"] < self.precision]

    def slope_within(self, lo=1.8, hi=2.2):
        return self.slope is not None and lo <= self.slope <= hi

    def to_json(self):
        return {"records": self.records, "slope": self.slope, "intercept": self.intercept,
                "c": self.c, "monotone": self.monotone, "skipped": self.skipped,
                "precision": self.precision}


def _num(v):
    return None if v == math.inf else float(v)


def verify_convergence(recipe, n_range, L, target=None, rotation=None, level=None,
                       nominal_rate=2):
    """Conjugate recipe(n) by the n-th diagonal power and record defects.

    With `rotation` the element is first moved into SL(2,E) by M_rot.  The
    slope is a least-squares fit of the target defect against n over the
    records below the precision cap; c is the least constant with
    defect >= nominal_rate * n - c on those records.
    """
    records, skipped, mats = [], [], []
    cap = None
    for n in n_range:
        try:
            h = recipe(n)
        except HenselConditionFailed as err:
            skipped.append({"n": n, "reason": str(err)})
            continue
        g = rotated_subgroup_element(h, rotation) if rotation is not None else h
        F = level or g.field
        g = conjugate_by_diag_power(g, n, F)
        cap = _cap(g.ctx, F)
        T = target if target is not None else Mat2.identity(F)
        mats.append(g)
        records.append({
            "n": n,
            "matrix": g.to_json(),
            "L_defect": limit_membership_defect(g, L),
            "target_defect": min((g - T.lift(F)).entries(), key=_lv).local_valuation(),
            "sl_defect": _lv(g.det() - 1),
        })
    report = ConvergenceReport(records, skipped=skipped, precision=cap, matrices=mats)
    live = report.fitted
    for r0, r1 in zip(live, live[1:]):
        if r1["n"] == r0["n"] + 1 and r1["target_defect"] < r0["target_defect"] + 1:
            report.monotone = False
    if len(live) >= 2:
        xs = [r["n"] for r in live]
        ys = [float(r["target_defect"]) for r in live]
        fit = statistics.linear_regression(xs, ys)
        report.slope, report.intercept = fit.slope, fit.intercept
    if live:
        report.c = float(max(nominal_rate * r["n"] - r["target_defect"] for r in live))
    for r in records:
        for key in ("L_defect", "target_defect", "sl_defect"):
            r[key] = _num(r[key])
    return report


def target_grid(E):
    """3 points of the norm-one curve times 9 values of C (27 targets)."""
    p = E.ctx.p
    curve = [(0, 1), (p, 1), (2 * p, -1)]
    grid = []
    for b, sign in curve:
        for c1 in (1, 2, 3):
            for c2 in (0, 1, p):
                grid.append(LimitTarget(E, E.element(c1, c2), b, sign=sign))
    return grid


def condition2_sweep(E, rng, samples, n_range, c, R=0, digits=6):
    """Random h_n with bounded conjugates; every defect to L must be >= 2n - c.

    h_n = [[d + w C2, b], [b s + w C1, d]] with w = omega_E^(2n), C of
    valuation >= -R and b in pO_F is the general element whose rotated
    conjugate has bounded entries; d is either root of the determinant
    equation.
    """
    ctx = E.ctx
    L = LimitGroupDescriptor(Shape.LOWER_TRIANGULAR_NORM1, E)
    rot = RotationContext(E)
    n_list = list(n_range)
    worst, violations, tried = math.inf, [], 0
    for _ in range(samples):
        n = rng.choice(n_list)
        b = ctx.random_scalar(rng, 1, 3, digits) if rng.random() < 0.8 else ctx.scalar(0)
        C1 = ctx.random_scalar(rng, -R, 2, digits)
        C2 = ctx.random_scalar(rng, -R, 2, digits) if rng.random() < 0.8 else ctx.scalar(0)
        w = _omega_sq_power(E, n)
        beta = w * C2
        gamma = E.s * b * b + w * C1 * b + 1
        disc = beta * beta + 4 * gamma
        try:
            r = sqrt(disc)
        except ArithmeticError:
            continue
        d = (-beta + (r if rng.random() < 0.5 else -r)) / 2
        h = Mat2(d + beta, b, b * E.s + w * C1, d)
        g = conjugate_by_diag_power(rotated_subgroup_element(h, rot), n, E)
        defect = limit_membership_defect(g, L)
        tried += 1
        worst = min(worst, defect - 2 * n)
        if defect < 2 * n - c:
            violations.append({"n": n, "defect": float(defect), "b": b.to_json(),
                               "C": [C1.to_json(), C2.to_json()]})
    return {"samples": tried, "violations": violations,
            "min_excess": None if worst == math.inf else float(worst), "c": c}


def padic_limit_experiment(p, kind, N=40, n_max=10, sweep=100, seed=0, limit=None):
    """Limit sequences over the target grid plus the condition-2 sweep."""
    guard = 2 * n_max + 8
    ctx = PrimeContext(p, N + guard)
    E = ctx.ext(kind)
    rot = RotationContext(E)
    L = LimitGroupDescriptor(Shape.LOWER_TRIANGULAR_NORM1, E)
    reports = []
    for t in target_grid(E)[:limit]:
        rep = verify_convergence(lambda n, t=t: limit_sequence_for_target(t, n),
                                 range(1, n_max + 1), L, t.element(), rot, E)
        reports.append((t, rep))
    cs = [rep.c for _, rep in reports if rep.c is not None]
    # one constant for the whole experiment, covering both defects
    cL = [2 * r["n"] - r["L_defect"] for _, rep in reports for r in rep.records
          if r["L_defect"] is not None and r["L_defect"] < rep.precision]
    c = max(cs + cL) if (cs or cL) else 0.0
    sw = condition2_sweep(E, random.Random(seed), sweep, range(1, n_max + 1), c)
    return {"p": p, "kind": ExtKind.parse(kind).value, "N": N, "c": c,
            "targets": [{"target": t.to_json(), "slope": rep.slope,
                         "monotone": rep.monotone, "c": rep.c,
                         "skipped": len(rep.skipped)} for t, rep in reports],
            "reports": reports, "sweep": sw}


def htheta_limit_experiment(p, N=40, n_max=10, z=1):
    """H_theta_a sequences for every square class a and both signs."""
    guard = 4 * n_max + 8
    ctx = PrimeContext(p, N + guard)
    F = ctx.qp
    L = LimitGroupDescriptor(Shape.UNIPOTENT_MU2, F)
    out = []
    for label in ("1", "S", "ω", "Sω"):
        a = ctx.scalar(class_representative(ctx, label))
        for sign in (1, -1):
            T = Mat2(sign, 0, z, sign, field=F)
            rep = verify_convergence(lambda n, a=a, sign=sign: htheta_limit_sequence(a, z, sign, n),
                                     range(1, n_max + 1), L, T, None, F)
            diag_ok = all(_is_sign(g, sign) for g in rep.matrices)
            out.append({"a": label, "sign": sign, "report": rep, "slope": rep.slope,
                        "mu2": diag_ok})
    return out


def _is_sign(g, sign):
    return all(_lv(x - sign) >= 1 for x in (g.e11, g.e22))


# polar decomposition

class DecompositionSearchExhausted(RuntimeError):
    def __init__(self, message, state=None):
        super().__init__(message)
        self.state = state


@dataclass(frozen=True, eq=False)
class PolarDecomposition:
    k: Mat2
    i: str
    n: int
    h: Mat2
    pair: str
    a: Mat2 = None
    displacement: int = 0
    diameter: int = 1

    def reconstruct(self):
        if self.a is None or self.n == 0:
            return self.k @ self.h.lift(self.k.field)
        an = _mat_power(self.a, self.n)
        return self.k @ an @ self.h.lift(self.k.field)

    def to_json(self):
        return {"pair": self.pair, "i": self.i, "n": self.n, "k": self.k.to_json(),
                "h": self.h.to_json(), "displacement": self.displacement,
                "diameter": self.diameter}


def _mat_power(A, n):
    if n < 0:
        A, n = A.inv(), -n
    out = Mat2.identity(A.field)
    for _ in range(n):
        out = out @ A
    return out


def _exact(M):
    """Exact representative of M, with the determinant restored to 1."""
    e11, e12, e21, e22 = (e.exact_lift() for e in M.entries())
    if e11.is_zero() or (not e22.is_zero() and _lv(e22) < _lv(e11)):
        e11 = (1 + e12 * e21) / e22
    else:
        e22 = (1 + e12 * e21) / e11
    return Mat2(e11, e12, e21, e22, field=M.field)


def _hyperbolic_along(u, w):
    """Q diag(w, w^-1) Q^-1, Q = [[1, u], [0, 1]]: translation length 2 on the
    line through the vertices (j, u), attracting end [u : 1]."""
    Q = Mat2(1, u, 0, 1, field=u.field)
    return Q @ Mat2.diag(w, w.inv(), field=u.field) @ Q.inv()


class _PolarPair:
    name = ""
    diameter = 1

    def prepare(self, g):
        return g

    def finish(self, k, a, h):
        return k, a, h


class PairEF(_PolarPair):
    """(SL(2,E), SL(2,F)) with F = Q_p; T_H is the copy of T_F in T_E."""

    def __init__(self, E):
        self.E = E
        self.name = "SL2E/SL2F"
        self.diameter = E.e
        self.x0 = base_vertex(E)
        ctx = E.ctx
        al = E.alpha
        second = al * ctx.p if E.e == 1 else al * ctx.S
        self.reps = {}
        for u in (al, second):
            label = str(end_orbit_label_slF(End.from_column(u, E.one())))
            xi = foot(TreeVertex.make(E, 4, u))
            self.reps[label] = (u, xi, _hyperbolic_along(u, E.uniformizer))

    def project(self, w):
        y = foot(w)
        return y, distance(w, y)

    def to_fundamental(self, y):
        E = self.E
        p = E.ctx.p
        u = y.u.a
        W = Mat2(0, 1, -1, 0, field=E)

        def upper(j):
            # [[p^j, u], [0, 1]] scaled into SL(2,F), j even
            q = E.coerce(p) ** (j // 2) if j >= 0 else (E.coerce(p) ** (-j // 2)).inv()
            return Mat2(q, u / q, 0, q.inv(), field=E)

        if y.k % E.e == 0:
            kF = y.k // E.e
            return upper(kF if kF % 2 == 0 else kF - 1).inv()
        k0 = (y.k - 1) // 2
        if k0 % 2 == 0:
            return upper(k0).inv()
        return W @ upper(k0 + 1).inv()

    def in_V(self, v):
        return v.u.is_zero() and 0 <= v.k <= self.diameter

    def label(self, u):
        return str(end_orbit_label_slF(End.from_column(u, self.E.one())))

    def transport(self, u, label):
        E = self.E
        u_i = self.reps[label][0]
        h = slF_transport(End.from_column(u, E.one()), End.from_column(u_i, E.one()))
        return _exact(h)


class PairFHtheta1(_PolarPair):
    """(SL(2,F), H_theta_1) handled through C1^-1 H_theta_1 C1 = Diag(2,F)."""

    def __init__(self, ctx):
        F = ctx.qp
        self.F = F
        self.name = "SL2F/H_theta1"
        self.diameter = 1
        self.x0 = base_vertex(F)
        self.C1 = Mat2(1, -1, 1, 1, field=F)
        self.C1_inv = self.C1.inv()
        self.reps = {}
        for label in ("1", "S", "ω", "Sω"):
            m = F.coerce(class_representative(ctx, label))
            xi = TreeVertex.make(F, int(m.valuation()), 0)
            self.reps[label] = (m, xi, _hyperbolic_along(m, F.uniformizer))

    def prepare(self, g):
        return self.C1_inv @ g @ self.C1

    def finish(self, k, a, h):
        C, Ci = self.C1, self.C1_inv
        return C @ k @ Ci, (C @ a @ Ci if a is not None else None), C @ h @ Ci

    def project(self, w):
        if w.u.is_zero():
            return w, 0
        d = int(w.u.valuation())
        return TreeVertex.make(self.F, d, 0), w.k - d

    def to_fundamental(self, y):
        F = self.F
        j = y.k // 2
        q = F.coerce(F.ctx.p) ** j if j >= 0 else (F.coerce(F.ctx.p) ** (-j)).inv()
        return Mat2.diag(q.inv(), q, field=F)

    def in_V(self, v):
        return v.u.is_zero() and 0 <= v.k <= 1

    def label(self, u):
        return square_class(u).label

    def transport(self, u, label):
        m = self.reps[label][0]
        t = sqrt(m / u).exact_lift()
        return Mat2.diag(t, t.inv(), field=self.F)


def polar_pair(pair, field):
    """PairEF for "SL2E/SL2F" (field = E), PairFHtheta1 for "SL2F/H_theta1"."""
    if pair in ("SL2E/SL2F", "E/F"):
        return PairEF(field)
    if pair in ("SL2F/H_theta1", "F/H1"):
        ctx = field.ctx if hasattr(field, "ctx") else field
        return PairFHtheta1(ctx)
    raise ValueError(f"unsupported pair {pair!r}")


def polar_decompose(g, pair):
    """g = k a_i^n h with h in H and k moving the base vertex inside V."""
    P = pair
    g0 = g
    gx = Mat2(*(e.exact_lift() for e in g.entries()), field=g.field)
    gp = P.prepare(gx)
    F = gp.field
    w = canonical_vertex(gp.inv())
    y, t = P.project(w)
    h1 = P.to_fundamental(y)
    y1 = act_vertex(h1, y)
    if not P.in_V(y1):
        raise DecompositionSearchExhausted("foot not carried into V", {"foot": y1.to_json()})
    if t == 0:
        k = gp @ h1.inv()
        label, n, a, hh = None, 0, None, h1
    else:
        w1 = act_vertex(h1, w)
        step = F.uniformizer ** w1.k
        ray = None
        for c in (0, 1, 2):
            cand = w1.u + step * c
            if distance(TreeVertex.make(F, w1.k + 1, cand), y1) == t + 1:
                ray = cand
                break
        if ray is None:
            raise DecompositionSearchExhausted("no ray leaving the subtree", {"t": t})
        label = P.label(ray)
        u_i, x_i, a = P.reps[label]
        h2 = P.transport(ray, label)
        hh = h2 @ h1
        w2 = act_vertex(hh, w)
        j = w2.k
        if (j - x_i.k) != t or j % 2:
            raise DecompositionSearchExhausted("transported vertex is off the ray",
                                               {"vertex": w2.to_json(), "t": t})
        n = j // 2
        k = gp @ hh.inv() @ _mat_power(a, n)
        n = -n
    k, a, hh = P.finish(k, a, hh)
    x0 = base_vertex(k.field)
    disp = distance(x0, act_vertex(k, x0))
    return PolarDecomposition(k, label, n, hh, P.name, a, disp, P.diameter)


def polar_defect(dec, g):
    return min(_lv(e) for e in (dec.reconstruct() - g).entries())


# boundary disjointness

def boundary_disjointness_check(cert, samples, rng, digits=4):
    """Images of K^sigma-ends under B must avoid the E-rational ends.

    Also checks that each image is fixed by A o sigma, i.e. solves the
    end equation A sigma(xi) = q xi.
    """
    if cert.target != "SIGMA" or cert.level != "K":
        raise ValueError(f"certificate {cert.case_tag} is at level {cert.level}, need K")
    B = cert.B
    K = B.field
    ctx = K.ctx
    A = cert.theta.A.lift(K)
    bound = K.e * (ctx.N - 2 * SLACK)
    rational, inconclusive, not_fixed = 0, 0, 0
    min_beta = math.inf
    ends = [("INF", (K.zero(), K.one()))]
    for _ in range(samples - 1):
        a = ctx.random_scalar(rng, -1, 3, digits)
        b = ctx.random_scalar(rng, -1, 3, digits) if rng.random() < 0.9 else ctx.scalar(0)
        x = K.element(a, b)
        ends.append((x, (K.one(), x)))
    for _, col in ends:
        top, bottom = B.apply(col)
        # fixed by A o sigma: det[A sigma(v), v] = 0
        st, sb = top.sigma(), bottom.sigma()
        u1, u2 = A.e11 * st + A.e12 * sb, A.e21 * st + A.e22 * sb
        det = u1 * bottom - u2 * top
        scale = min(_lv(top), _lv(bottom))
        if not (det.is_zero() or _lv(det) - 2 * scale >= bound):
            not_fixed += 1
        if top.is_zero():
            if top.is_exact_zero():
                rational += 1
            else:
                inconclusive += 1
            continue
        y = bottom / top
        beta = y.b
        if beta.is_exact_zero():
            rational += 1
        elif beta.is_zero():
            inconclusive += 1
        else:
            min_beta = min(min_beta, _lv(beta))
    return {"case": cert.case_tag, "samples": len(ends), "rational_images": rational,
            "inconclusive": inconclusive, "not_fixed": not_fixed,
            "min_beta_valuation": None if min_beta == math.inf else float(min_beta),
            "passed": rational == 0 and inconclusive == 0 and not_fixed == 0}
