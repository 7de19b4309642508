"""The real counterpart: SL(2,R) inside SL(2,C), rotated so that the
diagonal flow is transverse to it, then conjugated by diag(e^n, e^-n).

Arithmetic is done with mpmath at 60 digits.  In double precision the
upper-right entry e^(2n) [-c_n - b_n/4 + ...] is a difference of numbers
of size 1 that agree to 2n/ln(10) digits, so by n = 15 it has lost most
of its accuracy and the decay rate cannot be read off.
"""

from __future__ import annotations

import statistics
from dataclasses import dataclass

import mpmath

mp = mpmath.MPContext()
mp.dps = 60

DET_TOL = mp.mpf("1e-9")


class NoRealRoot(ArithmeticError):
    """The quadratic for the free entry has negative discriminant at this n."""


class CMat2:
    __slots__ = ("e11", "e12", "e21", "e22")

    def __init__(self, e11, e12, e21, e22):
        self.e11, self.e12, self.e21, self.e22 = (mp.mpc(x) for x in (e11, e12, e21, e22))

    def entries(self):
        return (self.e11, self.e12, self.e21, self.e22)

    def __matmul__(self, o):
        return CMat2(self.e11 * o.e11 + self.e12 * o.e21, self.e11 * o.e12 + self.e12 * o.e22,
                     self.e21 * o.e11 + self.e22 * o.e21, self.e21 * o.e12 + self.e22 * o.e22)

    def __sub__(self, o):
        return CMat2(*(x - y for x, y in zip(self.entries(), o.entries())))

    def det(self):
        return self.e11 * self.e22 - self.e12 * self.e21

    def norm(self):
        return max(abs(x) for x in self.entries())

    def in_sl2(self, tol=DET_TOL):
        return abs(self.det() - 1) <= tol

    def to_json(self):
        return [[_cjson(self.e11), _cjson(self.e12)], [_cjson(self.e21), _cjson(self.e22)]]


def _cjson(x):
    return [mp.nstr(x.real, 17), mp.nstr(x.imag, 17)]


I = mp.mpc(0, 1)
ROT = CMat2(1 / (2 * I) + I, 1, -2, 2 * I)
ROT_INV = CMat2(2 * I, -1, 2, I + 1 / (2 * I))


def rotated_real_subgroup_element(a, b, c, d):
    a, b, c, d = (mp.mpf(x) for x in (a, b, c, d))
    if abs(a * d - b * c - 1) > mp.mpf("1e-12"):
        raise ValueError("(a, b, c, d) is not in SL(2,R)")
    return ROT @ CMat2(a, b, c, d) @ ROT_INV


def rotated_real_closed_form(a, b, c, d):
    a, b, c, d = (mp.mpf(x) for x in (a, b, c, d))
    return CMat2(-a + 2 * d + I * (2 * c + b), -c - b / 4 + I / 2 * (d - a),
                 -4 * c - 4 * b + I * (-4 * a + 4 * d), 2 * a - d + I * (-b - 2 * c))


def conjugate_by_exp(g, n):
    """diag(e^n, e^-n) g diag(e^-n, e^n)."""
    t = mp.exp(2 * n)
    return CMat2(g.e11, g.e12 * t, g.e21 / t, g.e22)


@dataclass(frozen=True)
class RealTarget:
    """The limit [[a - ib, z1 + i z2 / 2], [0, a + ib]] reached from z = z1 + i z2."""

    a: object
    b: object
    z: complex = 0

    def __post_init__(self):
        a, b = mp.mpf(self.a), mp.mpf(self.b)
        if abs(a * a + b * b - 1) > mp.mpf("1e-12"):
            raise ValueError("need a^2 + b^2 = 1")
        object.__setattr__(self, "a", a)
        object.__setattr__(self, "b", b)
        object.__setattr__(self, "z", mp.mpc(self.z))

    def limit_element(self):
        a, b, z = self.a, self.b, self.z
        return CMat2(a - I * b, z.real + I * z.imag / 2, 0, a + I * b)

    def to_json(self):
        return {"a": mp.nstr(self.a, 17), "b": mp.nstr(self.b, 17), "z": _cjson(self.z)}


def _closest_root(A, B, C, near):
    """Real root of A x^2 + B x + C nearest to `near`."""
    disc = B * B - 4 * A * C
    if disc < 0:
        raise NoRealRoot(f"discriminant {mp.nstr(disc, 5)} < 0")
    r = mp.sqrt(disc)
    roots = ((-B + r) / (2 * A), (-B - r) / (2 * A))
    return min(roots, key=lambda x: abs(x - near))


def real_limit_sequence(target, n):
    """(a_n, b_n, c_n, d_n) in SL(2,R) whose rotated conjugates tend to the target."""
    a, b = target.a, target.b
    z1, z2 = target.z.real, target.z.imag
    eps = mp.exp(-2 * n)
    if abs(b * b - 1) <= mp.mpf("1e-30"):
        a_n = mp.mpf(0)
        # 4c^2 + 4 z1 eps c - 1 = 0, root near b/2
        c_n = _closest_root(mp.mpf(4), 4 * z1 * eps, mp.mpf(-1), b / 2)
        d_n = z2 * eps + a_n
        b_n = -4 * (eps * z1 + c_n)
    else:
        c_n = b / 2
        # a_n^2 + z2 eps a_n + 2 b z1 eps + b^2 - 1 = 0, root near a
        a_n = _closest_root(mp.mpf(1), z2 * eps, 2 * b * z1 * eps + b * b - 1, a)
        d_n = z2 * eps + a_n
        b_n = -4 * (eps * z1 + b / 2)
    if abs(a_n * d_n - b_n * c_n - 1) > mp.mpf("1e-10"):
        raise ArithmeticError("sequence element left SL(2,R)")
    return a_n, b_n, c_n, d_n


def verify_real_convergence(target, n_range=range(5, 16)):
    """Per-n errors to the limit element and the fitted decay of log(error)."""
    L = target.limit_element()
    records, xs, ys = [], [], []
    last = None
    for n in n_range:
        h = real_limit_sequence(target, n)
        g = conjugate_by_exp(rotated_real_subgroup_element(*h), n)
        err = (g - L).norm()
        records.append({"n": n, "error": mp.nstr(err, 8), "lower_left": mp.nstr(abs(g.e21), 8),
                        "det_error": mp.nstr(abs(g.det() - 1), 8)})
        if err > 0:
            xs.append(n)
            ys.append(float(mp.log(err)))
        last = g
    slope = None
    if len(xs) >= 2:
        slope = statistics.linear_regression(xs, ys).slope
    conj_gap = abs(last.e22 - mp.conj(last.e11))
    norm_gap = abs(target.a ** 2 + target.b ** 2 - 1)
    return {"target": target.to_json(), "records": records, "slope": slope,
            "conjugate_gap": float(conj_gap), "norm_gap": float(norm_gap),
            "det_ok": all(mp.mpf(r["det_error"]) <= DET_TOL for r in records)}


def default_targets():
    """Ten points (a, b, z) spread over the circle and the plane."""
    s = mp.sqrt(mp.mpf(1) / 2)
    pts = [(1, 0, 1), (0.8, 0.6, 1 + 1j), (0.6, -0.8, 2j), (0, 1, 1),
           (0, -1, -1 + 0.5j), (-1, 0, 3), (s, s, -2j), (-0.28, 0.96, 0.5 - 0.5j),
           (-0.6, -0.8, 1.5), (0.96, -0.28, -3 + 1j)]
    return [RealTarget(a, _b(a, b), z) for a, b, z in pts]


def _b(a, b):
    # put b exactly on the circle for the decimal a used in the table
    a = mp.mpf(a)
    r = mp.sqrt(1 - a * a)
    return r if b >= 0 else -r
