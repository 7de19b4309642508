"""Acceptance suite: one test per criterion, each printing a PASS/FAIL line.

Run directly (python3 tests/test_acceptance.py) for the summary alone.
"""

import math
import random
import time

import pytest

from sl2limits import archimedean, chabauty, cli, sl2
from sl2limits.padic import PrimeContext, class_representative, hensel_root, square_class
from sl2limits.sl2 import NoAdmissibleC

RESULTS = {}


def _line(n, ok, detail, elapsed, limit):
    status = "PASS" if ok else "FAIL"
    return f"criterion {n:2d}: {status}  {detail}  [{elapsed:.2f}s / {limit}s]"


def _finish(n, ok, detail, t0, limit, reporter=None):
    elapsed = time.perf_counter() - t0
    ok = ok and elapsed < limit
    line = _line(n, ok, detail, elapsed, limit)
    RESULTS[n] = line
    if reporter is not None:
        reporter.write_line(line)
    else:
        print(line)
    return ok, line


@pytest.fixture
def reporter(request):
    return request.config.pluginmanager.getplugin("terminalreporter")


# 1. square classes

def criterion_1(reporter=None):
    t0 = time.perf_counter()
    ok, bad = True, []
    for p in (3, 5, 7):
        ctx = PrimeContext(p, 20)
        rng = random.Random(p)
        labels = set()
        for _ in range(1000):
            x = ctx.random_scalar(rng, -3, 3, 6)
            y = ctx.random_scalar(rng, -2, 2, 6)
            c = square_class(x).label
            labels.add(c)
            if square_class(x * y * y).label != c:
                bad.append((p, x))
        if labels != {"1", "S", "ω", "Sω"}:
            ok = False
    ok = ok and not bad
    return _finish(1, ok, f"labels=4 per p, invariance failures={len(bad)}", t0, 1, reporter)


# 2. Hensel against exhaustive search

def roots_mod(coeffs, p, k):
    """Every x mod p^k with f(x) = 0 mod p^k, by digit-wise exhaustive search."""
    roots = [0]
    for j in range(1, k + 1):
        m = p ** j
        roots = [r + d * p ** (j - 1) for r in roots for d in range(p)
                 if sum(c * (r + d * p ** (j - 1)) ** i for i, c in enumerate(coeffs)) % m == 0]
    return roots


def _v(n, p):
    if n == 0:
        return math.inf
    v = 0
    while n % p == 0:
        n //= p
        v += 1
    return v


def hensel_instances(p, count, rng):
    out = []
    while len(out) < count:
        a = rng.randrange(p ** 3)
        fp = rng.choice([rng.randrange(1, p), p * rng.randrange(1, p)])
        fa = p ** (2 * _v(fp, p) + 1) * rng.randrange(p ** 2)
        # f(X) = (X - a)^2 + fp (X - a) + fa
        c0 = a * a - fp * a + fa
        c1 = fp - 2 * a
        if _v(c0 + c1 * a + a * a, p) > 2 * _v(c1 + 2 * a, p):
            out.append(([c0, c1, 1], a))
    return out


def criterion_2(reporter=None):
    t0 = time.perf_counter()
    mism = 0
    total = 0
    for p in (5, 7):
        ctx = PrimeContext(p, 12)
        for coeffs, a in hensel_instances(p, 50, random.Random(p)):
            r = hensel_root([ctx.scalar(c) for c in coeffs], ctx.scalar(a))
            brute = roots_mod(coeffs, p, 6)
            k = _v(coeffs[1] + 2 * a, p)
            near = [x for x in brute if _v(x - a, p) > k]
            got = int(r.lift()) % p ** 6
            total += 1
            if got not in near:
                mism += 1
    return _finish(2, mism == 0, f"{total} quadratics, mismatches={mism}", t0, 5, reporter)


# 3. involutions

def criterion_3(reporter=None):
    t0 = time.perf_counter()
    fails = 0
    ctx = PrimeContext(5, 40)
    E = ctx.ext("unram")
    rng = random.Random(3)
    makers = [lambda: sl2.random_f1a(E, rng), lambda: sl2.random_f1b(E, rng),
              lambda: sl2.random_f2(ctx.qp, rng)]
    checked = 0
    for make in makers:
        for _ in range(200):
            theta = make()
            A = theta.A
            P = A @ (A.sigma() if theta.gamma is sl2.Gamma.SIGMA else A)
            exact = (P - sl2.Mat2.identity(A.field) * P.e11).is_zero() and \
                all(e.is_exact for e in P.entries())
            if not exact:
                fails += 1
            for _ in range(100):
                g = sl2.random_sl2(theta.field, rng, length=1, digits=3)
                if not (sl2.apply_involution(theta, sl2.apply_involution(theta, g)) - g).is_zero():
                    fails += 1
                checked += 1
    return _finish(3, fails == 0, f"600 involutions, {checked} theta^2 checks, failures={fails}",
                   t0, 30, reporter)


# 4. conjugator certificates

CASES = ("C1", "C2", "C4", "C5_1", "C5_2", "C5_3", "C5_4a", "C5_4b", "C5_4c")


def case_draw(E, tag, rng):
    """(theta, c2) whose certificate falls in case `tag`."""
    def r():
        return sl2.random_element(E.ctx.qp, rng, 4, 0, 2)
    if tag == "C1":
        return sl2.involution_f1b(E, rng.choice([1, -1])), 0
    if tag == "C2":
        while True:
            w = E.element(r(), r())
            x = w / w.sigma()
            if not x.b.is_zero():
                return sl2.involution_f1b(E, x), 0
    z1, z2, y = r(), r(), r()
    return {
        "C4": lambda: (sl2.involution_f1a(E, E.element(z1, z2), y), 0),
        "C5_1": lambda: (sl2.involution_f1a(E, E.element(z1, z2), y), z2),
        "C5_2": lambda: (sl2.involution_f1a(E, E.element(z1, z2), y), -z2),
        "C5_3": lambda: (sl2.involution_f1a(E, E.element(z1, 0), y), 0),
        "C5_4a": lambda: (sl2.involution_f1a(E, E.element(z1, z2), 0), z2),
        "C5_4b": lambda: (sl2.involution_f1a(E, E.element(0, z2), 0), z2),
        "C5_4c": lambda: (sl2.involution_f1a(E, E.element(z1, 0), 0), 0),
    }[tag]()


def admissible_certificate(E, tag, rng):
    while True:
        theta, c2 = case_draw(E, tag, rng)
        try:
            return sl2.conjugator_to_sigma(theta, c2)
        except NoAdmissibleC:
            continue


def criterion_4(reporter=None):
    t0 = time.perf_counter()
    ctx = PrimeContext(5, 40)
    rng = random.Random(4)
    bad, levels = [], set()
    for kind in ("unram", "ram-p", "ram-ps"):
        E = ctx.ext(kind)
        for tag in CASES:
            for _ in range(50):
                cert = admissible_certificate(E, tag, rng)
                levels.add(cert.level)
                if cert.case_tag != tag or not cert.verify(ctx.N - sl2.SLACK):
                    bad.append((kind, tag))
    return _finish(4, not bad, f"9 cases x 50 draws x 3 kinds, levels={sorted(levels)}, "
                   f"failures={len(bad)}", t0, 30, reporter)


# 5. diagonalisation of the k-involutions

def criterion_5(reporter=None):
    t0 = time.perf_counter()
    bad = []
    for p in (5, 7):
        ctx = PrimeContext(p, 40)
        for label in ("1", "S", "ω", "Sω"):
            a = class_representative(ctx, label)
            cert = sl2.conjugator_to_diagonal(a, ctx)
            D = cert.B.inv() @ cert.theta.A.lift(cert.B.field) @ cert.B
            prop = (D.e11 + D.e22).is_zero() and not D.e11.is_zero()
            try:
                sl2.fixed_ends(a, ctx)
            except AssertionError:
                prop = False
            if not (cert.verify() and prop):
                bad.append((p, label))
    return _finish(5, not bad, f"8 representatives, failures={len(bad)}", t0, 5, reporter)


# 6. boundary disjointness

def criterion_6(reporter=None):
    t0 = time.perf_counter()
    ctx = PrimeContext(5, 40)
    rng = random.Random(6)
    outs = [chabauty.boundary_disjointness_check(c, 500, rng) for c in cli.level_k_certificates(ctx)]
    rational = sum(o["rational_images"] for o in outs)
    inconclusive = sum(o["inconclusive"] for o in outs)
    ok = all(o["passed"] for o in outs) and rational == 0 and inconclusive == 0
    return _finish(6, ok, f"3 certificates x 500 ends, rational={rational}, "
                   f"inconclusive={inconclusive}", t0, 30, reporter)


# 7. orbit counts

def criterion_7(reporter=None):
    t0 = time.perf_counter()
    ctx = PrimeContext(5, 40)
    rng = random.Random(7)
    d = cli.diag_census(ctx, rng, 1000)
    sl = [cli.slF_census(ctx.ext(k), rng, 1000) for k in ("unram", "ram-p", "ram-ps")]
    ht = [cli.htheta_census(ctx, m, rng, 400, 30) for m in ("S", "ω", "Sω")]
    ok = (len(d["labels"]) == 6 and d["invariance_failures"] == 0
          and all(len(s["labels"]) <= 5 and s["invariance_failures"] == 0 for s in sl)
          and all(h["class_count"] <= 8 for h in ht))
    detail = (f"diag={len(d['labels'])}, slF={[len(s['labels']) for s in sl]}, "
              f"H_theta={[h['class_count'] for h in ht]}")
    return _finish(7, ok, detail, t0, 120, reporter)


# 8. polar decomposition

def criterion_8(reporter=None):
    t0 = time.perf_counter()
    ctx = PrimeContext(5, 40)
    rng = random.Random(8)
    pairs = [chabauty.polar_pair("SL2E/SL2F", ctx.ext(k)) for k in ("unram", "ram-p", "ram-ps")]
    pairs.append(chabauty.polar_pair("SL2F/H_theta1", ctx))
    names = ["SL2E/SL2F unram", "SL2E/SL2F ram-p", "SL2E/SL2F ram-ps", "SL2F/H_theta1"]
    runs = [cli.polar_run(P, 500, rng) for P in pairs]
    ok = all(r["passed"] for r in runs)
    detail = ", ".join(f"{name} worst defect "
                       f"{'exact' if r['worst_defect'] is None else r['worst_defect']}"
                       for name, r in zip(names, runs))
    return _finish(8, ok, detail, t0, 120, reporter)


# 9. p-adic limits of SL(2,F)

def criterion_9(reporter=None):
    t0 = time.perf_counter()
    slopes, bad_sweep = [], 0
    for p in (5, 7):
        for kind in ("unram", "ram-p", "ram-ps"):
            res = chabauty.padic_limit_experiment(p, kind, 40, 10, 100, seed=p)
            slopes += [t["slope"] for t in res["targets"]]
            bad_sweep += len(res["sweep"]["violations"])
    ok = all(s is not None and 1.8 <= s <= 2.2 for s in slopes) and bad_sweep == 0
    finite = [s for s in slopes if s is not None]
    return _finish(9, ok, f"{len(slopes)} recipes, slope range [{min(finite):.3f}, {max(finite):.3f}],"
                   f" sweep violations={bad_sweep}", t0, 300, reporter)


# 10. limits of H_theta_a

def criterion_10(reporter=None):
    t0 = time.perf_counter()
    runs = chabauty.htheta_limit_experiment(5, 40, 10)
    slopes = [r["slope"] for r in runs]
    ok = all(r["mu2"] for r in runs) and all(s is not None and 1.8 <= s <= 2.2 for s in slopes)
    return _finish(10, ok, f"8 sequences, mu2={all(r['mu2'] for r in runs)}, "
                   f"slopes={sorted(set(round(s, 3) for s in slopes))}", t0, 120, reporter)


# 11. archimedean replay

def criterion_11(reporter=None):
    t0 = time.perf_counter()
    reps = [archimedean.verify_real_convergence(t) for t in archimedean.default_targets()]
    slopes = [r["slope"] for r in reps]
    ok = (all(s is not None and -2.2 <= s <= -1.8 for s in slopes)
          and all(r["conjugate_gap"] <= 1e-9 for r in reps))
    return _finish(11, ok, f"10 targets, slope range [{min(slopes):.3f}, {max(slopes):.3f}], "
                   f"max conjugate gap {max(r['conjugate_gap'] for r in reps):.1e}", t0, 1, reporter)


CRITERIA = [criterion_1, criterion_2, criterion_3, criterion_4, criterion_5, criterion_6,
            criterion_7, criterion_8, criterion_9, criterion_10, criterion_11]


@pytest.mark.parametrize("n", range(1, 12))
def test_criterion(n, reporter):
    ok, line = CRITERIA[n - 1](reporter)
    assert ok, line


if __name__ == "__main__":
    for c in CRITERIA:
        c()
