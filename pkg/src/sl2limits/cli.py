"""Command-line entry point: one JSON report per experiment.

    sl2limits <subcommand> [--config FILE] [--seed N] [--out FILE]
                           [--p P] [--ext unram|ram-p|ram-ps] [--precision N]

Exit status is 0 when every verdict in the report holds, 1 when one
fails and 2 when the configuration cannot be used.
"""

from __future__ import annotations

import argparse
import json
import random
import sys
from dataclasses import dataclass, field
from fractions import Fraction

from . import archimedean, bttree, chabauty, sl2
from .padic import ExtKind, PrimeContext, class_representative, is_prime

ANCHORS = {
    "classify": "involutions of SL(2,E): normal forms and conjugating certificates",
    "fixed-group": "fixed-point groups H_theta and compactness of the level-K cases",
    "orbits": "orbit counts on the boundary of the Bruhat-Tits tree",
    "polar": "polar decomposition G = K B H",
    "limits-padic": "Chabauty limits of SL(2,F) in SL(2,E) and of H_theta_a in SL(2,F)",
    "limits-real": "Chabauty limits of SL(2,R) in SL(2,C)",
    "tree-dot": "the tree T_F drawn inside T_E",
}

DEFAULTS = {
    "classify": {"family": "F2", "a": 2},
    "fixed-group": {"count": 50, "boundary_samples": 100},
    "orbits": {"variants": ["diag", "slF", "htheta"], "samples": 1000, "ends": 400,
               "rounds": 30, "a_values": ["S", "ω", "Sω"]},
    "polar": {"count": 50, "pairs": ["SL2E/SL2F", "SL2F/H_theta1"]},
    "limits-padic": {"n_max": 10, "sweep": 100, "targets": 27, "htheta": True},
    "limits-real": {"n_min": 5, "n_max": 15},
    "tree-dot": {"R": 2},
}


class ConfigError(ValueError):
    pass


@dataclass
class ExperimentConfig:
    experiment: str
    p: int = 5
    ext: str = "unram"
    N: int = 40
    seed: int = 0
    params: dict = field(default_factory=dict)

    def validate(self):
        if self.experiment not in ANCHORS:
            raise ConfigError(f"unknown experiment {self.experiment!r}")
        if not isinstance(self.p, int) or self.p < 3 or not is_prime(self.p):
            raise ConfigError(f"p must be an odd prime, got {self.p!r}")
        try:
            self.ext = ExtKind.parse(self.ext).value
        except ValueError as err:
            raise ConfigError(str(err)) from err
        if not isinstance(self.N, int) or self.N < 8:
            raise ConfigError(f"precision must be an integer >= 8, got {self.N!r}")
        if not isinstance(self.seed, int) or self.seed < 0:
            raise ConfigError(f"seed must be a non-negative integer, got {self.seed!r}")
        known = DEFAULTS[self.experiment]
        unknown = set(self.params) - set(known) - _EXTRA_KEYS.get(self.experiment, set())
        if unknown:
            raise ConfigError(f"unknown parameters for {self.experiment}: {sorted(unknown)}")
        merged = dict(known)
        merged.update(self.params)
        self.params = merged
        return self

    def to_json(self):
        return {"experiment": self.experiment, "p": self.p, "ext": self.ext,
                "precision": self.N, "seed": self.seed, "params": self.params}


_EXTRA_KEYS = {"classify": {"z", "y", "x", "A", "gamma", "c2"}}


def _rational(v):
    if isinstance(v, bool) or not isinstance(v, (int, str)):
        raise ConfigError(f"expected an integer or a 'p/q' string, got {v!r}")
    try:
        return Fraction(v)
    except (ValueError, ZeroDivisionError) as err:
        raise ConfigError(f"cannot read {v!r} as a rational") from err


def _ext_value(E, v):
    if isinstance(v, list):
        if len(v) != 2:
            raise ConfigError(f"an element of E is a pair [a, b], got {v!r}")
        return E.element(_rational(v[0]), _rational(v[1]))
    return E.coerce(_rational(v))


def _report(cfg, records, verdicts, constants=None):
    return {"experiment": cfg.experiment, "anchor": ANCHORS[cfg.experiment],
            "config": cfg.to_json(), "records": records, "verdicts": verdicts,
            "constants": constants or {}, "passed": all(verdicts.values())}


# classify

def _theta_from_config(ctx, params):
    if "A" in params:
        return _theta_from_matrix(ctx, params["A"], params.get("gamma", "id"))
    fam = params["family"]
    if fam == "F2":
        return sl2.involution_f2(ctx.qp, _rational(params["a"]))
    E = ctx.ext(params.get("_ext", "unram"))
    if fam == "F1A":
        return sl2.involution_f1a(E, _ext_value(E, params.get("z", [0, 1])),
                                  _rational(params.get("y", 7)))
    if fam == "F1B":
        return sl2.involution_f1b(E, _ext_value(E, params.get("x", -1)))
    raise ConfigError(f"unknown family {fam!r}")


def _theta_from_matrix(ctx, A, gamma):
    if not (isinstance(A, list) and len(A) == 2 and all(isinstance(r, list) and len(r) == 2
                                                      for r in A)):
        raise ConfigError("A must be a 2x2 list")
    if gamma == "id":
        e = [[_rational(x) for x in row] for row in A]
        if e[0][0] == 0 and e[1][1] == 0 and e[0][1] == 1 and e[1][0] != 0:
            return sl2.involution_f2(ctx.qp, e[1][0])
        raise ConfigError("with gamma = id, A must be [[0, 1], [a, 0]]")
    if gamma != "sigma":
        raise ConfigError(f"gamma must be 'id' or 'sigma', got {gamma!r}")
    E = ctx.ext("unram")
    e = [[_ext_value(E, x) for x in row] for row in A]
    if e[1][0].is_exact_zero() and e[0][1].is_exact_zero() and (e[1][1] - 1).is_exact_zero():
        return sl2.involution_f1b(E, e[0][0])
    if ((e[1][0] - 1).is_exact_zero() and (e[1][1] + e[0][0].sigma()).is_exact_zero()
            and e[0][1].b.is_exact_zero()):
        return sl2.involution_f1a(E, e[0][0], e[0][1].a)
    raise ConfigError("with gamma = sigma, A must be [[z, y], [1, -sigma(z)]] or diag(x, 1)")


def run_classify(cfg):
    ctx = PrimeContext(cfg.p, cfg.N)
    params = dict(cfg.params, _ext=cfg.ext)
    try:
        theta = _theta_from_config(ctx, params)
    except (ValueError, ArithmeticError) as err:
        if isinstance(err, ConfigError):
            raise
        raise ConfigError(str(err)) from err
    try:
        q = sl2.verify_involution(theta, random.Random(cfg.seed), trials=10)
    except sl2.NotAnInvolution as err:
        return _report(cfg, [{"family": theta.family, "error": str(err)}],
                       {"involution": False})
    if theta.family == "F2":
        cert = sl2.conjugator_to_diagonal(theta.params["a"], ctx)
    else:
        cert = sl2.conjugator_with_retry(theta)
    rec = {"family": theta.family, "q": q.to_json(), "A": theta.A.to_json(),
           "certificate": cert.to_json(), "residual": _num(cert.residual())}
    return _report(cfg, [rec], {"involution": True, "certificate": cert.verify()})


def _num(v):
    return None if v == float("inf") else float(v)


# fixed-group

def level_k_certificates(ctx):
    """Three certificates whose conjugator needs the tower level K."""
    E = ctx.ext("unram")
    f = sl2.involution_f1a
    return [sl2.conjugator_to_sigma(f(E, E.alpha, ctx.scalar(7))),
            sl2.conjugator_to_sigma(f(E, E.zero(), ctx.scalar(5))),
            sl2.conjugator_to_sigma(f(E, E.alpha, ctx.scalar(5)), 1)]


def run_fixed_group(cfg):
    ctx = PrimeContext(cfg.p, cfg.N)
    rng = random.Random(cfg.seed)
    F = ctx.qp
    records, ok = [], True
    for label in ("1", "S", "ω", "Sω"):
        a = class_representative(ctx, label)
        theta = sl2.involution_f2(F, a)
        sample = sl2.h_theta_a_sample(F, a, cfg.params["count"], rng)
        fixed = [sl2.fixed_point_test(theta, h)[0] and sl2.in_sl2(h) for h in sample]
        ends = sl2.fixed_ends(a, ctx)
        records.append({"a": label, "members": sum(fixed), "count": len(fixed),
                        "fixed_ends": [e.to_json() for e in ends]})
        ok = ok and all(fixed)
    boundary = [chabauty.boundary_disjointness_check(c, cfg.params["boundary_samples"], rng)
                for c in level_k_certificates(ctx)]
    records.extend(boundary)
    return _report(cfg, records, {"fixed_points": ok,
                                  "boundary_disjoint": all(b["passed"] for b in boundary)})


# orbits

def random_end(F, rng, digits=4):
    r = rng.random()
    if r < 0.05:
        return bttree.INF
    if r < 0.1:
        return bttree.End.finite(F.zero())
    return bttree.End.finite(sl2.random_element(F, rng, digits, -3, 4))


def diag_census(ctx, rng, samples):
    """Labels of Diag(2,F) orbits on P^1 F and a label-invariance check."""
    F = ctx.qp
    ends = [bttree.INF, bttree.End.finite(F.zero())]
    ends += [bttree.End.finite(F.coerce(class_representative(ctx, m)))
             for m in ("1", "S", "ω", "Sω")]
    ends += [random_end(F, rng) for _ in range(samples)]
    labels = {str(bttree.end_orbit_label_diag(e)) for e in ends}
    broken = 0
    for _ in range(samples):
        e = random_end(F, rng)
        d = sl2.random_element(F, rng, 4, -3, 3)
        img = bttree.act_end(sl2.Mat2.diag(d, d.inv()), e)
        if bttree.end_orbit_label_diag(img) != bttree.end_orbit_label_diag(e):
            broken += 1
    return {"variant": "diag", "labels": sorted(labels), "invariance_failures": broken}


def slF_census(E, rng, samples):
    """Labels of SL(2,F) orbits on P^1 E and a label-invariance check."""
    ends = [bttree.INF] + [random_end(E, rng) for _ in range(samples)]
    labels = {str(bttree.end_orbit_label_slF(e)) for e in ends}
    broken = 0
    for e in ends[:samples]:
        g = sl2.random_sl2(E.ctx.qp, rng, length=2)
        img = bttree.act_end(g, e)
        if bttree.end_orbit_label_slF(img) != bttree.end_orbit_label_slF(e):
            broken += 1
    return {"variant": "slF", "labels": sorted(labels), "invariance_failures": broken}


def htheta_census(ctx, label, rng, n_ends, rounds, n_gens=4):
    """Union-find bound on the number of H_theta_a orbits met by random ends."""
    F = ctx.qp
    a = F.coerce(class_representative(ctx, label))
    gens = sl2.h_theta_a_sample(F, a, n_gens, rng)
    ends = [random_end(F, rng) for _ in range(n_ends)]
    out = bttree.orbit_experiment(gens, ends, rounds,
                                  connect=lambda e1, e2: bttree.h_theta_witness(a, e1, e2))
    return {"variant": "htheta", "a": label, "class_count": out["class_count"],
            "history": out["history"], "skipped": out["skipped"], "size": out["size"]}


def run_orbits(cfg):
    ctx = PrimeContext(cfg.p, cfg.N)
    rng = random.Random(cfg.seed)
    P = cfg.params
    records, verdicts = [], {}
    if "diag" in P["variants"]:
        r = diag_census(ctx, rng, P["samples"])
        records.append(r)
        verdicts["diag_six_labels"] = len(r["labels"]) == 6 and r["invariance_failures"] == 0
    if "slF" in P["variants"]:
        r = slF_census(ctx.ext(cfg.ext), rng, P["samples"])
        records.append(r)
        verdicts["slF_at_most_five"] = len(r["labels"]) <= 5 and r["invariance_failures"] == 0
    if "htheta" in P["variants"]:
        rs = [htheta_census(ctx, m, rng, P["ends"], P["rounds"]) for m in P["a_values"]]
        records.extend(rs)
        verdicts["htheta_at_most_eight"] = all(r["class_count"] <= 8 for r in rs)
    return _report(cfg, records, verdicts)


# polar

def random_polar_input(F, rng, spread=4):
    """k1 diag(w^m, w^-m) k2 with random words k1, k2: spreads g^-1 x0 over the tree."""
    w = F.uniformizer
    m = rng.randint(-spread, spread)
    wm = w ** m if m >= 0 else (w ** -m).inv()
    D = sl2.Mat2.diag(wm, wm.inv(), field=F)
    return sl2.random_sl2(F, rng, length=2) @ D @ sl2.random_sl2(F, rng, length=2)


def polar_run(pair, count, rng):
    F = pair.E if isinstance(pair, chabauty.PairEF) else pair.F
    ctx = F.ctx
    worst, too_far, orbits = float("inf"), 0, {}
    for _ in range(count):
        g = random_polar_input(F, rng)
        dec = chabauty.polar_decompose(g, pair)
        worst = min(worst, chabauty.polar_defect(dec, g))
        too_far += dec.displacement > dec.diameter
        orbits[str(dec.i)] = orbits.get(str(dec.i), 0) + 1
    return {"pair": pair.name, "count": count, "worst_defect": _num(worst),
            "displacement_violations": too_far, "orbits": dict(sorted(orbits.items())),
            "passed": worst >= ctx.N - sl2.SLACK and too_far == 0}


def run_polar(cfg):
    ctx = PrimeContext(cfg.p, cfg.N)
    rng = random.Random(cfg.seed)
    records = []
    for name in cfg.params["pairs"]:
        try:
            pair = chabauty.polar_pair(name, ctx.ext(cfg.ext) if name == "SL2E/SL2F" else ctx)
        except ValueError as err:
            raise ConfigError(str(err)) from err
        records.append(polar_run(pair, cfg.params["count"], rng))
    return _report(cfg, records, {r["pair"]: r["passed"] for r in records})


# limits

def run_limits_padic(cfg):
    P = cfg.params
    res = chabauty.padic_limit_experiment(cfg.p, cfg.ext, cfg.N, P["n_max"], P["sweep"],
                                          cfg.seed, limit=P["targets"])
    records = [{"family": "SL2F", "target": t["target"], "slope": t["slope"],
                "monotone": t["monotone"], "c": t["c"]} for t in res["targets"]]
    verdicts = {
        "slope_in_range": all(t["slope"] is not None and 1.8 <= t["slope"] <= 2.2
                              for t in res["targets"]),
        "monotone": all(t["monotone"] for t in res["targets"]),
        "sweep_clean": not res["sweep"]["violations"],
    }
    constants = {"c": res["c"], "sweep": res["sweep"]}
    if P["htheta"]:
        hs = chabauty.htheta_limit_experiment(cfg.p, cfg.N, P["n_max"])
        for h in hs:
            records.append({"family": "H_theta_a", "a": h["a"], "sign": h["sign"],
                            "slope": h["slope"], "mu2": h["mu2"]})
        verdicts["htheta_mu2"] = all(h["mu2"] for h in hs)
        verdicts["htheta_slope_in_range"] = all(h["slope"] is not None
                                                and 1.8 <= h["slope"] <= 2.2 for h in hs)
    return _report(cfg, records, verdicts, constants)


def run_limits_real(cfg):
    P = cfg.params
    rng_n = range(P["n_min"], P["n_max"] + 1)
    reps = [archimedean.verify_real_convergence(t, rng_n) for t in archimedean.default_targets()]
    verdicts = {
        "slope_in_range": all(r["slope"] is not None and -2.2 <= r["slope"] <= -1.8 for r in reps),
        "conjugate_diagonal": all(r["conjugate_gap"] <= 1e-9 for r in reps),
        "det_one": all(r["det_ok"] for r in reps),
    }
    return _report(cfg, reps, verdicts)


# tree-dot

def expected_ball_size(E, R):
    q = E.ctx.p ** (2 if E.e == 1 else 1)
    return 1 + (q + 1) * (q ** R - 1) // (q - 1)


RUNNERS = {
    "classify": run_classify,
    "fixed-group": run_fixed_group,
    "orbits": run_orbits,
    "polar": run_polar,
    "limits-padic": run_limits_padic,
    "limits-real": run_limits_real,
}


def build_parser():
    ap = argparse.ArgumentParser(prog="sl2limits", description=__doc__.splitlines()[0])
    ap.add_argument("subcommand", choices=sorted(ANCHORS))
    ap.add_argument("--config", help="JSON file with p, ext, precision, seed and params")
    ap.add_argument("--seed", type=int)
    ap.add_argument("--out", help="write the report (or DOT text) here instead of stdout")
    ap.add_argument("--p", type=int)
    ap.add_argument("--ext", choices=[k.value for k in ExtKind])
    ap.add_argument("--precision", type=int)
    return ap


def load_config(args):
    raw = {}
    if args.config:
        try:
            with open(args.config, encoding="utf-8") as fh:
                raw = json.load(fh)
        except (OSError, json.JSONDecodeError) as err:
            raise ConfigError(f"cannot read config {args.config}: {err}") from err
        if not isinstance(raw, dict):
            raise ConfigError("config must be a JSON object")
    unknown = set(raw) - {"p", "ext", "precision", "seed", "params"}
    if unknown:
        raise ConfigError(f"unknown config keys {sorted(unknown)}")
    cfg = ExperimentConfig(args.subcommand, raw.get("p", 5), raw.get("ext", "unram"),
                           raw.get("precision", 40), raw.get("seed", 0),
                           dict(raw.get("params", {})))
    for key, attr in (("p", "p"), ("ext", "ext"), ("precision", "N"), ("seed", "seed")):
        v = getattr(args, key)
        if v is not None:
            setattr(cfg, attr, v)
    if not isinstance(cfg.params, dict):
        raise ConfigError("params must be a JSON object")
    return cfg.validate()


def _emit(text, out):
    if out:
        with open(out, "w", encoding="utf-8") as fh:
            fh.write(text)
    else:
        sys.stdout.write(text)


def main(argv=None):
    args = build_parser().parse_args(argv)
    try:
        cfg = load_config(args)
        if cfg.experiment == "tree-dot":
            E = PrimeContext(cfg.p, cfg.N).ext(cfg.ext)
            R = cfg.params["R"]
            if not isinstance(R, int) or R < 0:
                raise ConfigError(f"R must be a non-negative integer, got {R!r}")
            _emit(bttree.tree_dot(E, R) + "\n", args.out)
            return 0 if len(bttree.ball(bttree.base_vertex(E), R)) == expected_ball_size(E, R) else 1
        report = RUNNERS[cfg.experiment](cfg)
    except ConfigError as err:
        msg = {"experiment": args.subcommand, "anchor": ANCHORS.get(args.subcommand),
               "error": str(err), "passed": False}
        _emit(json.dumps(msg, indent=2, sort_keys=True) + "\n", args.out)
        print(f"config error: {err}", file=sys.stderr)
        return 2
    _emit(json.dumps(report, indent=2, sort_keys=True, default=str) + "\n", args.out)
    return 0 if report["passed"] else 1


if __name__ == "__main__":
    sys.exit(main())
