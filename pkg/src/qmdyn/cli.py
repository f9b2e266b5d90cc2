"""Command line experiment runner.

    qmdyn <command> [--config FILE] [overrides] [--out DIR] [--format csv|json]

Every run writes its data files and a ``manifest.json`` into the output
directory.  Exit status: 0 when every enabled check passes, 1 when one
fails, 2 for an invalid configuration.
"""

from __future__ import annotations

import argparse
import csv
import functools
import json
import logging
import sys
from dataclasses import fields
from fractions import Fraction
from pathlib import Path
from typing import Any, Callable

from . import aperiodic, hull_lab, qm, walk
from .config import COMMANDS, ConfigError, ExperimentConfig
from .qm import format_rational
from .quadext import QuadExt
from .rng import sub_seed
from .words import GroupSpec, format_word, parse_letters, parse_word

log = logging.getLogger("qmdyn")


class Result:
    def __init__(self, ok: bool = True):
        self.ok = ok
        self.tables: dict[str, tuple[list[str], list[list[Any]]]] = {}
        self.summary: dict[str, Any] = {}

    def table(self, name: str, header: list[str], rows: list) -> None:
        self.tables[name] = (header, [list(r) for r in rows])

    def check(self, name: str, passed: bool) -> None:
        self.summary.setdefault("checks", {})[name] = bool(passed)
        self.ok = self.ok and bool(passed)


# ---------------------------------------------------------------- builders

def config_errors(fn):
    """Report bad values inside config strings as config errors."""
    @functools.wraps(fn)
    def wrapper(*args):
        try:
            return fn(*args)
        except ConfigError:
            raise
        except (ValueError, ZeroDivisionError) as e:
            raise ConfigError(str(e)) from None
    return wrapper


@config_errors
def build_qm(cfg: ExperimentConfig) -> qm.Quasimorphism:
    spec = GroupSpec(cfg.rank)
    kind, _, arg = cfg.qm.partition(":")
    if kind == "counting":
        pattern = parse_word(arg) if any(ch.isdigit() for ch in arg) else parse_letters(arg, spec)
        spec.check(pattern)
        phi: qm.Quasimorphism = qm.CountingQM(pattern)
    elif kind == "hom":
        weights = [Fraction(x) for x in arg.split(",")] if arg else []
        if len(weights) != cfg.rank:
            raise ConfigError(f"hom needs {cfg.rank} weights")
        phi = qm.HomomorphismQM(weights)
    elif kind == "zero":
        phi = qm.HomomorphismQM([0] * cfg.rank)
    elif kind == "eta-bernoulli":
        phi = hull_lab.eta_qm(hull_lab.bernoulli_set(Fraction(arg), cfg.seed))
    elif kind == "xi-generic":
        phi = hull_lab.s_quasimorphism(hull_lab.generic_set(int(arg or cfg.K)))
    else:
        raise ConfigError(f"unknown quasimorphism kind {kind!r}")
    if cfg.antisymmetrize:
        phi = qm.antisymmetrize(phi)
    if cfg.rescale3:
        phi = qm.rescale3(phi)
    if cfg.perturb:
        if not cfg.rescale3:
            raise ConfigError("perturb needs rescale3")
        A = hull_lab.generic_set(cfg.K)
        phi = hull_lab.perturbation_qm(hull_lab.xi_function(A), 1, phi, spec)
    return phi


@config_errors
def build_model_set(cfg: ExperimentConfig) -> aperiodic.ModelSet:
    lo, hi = (Fraction(x) for x in cfg.window)
    return aperiodic.ModelSet(cfg.d, QuadExt(lo, 0, cfg.d), QuadExt(hi, 0, cfg.d))


@config_errors
def build_B(spec: str, W: int) -> hull_lab.BinarySetZ:
    if spec in ("empty", "none", ""):
        return hull_lab.explicit_set([], W)
    if spec == "evens":
        return hull_lab.evens(W)
    if spec == "odds":
        return hull_lab.periodic_set("01", W)
    if spec.startswith("bernoulli:"):
        _, q, seed = (spec.split(":") + ["0"])[:3]
        return hull_lab.bernoulli_set(Fraction(q), int(seed), W)
    try:
        members = [int(x) for x in spec.split(",")]
    except ValueError:
        raise ConfigError(f"cannot parse set {spec!r}") from None
    return hull_lab.explicit_set(members, W)


def rat(x: str) -> Fraction:
    try:
        return Fraction(x)
    except (ValueError, ZeroDivisionError):
        raise ConfigError(f"not a rational number: {x!r}") from None


# ---------------------------------------------------------------- commands

def cmd_defect(cfg: ExperimentConfig) -> Result:
    spec = GroupSpec(cfg.rank)
    phi = build_qm(cfg)
    res = Result()
    rows = []
    prev = None
    monotone = True
    for L in range(1, cfg.L + 1):
        d = qm.defect(phi, L, spec)
        if prev is not None and d.value < prev:
            monotone = False
        prev = d.value
        rows.append([L, format_rational(d.value), format_word(d.pair[0]), format_word(d.pair[1])])
    res.table("defect", ["L", "defect", "g", "h"], rows)
    res.summary["defect"] = rows[-1][1] if rows else None
    res.check("monotone", monotone)
    return res


def cmd_drift(cfg: ExperimentConfig) -> Result:
    phi = build_qm(cfg)
    p = walk.StepDistribution.uniform(cfg.rank)
    table = walk.drift_table(phi, p, cfg.n)
    res = Result()
    res.table("drift", ["n", "drift"], [[n, format_rational(v)] for n, v in table])
    if phi.odd_integer:
        res.check("antisymmetric_drift_vanishes", all(v == 0 for _, v in table))
    if isinstance(phi, qm.HomomorphismQM):
        res.check("additive", all(v == n * table[1][1] for n, v in table) if len(table) > 1 else True)
    return res


def doubling_grid(N: int) -> list[int]:
    grid, k = [], 1
    while k < N:
        grid.append(k)
        k *= 2
    return grid + [N]


def cmd_harmonize(cfg: ExperimentConfig) -> Result:
    spec = GroupSpec(cfg.rank)
    phi = build_qm(cfg)
    p = walk.StepDistribution.uniform(cfg.rank)
    res = Result()
    rows = []
    residuals = []
    fp = None
    for N in doubling_grid(max(cfg.N, 1)):
        fp = walk.cesaro_harmonize(phi, p, N, cfg.L + 1, spec)
        r = walk.harmonic_residual(fp, p, cfg.L, spec)
        residuals.append(r)
        rows.append([N, format_rational(r)])
    res.table("residuals", ["N", "residual"], rows)
    res.table("fingerprint", ["word", "value"], fp.rows())
    res.check("non_increasing", all(b <= a for a, b in zip(residuals, residuals[1:])))
    if len(residuals) > 1:
        res.check("last_below_first", residuals[-1] < residuals[0])
    return res


def cmd_hull_walk(cfg: ExperimentConfig) -> Result:
    spec = GroupSpec(cfg.rank)
    phi = build_qm(cfg)
    p = walk.StepDistribution.uniform(cfg.rank)
    hist = hull_lab.hull_walk(phi, p, cfg.steps, cfg.L, cfg.seed, spec)
    res = Result()
    res.table("histogram", ["key", "count"], hist.rows())
    res.summary.update({"keys": len(hist.counts), "total": hist.total})
    return res


def all_words_occur(x: str, K: int) -> bool:
    return all(len({x[i:i + k] for i in range(len(x) - k + 1)}) == 2 ** k for k in range(1, K + 1))


def cmd_generic_set(cfg: ExperimentConfig) -> Result:
    A = hull_lab.generic_set(cfg.K)
    res = Result()
    res.table("generic_set", ["position", "bit"], [[i, b] for i, b in enumerate(A.word)])
    res.summary.update({"K": cfg.K, "length": len(A.word), "members": A.word.count("1")})
    res.check("every_word_occurs", all_words_occur(A.word, cfg.K))
    return res


def cmd_orbit_closure(cfg: ExperimentConfig) -> Result:
    K = max(cfg.K, 2 * cfg.W + 1)
    A = hull_lab.generic_set(K)
    B = build_B(cfg.B, cfg.W)
    w = hull_lab.so_orbit_limit(A, B, cfg.W)
    res = Result()
    rows = [[n, a, b, c, d] for n, a, b, c, d in zip(
        hull_lab.z_ball(cfg.W), w.fingerprint, w.target, w.negated_fingerprint, w.negated_target)]
    res.table("orbit_closure", ["n", "k.s", "eta(B)", "(-k).s", "-eta(-B)"], rows)
    res.summary.update({"k": w.k, "K": K, "W": cfg.W, "B": cfg.B})
    res.check("match", w.match)
    res.check("negated_match", w.negated_match)
    return res


def cmd_model_set(cfg: ExperimentConfig) -> Result:
    P = build_model_set(cfg)
    pts = P.enumerate(rat(cfg.R))
    stats = aperiodic.delone_stats(pts)
    res = Result()
    res.table("points", ["index", "point"], [[i, str(x)] for i, x in enumerate(pts)])
    res.summary.update(stats.as_dict())
    return res


def cmd_approx_check(cfg: ExperimentConfig) -> Result:
    P = build_model_set(cfg)
    rep = aperiodic.approx_subgroup_check(P, rat(cfg.R), rat(cfg.C))
    res = Result()
    res.table("witnesses", ["p", "q"], rep.witnesses)
    res.summary["report"] = rep.as_dict()
    res.check("approx_subgroup", rep.ok)
    return res


def cmd_twist_check(cfg: ExperimentConfig) -> Result:
    spec = GroupSpec(cfg.rank)
    T = aperiodic.TwistedSet(build_qm(cfg), build_model_set(cfg))
    approx = aperiodic.twist_approx_check(T, cfg.L, rat(cfg.R), spec, rat(cfg.C))
    delone = aperiodic.twist_delone_check(T, min(cfg.L, 3), rat(cfg.R), spec)
    res = Result()
    res.table("witnesses", ["check", "witness"],
              [["twist-approx", json.dumps(w, sort_keys=True)] for w in approx.witnesses]
              + [["twist-delone", json.dumps(w, sort_keys=True)] for w in delone.witnesses])
    res.summary["reports"] = [approx.as_dict(), delone.as_dict()]
    res.check("twist_approx", approx.ok)
    res.check("twist_delone", delone.ok)
    return res


SKEW_LW = 2
SKEW_RT = 10


def cmd_skew_check(cfg: ExperimentConfig) -> Result:
    spec = GroupSpec(cfg.rank)
    phi = build_qm(cfg)
    P = build_model_set(cfg)
    big = qm.fingerprint(phi, SKEW_LW + 2, spec)
    rep = aperiodic.random_equivariance_trials(big, P, spec, cfg.samples, cfg.seed, SKEW_LW, SKEW_RT)
    a = (1,)
    sep = aperiodic.separation_check(qm.fingerprint(phi, 3, spec), qm.fingerprint(qm.act(a, phi), 3, spec))
    hom = qm.HomomorphismQM([1] + [0] * (cfg.rank - 1))
    sep_hom = aperiodic.separation_check(qm.fingerprint(hom, 3, spec),
                                         qm.fingerprint(qm.Acted(hom, a), 3, spec))
    res = Result()
    res.table("witnesses", ["g", "t"], [[w["g"], w["t"]] for w in rep.witnesses])
    res.table("patch", ["word", "t"], aperiodic.patch_rows(aperiodic.skew_pi(big, P, SKEW_LW, SKEW_RT)))
    res.summary["report"] = rep.as_dict()
    res.summary["separation_witness"] = None if sep is None else format_word(sep)
    res.check("equivariance", rep.ok)
    res.check("homomorphism_fixed", sep_hom is None)
    return res


def hull_witness(phi1: qm.Quasimorphism, start: qm.Quasimorphism, A: hull_lab.BinarySetZ,
                 B: hull_lab.BinarySetZ, L: int, spec: GroupSpec, margin: int) -> tuple[int, bool]:
    """k with a^k . phi1 equal to ``start`` on B_L: start lies in the hull at window level."""
    w = hull_lab.so_orbit_limit(A, B, L, min_k=margin + L + 2)
    ak = (1,) * w.k
    same = qm.fingerprint(qm.Acted(phi1, ak), L, spec) == qm.fingerprint(start, L, spec)
    return w.k, same


def s_factor(hist: hull_lab.EmpiricalMeasure) -> hull_lab.EmpiricalMeasure:
    """Push a histogram through v -> s of the mod-3 splitting, value by value."""
    out = hull_lab.EmpiricalMeasure(hist.radius)
    for key, c in hist.counts.items():
        out.add(tuple(hull_lab.decompose_mod3(int(v))[1] for v in key), c)
    return out


def cmd_example_final(cfg: ExperimentConfig) -> Result:
    spec = GroupSpec(2)
    P = build_model_set(cfg)
    p = walk.StepDistribution.uniform(2)
    phi_o = qm.CountingQM((1, 2))
    res = Result()
    res.summary["variant"] = cfg.variant
    L_walk = 2
    if cfg.variant == "Q1":
        T = aperiodic.TwistedSet(phi_o, P)
        approx = aperiodic.twist_approx_check(T, 4, Fraction(30), spec, rat(cfg.C))
        hist = hull_lab.hull_walk(phi_o, p, cfg.steps, L_walk, cfg.seed, spec)
        sep = aperiodic.separation_check(qm.fingerprint(phi_o, 3, spec),
                                         qm.fingerprint(qm.act((1,), phi_o), 3, spec))
        res.table("histogram", ["key", "count"], hist.rows())
        res.summary.update({"twist_approx": approx.as_dict(), "hull_keys": len(hist.counts),
                            "separation_witness": None if sep is None else format_word(sep)})
        res.check("uniform_approximate_lattice", approx.ok)
        res.check("no_fixed_point", len(hist.counts) >= 2)
        res.check("separates", sep is not None)
    elif cfg.variant == "Q2":
        rows, residuals = [], []
        fp = None
        for N in doubling_grid(max(cfg.N, 1)):
            fp = walk.cesaro_harmonize(phi_o, p, N, L_walk + 1, spec)
            r = walk.harmonic_residual(fp, p, L_walk, spec)
            residuals.append(r)
            rows.append([N, format_rational(r)])
        res.table("residuals", ["N", "residual"], rows)
        res.table("fingerprint", ["word", "value"], fp.rows())
        res.check("residual_decreases", residuals[-1] < residuals[0])
    else:
        A = hull_lab.generic_set(max(cfg.K, 2 * L_walk + 1))
        base = qm.rescale3(phi_o)
        phi1 = hull_lab.perturbation_qm(hull_lab.xi_function(A), 1, base, spec)
        T = aperiodic.TwistedSet(phi1, P)
        approx = aperiodic.twist_approx_check(T, 4, Fraction(30), spec, rat(cfg.C))
        res.summary["twist_approx"] = approx.as_dict()
        res.check("uniform_approximate_lattice", approx.ok)
        limit = qm.RightLimit(phi_o, 1)
        hists = []
        for i, q in enumerate(cfg.q):
            B = hull_lab.bernoulli_set(rat(q), cfg.seed)
            start = qm.Sum((qm.Scaled(limit, 3), hull_lab.eta_qm(B)))
            k, same = hull_witness(phi1, start, A, B.on_window(L_walk), L_walk, spec, limit.margin)
            res.check(f"start_{i}_in_hull", same)
            hist = hull_lab.hull_walk(start, p, cfg.steps, L_walk, sub_seed(cfg.seed, i), spec)
            hists.append(hist)
            res.table(f"histogram_{i}", ["key", "count"], hist.rows())
            res.summary.setdefault("starts", []).append(
                {"q": q, "orbit_witness_k": k, "keys": len(hist.counts)})
        tvs = []
        for i in range(len(hists)):
            for j in range(i + 1, len(hists)):
                tv = hull_lab.tv_distance(hists[i], hists[j])
                tv_s = hull_lab.tv_distance(s_factor(hists[i]), s_factor(hists[j]))
                tvs.append([cfg.q[i], cfg.q[j], format_rational(tv), format_rational(tv_s),
                            f"{float(tv):.6f}", f"{float(tv_s):.6f}"])
                res.check(f"separated_{i}_{j}", tv_s >= Fraction(1, 5))
        res.table("tv", ["q1", "q2", "tv", "tv_s_factor", "tv_float", "tv_s_factor_float"], tvs)
    return res


HANDLERS: dict[str, Callable[[ExperimentConfig], Result]] = {
    "defect": cmd_defect,
    "drift": cmd_drift,
    "harmonize": cmd_harmonize,
    "hull-walk": cmd_hull_walk,
    "generic-set": cmd_generic_set,
    "orbit-closure": cmd_orbit_closure,
    "model-set": cmd_model_set,
    "approx-check": cmd_approx_check,
    "twist-check": cmd_twist_check,
    "skew-check": cmd_skew_check,
    "example-final": cmd_example_final,
}


# ---------------------------------------------------------------- output

def write_outputs(cfg: ExperimentConfig, res: Result) -> list[str]:
    out = Path(cfg.out)
    out.mkdir(parents=True, exist_ok=True)
    files = []
    if cfg.format == "csv":
        for name, (header, rows) in res.tables.items():
            path = out / f"{name}.csv"
            with open(path, "w", newline="") as fh:
                w = csv.writer(fh, lineterminator="\n")
                w.writerow(header)
                w.writerows(rows)
            files.append(path.name)
        data_path = out / "report.json"
        data_path.write_text(json.dumps({"ok": res.ok, **res.summary}, indent=2, sort_keys=True) + "\n")
        files.append(data_path.name)
    else:
        payload = {
            "ok": res.ok,
            **res.summary,
            "tables": {n: {"header": h, "rows": r} for n, (h, r) in res.tables.items()},
        }
        data_path = out / f"{cfg.command}.json"
        data_path.write_text(json.dumps(payload, indent=2, sort_keys=True) + "\n")
        files.append(data_path.name)
    manifest = {"config": cfg.to_dict(), "ok": res.ok, "files": sorted(files)}
    (out / "manifest.json").write_text(json.dumps(manifest, indent=2, sort_keys=True) + "\n")
    return files


def run(cfg: ExperimentConfig) -> int:
    res = HANDLERS[cfg.command](cfg)
    write_outputs(cfg, res)
    for name, passed in res.summary.get("checks", {}).items():
        log.info("%s: %s", name, "pass" if passed else "FAIL")
    return 0 if res.ok else 1


# ---------------------------------------------------------------- argparse

def make_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="qmdyn", description=__doc__.splitlines()[0])
    parser.add_argument("-v", "--verbose", action="store_true")
    sub = parser.add_subparsers(dest="command", required=True)
    for name in COMMANDS:
        sp = sub.add_parser(name)
        sp.add_argument("--config", type=Path, help="JSON config file")
        for f in fields(ExperimentConfig):
            if f.name == "command":
                continue
            flag = "--" + f.name.replace("_", "-")
            t = f.type if isinstance(f.type, str) else f.type.__name__
            if t == "bool":
                sp.add_argument(flag, dest=f.name, action=argparse.BooleanOptionalAction, default=None)
            elif t == "list":
                sp.add_argument(flag, dest=f.name, nargs="+", default=None)
            else:
                sp.add_argument(flag, dest=f.name, type=int if t == "int" else str, default=None)
    return parser


def config_from_args(args: argparse.Namespace) -> ExperimentConfig:
    data: dict[str, Any] = {}
    if args.config is not None:
        try:
            data = json.loads(args.config.read_text())
        except (OSError, json.JSONDecodeError) as e:
            raise ConfigError(f"cannot read config: {e}") from None
        if not isinstance(data, dict):
            raise ConfigError("config must be a JSON object")
        if data.get("command", args.command) != args.command:
            raise ConfigError(f"config is for {data['command']!r}, not {args.command!r}")
    data["command"] = args.command
    for f in fields(ExperimentConfig):
        v = getattr(args, f.name, None)
        if f.name != "command" and v is not None:
            data[f.name] = v
    return ExperimentConfig.from_dict(data)


def main(argv: list[str] | None = None) -> int:
    parser = make_parser()
    args = parser.parse_args(argv)
    logging.basicConfig(level=logging.INFO if args.verbose else logging.WARNING,
                        format="%(levelname)s %(message)s")
    try:
        cfg = config_from_args(args)
        return run(cfg)
    except ConfigError as e:
        print(f"qmdyn: invalid config: {e}", file=sys.stderr)
        return 2


if __name__ == "__main__":
    sys.exit(main())
