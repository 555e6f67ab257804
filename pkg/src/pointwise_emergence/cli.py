"""Command-line front end.

Exit codes: 0 success, 1 a check failed, 2 usage or configuration error.
"""
from __future__ import annotations

import argparse
import csv
import json
import os
import sys
from fractions import Fraction

from . import checks
from .coded_orbit import NewhouseRealization, SyntheticSpace, realize_shift_point, realize_synthetic_orbit
from .emergence import (accumulation_samples, emergence_curve, emergence_exponent, parse_eps_grid, rho_L,
                        run_times, verify_simplex_in_accumulation)
from .measures import PeriodicFamily, lattice_grid
from .scheduling import NewhouseOrder, ShiftCode, build_master_code, build_shift_code, code_from_dict
from .shift import default_depth

DEFAULTS = {
    "kind": "shift",
    "m": 2,
    "words": ["1", "2", "12", "112"],
    "depth": None,
    "L_max": 1,
    "eps_tilde": "dyadic",
    "net_denominators": None,
    "z0": 1,
    "hat_word": "1",
    "eps_grid": "dyadic:1,6",
    "windows": [],
    "per_run": 0,
    "prune": 1e-9,
    "out_dir": "out",
    "seed": 0,
    "jobs": 1,
}


class ConfigError(ValueError):
    pass


def _fail(msg: str) -> int:
    print(f"error: {msg}", file=sys.stderr)
    return 2


def load_config(path: str | None, overrides: dict) -> dict:
    cfg = dict(DEFAULTS)
    if path:
        if not os.path.exists(path):
            raise ConfigError(f"config file {path} not found")
        with open(path) as fh:
            try:
                data = json.load(fh)
            except json.JSONDecodeError as exc:
                raise ConfigError(f"config is not valid JSON: {exc}") from exc
        unknown = set(data) - set(DEFAULTS)
        if unknown:
            raise ConfigError(f"unknown config fields {sorted(unknown)}")
        cfg.update(data)
    cfg.update({k: v for k, v in overrides.items() if v is not None})
    validate_config(cfg)
    return cfg


def eps_tilde_values(cfg: dict) -> dict:
    spec = cfg["eps_tilde"]
    L_max = cfg["L_max"]
    if spec == "dyadic":
        return {L: Fraction(1, 2 ** L) for L in range(1, L_max + 1)}
    if not isinstance(spec, list) or len(spec) < L_max:
        raise ConfigError("eps_tilde must be 'dyadic' or a list with one value per level")
    try:
        return {L: Fraction(str(v)) for L, v in enumerate(spec[:L_max], start=1)}
    except (ValueError, ZeroDivisionError) as exc:
        raise ConfigError(f"bad eps_tilde value: {exc}") from exc


def validate_config(cfg: dict):
    if cfg["kind"] not in ("shift", "master"):
        raise ConfigError("kind must be 'shift' or 'master'")
    if not isinstance(cfg["L_max"], int) or cfg["L_max"] < 1:
        raise ConfigError("L_max must be a positive integer")
    if not isinstance(cfg["m"], int) or cfg["m"] < 2:
        raise ConfigError("m must be an integer >= 2")
    for L, v in eps_tilde_values(cfg).items():
        if not 0 < v < 2:
            raise ConfigError(f"eps_tilde[{L}] = {v} outside (0, 2)")
    if len(cfg["words"]) < cfg["L_max"] + 1:
        raise ConfigError(f"L_max={cfg['L_max']} needs {cfg['L_max'] + 1} anchor words")
    dens = cfg["net_denominators"]
    if dens is not None and (len(dens) < cfg["L_max"] or any(int(d) < 1 for d in dens)):
        raise ConfigError("net_denominators needs a positive integer per level")
    if cfg["z0"] < 1:
        raise ConfigError("z0 must be at least 1")
    try:
        parse_eps_grid(cfg["eps_grid"])
    except (ValueError, TypeError) as exc:
        raise ConfigError(f"bad eps grid {cfg['eps_grid']!r}") from exc
    if int(cfg["jobs"]) < 1:
        raise ConfigError("jobs must be positive")


def family_for(cfg: dict, code=None) -> PeriodicFamily:
    depth = cfg["depth"] or default_depth(cfg["m"])
    words = cfg["words"][:cfg["L_max"] + 1]
    if isinstance(code, ShiftCode) and code.words:
        words = code.words
    try:
        if cfg["kind"] == "master":
            order = NewhouseOrder(cfg["z0"])
            return PeriodicFamily.from_words(words, cfg["m"], depth=depth, hat_word=cfg["hat_word"],
                                             zeta=order.zeta)
        return PeriodicFamily.from_words(words, cfg["m"], depth=depth)
    except ValueError as exc:
        raise ConfigError(str(exc)) from exc


def _nets(cfg):
    dens = cfg["net_denominators"]
    if dens is None:
        return None
    return {L: lattice_grid(L, int(dens[L - 1])) for L in range(1, cfg["L_max"] + 1)}


def build_code(cfg: dict):
    fam = family_for(cfg)
    eps = eps_tilde_values(cfg)
    if cfg["kind"] == "master":
        order = NewhouseOrder(cfg["z0"])
        spec = NewhouseRealization(order, max(fam.periods))
        return build_master_code(order, eps_tilde=lambda L: eps[L], nets=_nets(cfg), L_max=cfg["L_max"],
                                 first_index=spec.k_D)
    return build_shift_code(fam, eps_tilde=lambda L: eps[L], nets=_nets(cfg), L_max=cfg["L_max"])


def _dump(obj, path):
    text = json.dumps(obj, sort_keys=True, indent=1) + "\n"
    if path in (None, "-"):
        sys.stdout.write(text)
    else:
        os.makedirs(os.path.dirname(os.path.abspath(path)), exist_ok=True)
        with open(path, "w", newline="") as fh:
            fh.write(text)


def _load_code(path):
    if not path or not os.path.exists(path):
        raise ConfigError(f"code file {path} not found")
    with open(path) as fh:
        data = json.load(fh)
    return code_from_dict(data.get("code", data))


def samples_for(code, cfg: dict):
    fam = family_for(cfg, code)
    depth = fam.metric.depth
    if isinstance(code, ShiftCode):
        x = realize_shift_point(code, fam)
        extra = run_times(code, int(cfg["per_run"]))
        return fam, accumulation_samples(x, code, depth, extra_times=extra, prune=float(cfg["prune"]))
    spec = NewhouseRealization(code.order, max(fam.periods))
    orbit = realize_synthetic_orbit(spec, SyntheticSpace(fam), code)
    return fam, accumulation_samples(orbit, code)


# --- commands ------------------------------------------------------------------

def cmd_build_code(args, cfg) -> int:
    code = build_code(cfg)
    problems = code.verify()
    ok = not problems and all(c["ok"] for b in code.blocks for c in b.conditions.values())
    _dump({"code": code.to_dict(), "verification": {"problems": problems, "pass": ok}}, args.out)
    return 0 if ok else 1


def cmd_realize(args, cfg) -> int:
    code = _load_code(args.code)
    fam = family_for(cfg, code)
    stop = args.stop
    rows = []
    if isinstance(code, ShiftCode):
        x = realize_shift_point(code, fam, tail=None)
        stop = min(stop, x.horizon)
        header = ["n", "symbol"]
        rows = [[n, x.symbol(n)] for n in range(args.start, stop)]
    else:
        spec = NewhouseRealization(code.order, max(fam.periods))
        orbit = realize_synthetic_orbit(spec, SyntheticSpace(fam), code)
        stop = min(stop, orbit.horizon)
        header = ["n", "anchor", "phase", "tag"]
        for n in range(args.start, stop):
            loc = orbit.location(n)
            rows.append([n, loc["anchor"], loc["phase"], loc["tag"]])
    out = sys.stdout if args.out in (None, "-") else open(args.out, "w", newline="")
    try:
        w = csv.writer(out, lineterminator="\n")
        w.writerow(header)
        w.writerows(rows)
    finally:
        if out is not sys.stdout:
            out.close()
    return 0


def _curve(code, cfg):
    fam, S = samples_for(code, cfg)
    theory = None
    if isinstance(code, ShiftCode):
        L = max(b.L for b in code.blocks)
        rho, _ = rho_L(fam.subfamily(L + 1), L)
        theory = {"zeta": float(fam.zeta) if fam.zeta is not None else 1.0, "rho": rho, "L": L}
    curve = emergence_curve(S, parse_eps_grid(cfg["eps_grid"]), fam.metric, theory=theory, jobs=int(cfg["jobs"]))
    return fam, S, curve


def cmd_emergence_curve(args, cfg) -> int:
    code = _load_code(args.code)
    _, _, curve = _curve(code, cfg)
    prefix = args.out or os.path.join(cfg["out_dir"], "curve")
    os.makedirs(os.path.dirname(os.path.abspath(prefix)), exist_ok=True)
    curve.to_csv(prefix + ".csv")
    curve.to_json(prefix + ".json")
    return 0


def _strip_timing(reports):
    return [{k: v for k, v in r.items() if k != "seconds"} for r in reports]


def cmd_verify_lemmas(args, cfg) -> int:
    names = args.suite or None
    unknown = set(names or ()) - set(checks.SUITES)
    if unknown:
        return _fail(f"unknown suites {sorted(unknown)}")
    reports = checks.run_suites(names, seed=int(cfg["seed"]))
    for r in reports:
        print(f"{'PASS' if r['passed'] else 'FAIL'} {r['name']} ({r['seconds']} s)", file=sys.stderr)
    _dump({"suites": _strip_timing(reports), "pass": all(r["passed"] for r in reports)}, args.out)
    return 0 if all(r["passed"] for r in reports) else 1


def cmd_export(args, cfg) -> int:
    code = _load_code(args.code)
    if args.what == "blocks":
        out = sys.stdout if args.out in (None, "-") else open(args.out, "w", newline="")
        try:
            w = csv.writer(out, lineterminator="\n")
            if isinstance(code, ShiftCode):
                w.writerow(["block", "L", "t", "n", "checkpoint"])
                for i, b in enumerate(code.blocks):
                    w.writerow([i, b.L, " ".join(map(str, b.t)), " ".join(map(str, b.n)), b.checkpoint])
            else:
                w.writerow(["block", "L", "t", "indices", "checkpoint"])
                for i, (b, n) in enumerate(zip(code.blocks, code.checkpoints())):
                    w.writerow([i, b.L, " ".join(map(str, b.t)), " ".join(map(str, b.k)), n])
        finally:
            if out is not sys.stdout:
                out.close()
        return 0
    _, S = samples_for(code, cfg)
    _dump({"times": [str(t) for t in S.times], "provenance": S.provenance,
           "measures": [mu.to_dict() for mu in S.measures]}, args.out)
    return 0


def cmd_run(args, cfg) -> int:
    out_dir = cfg["out_dir"]
    os.makedirs(out_dir, exist_ok=True)
    code = build_code(cfg)
    problems = code.verify()
    _dump({"code": code.to_dict(), "verification": {"problems": problems, "pass": not problems}},
          os.path.join(out_dir, "code.json"))
    fam, S, curve = _curve(code, cfg)
    curve.to_csv(os.path.join(out_dir, "curve.csv"))
    curve.to_json(os.path.join(out_dir, "curve.json"))
    exps = []
    for win in cfg["windows"]:
        try:
            e = emergence_exponent(curve, tuple(win))
        except ValueError as exc:
            e = None
            print(f"window {win}: {exc}", file=sys.stderr)
        exps.append({"window": list(win), "exponent": e})
    checks_out = {"code_conditions": not problems}
    checks_out["theory_bound"] = all(r.pack >= r.theory for r in curve.rows
                                     if r.theory is not None and _grid_fine(code, r.eps))
    if isinstance(code, ShiftCode):
        cp = S.checkpoints()
        ok = True
        for L in range(1, cfg["L_max"] + 1):
            net = sorted({b.t for b in code.blocks if b.L == L})
            tol = checks.coverage_tolerance(code.eps_tilde[L], L, net)
            rep = verify_simplex_in_accumulation(cp, fam.subfamily(L + 1), L, net, tol)
            ok = ok and rep["pass"]
        checks_out["net_coverage"] = ok
    summary = {"n_samples": len(S), "n_distinct": curve.n_samples, "exponents": exps, "checks": checks_out}
    status = all(checks_out.values())
    if args.verify_lemmas:
        reports = checks.run_suites(seed=int(cfg["seed"]))
        summary["suites"] = _strip_timing(reports)
        status = status and all(r["passed"] for r in reports)
    summary["pass"] = status
    _dump(summary, os.path.join(out_dir, "summary.json"))
    return 0 if status else 1


def _grid_fine(code, eps) -> bool:
    # the theory bound applies when the checkpoints hold a grid of spacing <= eps / (2(L+1))
    if not isinstance(code, ShiftCode):
        return False
    L = max(b.L for b in code.blocks)
    ts = [b.t for b in code.blocks if b.L == L]
    den = max(max(v.denominator for v in t) for t in ts)
    full = len(ts) == len(lattice_grid(L, den))
    return full and 1 / den <= eps / (2 * (L + 1))


# --- entry point -----------------------------------------------------------------

def make_parser() -> argparse.ArgumentParser:
    p = argparse.ArgumentParser(prog="pointwise-emergence")
    common = argparse.ArgumentParser(add_help=False)
    common.add_argument("--config", help="JSON experiment config")
    common.add_argument("--L-max", dest="L_max", type=int)
    common.add_argument("--eps-grid", dest="eps_grid")
    common.add_argument("--seed", type=int)
    common.add_argument("--jobs", type=int)
    common.add_argument("--out-dir", dest="out_dir")
    common.add_argument("--out", help="output path ('-' for stdout)")
    sub = p.add_subparsers(dest="command", required=True)
    sub.add_parser("build-code", parents=[common], help="construct and verify a code")
    r = sub.add_parser("realize", parents=[common], help="write orbit data for a time range")
    r.add_argument("--code", required=True)
    r.add_argument("--start", type=int, default=0)
    r.add_argument("--stop", type=int, default=1000)
    e = sub.add_parser("emergence-curve", parents=[common], help="covering/packing counts over an eps grid")
    e.add_argument("--code", required=True)
    v = sub.add_parser("verify-lemmas", parents=[common], help="run the randomized verification suites")
    v.add_argument("--suite", action="append", help="suite name (repeatable)")
    x = sub.add_parser("export", parents=[common], help="export blocks (CSV) or checkpoint samples (JSON)")
    x.add_argument("--code", required=True)
    x.add_argument("--what", choices=["blocks", "samples"], default="blocks")
    run = sub.add_parser("run", parents=[common], help="build, sample and fit in one go")
    run.add_argument("--verify-lemmas", action="store_true")
    return p


COMMANDS = {
    "build-code": cmd_build_code,
    "realize": cmd_realize,
    "emergence-curve": cmd_emergence_curve,
    "verify-lemmas": cmd_verify_lemmas,
    "export": cmd_export,
    "run": cmd_run,
}


def main(argv=None) -> int:
    if hasattr(sys, "set_int_max_str_digits"):
        sys.set_int_max_str_digits(0)
    args = make_parser().parse_args(argv)
    overrides = {k: getattr(args, k) for k in ("L_max", "eps_grid", "seed", "jobs", "out_dir")}
    try:
        cfg = load_config(args.config, overrides)
        return COMMANDS[args.command](args, cfg)
    except ConfigError as exc:
        return _fail(str(exc))
    except OSError as exc:
        return _fail(str(exc))


if __name__ == "__main__":
    sys.exit(main())
