"""Command-line front end.

Every command prints either aligned text (default) or JSON (``--format json``)
and can also write its JSON report to ``--output``.  Session settings come
from an optional ``key=value`` file (``--config``) and are overridden by flags.

Exit codes: 0 success, 2 usage, 3 dimension cap exceeded, 4 closed-form mismatch,
5 internal consistency failure.
"""
from __future__ import annotations

import argparse
import json
import sys
from dataclasses import dataclass, fields
from typing import Dict, List, Optional, Sequence

from gmpy2 import mpq

from . import acceptance
from .cyclicity import (
    CapExceeded,
    TensorConfig,
    criterion_crosscheck,
    delta,
    is_simple,
    lattice,
    question_scan,
)
from .field import RatFun, scalar_text
from .pool import worker_count
from .repcore import (
    AlgebraParams,
    FundSpec,
    InternalConsistencyError,
    SpecError,
    fundamental_module,
    tableau_count,
)
from .rmat import (
    KINDS,
    PoleError,
    RMatrixKind,
    denominator_of_restriction,
    module_map_check,
    perk_schultz,
    r_plus_minus,
    restricted_fused,
)
from .superlin import RestrictionError

EXIT_OK, EXIT_USAGE, EXIT_CAP, EXIT_MISMATCH, EXIT_INTERNAL = 0, 2, 3, 4, 5
MODES = ("numeric", "symbolic-u", "symbolic-q")


class UsageError(Exception):
    pass


@dataclass
class SessionConfig:
    M: int = 2
    N: int = 1
    q: str = "5/2"
    mode: Optional[str] = None
    dimension_cap: int = 4096
    output: Optional[str] = None
    seed: int = 0
    format: str = "text"

    def validate(self) -> AlgebraParams:
        if self.M < 1 or self.N < 1:
            raise UsageError("M and N must be at least 1")
        try:
            q = mpq(self.q)
        except (ValueError, ZeroDivisionError, TypeError):
            raise UsageError(f"q must be a rational literal p/q, got {self.q!r}") from None
        if q in (0, 1, -1):
            raise UsageError("q must not be 0 or +-1")
        if self.mode is not None and self.mode not in MODES:
            raise UsageError(f"mode must be one of {', '.join(MODES)}")
        if self.mode == "symbolic-q":
            raise UsageError("symbolic-q mode is not supported; q is always an exact rational")
        if self.dimension_cap < self.M + self.N:
            raise UsageError("dimension_cap must be at least M + N")
        if self.format not in ("text", "json"):
            raise UsageError("format must be text or json")
        return AlgebraParams(self.M, self.N, q)


_KEYS = {f.name: f.type for f in fields(SessionConfig)}
_ALIASES = {"cap": "dimension_cap"}


def read_config_file(path: str) -> Dict[str, str]:
    out: Dict[str, str] = {}
    try:
        with open(path, encoding="utf-8") as fh:
            lines = fh.read().splitlines()
    except OSError as exc:
        raise UsageError(f"cannot read config file {path}: {exc.strerror}") from None
    for no, line in enumerate(lines, 1):
        line = line.split("#", 1)[0].strip()
        if not line:
            continue
        if "=" not in line:
            raise UsageError(f"{path}:{no}: expected key=value")
        key, val = (x.strip() for x in line.split("=", 1))
        key = _ALIASES.get(key, key)
        if key not in _KEYS:
            raise UsageError(f"{path}:{no}: unknown key {key!r}")
        out[key] = val
    return out


def _coerce(key: str, val):
    if val is None:
        return None
    if key in ("M", "N", "dimension_cap", "seed"):
        try:
            return int(val)
        except ValueError:
            raise UsageError(f"{key} must be an integer, got {val!r}") from None
    return str(val)


def session_from(args: argparse.Namespace) -> SessionConfig:
    values: Dict[str, object] = {}
    if getattr(args, "config", None):
        values.update(read_config_file(args.config))
    for key in _KEYS:
        flag = getattr(args, key, None)
        if flag is not None:
            values[key] = flag
    return SessionConfig(**{k: _coerce(k, v) for k, v in values.items()})


# ------------------------------------------------------------------ output


def table(rows: Sequence[Sequence[object]], headers: Sequence[str]) -> str:
    cells = [[str(h) for h in headers]] + [[str(c) for c in r] for r in rows]
    widths = [max(len(r[i]) for r in cells) for i in range(len(headers))]
    lines = ["  ".join(c.ljust(w) for c, w in zip(r, widths)).rstrip() for r in cells]
    lines.insert(1, "  ".join("-" * w for w in widths))
    return "\n".join(lines)


def keyvals(pairs: Sequence[Sequence[object]]) -> str:
    if not pairs:
        return ""
    w = max(len(str(k)) for k, _ in pairs)
    return "\n".join(f"{str(k).ljust(w)}  {v}" for k, v in pairs)


def emit(cfg: SessionConfig, report: Dict[str, object], text: str, out=None) -> None:
    out = out or sys.stdout
    js = json.dumps(report, indent=2)
    if cfg.output:
        with open(cfg.output, "w", encoding="utf-8") as fh:
            fh.write(js + "\n")
    out.write((js if cfg.format == "json" else text) + "\n")


def _base(cfg: SessionConfig, command: str) -> Dict[str, object]:
    return {"command": command, "M": cfg.M, "N": cfg.N, "q": scalar_text(mpq(cfg.q)), "seed": cfg.seed}


def _require_mode(cfg: SessionConfig, allowed: Sequence[str], command: str) -> None:
    if cfg.mode is not None and cfg.mode not in allowed:
        raise UsageError(f"{command} runs in {' or '.join(allowed)} mode, not {cfg.mode}")


def _vec_json(v: Dict[int, object]) -> Dict[str, str]:
    return {str(k + 1): scalar_text(x) for k, x in sorted(v.items())}


def parse_factor(text: str) -> FundSpec:
    parts = [p.strip() for p in text.split(",")]
    if len(parts) not in (2, 3):
        raise UsageError(f"factor must be SIGN,R[,A], got {text!r}")
    sign = parts[0]
    try:
        r = int(parts[1])
        a = mpq(parts[2]) if len(parts) == 3 else mpq(1)
    except (ValueError, ZeroDivisionError):
        raise UsageError(f"bad factor {text!r}") from None
    return FundSpec(sign, r, a)


def _config_from(params: AlgebraParams, factors: Sequence[str]) -> TensorConfig:
    if not factors:
        raise UsageError("give at least one --factor SIGN,R,A")
    return TensorConfig(params, tuple(parse_factor(f) for f in factors))


# ---------------------------------------------------------------- commands


def cmd_build(cfg: SessionConfig, params: AlgebraParams, args) -> int:
    _require_mode(cfg, ("numeric",), "build")
    spec = FundSpec(args.sign, args.r, mpq(args.a))
    spec.validate(params)
    ambient = params.kappa ** spec.r
    if ambient > cfg.dimension_cap:
        raise CapExceeded(f"ambient tensor power has dimension {ambient} > cap {cfg.dimension_cap}")
    mod = fundamental_module(params, spec)
    count = tableau_count(params, spec.sign, spec.r)
    if mod.dim != count:
        raise InternalConsistencyError(f"module dimension {mod.dim} differs from the tableau count {count}")
    report = _base(cfg, "build")
    report.update({
        "sign": spec.sign, "r": spec.r, "a": scalar_text(spec.a),
        "dim": mod.dim, "tableau_count": count, "ambient_dim": ambient,
        "weights": [list(w) for w in mod.weights],
        "vectors": {"u1": _vec_json(mod.u1), "u2": _vec_json(mod.u2), "u3": _vec_json(mod.u3)},
    })
    text = keyvals([("module", f"V{spec.sign}_(r={spec.r}, a={scalar_text(spec.a)})"),
                    ("algebra", f"gl({cfg.M}|{cfg.N}), q = {report['q']}"),
                    ("dimension", mod.dim), ("tableaux", count), ("ambient", ambient)])
    text += "\n\n" + table([(i + 1, " ".join(map(str, w))) for i, w in enumerate(mod.weights)], ["basis", "weight"])
    text += "\n\n" + keyvals([(k, " ".join(f"{i}:{x}" for i, x in v.items()))
                              for k, v in report["vectors"].items()])
    emit(cfg, report, text)
    return EXIT_OK


def cmd_rmatrix(cfg: SessionConfig, params: AlgebraParams, args) -> int:
    _require_mode(cfg, ("symbolic-u",), "rmatrix")
    kind = RMatrixKind(args.kind, args.s, args.t)
    u, one = RatFun.gen("u"), RatFun.const(1, "u")
    if kind.tag == "PerkSchultz":
        mat = perk_schultz(params, u, one)
    elif kind.tag == "PlusMinus":
        mat = r_plus_minus(params, u, one)
    else:
        chain, sub, raw = restricted_fused(params, kind.tag, kind.s, kind.t)
        if raw.src.dim > cfg.dimension_cap:
            raise CapExceeded(f"restricted space has dimension {raw.src.dim} > cap {cfg.dimension_cap}")
        div = chain.cleared_by
        mat = raw.map_entries(lambda v: RatFun(v, div) if div is not None else RatFun(v))
    check = module_map_check(params, kind)
    entries = [[r + 1, c + 1, scalar_text(v)] for r, c, v in sorted(mat.entries())]
    report = _base(cfg, "rmatrix")
    report.update({"kind": kind.tag, "s": kind.s, "t": kind.t, "dim": mat.src.dim, "variable": "u = a/b",
                   "entries": entries, "module_map": check})
    text = keyvals([("kind", f"{kind.tag} s={kind.s} t={kind.t}"), ("dimension", mat.src.dim),
                    ("intertwiner", "yes" if check["commutes"] else f"no ({check['first_failure']})")])
    text += "\n\n" + table(entries, ["row", "col", "entry (u = a/b)"])
    emit(cfg, report, text)
    return EXIT_OK if check["commutes"] else EXIT_MISMATCH


def cmd_denoms(cfg: SessionConfig, params: AlgebraParams, args) -> int:
    _require_mode(cfg, ("symbolic-u",), "denoms")
    kinds = [k.strip() for k in args.kinds.split(",") if k.strip()]
    for k in kinds:
        if k not in ("mixed", "same"):
            raise UsageError(f"unknown denominator family {k!r}; use mixed and/or same")
    norms = [n.strip() for n in args.normalization.split(",") if n.strip()]
    for n in norms:
        if n not in ("X", "Y"):
            raise UsageError("normalization must be X and/or Y")
    cells = []
    if "mixed" in kinds:
        smax = params.M if args.s_max is None else min(args.s_max, params.M)
        tmax = params.N if args.t_max is None else min(args.t_max, params.N)
        cells += [RMatrixKind("FusedMixed", s, t) for s in range(1, smax + 1) for t in range(1, tmax + 1)]
    same_cells = []
    if "same" in kinds:
        top = min(params.M, 3)
        smax = top if args.s_max is None else min(args.s_max, top)
        tmax = top if args.t_max is None else min(args.t_max, top)
        same_cells = [RMatrixKind("FusedSame", s, t) for s in range(1, smax + 1) for t in range(1, tmax + 1)]
    reports = [denominator_of_restriction(params, k, "none").to_json() for k in cells]
    reports += [denominator_of_restriction(params, k, n).to_json() for k in same_cells for n in norms]
    bad = [r for r in reports if not r["matches"] or r.get("X_over_Y_matches") is False]
    report = _base(cfg, "denoms")
    report.update({"cells": reports, "all_match": not bad})
    rows = [(r["kind"], r["s"], r["t"], r["normalization"], r["computed_ab"], r["predicted_ab"],
             r["scalar_ratio"] if r["scalar_ratio"] is not None else "-", "yes" if r not in bad else "NO")
            for r in reports]
    text = table(rows, ["kind", "s", "t", "norm", "computed", "predicted", "ratio", "match"]) if rows else "empty grid"
    if bad:
        text += "\n\nmismatch: " + json.dumps(bad[0])
    emit(cfg, report, text)
    return EXIT_MISMATCH if bad else EXIT_OK


def _verdict_text(v) -> str:
    pairs = [("config", v.config.text()), ("C1 C2 C3", f"{v.c1} {v.c2} {v.c3}"),
             ("all Delta nonzero", v.delta_all_nonzero),
             ("highest l-weight", v.brute_hw), ("lowest l-weight", v.brute_lw), ("simple", v.brute_simple)]
    out = keyvals(pairs)
    out += "\n\n" + table([(i + 1, scalar_text(fl), scalar_text(fr)) for i, (fl, fr) in enumerate(v.f_values)],
                          ["i", "f_left", "f_right"])
    out += "\n\n" + table([(k, "ok" if ok else "VIOLATED") for k, ok in v.checks.items()], ["check", "status"])
    return out


def cmd_cyclicity(cfg: SessionConfig, params: AlgebraParams, args) -> int:
    _require_mode(cfg, ("numeric",), "cyclicity")
    config = _config_from(params, args.factor)
    v = criterion_crosscheck(config, cfg.dimension_cap)
    report = _base(cfg, "cyclicity")
    report["verdict"] = v.to_json()
    emit(cfg, report, _verdict_text(v))
    return EXIT_MISMATCH if v.violations else EXIT_OK


def cmd_simplicity(cfg: SessionConfig, params: AlgebraParams, args) -> int:
    _require_mode(cfg, ("numeric",), "simplicity")
    config = _config_from(params, args.factor)
    n = len(config.specs)
    simple = is_simple(config, cfg.dimension_cap)
    values = [(i, j, delta(config, i, j)) for i in range(n) for j in range(n) if i != j]
    deltas = [[i + 1, j + 1, scalar_text(d)] for i, j, d in values]
    dnz = all(d != 0 for _, _, d in values)
    report = _base(cfg, "simplicity")
    report.update({"config": config.to_json(), "dual": config.dual().to_json(), "simple": simple,
                   "delta": deltas, "delta_all_nonzero": dnz, "agrees": simple == dnz})
    text = keyvals([("config", config.text()), ("dual", config.dual().text()), ("simple", simple),
                    ("all Delta nonzero", dnz)])
    text += "\n\n" + table(deltas, ["i", "j", "Delta_ij"])
    emit(cfg, report, text)
    return EXIT_OK if simple == dnz else EXIT_MISMATCH


def cmd_scan(cfg: SessionConfig, params: AlgebraParams, args) -> int:
    _require_mode(cfg, ("numeric",), "scan-question")
    if args.s < 2:
        raise UsageError("--s must be at least 2")
    values = lattice(params.q, args.radius)
    found = question_scan(args.s, params.M, params.N, values, params.q,
                          ranks_all_one=args.ranks_one, fix_first=args.fix_first)
    report = _base(cfg, "scan-question")
    report.update({"s": args.s, "radius": args.radius, "ranks_all_one": args.ranks_one,
                   "fix_first": args.fix_first, "lattice_size": len(values),
                   "counterexamples": [c.to_json() for c in found]})
    text = keyvals([("factors", args.s), ("lattice", f"c*q^(2m), c in {{1,3}}, |m| <= {args.radius}"),
                    ("ranks", "all 1" if args.ranks_one else "all"), ("counterexamples", len(found))])
    if found:
        text += "\n\n" + "\n".join(c.text() for c in found[:20])
    emit(cfg, report, text)
    # a counterexample contradicts a proved case only for s <= 3 or unit ranks
    proved = args.s <= 3 or args.ranks_one
    return EXIT_MISMATCH if found and proved else EXIT_OK


def cmd_verify_all(cfg: SessionConfig, params: AlgebraParams, args) -> int:
    only = args.only.split(",") if args.only else None
    try:
        chosen = acceptance.select(only)
    except ValueError as exc:
        raise UsageError(str(exc)) from None
    try:
        workers = worker_count()
    except ValueError as exc:
        raise UsageError(str(exc)) from None
    ctx = acceptance.RunContext(q=params.q, seed=cfg.seed, cap=cfg.dimension_cap, workers=workers)
    results = []
    for number, name, fn in chosen:
        res = acceptance.run_check(fn, ctx, number, name)
        results.append(res)
        if args.progress:
            print(f"[{number:2d}] {name}: {'pass' if res.passed else 'FAIL'} ({res.seconds:.1f}s)", file=sys.stderr)
    report = _base(cfg, "verify-all")
    report.update({"checks": [r.to_json() for r in results], "all_passed": all(r.passed for r in results)})
    rows = [(r.number, r.name, "pass" if r.passed else "FAIL", r.summary) for r in results]
    emit(cfg, report, table(rows, ["#", "check", "result", "summary"]))
    if any(r.error for r in results):
        return EXIT_INTERNAL
    return EXIT_OK if all(r.passed for r in results) else EXIT_MISMATCH


# ------------------------------------------------------------------ parser


def build_parser() -> argparse.ArgumentParser:
    common = argparse.ArgumentParser(add_help=False)
    g = common.add_argument_group("session")
    g.add_argument("--config", help="key=value file with session settings")
    g.add_argument("--M", type=int, help="even dimension M")
    g.add_argument("--N", type=int, help="odd dimension N")
    g.add_argument("--q", help="deformation parameter as p/q")
    g.add_argument("--mode", help="numeric or symbolic-u")
    g.add_argument("--cap", dest="dimension_cap", type=int, help="dimension cap (default 4096)")
    g.add_argument("--output", help="also write the JSON report here")
    g.add_argument("--seed", type=int, help="seed for every sampled quantity")
    g.add_argument("--format", choices=("text", "json"), help="stdout format")

    p = argparse.ArgumentParser(prog="qsuper", description="Exact checks for fundamental modules of quantum affine gl(M|N).")
    sub = p.add_subparsers(dest="command", required=True)

    b = sub.add_parser("build", parents=[common], help="build a fundamental module")
    b.add_argument("--sign", required=True, choices=("+", "-"))
    b.add_argument("--r", type=int, required=True)
    b.add_argument("--a", default="1", help="spectral parameter (use --a=-3/2 for negatives)")
    b.set_defaults(func=cmd_build)

    r = sub.add_parser("rmatrix", parents=[common], help="print an R-matrix and test the intertwining property")
    r.add_argument("--kind", choices=KINDS, default="PerkSchultz")
    r.add_argument("--s", type=int, default=1)
    r.add_argument("--t", type=int, default=1)
    r.set_defaults(func=cmd_rmatrix)

    d = sub.add_parser("denoms", parents=[common], help="denominators of restricted fused R-matrices")
    d.add_argument("--kinds", default="mixed,same")
    d.add_argument("--s-max", type=int)
    d.add_argument("--t-max", type=int)
    d.add_argument("--normalization", default="X,Y")
    d.set_defaults(func=cmd_denoms)

    for name, func, helptext in (("cyclicity", cmd_cyclicity, "brute-force verdict against every criterion"),
                                 ("simplicity", cmd_simplicity, "simplicity and the Delta table")):
        c = sub.add_parser(name, parents=[common], help=helptext)
        c.add_argument("--factor", action="append", default=[],
                       help="SIGN,R,A (repeatable; write --factor=-,1,2 for a negative sign)")
        c.set_defaults(func=func)

    s = sub.add_parser("scan-question", parents=[common], help="search for all-f-zero points with nonzero Delta product")
    s.add_argument("--s", type=int, default=3)
    s.add_argument("--radius", type=int, default=6)
    s.add_argument("--ranks-one", action="store_true")
    s.add_argument("--fix-first", action="store_true", help="pin the first parameter to 1")
    s.set_defaults(func=cmd_scan)

    v = sub.add_parser("verify-all", parents=[common], help="run the acceptance checks")
    v.add_argument("--only", help=f"comma list from: {', '.join(acceptance.CHECK_NAMES)}")
    v.add_argument("--progress", action="store_true", help="per-check progress on stderr")
    v.set_defaults(func=cmd_verify_all)
    return p


def main(argv: Optional[List[str]] = None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    try:
        cfg = session_from(args)
        params = cfg.validate()
        return args.func(cfg, params, args)
    except (UsageError, SpecError) as exc:
        print(f"qsuper: error: {exc}", file=sys.stderr)
        return EXIT_USAGE
    except CapExceeded as exc:
        print(f"qsuper: cap exceeded: {exc}", file=sys.stderr)
        return EXIT_CAP
    except (InternalConsistencyError, RestrictionError, PoleError) as exc:
        print(f"qsuper: internal consistency failure: {exc}", file=sys.stderr)
        return EXIT_INTERNAL


if __name__ == "__main__":
    sys.exit(main())
