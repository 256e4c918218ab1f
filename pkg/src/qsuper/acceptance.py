"""The twelve acceptance checks as plain functions, shared by the test-suite and
the ``verify-all`` command.

Each check returns a :class:`CheckResult`; ``details`` is JSON-ready and holds
no timings, so reports stay byte-identical between runs.
"""
from __future__ import annotations

import random
import time
from dataclasses import dataclass, field as dc_field
from typing import Callable, Dict, List, Optional, Sequence, Tuple

from gmpy2 import mpq

from .cyclicity import (
    CapExceeded,
    CriterionVerdict,
    TensorConfig,
    all_signatures,
    criterion_crosscheck,
    is_simple,
    lattice,
    off_lattice_sample,
    pair_grid,
    question_scan,
    triple_grid,
)
from .field import scalar_text
from .pool import ordered_map
from .repcore import (
    AlgebraParams,
    FundSpec,
    InternalConsistencyError,
    antipode_check,
    fundamental_module,
    tableau_count,
    weight_multiplicities,
)
from .rmat import RMatrixKind, denominator_of_restriction, module_map_check, qybe_check

DEFAULT_Q = mpq(5, 2)
SECOND_Q = mpq(7, 3)


@dataclass
class RunContext:
    q: object = DEFAULT_Q
    seed: int = 0
    cap: int = 4096
    workers: Optional[int] = None
    _verdicts: Optional[List[CriterionVerdict]] = None

    def verdicts(self) -> List[CriterionVerdict]:
        if self._verdicts is None:
            self._verdicts = ordered_map(_crosscheck, [(c, self.cap) for c in cyclicity_grid(self.q, self.seed)],
                                         self.workers)
        return self._verdicts


@dataclass
class CheckResult:
    number: int
    name: str
    passed: bool
    summary: str
    details: Dict[str, object] = dc_field(default_factory=dict)
    seconds: float = 0.0
    error: Optional[str] = None

    def to_json(self) -> Dict[str, object]:
        out = {"number": self.number, "name": self.name, "passed": self.passed, "summary": self.summary,
               "details": self.details}
        if self.error:
            out["error"] = self.error
        return out


# ----------------------------------------------------------------- helpers


def _rational_triples(rng: random.Random, count: int) -> List[Tuple[object, object, object]]:
    out = []
    while len(out) < count:
        t = tuple(mpq(rng.randint(1, 60), rng.randint(1, 60)) * rng.choice((1, -1)) for _ in range(3))
        if len(set(t)) == 3:
            out.append(t)
    return out


def _mn_pairs(top: int, total: Optional[int] = None) -> List[Tuple[int, int]]:
    return [(m, n) for m in range(1, top + 1) for n in range(1, top + 1) if total is None or m + n <= total]


def _crosscheck(arg) -> CriterionVerdict:
    cfg, cap = arg
    return criterion_crosscheck(cfg, cap)


def _denominator_cell(arg) -> Dict[str, object]:
    M, N, q, tag, s, t, norm = arg
    p = AlgebraParams(M, N, q)
    try:
        return denominator_of_restriction(p, RMatrixKind(tag, s, t), norm).to_json()
    except InternalConsistencyError as exc:
        return {"kind": tag, "s": s, "t": t, "M": M, "N": N, "q": scalar_text(q), "normalization": norm,
                "matches": False, "error": str(exc)}


def cyclicity_grid(q, seed: int) -> List[TensorConfig]:
    """Two-factor lattice configs for M, N <= 2, seeded three-factor configs for
    M + N <= 3, and one off-lattice point per (M, N, signature)."""
    out: List[TensorConfig] = []
    for M, N in ((1, 1), (2, 1), (1, 2), (2, 2)):
        p = AlgebraParams(M, N, q)
        out.extend(pair_grid(p, radius=6))
        rng = random.Random(f"off:{seed}:{M}:{N}")
        out.extend(off_lattice_sample(p, rng, sig) for sig in all_signatures(2))
    for M, N in ((1, 1), (2, 1), (1, 2)):
        p = AlgebraParams(M, N, q)
        out.extend(triple_grid(p, 60, random.Random(f"grid:{seed}:{M}:{N}"), all_signatures(3)))
        rng = random.Random(f"off3:{seed}:{M}:{N}")
        out.extend(off_lattice_sample(p, rng, sig) for sig in all_signatures(3))
    return out


def _tally(verdicts: Sequence[CriterionVerdict], key: str):
    hits = [v for v in verdicts if key in v.checks]
    bad = [v for v in hits if v.checks[key] is False]
    return hits, bad


def _bad_json(bad: Sequence[CriterionVerdict], limit: int = 5):
    return [v.to_json() for v in bad[:limit]]


# ------------------------------------------------------------------ checks


def check_qybe(ctx: RunContext) -> CheckResult:
    rng = random.Random(f"qybe:{ctx.seed}")
    triples = _rational_triples(rng, 20)
    failures = []
    pairs = _mn_pairs(4, total=5)
    for M, N in pairs:
        p = AlgebraParams(M, N, ctx.q)
        for z in triples:
            if not qybe_check(p, *z):
                failures.append({"M": M, "N": N, "z": [scalar_text(x) for x in z]})
    return CheckResult(1, "qybe", not failures,
                       f"{len(pairs)} (M,N) pairs x {len(triples)} triples, {len(failures)} failures",
                       {"pairs": [list(x) for x in pairs], "triples": [[scalar_text(x) for x in z] for z in triples],
                        "failures": failures})


def check_dimensions(ctx: RunContext) -> CheckResult:
    rows, bad = [], []
    for M, N in _mn_pairs(3):
        p = AlgebraParams(M, N, ctx.q)
        for sign, top in (("+", M), ("-", N)):
            for r in range(1, top + 1):
                d = fundamental_module(p, FundSpec(sign, r, mpq(1))).dim
                c = tableau_count(p, sign, r)
                rows.append({"M": M, "N": N, "sign": sign, "r": r, "dim": d, "tableaux": c})
                if d != c:
                    bad.append(rows[-1])
    p = AlgebraParams(2, 2, ctx.q)
    eight = [fundamental_module(p, FundSpec(s, 2, mpq(1))).dim for s in "+-"]
    ok = not bad and eight == [8, 8]
    return CheckResult(2, "dimensions", ok, f"{len(rows)} modules, {len(bad)} mismatches, (2,2,2,+/-) dims {eight}",
                       {"modules": rows, "mismatches": bad})


def check_weights(ctx: RunContext) -> CheckResult:
    bad, count = [], 0
    for M, N in _mn_pairs(3):
        p = AlgebraParams(M, N, ctx.q)
        for sign, top in (("+", M), ("-", N)):
            for r in range(1, top + 1):
                mod = fundamental_module(p, FundSpec(sign, r, mpq(1)))
                mult = weight_multiplicities(mod.ambient, mod.subspace)
                count += 1
                worst = max(mult.values())
                if worst != 1:
                    bad.append({"M": M, "N": N, "sign": sign, "r": r, "max_multiplicity": worst})
    return CheckResult(3, "weights", not bad, f"{count} modules, {len(bad)} with a multiplicity above 1",
                       {"failures": bad})


def check_module_maps(ctx: RunContext) -> CheckResult:
    rows = []
    for M, N in _mn_pairs(2):
        p = AlgebraParams(M, N, ctx.q)
        kinds = [RMatrixKind("PerkSchultz"), RMatrixKind("PlusMinus")]
        kinds += [RMatrixKind("FusedSame", s, t) for s in range(1, M + 1) for t in range(1, M + 1)]
        kinds += [RMatrixKind("FusedMixed", s, t) for s in range(1, M + 1) for t in range(1, N + 1)]
        rows.extend(module_map_check(p, k) for k in kinds)
    bad = [r for r in rows if not r["commutes"]]
    return CheckResult(4, "module-map", not bad, f"{len(rows)} R-matrices, {len(bad)} fail to intertwine",
                       {"results": rows})


def check_mixed_denominators(ctx: RunContext) -> CheckResult:
    qs = [ctx.q] if ctx.q == SECOND_Q else [ctx.q, SECOND_Q]
    cells = [(M, N, q, "FusedMixed", s, t, "none")
             for q in qs for M, N in _mn_pairs(3) for s in range(1, M + 1) for t in range(1, N + 1)]
    reports = ordered_map(_denominator_cell, cells, ctx.workers)
    bad = [r for r in reports if not r["matches"]]
    return CheckResult(5, "mixed-denominators", not bad,
                       f"{len(reports)} cells at q in {[scalar_text(x) for x in qs]}, {len(bad)} mismatches",
                       {"reports": reports})


def check_same_denominators(ctx: RunContext) -> CheckResult:
    cells = [(M, N, ctx.q, "FusedSame", s, t, norm)
             for M, N in _mn_pairs(3) for s in range(1, min(M, 3) + 1) for t in range(1, min(M, 3) + 1)
             for norm in ("X", "Y")]
    reports = ordered_map(_denominator_cell, cells, ctx.workers)
    bad = [r for r in reports if not (r["matches"] and r.get("X_over_Y_matches"))]
    return CheckResult(6, "same-denominators", not bad, f"{len(reports)} cells, {len(bad)} mismatches",
                       {"reports": reports})


def check_sufficiency(ctx: RunContext) -> CheckResult:
    vs = ctx.verdicts()
    sorted_cfgs = [v for v in vs if "-+" not in v.config.signature and len(v.config.specs) in (2, 3)]
    hits, bad = _tally(vs, "sufficiency")
    ok = len(sorted_cfgs) >= 200 and hits and not bad
    return CheckResult(7, "sufficiency", bool(ok),
                       f"{len(sorted_cfgs)} sorted-signature configs, {len(hits)} satisfy C1-C3, {len(bad)} not cyclic",
                       {"sorted_configs": len(sorted_cfgs), "checked": len(hits), "violations": _bad_json(bad)})


def check_necessity(ctx: RunContext) -> CheckResult:
    vs = ctx.verdicts()
    counts, bad_all = {}, []
    for key in ("necessity_c3", "necessity_c1", "necessity_c2"):
        hits, bad = _tally(vs, key)
        counts[key] = len(hits)
        bad_all.extend(bad)
    ok = all(counts.values()) and not bad_all
    return CheckResult(8, "necessity", ok, f"violating points checked {counts}, {len(bad_all)} still cyclic",
                       {"checked": counts, "violations": _bad_json(bad_all)})


def _small_rank_example(q) -> List[Dict[str, object]]:
    p = AlgebraParams(1, 1, q)
    a = mpq(1)
    rows = []
    for b in [a] + lattice(q, 3):
        cfg = TensorConfig(p, (FundSpec("+", 1, a * q ** 2), FundSpec("-", 1, b * q ** -2)))
        rows.append({"a": scalar_text(a), "b": scalar_text(b), "simple": is_simple(cfg), "expected": a != b})
    return rows


def check_simplicity(ctx: RunContext) -> CheckResult:
    vs = ctx.verdicts()
    d_hits, d_bad = _tally(vs, "delta_criterion")
    p_hits, p_bad = _tally(vs, "pairwise_reduction")
    example = _small_rank_example(ctx.q)
    ex_bad = [r for r in example if r["simple"] != r["expected"]]
    non_simple = sum(1 for v in vs if not v.brute_simple)
    ok = d_hits and p_hits and not d_bad and not p_bad and not ex_bad
    return CheckResult(9, "simplicity", bool(ok),
                       f"delta criterion on {len(d_hits)} configs ({non_simple} not simple), pairwise on {len(p_hits)}, "
                       f"{len(d_bad) + len(p_bad) + len(ex_bad)} violations",
                       {"delta_violations": _bad_json(d_bad), "pairwise_violations": _bad_json(p_bad),
                        "example": example})


def check_positive_only(ctx: RunContext) -> CheckResult:
    vs = ctx.verdicts()
    hits, bad = _tally(vs, "positive_only")
    witnesses = [v for v in vs
                 if (v.config.params.M, v.config.params.N) == (2, 1) and v.config.signature == "+-"
                 and v.brute_hw and v.brute_lw and not v.brute_simple]
    ok = hits and not bad and witnesses
    return CheckResult(10, "positive-only", bool(ok),
                       f"{len(hits)} all-positive configs, {len(bad)} violations, {len(witnesses)} mixed witnesses",
                       {"violations": _bad_json(bad), "witnesses": [w.config.to_json() for w in witnesses]})


def check_antipode(ctx: RunContext) -> CheckResult:
    rows = [antipode_check(AlgebraParams(M, N, ctx.q), kind) for M, N in _mn_pairs(2) for kind in ("W", "V")]
    bad = [r for r in rows if not r["identity"] or r.get("closed_form") is False]
    return CheckResult(11, "antipode", not bad, f"{len(rows)} inversions, {len(bad)} failures", {"results": rows})


def _scan_cell(arg):
    M, N, q = arg
    found = question_scan(3, M, N, lattice(q, 6), q)
    return {"M": M, "N": N, "counterexamples": [c.to_json() for c in found]}


def check_question(ctx: RunContext) -> CheckResult:
    rows = ordered_map(_scan_cell, [(M, N, ctx.q) for M, N in _mn_pairs(3)], ctx.workers)
    total = sum(len(r["counterexamples"]) for r in rows)
    return CheckResult(12, "question", total == 0, f"9 (M,N) pairs scanned at s=3, {total} counterexamples",
                       {"results": rows})


CHECKS: List[Tuple[int, str, Callable[[RunContext], CheckResult]]] = [
    (1, "qybe", check_qybe),
    (2, "dimensions", check_dimensions),
    (3, "weights", check_weights),
    (4, "module-map", check_module_maps),
    (5, "mixed-denominators", check_mixed_denominators),
    (6, "same-denominators", check_same_denominators),
    (7, "sufficiency", check_sufficiency),
    (8, "necessity", check_necessity),
    (9, "simplicity", check_simplicity),
    (10, "positive-only", check_positive_only),
    (11, "antipode", check_antipode),
    (12, "question", check_question),
]

CHECK_NAMES = [name for _, name, _ in CHECKS]


def select(only: Optional[Sequence[str]]) -> List[Tuple[int, str, Callable[[RunContext], CheckResult]]]:
    if not only:
        return list(CHECKS)
    wanted = []
    for item in only:
        item = item.strip()
        hit = [c for c in CHECKS if c[1] == item or str(c[0]) == item]
        if not hit:
            raise ValueError(f"unknown check {item!r}; choose from {', '.join(CHECK_NAMES)}")
        wanted.extend(h for h in hit if h not in wanted)
    return sorted(wanted)


def run_check(fn: Callable[[RunContext], CheckResult], ctx: RunContext, number: int, name: str) -> CheckResult:
    """Run one check; internal consistency errors become a failed result with the message.
    A cap overflow propagates."""
    t0 = time.perf_counter()
    try:
        res = fn(ctx)
    except InternalConsistencyError as exc:
        res = CheckResult(number, name, False, "internal consistency failure", error=str(exc))
    except CapExceeded:
        raise
    res.seconds = time.perf_counter() - t0
    return res
