"""Brute-force highest/lowest l-weight and simplicity tests for tensor products
of fundamental modules, and the closed-form criteria they are compared with.

A tensor product is of highest l-weight when the span closure of the tensor of
highest l-weight vectors under every realised generator is the whole space.
On a product with L evaluation legs all series coefficients above L vanish, so
the generator set is finite.
"""
from __future__ import annotations

import random
from dataclasses import dataclass, field as dc_field
from itertools import product
from typing import Dict, Iterable, List, Optional, Sequence, Tuple

from gmpy2 import mpq

from .field import scalar_text
from .repcore import AlgebraParams, FundSpec, InternalConsistencyError, RepTensor, dual_spec, fundamental_module
from .superlin import span_closure

DEFAULT_CAP = 4096


class CapExceeded(RuntimeError):
    pass


@dataclass(frozen=True)
class TensorConfig:
    params: AlgebraParams
    specs: Tuple[FundSpec, ...]

    def __post_init__(self):
        object.__setattr__(self, "specs", tuple(self.specs))
        for s in self.specs:
            s.validate(self.params)

    @property
    def signature(self) -> str:
        return "".join(s.sign for s in self.specs)

    def key(self):
        p = self.params
        return (p.M, p.N, p.q, tuple((s.sign, s.r, s.a) for s in self.specs))

    def text(self) -> str:
        return " | ".join(s.text() for s in self.specs)

    def to_json(self) -> Dict[str, object]:
        p = self.params
        return {
            "M": p.M,
            "N": p.N,
            "q": scalar_text(p.q),
            "factors": [{"sign": s.sign, "r": s.r, "a": scalar_text(s.a)} for s in self.specs],
        }

    def dual(self) -> "TensorConfig":
        return TensorConfig(self.params, tuple(dual_spec(self.params, s) for s in self.specs))

    def sub(self, idx: Sequence[int]) -> "TensorConfig":
        return TensorConfig(self.params, tuple(self.specs[i] for i in idx))


# ------------------------------------------------------------- criteria


def sigma_set(r1: int, r2: int, q) -> set:
    if r1 < 0 or r2 < 0:
        raise ValueError("ranks must be nonnegative")
    m = min(r1, r2)
    q = mpq(q)
    return {q ** (2 * l) for l in range(r2 - m + 1, r2 + 1)}


def check_conditions(config: TensorConfig) -> Tuple[bool, bool, bool]:
    """(C1, C2, C3) with positives and negatives read in their given order."""
    p = config.params
    q = p.q
    pos = [s for s in config.specs if s.sign == "+"]
    neg = [s for s in config.specs if s.sign == "-"]
    c1 = all(pos[j].a / pos[i].a not in sigma_set(pos[i].r, pos[j].r, q)
             for i in range(len(pos)) for j in range(i + 1, len(pos)))
    c2 = all(neg[i].a / neg[j].a not in sigma_set(neg[i].r, neg[j].r, q)
             for i in range(len(neg)) for j in range(i + 1, len(neg)))
    c3 = all(x.a * p.qpow(-2 * x.r) != y.a * p.qpow(2) for x in pos for y in neg)
    return c1, c2, c3


def delta(config: TensorConfig, i: int, j: int):
    if i == j:
        raise ValueError("delta needs two distinct factors")
    return delta_pair(config.params, config.specs[i], config.specs[j])


def delta_pair(p: AlgebraParams, x: FundSpec, y: FundSpec):
    qp = p.qpow
    if x.sign == y.sign:
        m = min(x.r, y.r)
        sgn = -1 if x.sign == "+" else 1
        out = mpq(1)
        for l in range(1, m + 1):
            out *= x.a - y.a * qp(sgn * 2 * (y.r - m + l))
        return out
    if x.sign == "+":
        return x.a - y.a * qp(2 * x.r + 2)
    return x.a - y.a * qp(-2 * p.M + 2 * p.N - 2 * x.r - 2)


def k_pair(p: AlgebraParams, x: FundSpec, y: FundSpec):
    """(K^l, K^r) for the ordered pair (x, y)."""
    qp = p.qpow
    if x.sign == y.sign:
        return mpq(1), mpq(1)
    if x.sign == "+":
        return x.a - y.a * qp(4), x.a - y.a * qp(2 * x.r + 2 * y.r)
    shift = -2 * p.M + 2 * p.N
    return x.a - y.a * qp(shift - 4), x.a - y.a * qp(shift - 2 * x.r - 2 * y.r)


def kf_values(config: TensorConfig):
    """Per factor i: (K^l_{i.}, K^r_{.i}, f_i^l, f_i^r) with the K lists over j != i."""
    p = config.params
    sp = config.specs
    n = len(sp)
    out = []
    for i in range(n):
        kl = [k_pair(p, sp[i], sp[j])[0] for j in range(n) if j != i]
        kr = [k_pair(p, sp[j], sp[i])[1] for j in range(n) if j != i]
        fl = mpq(1)
        for j in range(i):
            fl *= delta_pair(p, sp[i], sp[j])
        for v in kl:
            fl *= v
        fr = mpq(1)
        for v in kr:
            fr *= v
        for j in range(i + 1, n):
            fr *= delta_pair(p, sp[j], sp[i])
        out.append((kl, kr, fl, fr))
    return out


def delta_all_nonzero(config: TensorConfig) -> bool:
    n = len(config.specs)
    return all(delta(config, i, j) for i in range(n) for j in range(n) if i != j)


# ----------------------------------------------------------- brute force


def _check_cap(config: TensorConfig, cap: int) -> None:
    dim = 1
    for s in config.specs:
        dim *= fundamental_module(config.params, s).dim
    if dim > cap:
        raise CapExceeded(f"tensor product has dimension {dim} > cap {cap}")


def _closure_is_full(config: TensorConfig, which: str) -> bool:
    rep = RepTensor(config.params, config.specs)
    seed = rep.pure(which)
    gens = rep.generators()
    # guard: the first coefficient past the leg count must vanish
    k = config.params.kappa
    for fam in ("s", "t"):
        for i in range(k):
            for j in range(k):
                if not rep.module._compute(fam, i, j, rep.legs + 1).is_zero():
                    raise InternalConsistencyError("series coefficient beyond the leg count is nonzero")
    sub = span_closure([seed], gens, rep.space)
    return sub.dim == rep.dim


_CACHE: Dict[tuple, bool] = {}


def _cached(config: TensorConfig, which: str, cap: int) -> bool:
    _check_cap(config, cap)
    key = (config.key(), which)
    hit = _CACHE.get(key)
    if hit is None:
        hit = _closure_is_full(config, which)
        _CACHE[key] = hit
    return hit


def is_highest_lweight(config: TensorConfig, cap: int = DEFAULT_CAP) -> bool:
    return _cached(config, "u1", cap)


def is_lowest_lweight(config: TensorConfig, cap: int = DEFAULT_CAP) -> bool:
    return _cached(config, "u3", cap)


def is_simple(config: TensorConfig, cap: int = DEFAULT_CAP) -> bool:
    return is_highest_lweight(config, cap) and is_highest_lweight(config.dual(), cap)


def pairwise_simple(config: TensorConfig, cap: int = DEFAULT_CAP) -> bool:
    n = len(config.specs)
    return all(is_simple(config.sub((i, j)), cap) for i in range(n) for j in range(i + 1, n))


@dataclass
class CriterionVerdict:
    config: TensorConfig
    c1: bool
    c2: bool
    c3: bool
    delta_all_nonzero: bool
    f_values: List[Tuple[object, object]]
    brute_hw: bool
    brute_lw: bool
    brute_simple: bool
    checks: Dict[str, Optional[bool]] = dc_field(default_factory=dict)

    @property
    def violations(self) -> List[str]:
        return [k for k, v in self.checks.items() if v is False]

    def to_json(self) -> Dict[str, object]:
        return {
            "config": self.config.to_json(),
            "signature": self.config.signature,
            "c1": self.c1,
            "c2": self.c2,
            "c3": self.c3,
            "delta_all_nonzero": self.delta_all_nonzero,
            "f_values": [[scalar_text(a), scalar_text(b)] for a, b in self.f_values],
            "brute_hw": self.brute_hw,
            "brute_lw": self.brute_lw,
            "brute_simple": self.brute_simple,
            "checks": self.checks,
        }


def _is_sorted_signature(sig: str) -> bool:
    return "-+" not in sig


def criterion_crosscheck(config: TensorConfig, cap: int = DEFAULT_CAP, pairwise: bool = True) -> CriterionVerdict:
    c1, c2, c3 = check_conditions(config)
    dnz = delta_all_nonzero(config)
    kf = kf_values(config)
    hw = is_highest_lweight(config, cap)
    lw = is_lowest_lweight(config, cap)
    simple = is_simple(config, cap)
    sig = config.signature
    checks: Dict[str, Optional[bool]] = {}
    if _is_sorted_signature(sig) and c1 and c2 and c3:
        checks["sufficiency"] = hw
    n = len(config.specs)
    npos = sig.count("+")
    if n == 2 and _is_sorted_signature(sig):
        # necessity at two factors: the relevant condition fails => not hw
        if npos == 1 and not c3:
            checks["necessity_c3"] = not hw
        if npos == 2 and not c1:
            checks["necessity_c1"] = not hw
        if npos == 0 and not c2:
            checks["necessity_c2"] = not hw
    checks["delta_criterion"] = simple == dnz
    if pairwise and n > 2:
        checks["pairwise_reduction"] = simple == pairwise_simple(config, cap)
    if npos == n:
        checks["positive_only"] = simple == (hw and lw)
    return CriterionVerdict(config, c1, c2, c3, dnz, [(fl, fr) for _, _, fl, fr in kf], hw, lw, simple, checks)


# ------------------------------------------------------------------ grids


def lattice(q, radius: int = 6, scales: Sequence[int] = (1, 3)) -> List[object]:
    q = mpq(q)
    return [mpq(c) * q ** (2 * m) for c in scales for m in range(-radius, radius + 1)]


def _specs_for(params: AlgebraParams, sign: str) -> List[int]:
    return list(range(1, (params.M if sign == "+" else params.N) + 1))


def pair_grid(params: AlgebraParams, radius: int = 6, signatures: Iterable[str] = ("++", "+-", "--", "-+")) -> List[TensorConfig]:
    """Two-factor configs with a_1 = 1 and a_2 on the q^2 lattice (c = 1 and c = 3)."""
    out = []
    for sig in signatures:
        for r1 in _specs_for(params, sig[0]):
            for r2 in _specs_for(params, sig[1]):
                for a2 in lattice(params.q, radius, scales=(1,)):
                    out.append(TensorConfig(params, (FundSpec(sig[0], r1, mpq(1)), FundSpec(sig[1], r2, a2))))
                out.append(TensorConfig(params, (FundSpec(sig[0], r1, mpq(1)), FundSpec(sig[1], r2, mpq(3)))))
    return out


def triple_grid(params: AlgebraParams, count: int, rng: random.Random, signatures: Sequence[str],
                radius: int = 6, near: int = 3) -> List[TensorConfig]:
    """Seeded three-factor configs; exponents are biased towards small |m| so that
    the degenerate points are well represented."""
    out = []
    seen = set()
    tries = 0
    while len(out) < count and tries < 50 * count:
        tries += 1
        sig = rng.choice(list(signatures))
        specs = []
        for k, sg in enumerate(sig):
            r = rng.choice(_specs_for(params, sg))
            if k == 0:
                a = mpq(1)
            else:
                m = rng.randint(-near, near) if rng.random() < 0.85 else rng.randint(-radius, radius)
                c = 3 if rng.random() < 0.1 else 1
                a = mpq(c) * params.q ** (2 * m)
            specs.append(FundSpec(sg, r, a))
        cfg = TensorConfig(params, tuple(specs))
        if cfg.key() in seen:
            continue
        seen.add(cfg.key())
        out.append(cfg)
    return out


def off_lattice_sample(params: AlgebraParams, rng: random.Random, sig: str) -> TensorConfig:
    specs = []
    for k, sg in enumerate(sig):
        r = rng.choice(_specs_for(params, sg))
        a = mpq(1) if k == 0 else mpq(rng.randint(2, 97), rng.randint(2, 97)) + mpq(1, 7919)
        specs.append(FundSpec(sg, r, a))
    return TensorConfig(params, tuple(specs))


def sorted_signatures(n: int) -> List[str]:
    return ["+" * k + "-" * (n - k) for k in range(n, -1, -1)]


def all_signatures(n: int) -> List[str]:
    return ["".join(p) for p in product("+-", repeat=n)]


# ------------------------------------------------------------ question scan


def question_scan(s: int, M: int, N: int, values: Sequence[object], q=mpq(5, 2),
                  ranks_all_one: bool = False, fix_first: bool = False) -> List[TensorConfig]:
    """Points where every f_i^l and f_i^r vanishes while prod_{i<j} Delta_ij does not.

    ``values`` is the list of allowed spectral parameters.  With ``fix_first``
    the first parameter is pinned to 1, which loses nothing because every
    quantity involved is homogeneous in the parameters.
    """
    if s < 2:
        raise ValueError("the scan needs s >= 2")
    p = AlgebraParams(M, N, q)
    opts = []
    for sg in "+-":
        ranks = [1] if ranks_all_one else _specs_for(p, sg)
        for r in ranks:
            for a in values:
                opts.append(FundSpec(sg, r, mpq(a)))
    n = len(opts)
    # zero tables for ordered pairs
    dz = [[False] * n for _ in range(n)]
    klz = [[False] * n for _ in range(n)]
    krz = [[False] * n for _ in range(n)]
    for x in range(n):
        for y in range(n):
            dz[x][y] = not delta_pair(p, opts[x], opts[y])
            kl, kr = k_pair(p, opts[x], opts[y])
            klz[x][y] = not kl
            krz[x][y] = not kr
    firsts = [x for x in range(n) if opts[x].a == 1] if fix_first else range(n)
    found = []

    def rec(chosen: List[int]):
        m = len(chosen)
        if m == s:
            if _all_f_zero(chosen, dz, klz, krz):
                found.append(TensorConfig(p, tuple(opts[c] for c in chosen)))
            return
        for y in range(n):
            # keep prod_{i<j} Delta_ij nonzero while extending
            if any(dz[c][y] for c in chosen):
                continue
            rec(chosen + [y])

    for x in firsts:
        rec([x])
    return found


def _all_f_zero(ch: Sequence[int], dz, klz, krz) -> bool:
    s = len(ch)
    for i in range(s):
        fl = any(dz[ch[i]][ch[j]] for j in range(i)) or any(klz[ch[i]][ch[j]] for j in range(s) if j != i)
        if not fl:
            return False
        fr = any(krz[ch[j]][ch[i]] for j in range(s) if j != i) or any(dz[ch[j]][ch[i]] for j in range(i + 1, s))
        if not fr:
            return False
    return True
