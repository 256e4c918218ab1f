"""Evaluation modules, tensor products via the coproduct, fundamental modules.

Basis indices are 0-based internally; printed reports show ``i + 1``.  A module is anything with ``space``,
``legs`` (the top nonvanishing series coefficient), ``weights`` per basis
vector and an ``action(family, i, j, n)`` method returning a :class:`LinOp`.
"""
from __future__ import annotations

from dataclasses import dataclass
from functools import lru_cache
from itertools import permutations, combinations_with_replacement
from typing import Dict, List, Optional, Sequence, Tuple

from gmpy2 import mpq

from .field import RatFun, Rational, lcm_denominators, poly_text, scalar_text
from .superlin import (
    LinOp,
    PlacedOp,
    RestrictionError,
    Subspace,
    SuperSpace,
    TensorSpace,
    element_to_matrix,
    kron,
    restrict_op,
    span_closure,
    subspace_space,
)

FAMILIES = ("s", "t")


class SpecError(ValueError):
    pass


class InternalConsistencyError(AssertionError):
    pass


@dataclass(frozen=True)
class AlgebraParams:
    M: int
    N: int
    q: object = mpq(5, 2)

    def __post_init__(self):
        if self.M < 1 or self.N < 1:
            raise SpecError("M and N must be positive")
        if isinstance(self.q, (int, Rational)):
            q = mpq(self.q)
            if q == 0 or abs(q) == 1:
                raise SpecError("q must avoid 0 and +-1")
            object.__setattr__(self, "q", q)

    @property
    def kappa(self) -> int:
        return self.M + self.N

    def parity(self, i: int) -> int:
        return 0 if i < self.M else 1

    def d(self, i: int) -> int:
        return 1 if i < self.M else -1

    def qi(self, i: int):
        return self.q if i < self.M else 1 / self.q

    def qpow(self, k: int):
        return self.q ** k if k >= 0 else (1 / self.q) ** (-k)

    def eps_ijk(self, i: int, j: int, k: int) -> int:
        p = (self.parity(i) ^ self.parity(k)) & (self.parity(k) ^ self.parity(j))
        return -1 if p else 1

    def eps_transpose(self, i: int, j: int) -> int:
        """(-1)^{|i| + |i||j|}."""
        pi, pj = self.parity(i), self.parity(j)
        return -1 if (pi ^ (pi & pj)) else 1

    @property
    def vspace(self) -> SuperSpace:
        return SuperSpace.standard(self.M, self.N)

    def pairing(self, lam: Sequence[int], mu: Sequence[int]) -> int:
        return sum(self.d(i) * x * y for i, (x, y) in enumerate(zip(lam, mu)))


def _one(x):
    return x * 0 + 1


def _unit(space1: TensorSpace, r: int, c: int, val) -> LinOp:
    return LinOp(space1, space1, {c: {r: val}})


# ------------------------------------------------------- finite-type actions


def vector_rep(params: AlgebraParams) -> Dict[Tuple[str, int, int], LinOp]:
    """Generator matrices of U_q(gl(M|N)) on the natural module (all kappa^2 per family)."""
    k = params.kappa
    sp = TensorSpace([params.vspace])
    one = _one(params.q)
    out: Dict[Tuple[str, int, int], LinOp] = {}
    for fam in FAMILIES:
        for i in range(k):
            for j in range(k):
                out[(fam, i, j)] = LinOp.zero(sp)
    for i in range(k):
        qi = params.qi(i)
        out[("s", i, i)] = LinOp(sp, sp, {j: {j: qi if j == i else one} for j in range(k)})
        out[("t", i, i)] = LinOp(sp, sp, {j: {j: 1 / qi if j == i else one} for j in range(k)})
        for j in range(i + 1, k):
            c = qi - 1 / qi
            out[("s", i, j)] = _unit(sp, i, j, c)
            out[("t", j, i)] = _unit(sp, j, i, -c)
    return out


def covector_rep(params: AlgebraParams) -> Dict[Tuple[str, int, int], LinOp]:
    """Same generators acting through the transposition automorphism."""
    v = vector_rep(params)
    out = {}
    k = params.kappa
    for i in range(k):
        for j in range(k):
            e = params.eps_transpose(j, i)
            out[("s", i, j)] = v[("t", j, i)].scale(e)
            out[("t", i, j)] = v[("s", j, i)].scale(e)
    return out


@dataclass(frozen=True)
class EvalModuleSpec:
    kind: str  # "V" or "W"
    a: object

    def __post_init__(self):
        if self.kind not in ("V", "W"):
            raise SpecError("evaluation module kind must be 'V' or 'W'")
        if not self.a:
            raise SpecError("spectral parameter must be nonzero")


@dataclass(frozen=True)
class FundSpec:
    sign: str  # "+" or "-"
    r: int
    a: object

    def validate(self, params: AlgebraParams) -> None:
        if self.sign not in ("+", "-"):
            raise SpecError(f"sign must be + or -, got {self.sign!r}")
        top = params.M if self.sign == "+" else params.N
        if not 1 <= self.r <= top:
            raise SpecError(f"rank {self.r} out of range 1..{top} for sign {self.sign}")
        if not self.a:
            raise SpecError("spectral parameter must be nonzero")

    def text(self) -> str:
        return f"{self.sign} {self.r} {scalar_text(self.a)}"


def eval_coefficients(params: AlgebraParams, spec: EvalModuleSpec, i: int, j: int):
    """Series coefficients ([s^(0), s^(1)], [t^(0), t^(1)]) on an evaluation module."""
    base = vector_rep(params) if spec.kind == "V" else covector_rep(params)
    a = spec.a
    s0, t0 = base[("s", i, j)], base[("t", i, j)]
    return [s0, t0.scale(-a)], [t0, s0.scale(-1 / a)]


# ------------------------------------------------------------------ modules


class Module:
    space: TensorSpace
    legs: int
    weights: List[Tuple[int, ...]]
    params: AlgebraParams

    def __init__(self):
        self._cache: Dict[Tuple[str, int, int, int], LinOp] = {}

    def action(self, family: str, i: int, j: int, n: int) -> LinOp:
        if family not in FAMILIES:
            raise ValueError(f"unknown family {family!r}")
        if n < 0:
            raise ValueError("series index must be nonnegative")
        key = (family, i, j, n)
        op = self._cache.get(key)
        if op is None:
            if n > self.legs:
                op = LinOp.zero(self.space)
            else:
                op = self._compute(family, i, j, n)
            self._cache[key] = op
        return op

    def _compute(self, family, i, j, n) -> LinOp:
        raise NotImplementedError

    def generators(self, finite_only: bool = False) -> List[LinOp]:
        """All nonzero action matrices in a fixed order: family, n, i, j."""
        k = self.params.kappa
        top = 0 if finite_only else self.legs
        out = []
        for fam in FAMILIES:
            for n in range(top + 1):
                for i in range(k):
                    for j in range(k):
                        op = self.action(fam, i, j, n)
                        if not op.is_zero():
                            out.append(op)
        return out


class EvalModule(Module):
    """V(a) or W(a): the natural or conatural module pulled back along evaluation."""

    def __init__(self, params: AlgebraParams, spec: EvalModuleSpec):
        super().__init__()
        self.params = params
        self.spec = spec
        self.space = TensorSpace([params.vspace])
        self.legs = 1
        sgn = 1 if spec.kind == "V" else -1
        k = params.kappa
        self.weights = [tuple(sgn if m == i else 0 for m in range(k)) for i in range(k)]

    def _compute(self, family, i, j, n):
        s, t = eval_coefficients(self.params, self.spec, i, j)
        return (s if family == "s" else t)[n]


class TensorModule(Module):
    """left (x) right with the coproduct action."""

    def __init__(self, left: Module, right: Module):
        super().__init__()
        if left.params != right.params:
            raise ValueError("factors use different algebra parameters")
        self.params = left.params
        self.left = left
        self.right = right
        self.space = left.space.concat(right.space)
        self.legs = left.legs + right.legs
        self.weights = [
            tuple(x + y for x, y in zip(wl, wr)) for wl in left.weights for wr in right.weights
        ]

    def _compute(self, family, i, j, n):
        p = self.params
        acc: Dict[int, Dict[int, object]] = {}
        for m in range(n + 1):
            if m > self.left.legs or n - m > self.right.legs:
                continue
            for k in range(p.kappa):
                A = self.left.action(family, i, k, m)
                if A.is_zero():
                    continue
                B = self.right.action(family, k, j, n - m)
                if B.is_zero():
                    continue
                term = kron(A, B)
                if p.eps_ijk(i, j, k) < 0:
                    term = term.scale(-1)
                for c, col in term.cols.items():
                    dst = acc.setdefault(c, {})
                    for r, v in col.items():
                        w = dst.get(r)
                        dst[r] = v if w is None else w + v
        return LinOp(self.space, self.space, acc)


def tensor_modules(mods: Sequence[Module]) -> Module:
    """Left fold ((M1 (x) M2) (x) M3) ..."""
    if not mods:
        raise ValueError("empty tensor product")
    out = mods[0]
    for m in mods[1:]:
        out = TensorModule(out, m)
    return out


def eval_tensor(params: AlgebraParams, specs: Sequence[EvalModuleSpec]) -> Module:
    return tensor_modules([EvalModule(params, s) for s in specs])


def tensor_action(rep: Module, family: str, i: int, j: int, n: int) -> LinOp:
    if not 0 <= n <= rep.legs:
        raise ValueError(f"series index {n} outside 0..{rep.legs}")
    return rep.action(family, i, j, n)


# ---------------------------------------------------------------- weights


def weight_of(rep: Module, idx: int) -> Tuple[int, ...]:
    return rep.weights[idx]


def weight_multiplicities(rep: Module, sub: Optional[Subspace] = None) -> Dict[Tuple[int, ...], int]:
    out: Dict[Tuple[int, ...], int] = {}
    if sub is None:
        for w in rep.weights:
            out[w] = out.get(w, 0) + 1
        return out
    for b in sub.basis:
        ws = {rep.weights[k] for k in b}
        if len(ws) != 1:
            raise InternalConsistencyError("basis vector is not a weight vector")
        w = ws.pop()
        out[w] = out.get(w, 0) + 1
    return out


def check_weight_grading(rep: Module, op: LinOp, i: int, j: int, sign: int = 1) -> bool:
    """Entries of a weight (e_i - e_j) operator only join compatible weights."""
    k = rep.params.kappa
    shift = [0] * k
    shift[i] += 1
    shift[j] -= 1
    for r, c, _ in op.entries():
        if list(rep.weights[r]) != [x + y for x, y in zip(rep.weights[c], shift)]:
            return False
    return True


# ------------------------------------------------------------- tableaux


def admissible_tuples(params: AlgebraParams, sign: str, r: int) -> List[Tuple[int, ...]]:
    """Weakly increasing index tuples; repeats allowed only on the odd block
    (positive sign) or only on the even block (negative sign)."""
    out = []
    for tup in combinations_with_replacement(range(params.kappa), r):
        ok = True
        for x, y in zip(tup, tup[1:]):
            if x == y and ((sign == "+" and x < params.M) or (sign == "-" and x >= params.M)):
                ok = False
                break
        if ok:
            out.append(tup)
    return out


def tableau_count(params: AlgebraParams, sign: str, r: int) -> int:
    FundSpec(sign, r, mpq(1)).validate(params)
    return len(admissible_tuples(params, sign, r))


def tableau_weights(params: AlgebraParams, sign: str, r: int) -> List[Tuple[int, ...]]:
    sgn = 1 if sign == "+" else -1
    out = []
    for tup in admissible_tuples(params, sign, r):
        w = [0] * params.kappa
        for x in tup:
            w[x] += sgn
        out.append(tuple(w))
    return out


# -------------------------------------------------------- fundamental modules


def _inversions(perm: Sequence[int]) -> int:
    return sum(1 for x in range(len(perm)) for y in range(x + 1, len(perm)) if perm[x] > perm[y])


def hw_vector(params: AlgebraParams, sign: str, r: int) -> Dict[int, object]:
    """Alternating sum over permutations with weights (-q)^{inversions}.

    Entries are keyed by flat index of the r-fold tensor power of the natural
    space; the leading coefficient (identity permutation) is 1.
    """
    FundSpec(sign, r, mpq(1)).validate(params)
    sp = TensorSpace([params.vspace] * r)
    offset = 0 if sign == "+" else params.kappa - r
    out = {}
    mq = -params.q
    for perm in permutations(range(r)):
        idx = sp.flat([offset + p for p in perm])
        out[idx] = mq ** _inversions(perm)
    return out


def fundamental_ambient_specs(params: AlgebraParams, spec: FundSpec) -> List[EvalModuleSpec]:
    if spec.sign == "+":
        return [EvalModuleSpec("V", spec.a * params.qpow(-2 * j)) for j in range(1, spec.r + 1)]
    return [EvalModuleSpec("W", spec.a * params.qpow(2 * j)) for j in range(1, spec.r + 1)]


@lru_cache(maxsize=None)
def _fundamental_subspace(params: AlgebraParams, sign: str, r: int) -> Subspace:
    # the finite part alone generates, and its action is independent of a
    amb = eval_tensor(params, [EvalModuleSpec("V" if sign == "+" else "W", mpq(1))] * r)
    seed_index = params.kappa - 1 if sign == "+" else 0
    seed = {amb.space.flat([seed_index] * r): mpq(1)}
    return span_closure([seed], amb.generators(finite_only=True), amb.space)


class FundamentalModule(Module):
    """The submodule of an evaluation tensor generated by the extremal pure tensor.

    Coordinates are taken in the reduced echelon basis of the subspace; each
    action matrix is restricted from the ambient tensor on demand, and the
    restriction itself certifies invariance of the subspace.
    """

    def __init__(self, params: AlgebraParams, spec: FundSpec):
        super().__init__()
        spec.validate(params)
        self.params = params
        self.spec = spec
        self.ambient = eval_tensor(params, fundamental_ambient_specs(params, spec))
        self.subspace = _fundamental_subspace(params, spec.sign, spec.r)
        self.space = TensorSpace([subspace_space(self.subspace)])
        self.legs = spec.r
        self.weights = [self.ambient.weights[p] for p in self.subspace.pivots]
        self._hw_ambient = hw_vector(params, spec.sign, spec.r)
        k = params.kappa
        low = k - 1 if spec.sign == "+" else 0
        self._lw_ambient = {self.ambient.space.flat([low] * spec.r): mpq(1)}

    @property
    def dim(self) -> int:
        return self.subspace.dim

    def _compute(self, family, i, j, n):
        return restrict_op(self.ambient.action(family, i, j, n), self.subspace, self.subspace)

    def coords(self, amb_vec) -> List[object]:
        c = self.subspace.coordinates(amb_vec)
        if c is None:
            raise RestrictionError("vector lies outside the fundamental subspace", amb_vec)
        return c

    def coords_vec(self, amb_vec) -> Dict[int, object]:
        return {k: v for k, v in enumerate(self.coords(amb_vec)) if v}

    @property
    def u1(self) -> Dict[int, object]:
        """Highest l-weight vector (coordinates)."""
        return self.coords_vec(self._hw_ambient)

    @property
    def u3(self) -> Dict[int, object]:
        """Lowest l-weight vector (coordinates)."""
        return self.coords_vec(self._lw_ambient)

    @property
    def u2(self) -> Dict[int, object]:
        return self.action("s", 0, self.params.kappa - 1, 0).apply(self.u3)

    def ambient_vector(self, coords: Dict[int, object]) -> Dict[int, object]:
        out: Dict[int, object] = {}
        for k, c in coords.items():
            for idx, v in self.subspace.basis[k].items():
                w = out.get(idx)
                out[idx] = v * c if w is None else w + v * c
        return {k: v for k, v in out.items() if v}


def fundamental_module(params: AlgebraParams, spec: FundSpec) -> FundamentalModule:
    return FundamentalModule(params, spec)


def dual_spec(params: AlgebraParams, spec: FundSpec) -> FundSpec:
    """Parameter of the twisted dual (up to one-dimensional twist)."""
    if spec.sign == "+":
        return FundSpec("+", spec.r, params.qpow(2 * (params.M - params.N + 1 + spec.r)) / spec.a)
    return FundSpec("-", spec.r, params.qpow(-2 * spec.r - 2) / spec.a)


class RepTensor(Module):
    """Tensor product of fundamental modules with distinguished pure tensors."""

    def __init__(self, params: AlgebraParams, specs: Sequence[FundSpec]):
        super().__init__()
        if not specs:
            raise SpecError("a tensor product needs at least one factor")
        self.params = params
        self.specs = list(specs)
        self.factors = [fundamental_module(params, s) for s in specs]
        self.module = tensor_modules(self.factors)
        self.space = self.module.space
        self.legs = self.module.legs
        self.weights = self.module.weights

    @property
    def dim(self) -> int:
        return self.space.dim

    def action(self, family, i, j, n):
        return self.module.action(family, i, j, n)

    def pure(self, which: str) -> Dict[int, object]:
        vec = {0: mpq(1)}
        size = 1
        for f in self.factors:
            v = getattr(f, which)
            d = f.dim
            out = {}
            for x, a in vec.items():
                for y, b in v.items():
                    out[x * d + y] = a * b
            vec = out
            size *= d
        return vec


# ----------------------------------------------------------- RTT relations


def perk_schultz_element(params: AlgebraParams, z, w) -> Dict[Tuple[int, int], object]:
    """Coefficients of R(z, w) on pairs of flat indices of the natural square."""
    k = params.kappa
    f = lambda x, y: x * k + y
    co = {}
    for i in range(k):
        qi = params.qi(i)
        co[(f(i, i), f(i, i))] = z * qi - w / qi
        for j in range(k):
            if i != j:
                co[(f(i, j), f(i, j))] = z - w
    for i in range(k):
        for j in range(i + 1, k):
            co[(f(j, i), f(i, j))] = z * (params.qi(i) - 1 / params.qi(i))
            co[(f(i, j), f(j, i))] = w * (params.qi(j) - 1 / params.qi(j))
    return co


def perk_schultz_matrix(params: AlgebraParams, z, w) -> LinOp:
    sp = TensorSpace([params.vspace, params.vspace])
    return element_to_matrix(sp, perk_schultz_element(params, z, w))


def _series_operator(mod: Module, family: str, n: int) -> LinOp:
    """sum_{ij} x_ij^(n) (x) E_ij on mod (x) V."""
    p = mod.params
    aux = TensorSpace([p.vspace])
    acc = None
    for i in range(p.kappa):
        for j in range(p.kappa):
            x = mod.action(family, i, j, n)
            if x.is_zero():
                continue
            term = kron(x, _unit(aux, i, j, mpq(1)))
            acc = term if acc is None else acc + term
    return acc if acc is not None else LinOp.zero(mod.space.concat(aux))


def rtt_check(mod: Module) -> Dict[str, bool]:
    """Exact RTT relations on ``mod``, compared coefficient by coefficient in (z, w).

    Writes R(z, w) = z A + w B and each series in powers of its variable;
    the three relations (TT, SS, TS) must match on every monomial.
    """
    p = mod.params
    amb = mod.space.concat(TensorSpace([p.vspace, p.vspace]))
    one = mpq(1)
    A = PlacedOp(perk_schultz_matrix(p, one, 0 * one), (mod.space.legs, mod.space.legs + 1), amb).materialize()
    B = PlacedOp(perk_schultz_matrix(p, 0 * one, one), (mod.space.legs, mod.space.legs + 1), amb).materialize()
    legs_mod = tuple(range(mod.space.legs))

    def placed(family, n, aux_leg):
        op = _series_operator(mod, family, n)
        pos = legs_mod + (mod.space.legs + aux_leg,)
        # an operator on mod (x) V lifted to mod (x) V (x) V
        if aux_leg == 0:
            return kron(op, LinOp.identity(TensorSpace([p.vspace])))
        return PlacedOp(op, pos, amb).materialize()

    def series(family, aux_leg):
        # exponent of the series variable -> operator; t runs in z^{-1}
        sgn = -1 if family == "t" else 1
        return {sgn * n: placed(family, n, aux_leg) for n in range(mod.legs + 1)}

    def mul_series(*factors):
        # each factor: dict (ez, ew) -> LinOp; product left to right
        acc = {(0, 0): None}
        for f in factors:
            nxt = {}
            for e1, x in acc.items():
                for e2, y in f.items():
                    e = (e1[0] + e2[0], e1[1] + e2[1])
                    z = y if x is None else x @ y
                    nxt[e] = z if e not in nxt else nxt[e] + z
            acc = nxt
        return acc

    R = {(1, 0): A, (0, 1): B}
    out = {}
    for name, f1, f2 in (("TT", "t", "t"), ("SS", "s", "s"), ("TS", "t", "s")):
        X12 = {(e, 0): op for e, op in series(f1, 0).items()}
        Y13 = {(0, e): op for e, op in series(f2, 1).items()}
        lhs = mul_series(R, X12, Y13)
        rhs = mul_series(Y13, X12, R)
        keys = set(lhs) | set(rhs)
        ok = True
        for key in keys:
            l, r = lhs.get(key), rhs.get(key)
            l = l if l is not None else LinOp.zero(amb)
            r = r if r is not None else LinOp.zero(amb)
            if l != r:
                ok = False
                break
        out[name] = ok
    return out


# ---------------------------------------------------------------- antipode


def _invert_dense(rows: List[List[object]]) -> List[List[object]]:
    n = len(rows)
    one = None
    for row in rows:
        for v in row:
            if v:
                one = v * 0 + 1
                break
        if one is not None:
            break
    zero = one * 0
    a = [list(r) + [one if i == j else zero for j in range(n)] for i, r in enumerate(rows)]
    for col in range(n):
        piv = next((r for r in range(col, n) if a[r][col]), None)
        if piv is None:
            raise ZeroDivisionError("singular matrix")
        a[col], a[piv] = a[piv], a[col]
        inv = 1 / a[col][col]
        a[col] = [x * inv for x in a[col]]
        for r in range(n):
            if r != col and a[r][col]:
                f = a[r][col]
                a[r] = [x - f * y for x, y in zip(a[r], a[col])]
    return [row[n:] for row in a]


def antipode_check(params: AlgebraParams, kind: str) -> Dict[str, object]:
    """Invert X(z) = sum rho(s_ij(z)) (x) E_ij over Q(z) for V(a) or W(a), a symbolic.

    The spectral parameter is folded into z (only the product za occurs), so
    the function field is Q(z) with a = 1.  For the conatural module the result
    is compared with the closed form; for the natural one, with the identity.
    """
    if params.kappa > 4:
        raise SpecError("antipode check is limited to kappa <= 4")
    z = RatFun.gen("z")
    one = RatFun.const(1, "z")
    mod = EvalModule(params, EvalModuleSpec(kind, one))
    k = params.kappa
    aux = TensorSpace([params.vspace])
    X = None
    for i in range(k):
        for j in range(k):
            x = mod.action("s", i, j, 0) + mod.action("s", i, j, 1).scale(z)
            if x.is_zero():
                continue
            term = kron(x, _unit(aux, i, j, one))
            X = term if X is None else X + term
    dense = X.dense(zero=0 * one)
    inv_rows = _invert_dense(dense)
    sp = X.src
    inv = LinOp.from_entries(sp, sp, [(r, c, v) for r, row in enumerate(inv_rows) for c, v in enumerate(row) if v])
    ident = (X @ inv) == LinOp.identity(sp, one)
    report: Dict[str, object] = {"kind": kind, "M": params.M, "N": params.N, "identity": ident}
    report["denominator"] = poly_text(lcm_denominators([v for _, _, v in inv.entries()]))
    if kind == "W":
        qq = params.q
        A = (1 - z * qq ** 2) * (1 - z / qq ** 2)
        f = lambda x, y: x * k + y
        co = {}
        for i in range(k):
            qi = params.qi(i)
            co[(f(i, i), f(i, i))] = qi - z / qi
            for j in range(k):
                if i != j:
                    co[(f(i, j), f(i, j))] = 1 - z
        for i in range(k):
            for j in range(k):
                if i == j:
                    continue
                qj = params.qi(j)
                c = (qj - 1 / qj) * (one if i < j else z)
                # E_ji (x) E_ij: row (j, i), column (i, j)
                co[(f(j, i), f(i, j))] = c
        closed = element_to_matrix(sp, co)
        report["closed_form"] = inv.scale(A) == closed
    return report
