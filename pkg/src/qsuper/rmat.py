"""R-matrices: the two-leg trigonometric matrices, fused products, restrictions
to fundamental subspaces and their denominators.

Spectral computations put b = 1 and keep u = a/b as the indeterminate.  Fused
operators are applied lazily as chains of two-leg operators whose entries are
polynomial after clearing the (b - a) factors; the cleared prefactor is
divided out only once coordinates on the subspace have been read.
"""
from __future__ import annotations

from dataclasses import dataclass, field as dc_field
from functools import lru_cache
from typing import Dict, Optional, Sequence, Tuple

from gmpy2 import mpq

from .field import Poly, RatFun, homogenize, lcm_denominators, poly_text, scalar_text
from .repcore import (
    AlgebraParams,
    EvalModuleSpec,
    FundSpec,
    InternalConsistencyError,
    Module,
    SpecError,
    TensorModule,
    eval_tensor,
    fundamental_module,
    hw_vector,
    _fundamental_subspace,
    perk_schultz_element,
)
from .superlin import (
    LinOp,
    OpChain,
    PlacedOp,
    RestrictionError,
    Subspace,
    TensorSpace,
    element_to_matrix,
    graded_flip,
    subspace_space,
)


class PoleError(ZeroDivisionError):
    pass


KINDS = ("PerkSchultz", "PlusMinus", "FusedSame", "FusedMixed")


@dataclass(frozen=True)
class RMatrixKind:
    tag: str
    s: int = 1
    t: int = 1

    def __post_init__(self):
        if self.tag not in KINDS:
            raise ValueError(f"unknown R-matrix kind {self.tag!r}")


# ------------------------------------------------------------ two-leg blocks


def perk_schultz(params: AlgebraParams, z, w) -> LinOp:
    """R(z, w) on V (x) V as a matrix (Koszul signs included)."""
    sp = TensorSpace([params.vspace, params.vspace])
    return element_to_matrix(sp, perk_schultz_element(params, z, w))


def qybe_check(params: AlgebraParams, z1, z2, z3) -> bool:
    V = params.vspace
    amb = TensorSpace([V, V, V])
    R12 = PlacedOp(perk_schultz(params, z1, z2), (0, 1), amb).materialize()
    R13 = PlacedOp(perk_schultz(params, z1, z3), (0, 2), amb).materialize()
    R23 = PlacedOp(perk_schultz(params, z2, z3), (1, 2), amb).materialize()
    return (R12 @ R13 @ R23) == (R23 @ R13 @ R12)


def plus_minus_element(params: AlgebraParams, a, b, cleared: bool = False) -> Dict[Tuple[int, int], object]:
    """Coefficients of the mixed matrix on V (x) W; with ``cleared`` it is
    multiplied by (b - a) so every coefficient is polynomial."""
    k = params.kappa
    f = lambda x, y: x * k + y
    if cleared:
        den = None
        scale = b - a
    else:
        if not (b - a):
            raise PoleError("mixed R-matrix has a pole at a = b")
        den = 1 / (b - a)
        scale = None

    def fix(num):
        return num * den if den is not None else num

    one_c = scale if scale is not None else (a * 0 + 1)
    co = {}
    for i in range(k):
        qi = params.qi(i)
        co[(f(i, i), f(i, i))] = fix(b * qi - a / qi)
        for j in range(k):
            if i != j:
                co[(f(i, j), f(i, j))] = one_c
    for i in range(k):
        for j in range(k):
            if i < j:
                qj = params.qi(j)
                co[(f(j, j), f(i, i))] = fix(a * (qj - 1 / qj))
            elif i > j:
                qi = params.qi(i)
                co[(f(j, j), f(i, i))] = fix(b * (qi - 1 / qi))
    # E_ji (x) E_ji: row (j, j), column (i, i)
    return co


def r_plus_minus(params: AlgebraParams, a, b, cleared: bool = False) -> LinOp:
    sp = TensorSpace([params.vspace, params.vspace])
    return element_to_matrix(sp, plus_minus_element(params, a, b, cleared))


def theta_lambda(params: AlgebraParams, a, b):
    """Read theta_{kl} and lambda_{ij} off F = c o R on V (x) W."""
    R = r_plus_minus(params, a, b)
    V = TensorSpace([params.vspace])
    F = graded_flip(V, V) @ R
    k = params.kappa
    theta, lam = {}, {}
    for x in range(k):
        for y in range(k):
            img = F.apply({x * k + y: mpq(1) if not isinstance(a, RatFun) else a * 0 + 1})
            if x != y:
                # v_x (x) w_y -> theta w_y (x) v_x
                theta[(x, y)] = img.get(y * k + x, 0)
            else:
                for i in range(k):
                    lam[(i, x)] = img.get(i * k + i, 0)
    return theta, lam


# ------------------------------------------------------------ fused chains


def _symbolic_a():
    return Poly.gen("u")


def fuse_mixed_chain(params: AlgebraParams, s: int, t: int, a, b, cleared: bool = False) -> OpChain:
    """Ordered product over j = t..1, i = 1..s of mixed blocks on legs (i, s+j)."""
    V = params.vspace
    amb = TensorSpace([V] * (s + t))
    qp = params.qpow
    factors = []
    prefactor = None
    for j in range(t, 0, -1):
        bj = b * qp(2 * j)
        for i in range(1, s + 1):
            ai = a * qp(-2 * i)
            if not cleared and not (bj - ai):
                raise PoleError(f"pole of the fused mixed matrix at (i, j) = ({i}, {j})")
            blk = r_plus_minus(params, ai, bj, cleared=cleared)
            factors.append(PlacedOp(blk, (i - 1, s + j - 1), amb))
            if cleared:
                prefactor = (bj - ai) if prefactor is None else prefactor * (bj - ai)
    chain = OpChain(factors, amb)
    chain.cleared_by = prefactor
    return chain


def fuse_same_chain(params: AlgebraParams, s: int, t: int, a, b) -> OpChain:
    V = params.vspace
    amb = TensorSpace([V] * (s + t))
    qp = params.qpow
    factors = []
    for j in range(t, 0, -1):
        bj = b * qp(-2 * j)
        for i in range(1, s + 1):
            ai = a * qp(-2 * i)
            factors.append(PlacedOp(perk_schultz(params, ai, bj), (i - 1, s + j - 1), amb))
    chain = OpChain(factors, amb)
    chain.cleared_by = None
    return chain


def fuse_mixed(params: AlgebraParams, s: int, t: int, a, b) -> LinOp:
    if not (1 <= s <= params.M and 1 <= t <= params.N):
        raise SpecError("fused mixed matrix needs 1 <= s <= M and 1 <= t <= N")
    return _materialize(fuse_mixed_chain(params, s, t, a, b), a)


def _materialize(chain: OpChain, sample) -> LinOp:
    one = sample * 0 + 1
    sp = chain.space
    return LinOp(sp, sp, {k: chain.apply({k: one}) for k in range(sp.dim)})


def pure_tensor(space: TensorSpace, multi: Sequence[int], one=None) -> Dict[int, object]:
    return {space.flat(multi): mpq(1) if one is None else one}


def tensor_vectors(left: Dict[int, object], right: Dict[int, object], right_dim: int) -> Dict[int, object]:
    out = {}
    for x, a in left.items():
        for y, b in right.items():
            c = a * b
            if c:
                out[x * right_dim + y] = c
    return out


def fuse_same(params: AlgebraParams, s: int, t: int, a, b):
    """Fused same-sign matrix with its eigenvalues X (on v^(s) v^(t)) and Y."""
    if not (1 <= s <= params.M and 1 <= t <= params.M):
        raise SpecError("fused same-sign matrix needs 1 <= s, t <= M")
    chain = fuse_same_chain(params, s, t, a, b)
    X, Y = same_eigenvalues(params, s, t, chain)
    return _materialize(chain, a), X, Y


def same_eigenvalues(params: AlgebraParams, s: int, t: int, chain: OpChain):
    k = params.kappa
    hs, ht = hw_vector(params, "+", s), hw_vector(params, "+", t)
    top = tensor_vectors(hs, ht, k ** t)
    low = pure_tensor(chain.space, [k - 1] * (s + t))
    X = _ratio_poly(top, chain.apply(top), "v^(s) (x) v^(t)")
    Y = _ratio_poly(low, chain.apply(low), "the lowest pure tensor")
    return X, Y


def _ratio_poly(vec, img, what):
    """img = c * vec with vec rational and img polynomial; return c."""
    lead = min(vec)
    c = img.get(lead, 0) * (1 / vec[lead])
    for key in set(vec) | set(img):
        if img.get(key, 0) != c * vec.get(key, 0):
            raise InternalConsistencyError(f"{what} is not an eigenvector of the fused matrix")
    return c


def predicted_Y(params: AlgebraParams, s: int, t: int, a, b):
    qp = params.qpow
    out = a * 0 + 1
    for i in range(1, s + 1):
        for j in range(1, t + 1):
            out = out * (a * qp(-2 * i - 1) - b * qp(-2 * j + 1))
    return out


def predicted_mixed_denominator(params: AlgebraParams, s: int) -> Poly:
    # b q^2 - a q^{-2s} at b = 1
    qp = params.qpow
    return Poly([qp(2), -qp(-2 * s)], "u")


def predicted_N(params: AlgebraParams, s: int, t: int) -> Poly:
    m = min(s, t)
    return Poly.from_roots([params.qpow(-2 * (t - m + j)) for j in range(1, m + 1)], "u")


def predicted_D(params: AlgebraParams, s: int, t: int) -> Poly:
    m = min(s, t)
    return Poly.from_roots([params.qpow(2 * (s - m + j)) for j in range(1, m + 1)], "u")


# ------------------------------------------------------------- restriction


def product_subspace(left: Subspace, right: Subspace, ambient: TensorSpace) -> Subspace:
    """Echelon basis of a tensor product of two echelon subspaces.

    Tensors of echelon bases stay in reduced echelon form with pivot pairs.
    """
    sub = Subspace(ambient)
    dr = right.ambient.dim
    for bl, pl in zip(left.basis, left.pivots):
        for br, pr in zip(right.basis, right.pivots):
            v = tensor_vectors(bl, br, dr)
            bid = len(sub.basis)
            sub.basis.append(v)
            p = pl * dr + pr
            sub.pivots.append(p)
            sub._by_pivot[p] = bid
    return sub


def restrict_chain(chain: OpChain, sub: Subspace) -> LinOp:
    """Matrix of a lazily applied operator on an echelon subspace (membership checked)."""
    sp = TensorSpace([subspace_space(sub)])
    cols = {}
    pivots = sub.pivots
    for k, b in enumerate(sub.basis):
        img = chain.apply(b)
        coords = [img.get(p, 0) for p in pivots]
        rest = dict(img)
        for c, bv in zip(coords, sub.basis):
            if c:
                for key, val in bv.items():
                    w = rest.get(key)
                    nv = (w - c * val) if w is not None else -(c * val)
                    if nv:
                        rest[key] = nv
                    elif w is not None:
                        del rest[key]
        if rest:
            raise RestrictionError("fused matrix leaves the fundamental subspace", rest)
        cols[k] = {r: v for r, v in enumerate(coords) if v}
    return LinOp(sp, sp, cols)


@dataclass
class DenominatorReport:
    kind: str
    s: int
    t: int
    M: int
    N: int
    q: object
    normalization: str
    computed: Poly
    predicted: Poly
    scalar_ratio: object
    matches: bool
    extra: Dict[str, object] = dc_field(default_factory=dict)

    def to_json(self) -> Dict[str, object]:
        out = {
            "kind": self.kind,
            "s": self.s,
            "t": self.t,
            "M": self.M,
            "N": self.N,
            "q": scalar_text(self.q),
            "normalization": self.normalization,
            "computed": poly_text(self.computed),
            "computed_ab": homogenize(self.computed),
            "predicted": poly_text(self.predicted),
            "predicted_ab": homogenize(self.predicted),
            "scalar_ratio": scalar_text(self.scalar_ratio) if self.scalar_ratio is not None else None,
            "matches": self.matches,
        }
        out.update(self.extra)
        return out


def proportional(p: Poly, r: Poly):
    """Return c with p = c * r, or None."""
    if p.is_zero() or r.is_zero():
        return None if not (p.is_zero() and r.is_zero()) else mpq(1)
    if p.degree != r.degree:
        return None
    c = p.lc / r.lc
    return c if p == r * c else None


def _check_homogeneous(params: AlgebraParams, kind: str) -> None:
    # two-leg blocks: R(la, lb) = l R(a, b) (Perk-Schultz), and degree 0 for the mixed one
    a, b, lam = mpq(3), mpq(7, 5), mpq(11, 2)
    if kind == "FusedSame":
        lhs, rhs, deg = perk_schultz(params, a * lam, b * lam), perk_schultz(params, a, b), 1
    else:
        lhs, rhs, deg = r_plus_minus(params, a * lam, b * lam), r_plus_minus(params, a, b), 0
    if lhs != rhs.scale(lam ** deg):
        raise InternalConsistencyError("R-matrix entries are not homogeneous in (a, b)")


@lru_cache(maxsize=32)
def restricted_fused(params: AlgebraParams, kind: str, s: int, t: int):
    """Restricted fused matrix at a = u, b = 1 with polynomial entries, plus the
    scalar it must be divided by (cleared prefactor or nothing)."""
    u = _symbolic_a()
    one = Poly.const(1, "u")
    if kind == "FusedMixed":
        if not (1 <= s <= params.M and 1 <= t <= params.N):
            raise SpecError("fused mixed matrix needs 1 <= s <= M and 1 <= t <= N")
        chain = fuse_mixed_chain(params, s, t, u, one, cleared=True)
        left, right = _fundamental_subspace(params, "+", s), _fundamental_subspace(params, "-", t)
    elif kind == "FusedSame":
        if not (1 <= s <= params.M and 1 <= t <= params.M):
            raise SpecError("fused same-sign matrix needs 1 <= s, t <= M")
        chain = fuse_same_chain(params, s, t, u, one)
        left, right = _fundamental_subspace(params, "+", s), _fundamental_subspace(params, "+", t)
    else:
        raise ValueError(f"not a fused kind: {kind}")
    sub = product_subspace(left, right, chain.space)
    return chain, sub, restrict_chain(chain, sub)


def denominator_of_restriction(params: AlgebraParams, kind: RMatrixKind, normalization: str = "none") -> DenominatorReport:
    """Denominator of a restricted fused matrix over Q(u), compared with the closed form."""
    s, t = kind.s, kind.t
    _check_homogeneous(params, kind.tag)
    chain, sub, mat = restricted_fused(params, kind.tag, s, t)
    extra: Dict[str, object] = {}
    if kind.tag == "FusedMixed":
        if normalization != "none":
            raise ValueError("the mixed fused matrix is used unnormalised")
        divisor = chain.cleared_by
        predicted = predicted_mixed_denominator(params, s)
        # both distinguished pure tensors must be fixed
        _check_mixed_fixed_vectors(params, s, t, chain)
    else:
        X, Y = same_eigenvalues(params, s, t, chain)
        Yp = predicted_Y(params, s, t, Poly.gen("u"), Poly.const(1, "u"))
        if Y != Yp:
            raise InternalConsistencyError("eigenvalue on the lowest pure tensor differs from the closed product")
        Nn, Dd = predicted_N(params, s, t), predicted_D(params, s, t)
        ratio = proportional(X * Dd, Y * Nn)
        extra.update({
            "X": poly_text(X),
            "Y": poly_text(Y),
            "X_over_Y_matches": ratio is not None,
            "X_over_Y_scalar": scalar_text(ratio) if ratio is not None else None,
        })
        if normalization == "X":
            divisor, predicted = X, Nn
        elif normalization == "Y":
            divisor, predicted = Y, Dd
        else:
            raise ValueError("same-sign matrices are normalised by X or Y")
    entries = [RatFun(v, divisor) for _, _, v in mat.entries()]
    computed = lcm_denominators(entries)
    c = proportional(predicted, computed)
    return DenominatorReport(
        kind=kind.tag, s=s, t=t, M=params.M, N=params.N, q=params.q,
        normalization=normalization, computed=computed, predicted=predicted,
        scalar_ratio=c, matches=c is not None, extra=extra,
    )


def _check_mixed_fixed_vectors(params: AlgebraParams, s: int, t: int, chain: OpChain) -> None:
    k = params.kappa
    hs, ht = hw_vector(params, "+", s), hw_vector(params, "-", t)
    top = tensor_vectors(hs, ht, k ** t)
    low = pure_tensor(chain.space, [k - 1] * s + [0] * t)
    for vec, what in ((top, "v^(s) (x) w^(t)"), (low, "the extremal pure tensor")):
        img = chain.apply(vec)
        expect = {key: chain.cleared_by * val for key, val in vec.items()}
        if img.keys() != expect.keys() or any(img[key] != expect[key] for key in img):
            raise InternalConsistencyError(f"fused mixed matrix does not fix {what}")


# --------------------------------------------------------- module-map checks


def _commutes(F: LinOp, src_mod: Module, dst_mod: Module) -> Tuple[bool, Optional[str]]:
    k = src_mod.params.kappa
    for fam in ("s", "t"):
        for n in range(src_mod.legs + 1):
            for i in range(k):
                for j in range(k):
                    x1 = src_mod.action(fam, i, j, n)
                    x2 = dst_mod.action(fam, i, j, n)
                    if (F @ x1) != (x2 @ F):
                        return False, f"{fam}_{i + 1}{j + 1}^({n})"
    return True, None


def module_map_check(params: AlgebraParams, kind: RMatrixKind) -> Dict[str, object]:
    """Does flip o R intertwine all generator actions?  a = u symbolic, b = 1."""
    u = RatFun.gen("u")
    one = RatFun.const(1, "u")
    V = TensorSpace([params.vspace])
    tag = kind.tag
    if tag == "PerkSchultz":
        src = eval_tensor(params, [EvalModuleSpec("V", u), EvalModuleSpec("V", one)])
        dst = eval_tensor(params, [EvalModuleSpec("V", one), EvalModuleSpec("V", u)])
        F = graded_flip(V, V) @ perk_schultz(params, u, one)
    elif tag == "PlusMinus":
        src = eval_tensor(params, [EvalModuleSpec("V", u), EvalModuleSpec("W", one)])
        dst = eval_tensor(params, [EvalModuleSpec("W", one), EvalModuleSpec("V", u)])
        F = graded_flip(V, V) @ r_plus_minus(params, u, one)
    else:
        s, t = kind.s, kind.t
        sign2 = "-" if tag == "FusedMixed" else "+"
        A = fundamental_module(params, FundSpec("+", s, u))
        B = fundamental_module(params, FundSpec(sign2, t, one))
        src = TensorModule(A, B)
        dst = TensorModule(B, A)
        chain, sub, mat = restricted_fused(params, tag, s, t)
        conv = (lambda v: RatFun(v, chain.cleared_by)) if chain.cleared_by is not None else (lambda v: RatFun(v))
        R = LinOp(src.space, src.space, {c: {r: conv(v) for r, v in col.items()} for c, col in mat.cols.items()})
        F = graded_flip(A.space, B.space) @ R
    ok, bad = _commutes(F, src, dst)
    return {"kind": tag, "s": kind.s, "t": kind.t, "M": params.M, "N": params.N, "commutes": ok, "first_failure": bad}
