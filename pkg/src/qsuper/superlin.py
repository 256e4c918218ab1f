"""Graded linear algebra on tensor spaces with parity-decorated bases.

Vectors are sparse dicts ``{flat index: scalar}``; the flat index of a
multi-index is row-major (leftmost factor slowest).  Every operator is stored
as an ordinary matrix acting on these coordinates.  An element written as
``sum c E_{r1 c1} (x) ... (x) E_{rn cn}`` acts on ``e_{k1} (x) ... (x) e_{kn}``
with the Koszul sign ``(-1)^{sum_m (|r_m|+|c_m|) * sum_{l<m} |k_l|}``; the
helpers below translate between the two pictures.

Scalars may be any of ``mpq``, :class:`~qsuper.field.Poly` or
:class:`~qsuper.field.RatFun`; division is only needed by :class:`Subspace`.
"""
from __future__ import annotations

from dataclasses import dataclass
from functools import cached_property
from itertools import product
from typing import Dict, Iterable, List, Sequence, Tuple

from gmpy2 import mpq

from .field import scalar_text

Vector = Dict[int, object]


@dataclass(frozen=True)
class SuperSpace:
    dim: int
    parity: Tuple[int, ...]

    def __post_init__(self):
        if self.dim < 1:
            raise ValueError("dimension must be positive")
        if len(self.parity) != self.dim or any(p not in (0, 1) for p in self.parity):
            raise ValueError("parity list must have one 0/1 entry per basis vector")

    @classmethod
    def standard(cls, M: int, N: int) -> "SuperSpace":
        """The natural space: first M directions even, last N odd."""
        return cls(M + N, tuple([0] * M + [1] * N))


class TensorSpace:
    """Ordered tensor product of super spaces."""

    def __init__(self, factors: Sequence[SuperSpace]):
        self.factors: Tuple[SuperSpace, ...] = tuple(factors)
        if not self.factors:
            raise ValueError("a tensor space needs at least one factor")
        dims = [f.dim for f in self.factors]
        strides = [1] * len(dims)
        for k in range(len(dims) - 2, -1, -1):
            strides[k] = strides[k + 1] * dims[k + 1]
        self.dims = tuple(dims)
        self.strides = tuple(strides)
        self.dim = strides[0] * dims[0]

    def __eq__(self, other) -> bool:
        return isinstance(other, TensorSpace) and self.factors == other.factors

    def __hash__(self) -> int:
        return hash(self.factors)

    def __repr__(self) -> str:
        return f"TensorSpace(dims={self.dims})"

    @property
    def legs(self) -> int:
        return len(self.factors)

    def flat(self, multi: Sequence[int]) -> int:
        if len(multi) != len(self.dims):
            raise ValueError("multi-index length does not match the number of legs")
        idx = 0
        for k, (m, d) in enumerate(zip(multi, self.dims)):
            if not 0 <= m < d:
                raise IndexError(f"index {m} out of range on leg {k}")
            idx += m * self.strides[k]
        return idx

    def multi(self, idx: int) -> Tuple[int, ...]:
        return self._multis[idx]

    @cached_property
    def _multis(self) -> List[Tuple[int, ...]]:
        return list(product(*[range(d) for d in self.dims]))

    @cached_property
    def parities(self) -> List[int]:
        out = []
        for m in self._multis:
            p = 0
            for f, k in zip(self.factors, m):
                p ^= f.parity[k]
            out.append(p)
        return out

    @cached_property
    def leg_parities(self) -> List[Tuple[int, ...]]:
        return [tuple(f.parity[k] for f, k in zip(self.factors, m)) for m in self._multis]

    def parity(self, idx: int) -> int:
        return self.parities[idx]

    def sub(self, positions: Sequence[int]) -> "TensorSpace":
        return TensorSpace([self.factors[p] for p in positions])

    def concat(self, other: "TensorSpace") -> "TensorSpace":
        return TensorSpace(self.factors + other.factors)

    def basis_vector(self, multi: Sequence[int]) -> Vector:
        return {self.flat(multi): mpq(1)}


# ------------------------------------------------------------------- vectors


def vec_add(x: Vector, y: Vector, c=1) -> Vector:
    """x + c*y as a new dict."""
    out = dict(x)
    for k, v in y.items():
        w = out.get(k)
        nv = v * c if c != 1 else v
        if w is None:
            out[k] = nv
        else:
            s = w + nv
            if s:
                out[k] = s
            else:
                del out[k]
    return out


def vec_iadd(x: Vector, y: Vector, c=1) -> None:
    for k, v in y.items():
        nv = v * c if c != 1 else v
        w = x.get(k)
        if w is None:
            if nv:
                x[k] = nv
        else:
            s = w + nv
            if s:
                x[k] = s
            else:
                del x[k]


def vec_scale(x: Vector, c) -> Vector:
    if not c:
        return {}
    return {k: v * c for k, v in x.items()}


def vec_equal(x: Vector, y: Vector) -> bool:
    if x.keys() != y.keys():
        return False
    return all(x[k] == y[k] for k in x)


def vec_text(space: TensorSpace, x: Vector) -> Dict[str, str]:
    """JSON form: 1-based multi-index strings to canonical scalar text."""
    out = {}
    for k in sorted(x):
        key = ",".join(str(m + 1) for m in space.multi(k))
        out[key] = scalar_text(x[k])
    return out


def vec_tensor(sx: TensorSpace, x: Vector, sy: TensorSpace, y: Vector) -> Vector:
    """Plain tensor of coordinate vectors (no sign: vectors carry none)."""
    out: Vector = {}
    d = sy.dim
    for i, a in x.items():
        base = i * d
        for j, b in y.items():
            c = a * b
            if c:
                out[base + j] = c
    return out


# ----------------------------------------------------------------- operators


class LinOp:
    """Sparse matrix stored column-wise: ``cols[c][r]`` is the (r, c) entry."""

    __slots__ = ("src", "dst", "cols")

    def __init__(self, src: TensorSpace, dst: TensorSpace, cols: Dict[int, Dict[int, object]] | None = None):
        self.src = src
        self.dst = dst
        clean: Dict[int, Dict[int, object]] = {}
        for c, col in (cols or {}).items():
            nz = {r: v for r, v in col.items() if v}
            if nz:
                clean[c] = nz
        self.cols = clean

    @classmethod
    def from_entries(cls, src, dst, entries: Iterable[Tuple[int, int, object]]) -> "LinOp":
        cols: Dict[int, Dict[int, object]] = {}
        for r, c, v in entries:
            col = cols.setdefault(c, {})
            col[r] = col[r] + v if r in col else v
        return cls(src, dst, cols)

    @classmethod
    def identity(cls, space: TensorSpace, one=None) -> "LinOp":
        one = mpq(1) if one is None else one
        return cls(space, space, {k: {k: one} for k in range(space.dim)})

    @classmethod
    def zero(cls, src: TensorSpace, dst: TensorSpace | None = None) -> "LinOp":
        return cls(src, dst or src, {})

    def entries(self):
        for c, col in self.cols.items():
            for r, v in col.items():
                yield r, c, v

    def entry(self, r: int, c: int):
        col = self.cols.get(c)
        if col is None:
            return 0
        return col.get(r, 0)

    @property
    def nnz(self) -> int:
        return sum(len(c) for c in self.cols.values())

    def is_zero(self) -> bool:
        return not self.cols

    def apply(self, x: Vector) -> Vector:
        out: Vector = {}
        cols = self.cols
        for c, a in x.items():
            col = cols.get(c)
            if col is None:
                continue
            for r, v in col.items():
                w = out.get(r)
                p = v * a
                if w is None:
                    out[r] = p
                else:
                    out[r] = w + p
        return {k: v for k, v in out.items() if v}

    __call__ = apply

    def __matmul__(self, other: "LinOp") -> "LinOp":
        """self after other."""
        if other.dst != self.src:
            raise ValueError("incompatible operator composition")
        cols = {c: self.apply(col) for c, col in other.cols.items()}
        return LinOp(other.src, self.dst, cols)

    def __add__(self, other: "LinOp") -> "LinOp":
        self._same_shape(other)
        cols = {c: dict(col) for c, col in self.cols.items()}
        for c, col in other.cols.items():
            cols[c] = vec_add(cols.get(c, {}), col)
        return LinOp(self.src, self.dst, cols)

    def __sub__(self, other: "LinOp") -> "LinOp":
        return self + other.scale(-1)

    def scale(self, c) -> "LinOp":
        if not c:
            return LinOp(self.src, self.dst, {})
        return LinOp(self.src, self.dst, {k: {r: v * c for r, v in col.items()} for k, col in self.cols.items()})

    def map_entries(self, fn) -> "LinOp":
        return LinOp(self.src, self.dst, {k: {r: fn(v) for r, v in col.items()} for k, col in self.cols.items()})

    def _same_shape(self, other: "LinOp"):
        if self.src != other.src or self.dst != other.dst:
            raise ValueError("operators act between different spaces")

    def __eq__(self, other) -> bool:
        if not isinstance(other, LinOp):
            return NotImplemented
        if self.src != other.src or self.dst != other.dst or self.cols.keys() != other.cols.keys():
            return False
        return all(vec_equal(col, other.cols[c]) for c, col in self.cols.items())

    __hash__ = None

    def dense(self, zero=0) -> List[List[object]]:
        rows = [[zero] * self.src.dim for _ in range(self.dst.dim)]
        for r, c, v in self.entries():
            rows[r][c] = v
        return rows

    def __repr__(self) -> str:
        return f"LinOp({self.src.dims}->{self.dst.dims}, nnz={self.nnz})"


def _koszul_exponent(row_legs: Sequence[int], col_legs: Sequence[int]) -> int:
    """Sign exponent of a matrix unit E_{row,col} acting on basis vector e_col."""
    acc = 0
    before = 0
    for pr, pc in zip(row_legs, col_legs):
        acc += (pr ^ pc) & before
        before ^= pc
    return acc & 1


def element_to_matrix(space: TensorSpace, coeffs: Dict[Tuple[int, int], object]) -> LinOp:
    """Turn the coefficients of ``sum c_{r,c} E_{r1c1} (x) ... (x) E_{rncn}`` into a matrix.

    Keys are pairs of flat indices (row, col) of ``space``.
    """
    lp = space.leg_parities
    cols: Dict[int, Dict[int, object]] = {}
    for (r, c), v in coeffs.items():
        if not v:
            continue
        if _koszul_exponent(lp[r], lp[c]):
            v = -v
        cols.setdefault(c, {})[r] = v
    return LinOp(space, space, cols)


def matrix_to_element(op: LinOp) -> Dict[Tuple[int, int], object]:
    """Inverse of :func:`element_to_matrix` for endomorphisms."""
    lp = op.src.leg_parities
    out = {}
    for r, c, v in op.entries():
        out[(r, c)] = -v if _koszul_exponent(lp[r], lp[c]) else v
    return out


def kron(a: LinOp, b: LinOp) -> LinOp:
    """Graded tensor product: (x (x) y)(v (x) w) = (-1)^{|y||v|} xv (x) yw."""
    src = a.src.concat(b.src)
    dst = a.dst.concat(b.dst)
    pa = a.src.parities
    pbs, pbd = b.src.parities, b.dst.parities
    dsb, ddb = b.src.dim, b.dst.dim
    bcols = [(cb, [(rb, vb, pbd[rb] ^ pbs[cb]) for rb, vb in colb.items()]) for cb, colb in b.cols.items()]
    cols: Dict[int, Dict[int, object]] = {}
    for ca, cola in a.cols.items():
        odd_v = pa[ca]
        for cb, items in bcols:
            out = {}
            for ra, va in cola.items():
                base = ra * ddb
                for rb, vb, py in items:
                    p = va * vb
                    out[base + rb] = -p if (py & odd_v) else p
            cols[ca * dsb + cb] = out
    return LinOp(src, dst, cols)


def graded_flip(V, W) -> LinOp:
    """c_{V,W}: v (x) w -> (-1)^{|v||w|} w (x) v on grouped tensor factors."""
    V = V if isinstance(V, TensorSpace) else TensorSpace([V])
    W = W if isinstance(W, TensorSpace) else TensorSpace([W])
    one = mpq(1)
    src = V.concat(W)
    dst = W.concat(V)
    pv, pw = V.parities, W.parities
    dv, dw = V.dim, W.dim
    cols = {}
    for i in range(dv):
        for j in range(dw):
            cols[i * dw + j] = {j * dv + i: -one if (pv[i] & pw[j]) else one}
    return LinOp(src, dst, cols)


class PlacedOp:
    """An operator on some legs of an ambient space, identity on the others.

    ``op`` is a matrix on ``ambient.sub(positions)``; application includes the
    Koszul signs picked up by passing the untouched legs that precede each
    placed leg.
    """

    def __init__(self, op: LinOp, positions: Sequence[int], ambient: TensorSpace):
        positions = tuple(positions)
        if any(p < 0 or p >= ambient.legs for p in positions):
            raise IndexError(f"leg position out of range for {ambient.legs} legs")
        if any(b <= a for a, b in zip(positions, positions[1:])):
            raise ValueError("positions must be strictly increasing")
        if op.src != ambient.sub(positions) or op.dst != op.src:
            raise ValueError("operator does not act on the named legs")
        self.op = op
        self.positions = positions
        self.ambient = ambient
        sub = op.src
        strides = [ambient.strides[p] for p in positions]
        lp = sub.leg_parities
        table = {}
        for c, col in op.cols.items():
            cm = sub.multi(c)
            items = []
            for r, v in col.items():
                rm = sub.multi(r)
                delta = sum((x - y) * s for x, y, s in zip(rm, cm, strides))
                mask = 0
                for m, (pr, pc) in enumerate(zip(lp[r], lp[c])):
                    if pr ^ pc:
                        mask |= 1 << m
                items.append((delta, v, mask))
            table[c] = items
        self._table = table
        self._sub_strides = sub.strides

    def _sub_index_and_mask(self, multi, legpar):
        c = 0
        for p, s in zip(self.positions, self._sub_strides):
            c += multi[p] * s
        # parity of untouched legs before each placed leg
        mask = 0
        run = 0
        k = 0
        placed = self.positions
        for m, p in enumerate(placed):
            while k < p:
                run ^= legpar[k]
                k += 1
            if run:
                mask |= 1 << m
            k = p + 1
        return c, mask

    def apply(self, x: Vector) -> Vector:
        amb = self.ambient
        multis = amb._multis
        lps = amb.leg_parities
        table = self._table
        out: Vector = {}
        for idx, a in x.items():
            c, pmask = self._sub_index_and_mask(multis[idx], lps[idx])
            items = table.get(c)
            if not items:
                continue
            for delta, v, xmask in items:
                p = v * a
                if bin(xmask & pmask).count("1") & 1:
                    p = -p
                k = idx + delta
                w = out.get(k)
                out[k] = p if w is None else w + p
        return {k: v for k, v in out.items() if v}

    __call__ = apply

    def materialize(self) -> LinOp:
        cols = {}
        for idx in range(self.ambient.dim):
            cols[idx] = self.apply({idx: _one_like(self.op)})
        return LinOp(self.ambient, self.ambient, cols)


def _one_like(op: LinOp):
    for _, _, v in op.entries():
        if isinstance(v, type(mpq(0))):
            return mpq(1)
        return v * 0 + 1
    return mpq(1)


def place_legs(op: LinOp, positions: Sequence[int], ambient: TensorSpace) -> LinOp:
    """Materialised placement of ``op`` on ``positions`` of ``ambient``."""
    return PlacedOp(op, positions, ambient).materialize()


class OpChain:
    """Lazy product of placed operators; the last factor acts first."""

    def __init__(self, factors: Sequence, space: TensorSpace, scalar=1):
        self.factors = list(factors)
        self.space = space
        self.scalar = scalar

    def apply(self, x: Vector) -> Vector:
        for f in reversed(self.factors):
            x = f.apply(x)
            if not x:
                return x
        if self.scalar != 1:
            x = vec_scale(x, self.scalar)
        return x

    __call__ = apply

    def materialize(self) -> LinOp:
        return LinOp(self.space, self.space, {k: self.apply({k: mpq(1)}) for k in range(self.space.dim)})


# ---------------------------------------------------------------- subspaces


class RestrictionError(ValueError):
    """An operator maps part of a subspace outside the target subspace."""

    def __init__(self, message: str, witness: Vector):
        super().__init__(message)
        self.witness = witness


class Subspace:
    """Reduced row-echelon basis of a subspace of ``ambient``.

    Pivot of a basis vector = its smallest flat index; the pivot entry is 1 and
    every other basis vector vanishes there.
    """

    def __init__(self, ambient: TensorSpace):
        self.ambient = ambient
        self.basis: List[Vector] = []
        self.pivots: List[int] = []
        self._by_pivot: Dict[int, int] = {}
        self._holders: Dict[int, set] = {}

    @property
    def dim(self) -> int:
        return len(self.basis)

    def reduce(self, x: Vector) -> Vector:
        """Remainder of x modulo the subspace (zero iff x lies inside)."""
        r = dict(x)
        for p in [k for k in x if k in self._by_pivot]:
            c = r.get(p)
            if c:
                vec_iadd(r, self.basis[self._by_pivot[p]], -c)
        return r

    def contains(self, x: Vector) -> bool:
        return not self.reduce(x)

    def add(self, x: Vector) -> bool:
        """Insert x; return True when the dimension grew."""
        r = self.reduce(x)
        if not r:
            return False
        p = min(r)
        c = r[p]
        if c != 1:
            inv = 1 / c
            r = {k: v * inv for k, v in r.items()}
        bid = len(self.basis)
        # clear the new pivot from older basis vectors
        for other in list(self._holders.get(p, ())):
            b = self.basis[other]
            f = b[p]
            old = set(b)
            vec_iadd(b, r, -f)
            self._update_holders(other, old, b)
        self.basis.append(r)
        self.pivots.append(p)
        self._by_pivot[p] = bid
        for k in r:
            self._holders.setdefault(k, set()).add(bid)
        return True

    def _update_holders(self, bid: int, old: set, vec: Vector):
        new = set(vec)
        for k in old - new:
            self._holders[k].discard(bid)
        for k in new - old:
            self._holders.setdefault(k, set()).add(bid)

    def coordinates(self, x: Vector, check: bool = True):
        """Coordinates of x in the basis; None if x lies outside (when checked)."""
        coords = [x.get(p, 0) for p in self.pivots]
        if check:
            rest = dict(x)
            for c, b in zip(coords, self.basis):
                if c:
                    vec_iadd(rest, b, -c)
            if rest:
                return None
        return coords

    def sorted_copy(self) -> "Subspace":
        """Same subspace with basis ordered by pivot."""
        out = Subspace(self.ambient)
        order = sorted(range(self.dim), key=lambda k: self.pivots[k])
        for k in order:
            b = dict(self.basis[k])
            bid = len(out.basis)
            out.basis.append(b)
            out.pivots.append(self.pivots[k])
            out._by_pivot[self.pivots[k]] = bid
            for key in b:
                out._holders.setdefault(key, set()).add(bid)
        return out

    def same_as(self, other: "Subspace") -> bool:
        a, b = self.sorted_copy(), other.sorted_copy()
        return a.pivots == b.pivots and all(vec_equal(x, y) for x, y in zip(a.basis, b.basis))

    def __repr__(self) -> str:
        return f"Subspace(dim={self.dim} in {self.ambient.dim})"


def span_closure(seed: Iterable[Vector], generators: Sequence, ambient: TensorSpace | None = None,
                 limit: int | None = None) -> Subspace:
    """Smallest generator-invariant subspace containing the seed.

    Breadth-first: each newly added basis vector is pushed through the
    generators in their given order.  Stops early once the whole ambient space
    is reached.  The result is returned with pivots sorted, which makes it
    independent of generator order.
    """
    seed = list(seed)
    if ambient is None:
        if generators:
            g = generators[0]
            ambient = g.src if isinstance(g, LinOp) else g.space if isinstance(g, OpChain) else g.ambient
        else:
            raise ValueError("cannot infer the ambient space")
    sub = Subspace(ambient)
    queue: List[Vector] = []
    for v in seed:
        if sub.add(v):
            queue.append(sub.basis[-1])
    full = ambient.dim
    qi = 0
    while qi < len(queue) and sub.dim < full:
        # basis vectors mutate under back-substitution; the snapshot is fine
        # because the span of the queue is what matters
        v = dict(queue[qi])
        qi += 1
        for g in generators:
            w = g.apply(v) if not isinstance(g, LinOp) else g.apply(v)
            if w and sub.add(w):
                queue.append(dict(sub.basis[-1]))
                if limit is not None and sub.dim > limit:
                    raise OverflowError(f"closure exceeds {limit} dimensions")
                if sub.dim == full:
                    break
    return sub.sorted_copy()


def restrict_op(op, src_sub: Subspace, dst_sub: Subspace) -> LinOp:
    """Matrix of ``op`` between the bases of two subspaces.

    Raises :class:`RestrictionError` with the offending image when some basis
    vector is sent outside ``dst_sub``.
    """
    src = TensorSpace([SuperSpace(max(src_sub.dim, 1), _basis_parities(src_sub))])
    dst = TensorSpace([SuperSpace(max(dst_sub.dim, 1), _basis_parities(dst_sub))])
    cols = {}
    for k, b in enumerate(src_sub.basis):
        img = op.apply(b)
        coords = dst_sub.coordinates(img)
        if coords is None:
            raise RestrictionError("image leaves the target subspace", img)
        cols[k] = {r: v for r, v in enumerate(coords) if v}
    return LinOp(src, dst, cols)


def _basis_parities(sub: Subspace) -> Tuple[int, ...]:
    if not sub.basis:
        return (0,)
    par = sub.ambient.parities
    out = []
    for b in sub.basis:
        ps = {par[k] for k in b}
        if len(ps) != 1:
            raise ValueError("basis vector is not parity-homogeneous")
        out.append(ps.pop())
    return tuple(out)


def subspace_space(sub: Subspace) -> SuperSpace:
    """The subspace viewed as a super space of its own (basis order kept)."""
    return SuperSpace(sub.dim, _basis_parities(sub))
