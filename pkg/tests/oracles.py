"""Slow, independent reference implementations used to validate the package.

Everything here is dense sympy linear algebra written straight from the
displayed formulas, sharing no code with ``qsuper``.
"""
from __future__ import annotations

from itertools import product

import sympy
from sympy import Rational, zeros


def parity(M, i):
    return 0 if i < M else 1


def qi(M, q, i):
    return q if i < M else 1 / q


def perk_schultz_terms(M, N, q, z, w):
    """(coefficient, ((r1, c1), (r2, c2))) for R(z, w) on two legs."""
    k = M + N
    out = []
    for i in range(k):
        out.append((z * qi(M, q, i) - w / qi(M, q, i), ((i, i), (i, i))))
        for j in range(k):
            if i != j:
                out.append((z - w, ((i, i), (j, j))))
    for i in range(k):
        for j in range(i + 1, k):
            out.append((z * (qi(M, q, i) - 1 / qi(M, q, i)), ((j, i), (i, j))))
            out.append((w * (qi(M, q, j) - 1 / qi(M, q, j)), ((i, j), (j, i))))
    return out


def plus_minus_terms(M, N, q, a, b):
    k = M + N
    out = []
    for i in range(k):
        out.append(((b * qi(M, q, i) - a / qi(M, q, i)) / (b - a), ((i, i), (i, i))))
        for j in range(k):
            if i != j:
                out.append((sympy.Integer(1), ((i, i), (j, j))))
    for i in range(k):
        for j in range(k):
            if i < j:
                out.append((a * (qi(M, q, j) - 1 / qi(M, q, j)) / (b - a), ((j, i), (j, i))))
            elif i > j:
                out.append((b * (qi(M, q, i) - 1 / qi(M, q, i)) / (b - a), ((j, i), (j, i))))
    return out


def placed_dense(M, N, terms, legs, nlegs, graded=True):
    """Dense matrix of sum c * (E_{r1 c1})_{legs[0]} (E_{r2 c2})_{legs[1]} ... with
    the sign rule: a unit of parity p on leg m picks up (-1)^{p * (parities of
    the original vector on legs before m)}."""
    k = M + N
    dim = k ** nlegs
    out = zeros(dim, dim)
    basis = list(product(range(k), repeat=nlegs))
    index = {b: n for n, b in enumerate(basis)}
    for col, vec in enumerate(basis):
        for coef, units in terms:
            new = list(vec)
            sign = 1
            ok = True
            for (r, c), leg in zip(units, legs):
                if vec[leg] != c:
                    ok = False
                    break
                p = (parity(M, r) + parity(M, c)) % 2
                before = sum(parity(M, vec[l]) for l in range(leg))
                if graded and p and before % 2:
                    sign = -sign
                new[leg] = r
            if ok:
                out[index[tuple(new)], col] += sign * coef
    return out


def qybe_holds(M, N, q, z1, z2, z3, graded=True) -> bool:
    R12 = placed_dense(M, N, perk_schultz_terms(M, N, q, z1, z2), (0, 1), 3, graded)
    R13 = placed_dense(M, N, perk_schultz_terms(M, N, q, z1, z3), (0, 2), 3, graded)
    R23 = placed_dense(M, N, perk_schultz_terms(M, N, q, z2, z3), (1, 2), 3, graded)
    return (R12 * R13 * R23 - R23 * R13 * R12).is_zero_matrix


def mixed_denominator_one_one(q):
    """lcm of the denominators of the s = t = 1 fused mixed matrix, as a monic
    sympy polynomial in u = a/b."""
    u = sympy.Symbol("u")
    M = N = 1
    a, b = u * q ** -2, q ** 2
    mat = placed_dense(M, N, plus_minus_terms(M, N, q, a, b), (0, 1), 2)
    den = sympy.Integer(1)
    for e in mat:
        d = sympy.denom(sympy.together(e))
        den = sympy.lcm(den, d)
    return sympy.Poly(den, u).monic()


def admissible(M, N, r):
    """Index tuples i_1 <= ... <= i_r where equal neighbours must exceed M."""
    k = M + N
    out = []
    for tup in product(range(k), repeat=r):
        if all(tup[x] < tup[x + 1] or (tup[x] == tup[x + 1] and tup[x] >= M) for x in range(r - 1)):
            out.append(tup)
    return out


def to_sympy(x):
    return Rational(int(x.numerator), int(x.denominator))
