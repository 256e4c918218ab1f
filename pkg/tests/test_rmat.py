import pytest
import sympy
from gmpy2 import mpq
from hypothesis import given, strategies as st

from oracles import mixed_denominator_one_one, perk_schultz_terms, placed_dense, qybe_holds, to_sympy
from qsuper.field import Poly, poly_text
from qsuper.repcore import AlgebraParams, SpecError, _fundamental_subspace, hw_vector
from qsuper.rmat import (
    PoleError,
    RMatrixKind,
    denominator_of_restriction,
    fuse_mixed,
    fuse_mixed_chain,
    fuse_same,
    fuse_same_chain,
    module_map_check,
    perk_schultz,
    predicted_D,
    predicted_N,
    predicted_Y,
    product_subspace,
    pure_tensor,
    qybe_check,
    r_plus_minus,
    restrict_chain,
    tensor_vectors,
    theta_lambda,
)
from qsuper.superlin import OpChain, PlacedOp, TensorSpace

Q = mpq(5, 2)
ONE = mpq(1)
nonzero_rat = st.builds(mpq, st.integers(-30, 30).filter(bool), st.integers(1, 12))


def idx(p, *legs):
    return TensorSpace([p.vspace] * len(legs)).flat(legs)


# ------------------------------------------------------------ Perk-Schultz


def test_perk_schultz_coefficients():
    p = AlgebraParams(2, 2, Q)
    z, w = mpq(3), mpq(7, 5)
    R = perk_schultz(p, z, w)
    for i in range(4):
        qi = p.qi(i)
        assert R.entry(idx(p, i, i), idx(p, i, i)) == z * qi - w / qi
        for j in range(4):
            if i != j:
                assert R.entry(idx(p, i, j), idx(p, i, j)) == z - w
    # E_ji (x) E_ij for i < j, on even legs where no sign enters
    assert R.entry(idx(p, 1, 0), idx(p, 0, 1)) == z * (Q - 1 / Q)


@given(st.sampled_from([(1, 1), (2, 1), (1, 2)]), nonzero_rat, nonzero_rat)
def test_perk_schultz_matches_oracle(mn, z, w):
    M, N = mn
    p = AlgebraParams(M, N, Q)
    got = perk_schultz(p, z, w).dense(zero=mpq(0))
    want = placed_dense(M, N, perk_schultz_terms(M, N, sympy.Rational(5, 2), to_sympy(z), to_sympy(w)), (0, 1), 2)
    k = M + N
    assert all(to_sympy(got[i][j]) == want[i, j] for i in range(k * k) for j in range(k * k))


def test_qybe_examples():
    assert qybe_check(AlgebraParams(1, 1, Q), mpq(1), mpq(2), mpq(3))
    assert qybe_check(AlgebraParams(2, 1, Q), mpq(4), mpq(4), mpq(4))
    assert qybe_check(AlgebraParams(2, 1, Q), mpq(-3, 7), mpq(11, 2), mpq(5, 9))


@given(nonzero_rat, nonzero_rat, nonzero_rat)
def test_qybe_random_triples_agree_with_oracle(z1, z2, z3):
    assert qybe_check(AlgebraParams(1, 2, Q), z1, z2, z3)
    assert qybe_holds(1, 2, sympy.Rational(5, 2), to_sympy(z1), to_sympy(z2), to_sympy(z3))


def test_oracle_agrees_that_signs_matter():
    q = sympy.Rational(5, 2)
    assert qybe_holds(1, 1, q, 1, 2, 3)
    assert not qybe_holds(1, 1, q, 1, 2, 3, graded=False)


def test_homogeneity():
    p = AlgebraParams(2, 1, Q)
    a, b, lam = mpq(3), mpq(2, 7), mpq(-5, 3)
    assert perk_schultz(p, lam * a, lam * b) == perk_schultz(p, a, b).scale(lam)
    assert r_plus_minus(p, lam * a, lam * b) == r_plus_minus(p, a, b)


# ---------------------------------------------------------------- R^{+-}


def test_plus_minus_off_diagonal_is_one():
    p = AlgebraParams(2, 1, Q)
    R = r_plus_minus(p, mpq(3), mpq(7, 5))
    for i in range(3):
        for j in range(3):
            if i != j:
                assert R.entry(idx(p, i, j), idx(p, i, j)) == 1


def test_plus_minus_pole():
    with pytest.raises(PoleError):
        r_plus_minus(AlgebraParams(1, 1, Q), mpq(2), mpq(2))


@given(st.sampled_from([(1, 1), (2, 1), (1, 2), (2, 2)]), nonzero_rat, nonzero_rat)
def test_theta_and_lambda_identities(mn, a, b):
    if a == b:
        return
    p = AlgebraParams(*mn, Q)
    k = p.kappa
    theta, lam = theta_lambda(p, a, b)
    assert theta[(0, k - 1)] == 1
    for i in range(k):
        for j in range(k):
            if i != j:
                assert theta[(i, j)] == (-1) ** (p.parity(i) * p.parity(j))
    for j in range(k):
        for kk in range(j + 1, k):
            sign = (-1) ** (p.parity(j) + p.parity(kk))
            assert lam[(kk, kk)] - lam[(j, kk)] == theta[(j, kk)] * sign / p.qi(kk)


# ----------------------------------------------------------------- fusion


def test_mixed_one_one_is_plus_minus_block():
    p = AlgebraParams(2, 1, Q)
    a, b = mpq(3), mpq(5, 7)
    assert fuse_mixed(p, 1, 1, a, b) == r_plus_minus(p, a / Q ** 2, b * Q ** 2)


def test_mixed_pole_names_the_pair():
    p = AlgebraParams(2, 2, Q)
    # a q^{-4} = b q^{2} at (i, j) = (2, 1)
    with pytest.raises(PoleError, match=r"\(2, 1\)"):
        fuse_mixed_chain(p, 2, 1, Q ** 6, ONE)


@pytest.mark.parametrize("M, N, s, t", [(2, 1, 2, 1), (2, 2, 2, 2), (1, 2, 1, 2), (3, 1, 3, 1)])
def test_mixed_fixes_distinguished_vectors(M, N, s, t):
    p = AlgebraParams(M, N, Q)
    k = p.kappa
    chain = fuse_mixed_chain(p, s, t, mpq(3), mpq(2, 11))
    top = tensor_vectors(hw_vector(p, "+", s), hw_vector(p, "-", t), k ** t)
    low = pure_tensor(chain.space, [k - 1] * s + [0] * t)
    assert chain.apply(top) == top
    assert chain.apply(low) == low


@pytest.mark.parametrize("s, t", [(1, 1), (2, 1), (1, 2), (2, 2)])
def test_same_fusion_orders_agree(s, t):
    p = AlgebraParams(2, 1, Q)
    a, b = mpq(3), mpq(-2, 9)
    chain = fuse_same_chain(p, s, t, a, b)
    factors = []
    for i in range(1, s + 1):
        for j in range(t, 0, -1):
            blk = perk_schultz(p, a * p.qpow(-2 * i), b * p.qpow(-2 * j))
            factors.append(PlacedOp(blk, (i - 1, s + j - 1), chain.space))
    assert OpChain(factors, chain.space).materialize() == chain.materialize()


def test_same_eigenvalues_one_one():
    p = AlgebraParams(2, 1, Q)
    a, b = mpq(3), mpq(2, 7)
    _, X, Y = fuse_same(p, 1, 1, a, b)
    assert Y == a * Q ** -3 - b / Q
    assert X == a / Q - b * Q ** -3
    assert Y == predicted_Y(p, 1, 1, a, b)
    # X / Y = N / D up to a scalar, N and D taken at the same (a, b)
    u = a / b
    ratio = (X / Y) / (predicted_N(p, 1, 1)(u) / predicted_D(p, 1, 1)(u))
    assert ratio == Q ** 2


def test_same_sign_range():
    with pytest.raises(SpecError):
        fuse_same(AlgebraParams(1, 2, Q), 2, 1, ONE, mpq(2))


def test_same_restriction_stays_inside():
    p = AlgebraParams(2, 1, Q)
    chain = fuse_same_chain(p, 2, 1, Poly.gen("u"), Poly.const(1))
    sub = product_subspace(_fundamental_subspace(p, "+", 2), _fundamental_subspace(p, "+", 1), chain.space)
    mat = restrict_chain(chain, sub)
    assert mat.src.dim == sub.dim == 4 * 3


# ------------------------------------------------------------ denominators


def test_mixed_denominator_gl11_q2_matches_oracle():
    q = mpq(2)
    rep = denominator_of_restriction(AlgebraParams(1, 1, q), RMatrixKind("FusedMixed", 1, 1))
    want = mixed_denominator_one_one(sympy.Integer(2))
    assert poly_text(rep.computed) == "u - 16"
    assert [mpq(int(c.p), int(c.q)) for c in reversed(want.all_coeffs())] == list(rep.computed.coeffs)
    assert rep.matches and rep.scalar_ratio == mpq(-1, 4)


def test_same_sign_denominators_gl21():
    p = AlgebraParams(2, 1, Q)
    x = denominator_of_restriction(p, RMatrixKind("FusedSame", 1, 1), "X")
    y = denominator_of_restriction(p, RMatrixKind("FusedSame", 1, 1), "Y")
    assert x.computed == Poly.from_roots([Q ** -2]) and x.matches
    assert y.computed == Poly.from_roots([Q ** 2]) and y.matches
    assert x.extra["X_over_Y_matches"]


@pytest.mark.parametrize("M, N, s, t", [(2, 1, 2, 1), (2, 1, 1, 2), (2, 2, 2, 2), (1, 2, 1, 2)])
def test_small_grid_matches(M, N, s, t):
    p = AlgebraParams(M, N, Q)
    if s <= M and t <= N:
        assert denominator_of_restriction(p, RMatrixKind("FusedMixed", s, t)).matches
    if s <= M and t <= M:
        for norm in "XY":
            assert denominator_of_restriction(p, RMatrixKind("FusedSame", s, t), norm).matches


def test_report_json_fields():
    rep = denominator_of_restriction(AlgebraParams(1, 1, Q), RMatrixKind("FusedMixed", 1, 1)).to_json()
    for key in ("kind", "s", "t", "M", "N", "q", "normalization", "computed", "predicted", "scalar_ratio", "matches"):
        assert key in rep
    assert rep["q"] == "5/2"


def test_bad_normalisation():
    with pytest.raises(ValueError):
        denominator_of_restriction(AlgebraParams(1, 1, Q), RMatrixKind("FusedMixed", 1, 1), "X")
    with pytest.raises(ValueError):
        RMatrixKind("Other")


# -------------------------------------------------------------- module maps


@pytest.mark.parametrize("kind", [RMatrixKind("PerkSchultz"), RMatrixKind("PlusMinus"),
                                  RMatrixKind("FusedSame", 1, 2), RMatrixKind("FusedMixed", 2, 1)])
def test_module_maps_gl21(kind):
    assert module_map_check(AlgebraParams(2, 1, Q), kind)["commutes"]


def test_module_map_detects_a_non_intertwiner():
    # the unflipped Perk-Schultz matrix is not a module map V(u) x V(1) -> V(1) x V(u)
    from qsuper.field import RatFun
    from qsuper.repcore import EvalModuleSpec, eval_tensor
    from qsuper.rmat import _commutes

    p = AlgebraParams(1, 1, Q)
    u, one = RatFun.gen("u"), RatFun.const(1, "u")
    src = eval_tensor(p, [EvalModuleSpec("V", u), EvalModuleSpec("V", one)])
    dst = eval_tensor(p, [EvalModuleSpec("V", one), EvalModuleSpec("V", u)])
    ok, first = _commutes(perk_schultz(p, u, one), src, dst)
    assert not ok and first
