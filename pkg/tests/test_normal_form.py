from math import factorial

import pytest
from gmpy2 import mpq

from vishik import linalg
from vishik.errors import (
    DegenerateError,
    DimensionError,
    EquilibriumError,
    NotAContactError,
    NotSimpleError,
    OrderError,
    SurfaceError,
)
from vishik.normal_form import (
    build_beta,
    build_gamma,
    choose_column_permutation,
    flow_box,
    model_field,
    pushforward,
    shear,
    straighten_surface,
    verify,
    vishik_normal_form,
)
from vishik.randomized import conjugate_model, conjugation_case
from vishik.series import Jet, JetMap, compose, graph_map, invert_map

from helpers import const, field, jmap, var


# pushforward

def test_pushforward_identity_and_linear():
    X = field(var(1, 2) ** 2 + var(0, 2), const(1, 2) - var(0, 2))
    assert pushforward(JetMap.identity(2, 6), X) == X.truncate(5)
    A = [[1, 2], [0, -1]]
    L = [[2, 1], [1, 1]]
    XA = field(*(sum((var(j, 2) * A[i][j] for j in range(2)), Jet.zero(2, 6)) for i in range(2)))
    Y = pushforward(JetMap.linear(L, 6), XA)
    # L A L^{-1}
    Linv = [[1, -1], [-1, 2]]
    LA = [[sum(L[i][r] * A[r][j] for r in range(2)) for j in range(2)] for i in range(2)]
    LAL = [[sum(LA[i][r] * Linv[r][j] for r in range(2)) for j in range(2)] for i in range(2)]
    assert [c.gradient() for c in Y] == LAL


def test_pushforward_example():
    x1, x2 = var(0, 2), var(1, 2)
    Y = pushforward(jmap(x1 + x2 * x2, x2), field(x2, const(1, 2)))
    assert Y == field(3 * var(1, 2, 5), const(1, 2, 5))


# flow box

def test_flow_box_examples():
    assert flow_box(field(const(1, 2), Jet.zero(2, 6))).is_identity()
    x1, x2 = var(0, 2), var(1, 2)
    X = field(x2, const(1, 2))
    ah = flow_box(X)
    assert ah == jmap(x2, x1 - x2 * x2 / 2)
    assert pushforward(ah, X) == field(const(1, 2, 5), Jet.zero(2, 5))
    with pytest.raises(EquilibriumError):
        flow_box(field(Jet.zero(2, 6), Jet.zero(2, 6)))


def test_flow_box_straightens_random_field():
    case = conjugation_case(2, 4, 0, 3)
    ah = flow_box(case.X)
    Y = pushforward(ah, case.X)
    assert Y == field(const(1, 4, 5), *(Jet.zero(4, 5) for _ in range(3)))


# surface straightening and shear

def test_straighten_surface_examples():
    y1, y2 = var(0, 2), var(1, 2)
    Phi, perm = straighten_surface(JetMap.identity(2, 6), y2 - y1 * y1)
    assert Phi == var(0, 1) ** 2 and perm == [0, 1]
    ah = jmap(y2, y1 - y2 * y2 / 2)
    Phi, perm = straighten_surface(ah, y1)
    assert Phi == -var(0, 1) ** 2 / 2
    with pytest.raises(SurfaceError):
        straighten_surface(JetMap.identity(2, 6), y1 * y1 + y2 * y1)


def test_straighten_surface_swaps_when_last_partial_vanishes():
    y = [var(i, 3) for i in range(3)]
    Phi, perm = straighten_surface(JetMap.identity(3, 6), y[1] - y[0] ** 2 + y[2] ** 2)
    assert perm == [0, 2, 1]
    assert Phi == var(0, 2) ** 2 - var(1, 2) ** 2


def test_shear_example():
    y1, y2 = var(0, 2), var(1, 2)
    a = shear(y1 * y1 + 3 * y2)
    z = [var(i, 3) for i in range(3)]
    assert a == jmap(z[0], z[1], z[2] - 3 * z[1])
    assert shear(var(0, 1) ** 2).is_identity()
    assert shear(y1 * y1 + y1 * y2).is_identity()


# column permutation

def test_column_permutation_identity_cases():
    y1 = var(0, 1)
    assert choose_column_permutation(y1**2, 1) == [0, 1]
    assert choose_column_permutation(-y1**2 / 2, 1) == [0, 1]
    # the cusp model already has a nonzero mixed entry in the first column
    nf = vishik_normal_form(field(var(1, 3), var(2, 3), const(1, 3)), var(0, 3))
    assert nf.trace.column_permutation == [0, 1, 2]
    assert nf.trace.B_bar_matrix[0][1] != 0


def test_column_permutation_swap():
    y1, y2, y3 = var(0, 3), var(1, 3), var(2, 3)
    good = y1**3 + y1 * y2
    assert choose_column_permutation(good, 2) == [0, 1, 2, 3]
    swapped = y1**3 + y1 * y3
    perm = choose_column_permutation(swapped, 2)
    assert perm == [0, 2, 1, 3]
    # relabeling with the permutation restores the good example
    inner = jmap(var(0, 3), var(2, 3), var(1, 3))
    assert compose(swapped, inner) == good


def test_column_permutation_rank_deficient():
    y1, y2, y3 = var(0, 3), var(1, 3), var(2, 3)
    with pytest.raises(NotSimpleError):
        choose_column_permutation(y1**3 + y2 * y3, 2)


# beta and gamma

def test_build_beta_examples():
    u = var(0, 1)
    beta = build_beta([Jet.zero(1, 6)], u, 1, 2)
    assert beta == jmap(var(0, 2), -var(1, 2))
    # m = 3: a_1, b live in (y_2, y_3); b = y_3
    beta = build_beta([Jet.zero(2, 6)], var(1, 2), 1, 3)
    y = [var(i, 3) for i in range(3)]
    assert beta == jmap(y[0], -y[2], y[1])
    with pytest.raises(DegenerateError):
        build_beta([Jet.zero(1, 6)], Jet.zero(1, 6), 1, 2)


def test_build_beta_constant_term_sign():
    # k = 1: x1 = y1 + a/2 turns y1^2 + a y1 - b into x1^2 + beta_2 with beta_2 = -b - a^2/4
    a = var(0, 1) * 3
    b = var(0, 1)
    beta = build_beta([a], b, 1, 2)
    y2 = var(1, 2)
    assert beta[1] == -y2 - (3 * y2) ** 2 / 4


def test_build_gamma_examples():
    x = [var(i, 2) for i in range(2)]
    assert build_gamma(1, 2) == jmap(x[0] ** 2 / 2 + x[1] / 2, x[0])
    x = [var(i, 3) for i in range(3)]
    g = build_gamma(2, 3)
    assert g == jmap((x[0] ** 3 + x[0] * x[1] + x[2]) / 6, x[0] ** 2 / 2 + x[1] / 6, x[0])
    x = [var(i, 4) for i in range(4)]
    g = build_gamma(1, 4)
    assert g[2] == x[2] and g[3] == x[3]


@pytest.mark.parametrize("k,m", [(1, 2), (1, 3), (2, 3), (2, 4), (3, 4), (3, 5), (4, 5)])
def test_gamma_ladder_and_surface_polynomial(k, m):
    g = build_gamma(k, m)
    x = [var(i, m) for i in range(m)]
    for i in range(k):
        assert g[i].derive(0) == g[i + 1]
    assert g[k] == x[0]
    for i in range(k + 1, m):
        assert g[i] == x[i] and g[i].derive(0).is_zero()
    poly = x[0] ** (k + 1) + sum((x[l - 1] * x[0] ** (k + 1 - l) for l in range(2, k + 2)), Jet.zero(m, 6))
    assert g[0] * factorial(k + 1) == poly
    # gamma pushes the constant field forward to the model
    e1 = field(const(1, m), *(Jet.zero(m, 6) for _ in range(m - 1)))
    assert pushforward(g, e1) == model_field(k, m, 5)


def test_gamma_rejects_bad_k():
    with pytest.raises(DimensionError):
        build_gamma(3, 3)


# the pipeline

def test_fold_model():
    X = field(var(1, 2), const(1, 2))
    nf = vishik_normal_form(X, var(0, 2))
    assert nf.k == 1 and nf.is_exact_conjugation()
    assert verify(nf, X, var(0, 2)).ok


def test_cusp_model():
    X = field(var(1, 3), var(2, 3), const(1, 3))
    nf = vishik_normal_form(X, var(0, 3))
    assert nf.k == 2 and nf.is_exact_conjugation()


def test_cusp_conjugated_by_explicit_map():
    N = 6
    x1, x2, x3 = (var(i, 3, N + 1) for i in range(3))
    G = jmap(x1 + x2 * x3, x2 - x1 * x1, x3 + x1 * x2)
    X, h = conjugate_model(model_field(2, 3, N + 1), G)
    nf = vishik_normal_form(X, h)
    assert nf.k == 2
    assert all(c.is_zero() for c in nf.residual_field)
    assert nf.residual_surface.is_zero()
    assert [c.order for c in nf.residual_field] == [5, 5, 5] and nf.residual_surface.order == 6
    assert nf.psi.compose(nf.psi_inv).is_identity()


def test_pipeline_errors():
    x1, x2 = var(0, 2), var(1, 2)
    with pytest.raises(NotAContactError):
        vishik_normal_form(field(const(1, 2), Jet.zero(2, 6)), x1)
    with pytest.raises(EquilibriumError):
        vishik_normal_form(field(x2, x1), x1)
    with pytest.raises(DimensionError):
        vishik_normal_form(field(x2 * x2, const(1, 2)), x1)
    y = [var(i, 3) for i in range(3)]
    with pytest.raises(NotSimpleError):
        vishik_normal_form(field(y[1] * y[1], const(1, 3), Jet.zero(3, 6)), y[0])
    z = [var(i, 3, 3) for i in range(3)]
    with pytest.raises(OrderError):
        vishik_normal_form(field(z[1], z[2], const(1, 3, 3)), z[0])


def test_float_mode_fold_and_corruption():
    X = field(var(1, 2), const(1, 2)).astype("float")
    h = var(0, 2).astype("float")
    nf = vishik_normal_form(X, h)
    rep = verify(nf, X, h)
    assert rep.max() < 1e-10 and rep.ok
    # perturb one coefficient of psi: the recomputed residual notices
    exact = vishik_normal_form(field(var(1, 2), const(1, 2)), var(0, 2))
    bad = jmap(exact.psi[0] + var(1, 2) ** 2 * mpq(1, 1000), exact.psi[1])
    exact.psi = bad
    rep = verify(exact, field(var(1, 2), const(1, 2)), var(0, 2))
    assert not rep.ok and rep.max() > 0


@pytest.mark.parametrize("k,m", [(1, 2), (1, 3), (2, 3), (2, 4), (3, 4)])
def test_trace_identities(k, m):
    for index in range(2):
        c = conjugation_case(k, m, 7, index)
        nf = vishik_normal_form(c.X, c.h)
        tr = nf.trace
        assert tr.b.constant_term == 0
        assert all(a.constant_term == 0 for a in tr.a)
        assert all(g == 0 for g in tr.b.gradient()[: m - 2])
        assert tr.db_dym != 0
        # dkphi: d^i phi/dy1^i(0) = 0 for i <= k, nonzero for i = k + 1
        n = tr.phi.nvars
        for i in range(1, k + 1):
            assert tr.phi.partial_at_zero([i] + [0] * (n - 1)) == 0
        assert tr.phi.partial_at_zero([k + 1] + [0] * (n - 1)) != 0
        # first row of A is the first row of B-bar scaled by db/dy_m(0); the
        # later rows pick up lower rows through the quotient, so only compare ranks
        for j in range(2, m) if k > 1 else ():
            exp = [0] * n
            exp[0], exp[j - 1] = 1, 1
            assert tr.a[0].gradient()[j - 2] == tr.db_dym * tr.phi.partial_at_zero(exp)
        if k > 1:
            assert linalg.rank(tr.A_matrix, "exact") == k - 1
        # det D beta(0): the sign depends on where beta_{k+1} lands
        det_a = linalg.det(tr.A_matrix) if tr.A_matrix else 1
        sign = (-1) ** ((k - 1) * (k - 2) // 2)
        expected = sign * tr.db_dym * det_a * (-1 if k == m - 1 else 1)
        assert tr.det_Dbeta == expected != 0


@pytest.mark.parametrize("k,m", [(1, 2), (2, 3), (2, 4), (3, 4)])
def test_beta_carries_graph_onto_model_surface(k, m):
    c = conjugation_case(k, m, 3, 1)
    tr = vishik_normal_form(c.X, c.h).trace
    G = graph_map(tr.phi, m - 1)
    xt = tr.beta.compose(G)
    x = xt.components
    poly = x[0] ** (k + 1) + sum((x[l - 1] * x[0] ** (k + 1 - l) for l in range(2, k + 2)), Jet.zero(m - 1, 6))
    assert poly.is_zero()


def test_planar_gamma_convention():
    # 2 gamma_1 = x1^2 + x2: the model surface is {x2 = -x1^2}
    g = build_gamma(1, 2)
    x1, x2 = var(0, 2), var(1, 2)
    assert 2 * g[0] == x1 * x1 + x2


def test_deterministic_output():
    c = conjugation_case(2, 4, 0, 0)
    a = vishik_normal_form(c.X, c.h)
    b = vishik_normal_form(c.X, c.h)
    assert a.psi == b.psi and a.to_json() == b.to_json()


def test_psi_inverse_round_trip():
    c = conjugation_case(1, 3, 0, 2)
    nf = vishik_normal_form(c.X, c.h)
    assert nf.psi_inv.compose(nf.psi).is_identity()
    assert invert_map(nf.psi) == nf.psi_inv
