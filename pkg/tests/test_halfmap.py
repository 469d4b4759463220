import pytest

from vishik.errors import UnsupportedContactError
from vishik.halfmap import involution_residual, normal_half_map, pullback_half_map
from vishik.normal_form import surface_graph, vishik_normal_form
from vishik.randomized import conjugation_case
from vishik.series import Jet, JetMap, VectorFieldJet, compose, flow, invert_map

from helpers import const, field, jmap, var


def test_normal_half_map_planar():
    P, time = normal_half_map(2)
    assert P == jmap(-var(0, 1))
    assert time == -2 * var(0, 1)


def test_normal_half_map_higher_dimension():
    P, time = normal_half_map(4)
    w = [var(i, 3) for i in range(3)]
    assert P == jmap(-w[0], w[1], w[2])
    assert involution_residual(P).components == tuple(Jet.zero(3, 6) for _ in range(3))


def test_fold_model_half_map():
    X = field(var(1, 2), const(1, 2))
    hm = pullback_half_map(vishik_normal_form(X, var(0, 2)))
    assert hm.Q == jmap(-var(0, 1, 5))
    assert hm.Q_graph == jmap(-var(0, 1, 5))
    assert hm.involution_residual_max == 0


@pytest.mark.parametrize("m", [2, 3])
def test_random_folds_are_involutions(m):
    for index in range(4):
        c = conjugation_case(1, m, 5, index)
        hm = pullback_half_map(vishik_normal_form(c.X, c.h), c.h)
        assert involution_residual(hm.Q).max_abs_by_degree() == [0] * 6
        assert all(v == 0 for v in hm.graph_involution_residual)
        if m == 2:
            assert hm.Q_graph[0].gradient() == [-1]
            assert hm.Q[0].gradient() == [-1]


def test_graph_half_map_is_not_trivial():
    c = conjugation_case(1, 2, 0, 4)
    hm = pullback_half_map(vishik_normal_form(c.X, c.h), c.h)
    # Q is exactly the model involution, Q_graph carries the geometry
    assert hm.Q == jmap(-var(0, 1, 5))
    assert hm.Q_graph[0].coefficient((2,)) == -4


def test_half_map_follows_the_flow():
    # X_t(G(w)) at t = flight time lands on G(Q_graph(w)) through order N - 1
    N = 6
    c = conjugation_case(1, 3, 2, 1)
    nf = vishik_normal_form(c.X, c.h)
    hm = pullback_half_map(nf, c.h)
    G, _ = surface_graph(c.h)
    time = hm.surface_chart[0] * -2
    F = flow(c.X)
    landing = F.compose(JetMap((time,) + G.components))
    target = G.compose(hm.Q_graph)
    assert landing.truncate(N - 1) == target.truncate(N - 1)


def test_cusp_is_unsupported():
    nf = vishik_normal_form(field(var(1, 3), var(2, 3), const(1, 3)), var(0, 3))
    with pytest.raises(UnsupportedContactError):
        pullback_half_map(nf)


def test_fixed_set_is_the_fold_line():
    # Q fixes exactly the points with x_2 = 0 in the normal chart
    c = conjugation_case(1, 3, 1, 0)
    hm = pullback_half_map(vishik_normal_form(c.X, c.h))
    line = jmap(Jet.zero(1, 5), var(0, 1, 5))
    assert hm.Q.compose(line) == line


def test_chart_independence_through_order_n_minus_1():
    N = 6
    c = conjugation_case(1, 3, 0, 5)
    first = vishik_normal_form(c.X, c.h)
    L = JetMap.linear([[1, 0, 0], [3, 1, 0], [0, -2, 1]], N)
    Linv = invert_map(L)
    X2 = VectorFieldJet(tuple(
        compose(sum((c.X[j] * row[j] for j in range(3)), Jet.zero(3, N)), Linv) for row in L.linear_part()
    ))
    second = vishik_normal_form(X2, compose(c.h, Linv))
    # both psi_1 and psi_2 o L normalize the original problem
    theta = first.psi.compose(invert_map(second.psi.compose(L)))
    iota = JetMap(tuple([Jet.zero(2, N)] + [Jet.variable(i, 2, N) for i in range(2)]))
    moved = theta.compose(iota)
    assert moved[0].is_zero()
    tau = JetMap(moved.components[1:])
    P, _ = normal_half_map(3, N)
    assert (P.compose(tau) - tau.compose(P)).truncate(N - 1).components == tuple(Jet.zero(2, N - 1) for _ in range(2))


def test_json_keys():
    c = conjugation_case(1, 2, 0, 1)
    data = pullback_half_map(vishik_normal_form(c.X, c.h), c.h).to_json()
    assert set(data) == {"Q", "flight_time", "involution_residual_max", "P_normal", "Q_graph", "graph_variable"}
    assert data["involution_residual_max"] == "0"
