from vishik import linalg
from vishik.normal_form import model_field, pushforward
from vishik.randomized import (
    LCG,
    LCG_INCREMENT,
    LCG_MULTIPLIER,
    conjugation_case,
    conjugation_suite,
    random_diffeo,
    random_unimodular,
)


def test_lcg_recurrence():
    rng = LCG(0)
    # first step from state 0 is the increment itself
    assert rng.next_u32() == 1442695040888963407 >> 32 == 335903614
    state = 42
    rng = LCG(42)
    for _ in range(5):
        state = (LCG_MULTIPLIER * state + LCG_INCREMENT) % 2**64
        assert rng.next_u32() == state >> 32


def test_lcg_streams_are_reproducible():
    a, b = LCG(7).fork(3), LCG(7).fork(3)
    assert [a.randint(-5, 5) for _ in range(20)] == [b.randint(-5, 5) for _ in range(20)]
    c = LCG(7).fork(4)
    assert [LCG(7).fork(3).next_u32() for _ in range(3)] != [c.next_u32() for _ in range(3)]


def test_randint_range():
    rng = LCG(1)
    draws = [rng.randint(-2, 2) for _ in range(500)]
    assert set(draws) == {-2, -1, 0, 1, 2}


def test_unimodular_linear_part():
    rng = LCG(3)
    for m in (1, 2, 3, 4):
        assert linalg.det(random_unimodular(rng, m)) == 1
        G = random_diffeo(rng, m, 6)
        assert linalg.det(G.linear_part()) == 1
        assert all(c.constant_term == 0 for c in G)


def test_conjugation_case_is_a_conjugated_model():
    c = conjugation_case(2, 4, 0, 0)
    assert pushforward(c.G, c.X) == model_field(2, 4, 5)
    assert c.h == c.G[0]


def test_float_suite_converts_the_exact_cases():
    exact = conjugation_suite(0, 2, shapes=((1, 2),))
    floats = conjugation_suite(0, 2, mode="float", shapes=((1, 2),))
    for e, f in zip(exact, floats):
        assert e.X.astype("float") == f.X and e.h.astype("float") == f.h
