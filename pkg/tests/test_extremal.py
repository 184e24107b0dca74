import pytest

from anticode.codes import BallSpec, Shape, ball, best_ball, is_isomorphic_small
from anticode.extremal import (EXACT, LOWER, UNKNOWN, compatibility, explore, max_avoiding,
                               max_intersecting, naive_max, verify_main_theorem)


def test_avoiding_examples():
    res = max_avoiding(3, 2, 1)
    assert res.size == 3 and res.optimal
    assert is_isomorphic_small(res.witness, ball(Shape(3, 2), BallSpec(1, 0)))
    assert max_avoiding(3, 3, 1).size == 9
    assert max_avoiding(2, 2, 1).size == 2


def test_intersecting_examples():
    assert max_intersecting(3, 2, 1).size == 3
    assert max_intersecting(2, 3, 1).size == 4
    res = max_intersecting(3, 4, 2)
    assert res.optimal and res.size == best_ball(Shape(3, 4), 2)[1] == 9


@pytest.mark.parametrize("m,n,t", [
    (2, 2, 1), (2, 3, 1), (2, 4, 1), (2, 4, 2), (2, 5, 2), (3, 2, 1), (3, 3, 1), (3, 3, 2),
    (4, 2, 1), (4, 3, 2), (8, 2, 1),
])
def test_clique_search_matches_naive(m, n, t):
    for kind, fn in (("avoid", max_avoiding), ("intersect", max_intersecting)):
        res = fn(m, n, t)
        assert res.optimal
        assert res.size == naive_max(m, n, t, kind)


def test_verify_examples():
    rep = verify_main_theorem(3, 3, 1)
    assert rep["brute"] == rep["ball"] == 9 and rep["equal"]
    assert rep["witness_isomorphic_to_ball"] is True
    rep = verify_main_theorem(3, 2, 1)
    assert rep["equal"] and rep["brute"] == 3
    rep = verify_main_theorem(3, 4, 2)
    assert rep["ball"] == 9 and rep["optimality"] == EXACT
    # frozen after the naive oracle agreed at 81 vertices
    assert rep["brute"] == naive_max(3, 4, 2, "avoid") == 9
    assert "finding" not in rep


def test_budget_gives_lower_bound():
    res = max_avoiding(3, 4, 2, budget=1)
    assert res.optimality == LOWER and not res.optimal
    assert res.size >= best_ball(Shape(3, 4), 2)[1]


def test_vertex_cap_returns_ball():
    res = max_avoiding(3, 4, 2, vertex_cap=10)
    assert res.optimality == UNKNOWN
    assert res.witness == best_ball(Shape(3, 4), 2)[2]


def test_compatibility_graph():
    ok = compatibility(Shape(3, 2), "avoid", 1)
    assert not ok.diagonal().any()
    assert (ok == ok.T).all()
    # (1,1) and (2,2) share nothing, so they cannot both be in a 0-avoiding family
    assert not ok[0, 4] and ok[0, 1]
    with pytest.raises(ValueError):
        compatibility(Shape(3, 2), "other", 1)
    with pytest.raises(ValueError):
        max_avoiding(3, 2, 0)


def test_witness_json_is_one_based():
    js = max_avoiding(3, 2, 1).to_json()
    assert all(1 <= a <= 3 for p in js["witness"] for a in p)
    assert js["optimality"] == EXACT


def test_explore_rows():
    rows = explore(3, 3, 1)
    assert [r["n"] for r in rows] == [1, 2, 3]
    assert [r["avoiding"] for r in rows] == [1, 3, 9]
    assert all(r["avoiding"] >= r["ball"] for r in rows)
