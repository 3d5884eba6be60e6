import numpy as np
import pytest
from hypothesis import given, settings, strategies as st

from causalkg.ingest import record_to_ceg
from causalkg.network import (
    NetworkRejected,
    backdoor_edges,
    break_cycles,
    build_network,
    causal_path_edges,
    enumerate_backdoor_paths,
    is_acyclic,
    load_network,
    longest_path_length,
    maximum_backdoor_set,
    remove_backdoor_edges,
    save_network,
    score_to_weight,
    sufficient_backdoor_set,
)

from helpers import make_network, oracle_backdoor_paths, oracle_sets, random_dag


def _record(edges, n_nodes=None):
    names = sorted({n for s, d, _ in edges for n in (s, d)})
    return {
        "ceg_id": "g",
        "scene_id": "s",
        "objects": [{"object_id": "o1", "shape": "sphere", "color": "red", "material": "metal"}],
        "nodes": [{"node_id": n, "event_label": "move", "participants": ["o1"]} for n in names],
        "edges": [{"src": s, "dst": d, "score": sc} for s, d, sc in edges],
    }


@pytest.mark.parametrize("score, weight", [(1, 0.0), (2, 0.25), (3, 0.5), (4, 0.75), (5, 1.0)])
def test_score_to_weight(score, weight):
    assert score_to_weight(score) == weight


def test_build_drops_score_one_and_maps_five():
    cn = build_network(record_to_ceg(_record([("a", "b", 5), ("b", "c", 4), ("c", "a", 1)])))
    assert cn.edges == {("a", "b"): 1.0, ("b", "c"): 0.75}


def test_build_rejects_shallow():
    with pytest.raises(NetworkRejected) as err:
        build_network(record_to_ceg(_record([("a", "b", 5)])))
    assert err.value.reason == "degenerate"


def test_build_rejects_when_everything_filtered():
    with pytest.raises(NetworkRejected) as err:
        build_network(record_to_ceg(_record([("a", "b", 1), ("b", "c", 1)])))
    assert err.value.reason == "degenerate"


def test_build_breaks_cycles():
    cn = build_network(record_to_ceg(_record([("a", "b", 4), ("b", "c", 4), ("c", "a", 2)])))
    assert ("c", "a") not in cn.edges
    assert is_acyclic(cn.nodes, cn.edges)


def test_break_cycles_identity_on_dag():
    edges = {("a", "b"): 0.5, ("b", "c"): 0.25, ("a", "c"): 1.0}
    assert break_cycles(edges) == edges


def test_break_cycles_two_cycle():
    assert break_cycles({("A", "B"): 0.75, ("B", "A"): 0.5}) == {("A", "B"): 0.75}


def test_break_cycles_equal_three_cycle():
    out = break_cycles({("A", "B"): 0.5, ("B", "C"): 0.5, ("C", "A"): 0.5})
    assert out == {("A", "B"): 0.5, ("B", "C"): 0.5}


@settings(max_examples=60, deadline=None)
@given(st.dictionaries(st.tuples(st.sampled_from("abcdef"), st.sampled_from("abcdef")).filter(lambda e: e[0] != e[1]),
                       st.sampled_from([0.25, 0.5, 0.75, 1.0]), max_size=20))
def test_break_cycles_maximal_acyclic(edges):
    kept = break_cycles(edges)
    nodes = {n for e in edges for n in e}
    assert is_acyclic(nodes, kept)
    # maximal: every dropped edge would close a cycle
    for e, w in edges.items():
        if e not in kept:
            assert not is_acyclic(nodes, {**kept, e: w})


def test_longest_path():
    assert longest_path_length("abcd", [("a", "b"), ("b", "c"), ("a", "d")]) == 2
    assert longest_path_length("ab", []) == 0


def test_confounder_triangle(confounder_triangle):
    cn = confounder_triangle
    paths = enumerate_backdoor_paths(cn, "A", "H")
    assert [p.nodes for p in paths] == [("A", "G", "H")]
    assert paths[0].edges == (("G", "A"), ("G", "H"))
    assert sufficient_backdoor_set(cn, "A", "H").members == {"G"}
    assert maximum_backdoor_set(cn, "A", "H").members == {"G"}


def test_chain_has_no_backdoor():
    cn = make_network(["AB", "BC"])
    assert enumerate_backdoor_paths(cn, "A", "C") == []
    assert sufficient_backdoor_set(cn, "A", "C").members == set()
    assert maximum_backdoor_set(cn, "A", "C").members == set()


def test_long_confounder():
    cn = make_network(["GP", "PA", "GH", "AH"])
    assert [p.nodes for p in enumerate_backdoor_paths(cn, "A", "H")] == [("A", "P", "G", "H")]
    assert sufficient_backdoor_set(cn, "A", "H").members == {"P"}
    assert maximum_backdoor_set(cn, "A", "H").members == {"P", "G"}


def test_missing_node_and_same_pair(confounder_triangle):
    with pytest.raises(KeyError):
        enumerate_backdoor_paths(confounder_triangle, "A", "Z")
    with pytest.raises(ValueError):
        enumerate_backdoor_paths(confounder_triangle, "A", "A")


def test_max_len_bounds_paths():
    cn = make_network(["GP", "PA", "GH", "AH"])
    assert enumerate_backdoor_paths(cn, "A", "H", max_len=2) == []
    assert len(enumerate_backdoor_paths(cn, "A", "H", max_len=3)) == 1


def test_strict_versus_textbook():
    # A <- G -> H <- M: the final edge leaves the effect
    cn = make_network(["GA", "GH", "MH", "AM"])
    assert enumerate_backdoor_paths(cn, "A", "M") == []
    loose = enumerate_backdoor_paths(cn, "A", "M", strict=False)
    assert [p.nodes for p in loose] == [("A", "G", "H", "M")]


def test_random_dags_match_oracle():
    rng = np.random.default_rng(7)
    for _ in range(60):
        cn = random_dag(rng, n_max=10)
        for cause in cn.nodes:
            for effect in cn.nodes:
                if cause == effect:
                    continue
                for strict in (True, False):
                    got = [p.nodes for p in enumerate_backdoor_paths(cn, cause, effect, strict=strict)]
                    assert got == oracle_backdoor_paths(cn, cause, effect, strict)
                suff, maxi = oracle_sets(cn, cause, effect)
                assert sufficient_backdoor_set(cn, cause, effect).members == suff
                assert maximum_backdoor_set(cn, cause, effect).members == maxi


def test_random_dags_bounded_length_match_oracle():
    rng = np.random.default_rng(17)
    for _ in range(40):
        cn = random_dag(rng, n_max=9, p=0.45)
        for cause in cn.nodes:
            for effect in cn.nodes:
                if cause == effect:
                    continue
                for max_len in (1, 2, 3):
                    for strict in (True, False):
                        got = [p.nodes for p in enumerate_backdoor_paths(cn, cause, effect, max_len, strict=strict)]
                        assert got == oracle_backdoor_paths(cn, cause, effect, strict, max_len)
                        suff, maxi = oracle_sets(cn, cause, effect, strict, max_len)
                        assert sufficient_backdoor_set(cn, cause, effect, max_len, strict=strict).members == suff
                        assert maximum_backdoor_set(cn, cause, effect, max_len, strict=strict).members == maxi


def test_removal_examples(confounder_triangle):
    cn = confounder_triangle
    suff = remove_backdoor_edges(cn, [("A", "H")], "sufficient")
    assert set(suff.edges) == {("G", "H"), ("A", "H")}
    maxi = remove_backdoor_edges(cn, [("A", "H")], "maximum")
    assert set(maxi.edges) == {("A", "H")}
    assert remove_backdoor_edges(cn, [], "maximum") is cn


def test_maximum_keeps_causal_path_edges():
    # backdoor A <- G -> B -> H shares B -> H with the causal path A -> B -> H
    cn = make_network(["GA", "GB", "AB", "BH", "AH"])
    doomed = backdoor_edges(cn, [("A", "H")], "maximum")
    assert ("B", "H") in causal_path_edges(cn, "A", "H")
    assert ("B", "H") not in doomed
    assert {("G", "A"), ("G", "B")} <= doomed


def test_removal_order_independent():
    rng = np.random.default_rng(3)
    for _ in range(30):
        cn = random_dag(rng, n_max=9, p=0.4)
        pairs = list(cn.edges)
        if len(pairs) < 2:
            continue
        for variant in ("sufficient", "maximum"):
            a = remove_backdoor_edges(cn, pairs, variant)
            b = remove_backdoor_edges(cn, pairs[::-1], variant)
            assert a.edges == b.edges
            assert is_acyclic(a.nodes, a.edges)


def test_max_removal_covers_sufficient():
    rng = np.random.default_rng(11)
    for _ in range(40):
        cn = random_dag(rng, n_max=9, p=0.4)
        pairs = list(cn.edges)
        assert backdoor_edges(cn, pairs, "sufficient") <= backdoor_edges(cn, pairs, "maximum")


def test_save_load_round_trip(tmp_path):
    cn = make_network(["GA", "GH", "AH"], labels={"A": "collide"}, weights={("G", "A"): 0.75})
    save_network(cn, tmp_path)
    back = load_network(tmp_path, cn.cn_id)
    assert back.edges == cn.edges
    assert back.nodes == cn.nodes
    assert back.objects == cn.objects
