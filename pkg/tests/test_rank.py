import io
import json
import math

import pytest

from oracle import dense_liquid, two_node_fixed_point

from liquidrank.errors import DegenerateUpdate, EmptyGraph, FormatError, NodeSetMismatch
from liquidrank.graph import RatingGraph, TimeWindow, from_edge_counts
from liquidrank.rank import (
    METHOD_LIQUID,
    METHOD_MENTIONS,
    METHOD_PRODUCT,
    RankEntry,
    RankParams,
    RankedList,
    ReputationState,
    format_score,
    liquid_rank,
    mention_rank,
    product_rank,
    ranked_list_from_scores,
    read_ranking_csv,
    reputation_snapshot,
    to_ranked_list,
    top_k,
    write_ranking_csv,
)

TWO_CYCLE = {("a", "b"): 1, ("b", "a"): 3}


# --- parameters ---------------------------------------------------------


@pytest.mark.parametrize(
    "kwargs",
    [
        {"epsilon": 0.0},
        {"epsilon": -1e-9},
        {"max_iters": 0},
        {"alpha": 0.0},
        {"alpha": 1.2},
        {"alpha": -0.5},
        {"norm_mode": "l2"},
    ],
)
def test_rank_params_validation(kwargs):
    with pytest.raises(ValueError):
        RankParams(**kwargs)


def test_rank_params_defaults():
    params = RankParams()
    assert params.epsilon == 0.0001
    assert params.max_iters == 1000
    assert params.alpha == 0.5
    assert params.norm_mode == "l1"


# --- mention ranking -----------------------------------------------------


def test_mention_rank_scores_and_tiebreak():
    graph = from_edge_counts({("a", "b"): 2, ("c", "b"): 2, ("b", "a"): 2, ("b", "c"): 2})
    ranked = mention_rank(graph)
    assert ranked.method == METHOD_MENTIONS
    # a and c tie at 2; lexicographic order breaks the tie
    assert [(e.node, e.score, e.rank) for e in ranked.entries] == [
        ("b", 4.0, 1),
        ("a", 2.0, 2),
        ("c", 2.0, 3),
    ]


def test_mention_rank_empty_graph():
    with pytest.raises(EmptyGraph):
        mention_rank(RatingGraph(nodes=(), edges={}))


def test_mention_rank_edgeless_nodes_score_zero():
    graph = RatingGraph(nodes=("a", "b"), edges={})
    ranked = mention_rank(graph)
    assert [e.score for e in ranked.entries] == [0.0, 0.0]


# --- liquid ranking ------------------------------------------------------


def test_liquid_rank_two_node_closed_form():
    graph = from_edge_counts(TWO_CYCLE)
    state = liquid_rank(graph, RankParams(epsilon=1e-12, max_iters=10000))
    expect_a, expect_b = two_node_fixed_point(1, 3)
    assert state.converged
    assert state.scores["a"] == pytest.approx(expect_a, abs=1e-11)
    assert state.scores["b"] == pytest.approx(expect_b, abs=1e-11)
    assert state.final_delta < 1e-12
    assert state.iterations > 0


def test_liquid_rank_matches_dense_oracle_on_fixed_graph():
    weights = {("a", "b"): 2, ("b", "c"): 1, ("c", "a"): 4, ("a", "c"): 1}
    graph = from_edge_counts(weights)
    state = liquid_rank(graph, RankParams(epsilon=1e-12, max_iters=10000))
    oracle_scores, _, _, oracle_converged = dense_liquid(
        weights, alpha=0.5, epsilon=1e-12, max_iters=10000
    )
    assert oracle_converged
    for node in graph.nodes:
        assert state.scores[node] == pytest.approx(oracle_scores[node], abs=1e-9)


def test_liquid_rank_l1_scores_sum_to_one():
    graph = from_edge_counts({("a", "b"): 1, ("b", "c"): 2, ("c", "a"): 3})
    state = liquid_rank(graph)
    assert abs(sum(state.scores.values()) - 1.0) <= 1e-12


def test_liquid_rank_max_mode_peak_is_one():
    graph = from_edge_counts({("a", "b"): 1, ("b", "c"): 2, ("c", "a"): 3})
    state = liquid_rank(graph, RankParams(norm_mode="max"))
    assert abs(max(state.scores.values()) - 1.0) <= 1e-12


def test_liquid_rank_norm_modes_agree_on_ordering():
    graph = from_edge_counts({("a", "b"): 2, ("b", "c"): 1, ("c", "a"): 4, ("a", "c"): 1})
    by_l1 = to_ranked_list(liquid_rank(graph, RankParams(epsilon=1e-10, norm_mode="l1")))
    by_max = to_ranked_list(liquid_rank(graph, RankParams(epsilon=1e-10, norm_mode="max")))
    assert [e.node for e in by_l1.entries] == [e.node for e in by_max.entries]


def test_liquid_rank_requires_an_edge():
    with pytest.raises(EmptyGraph):
        liquid_rank(RatingGraph(nodes=("a",), edges={}))
    with pytest.raises(EmptyGraph):
        liquid_rank(RatingGraph(nodes=(), edges={}))


def test_liquid_rank_undamped_two_cycle_oscillates():
    graph = from_edge_counts(TWO_CYCLE)
    state = liquid_rank(graph, RankParams(alpha=1.0, max_iters=1000))
    assert not state.converged
    assert state.iterations == 1000
    assert state.final_delta == 0.25
    # even iteration count lands back on the uniform phase of the 2-cycle
    assert state.scores == {"a": 0.5, "b": 0.5}


def test_liquid_rank_undamped_trajectory_period_two():
    graph = from_edge_counts(TWO_CYCLE)
    one = liquid_rank(graph, RankParams(alpha=1.0, max_iters=1))
    two = liquid_rank(graph, RankParams(alpha=1.0, max_iters=2))
    three = liquid_rank(graph, RankParams(alpha=1.0, max_iters=3))
    assert one.scores == {"a": 0.75, "b": 0.25}
    assert two.scores == {"a": 0.5, "b": 0.5}
    assert three.scores == one.scores


def test_liquid_rank_damping_converges_where_undamped_cannot():
    graph = from_edge_counts(TWO_CYCLE)
    state = liquid_rank(graph, RankParams(alpha=0.5))
    assert state.converged
    assert state.iterations < 1000


def test_liquid_rank_degenerate_update_on_undamped_path():
    # a -> b -> c: with alpha=1 all reputation drains to c, then the next
    # propagation step has nothing left to push and no meaningful update.
    graph = from_edge_counts({("a", "b"): 1, ("b", "c"): 1})
    with pytest.raises(DegenerateUpdate) as exc_info:
        liquid_rank(graph, RankParams(alpha=1.0, epsilon=1e-9))
    assert "iteration 3" in str(exc_info.value)


def test_liquid_rank_damped_path_graph_is_fine():
    graph = from_edge_counts({("a", "b"): 1, ("b", "c"): 1})
    state = liquid_rank(graph, RankParams(alpha=0.5))
    assert state.converged
    assert state.scores["c"] > state.scores["b"] > state.scores["a"]


def test_liquid_rank_zero_inflow_node_decays_below_threshold():
    graph = from_edge_counts({("s", "t"): 100, ("a", "b"): 1, ("b", "a"): 1})
    params = RankParams(epsilon=1e-6)
    state = liquid_rank(graph, params)
    assert state.converged
    assert state.scores["s"] < params.epsilon * 10


def test_liquid_rank_scale_invariance_exact():
    graph1 = from_edge_counts({("a", "b"): 1, ("b", "c"): 2, ("c", "a"): 3})
    graph7 = from_edge_counts({("a", "b"): 7, ("b", "c"): 14, ("c", "a"): 21})
    s1 = liquid_rank(graph1)
    s7 = liquid_rank(graph7)
    assert s1.scores == s7.scores
    assert s1.iterations == s7.iterations
    assert s1.final_delta == s7.final_delta


def test_liquid_rank_custom_initial_vector():
    graph = from_edge_counts(TWO_CYCLE)
    params = RankParams(epsilon=1e-12, max_iters=10000)
    from_uniform = liquid_rank(graph, params)
    from_skewed = liquid_rank(graph, params, initial={"a": 9.0, "b": 1.0})
    # same fixed point regardless of start
    assert from_skewed.scores["a"] == pytest.approx(from_uniform.scores["a"], abs=1e-10)
    # scaling the initial vector is absorbed by normalization
    doubled = liquid_rank(graph, params, initial={"a": 18.0, "b": 2.0})
    assert doubled.scores == from_skewed.scores


@pytest.mark.parametrize(
    "initial",
    [
        {"a": 1.0},  # missing b
        {"a": -1.0, "b": 2.0},
        {"a": 0.0, "b": 0.0},
        {"a": math.nan, "b": 1.0},
        {"a": math.inf, "b": 1.0},
    ],
)
def test_liquid_rank_rejects_bad_initial(initial):
    graph = from_edge_counts(TWO_CYCLE)
    with pytest.raises(ValueError):
        liquid_rank(graph, RankParams(), initial=initial)


def test_liquid_rank_epsilon_controls_stopping():
    graph = from_edge_counts({("a", "b"): 2, ("b", "c"): 1, ("c", "a"): 4})
    loose = liquid_rank(graph, RankParams(epsilon=1e-2))
    tight = liquid_rank(graph, RankParams(epsilon=1e-10))
    assert loose.iterations < tight.iterations
    assert loose.final_delta < 1e-2
    assert tight.final_delta < 1e-10


def test_reputation_state_is_plain_data():
    state = ReputationState(scores={"a": 1.0}, iterations=3, final_delta=0.0, converged=True)
    assert state.scores["a"] == 1.0


# --- ranked lists and the product method ---------------------------------


def test_ranked_list_from_scores_sorts_and_ranks():
    ranked = ranked_list_from_scores("m", {"x": 0.2, "y": 0.5, "z": 0.2})
    assert [e.node for e in ranked.entries] == ["y", "x", "z"]
    assert [e.rank for e in ranked.entries] == [1, 2, 3]
    assert len(ranked) == 3
    assert ranked.node_set() == {"x", "y", "z"}
    assert ranked.score_of("y") == 0.5
    with pytest.raises(KeyError):
        ranked.score_of("ghost")


def test_product_rank_combines_share_and_reputation():
    mentions = ranked_list_from_scores(METHOD_MENTIONS, {"a": 3.0, "b": 1.0})
    liquid = ranked_list_from_scores(METHOD_LIQUID, {"a": 0.25, "b": 0.75})
    product = product_rank(mentions, liquid)
    assert product.method == METHOD_PRODUCT
    # shares: a=0.75, b=0.25; products: a=0.1875, b=0.1875 -> tie, lexicographic
    assert [e.node for e in product.entries] == ["a", "b"]
    assert product.score_of("a") == pytest.approx(0.1875)
    assert product.score_of("b") == pytest.approx(0.1875)


def test_product_rank_node_set_mismatch():
    mentions = ranked_list_from_scores(METHOD_MENTIONS, {"a": 1.0, "b": 2.0})
    liquid = ranked_list_from_scores(METHOD_LIQUID, {"a": 1.0, "c": 2.0})
    with pytest.raises(NodeSetMismatch) as exc_info:
        product_rank(mentions, liquid)
    assert exc_info.value.only_in_first == {"b"}
    assert exc_info.value.only_in_second == {"c"}


def test_top_k_clamps_to_length():
    ranked = ranked_list_from_scores("m", {"a": 3.0, "b": 2.0, "c": 1.0})
    top2 = top_k(ranked, 2)
    assert [e.node for e in top2.entries] == ["a", "b"]
    assert [e.rank for e in top2.entries] == [1, 2]
    assert top_k(ranked, 10).entries == ranked.entries
    with pytest.raises(ValueError):
        top_k(ranked, 0)


# --- serialization -------------------------------------------------------


def test_ranking_csv_roundtrip(tmp_path):
    graph = from_edge_counts({("a", "b"): 2, ("b", "c"): 1, ("c", "a"): 4})
    ranked = to_ranked_list(liquid_rank(graph, RankParams(epsilon=1e-10)))
    path = tmp_path / "ranking.csv"
    write_ranking_csv(ranked, path)
    loaded = read_ranking_csv(path)
    assert loaded.method == ranked.method
    assert [e.node for e in loaded.entries] == [e.node for e in ranked.entries]
    assert [e.rank for e in loaded.entries] == [e.rank for e in ranked.entries]
    for ours, theirs in zip(ranked.entries, loaded.entries):
        assert theirs.score == pytest.approx(ours.score, rel=1e-11)


def test_ranking_csv_format(tmp_path):
    ranked = RankedList(
        method="mentions",
        entries=(RankEntry("a", 3.0, 1), RankEntry("b", 1.0, 2)),
    )
    path = tmp_path / "r.csv"
    write_ranking_csv(ranked, path)
    assert path.read_bytes() == b"rank,node,score,method\n1,a,3,mentions\n2,b,1,mentions\n"


def test_format_score_twelve_significant_digits():
    assert format_score(1 / 3) == "0.333333333333"
    assert format_score(3.0) == "3"
    assert format_score(0.25) == "0.25"
    assert format_score(1.5e-11) == "1.5e-11"


@pytest.mark.parametrize(
    "text,line,reason_part",
    [
        ("", 1, "missing ranking CSV header"),
        ("rank,node,score\n", 1, "expected header"),
        ("rank,node,score,method\n2,a,1.0,m\n", 2, "consecutive"),
        ("rank,node,score,method\n1,a,1.0,m\n3,b,0.5,m\n", 3, "consecutive"),
        ("rank,node,score,method\n1,a,xx,m\n", 2, "bad rank/score"),
        ("rank,node,score,method\n1,a,1.0,m,extra\n", 2, "4 columns"),
        ("rank,node,score,method\n1,a,1.0,m\n2,b,0.5,other\n", 3, "mixed methods"),
    ],
)
def test_read_ranking_csv_rejects_malformed(text, line, reason_part):
    with pytest.raises(FormatError) as exc_info:
        read_ranking_csv(io.StringIO(text))
    assert exc_info.value.line == line
    assert reason_part in exc_info.value.reason


def test_reputation_snapshot_shape():
    graph = from_edge_counts(TWO_CYCLE)
    params = RankParams(epsilon=1e-8)
    state = liquid_rank(graph, params)
    snap = reputation_snapshot(state, TimeWindow(start=10, end=99), params)
    assert snap["window"] == {"start": 10, "end": 99}
    assert snap["params"] == {
        "epsilon": 1e-8,
        "max_iters": 1000,
        "alpha": 0.5,
        "norm_mode": "l1",
    }
    assert snap["converged"] is True
    assert list(snap["scores"]) == ["a", "b"]
    assert json.dumps(snap)  # JSON-serializable


def test_reputation_snapshot_unbounded_window_end_is_null():
    graph = from_edge_counts(TWO_CYCLE)
    params = RankParams()
    state = liquid_rank(graph, params)
    snap = reputation_snapshot(state, TimeWindow(), params)
    assert snap["window"] == {"start": 0, "end": None}
