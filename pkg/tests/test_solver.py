import random

import pytest

from wayscore.network import Edge, build_network
from wayscore.profiles import ArrivalProfile, ScoreProfile
from wayscore.reference import (
    best_path_by_enumeration,
    best_score_with_dominance,
    random_instance,
)
from wayscore.solver import (
    Constraint,
    ConsistencyError,
    Label,
    STATUS_INFEASIBLE,
    STATUS_LIMIT,
    STATUS_OK,
    child_labels,
    label_sequence,
    process_label,
    reconstruct_path,
    solve,
)
from wayscore.traversal import Query, latest_departures


def _query(net, s, d, t_dep, budget):
    return Query.from_budget(s, d, t_dep, budget)


def _edge(u, v, tt, score):
    return Edge(u, v, ArrivalProfile.constant(tt), ScoreProfile.constant(score))


class TestWorkedExample:
    def test_budget_eight_takes_detour(self, toy_network):
        res = solve(toy_network, _query(toy_network, 0, 1, 0.0, 8.0))
        assert res.status == STATUS_OK
        assert res.path.nodes == (0, 2, 1)
        assert res.path.score == 7.0
        assert res.path.arrival == 5.0

    def test_budget_two_forces_direct_edge(self, toy_network):
        res = solve(toy_network, _query(toy_network, 0, 1, 0.0, 2.0))
        assert res.status == STATUS_OK
        assert res.path.nodes == (0, 1)
        assert res.path.score == 5.0

    def test_source_equals_destination(self, toy_network):
        res = solve(toy_network, _query(toy_network, 0, 0, 3.0, 5.0))
        assert res.status == STATUS_OK
        assert res.path.nodes == (0,)
        assert res.path.score == 0.0
        assert res.path.travel_time == 0.0
        assert res.path.arrival == 3.0

    def test_infeasible_when_source_boundary_precedes_departure(self, toy_network):
        # budget 1 < fastest travel time 2: no path can make it
        res = solve(toy_network, _query(toy_network, 0, 1, 0.0, 1.0))
        assert res.status == STATUS_INFEASIBLE
        assert res.path is None


class TestProcessLabel:
    def test_root_expansion_creates_both_children(self, toy_network):
        q = _query(toy_network, 0, 1, 0.0, 8.0)
        bounds = latest_departures(toy_network, 1, 8.0, 0.0)
        root = Label(0, 0.0, 0.0, None)
        children = child_labels(toy_network, bounds, q, root, {0})
        assert [(c.node, c.arrival, c.score) for c in children] == [
            (1, 2.0, 5.0),
            (2, 3.0, 0.0),
        ]
        assert all(c.pred is root for c in children)

    def test_visited_list_blocks_return_to_source(self, toy_network):
        q = _query(toy_network, 0, 1, 0.0, 8.0)
        bounds = latest_departures(toy_network, 1, 8.0, 0.0)
        root = Label(0, 0.0, 0.0, None)
        at_c = Label(2, 3.0, 0.0, root)
        children = child_labels(toy_network, bounds, q, at_c, {0, 2})
        # the would-be label back at the source (node 0, t=4, score 4) is gone
        assert [(c.node, c.arrival, c.score) for c in children] == [(1, 5.0, 7.0)]

    def test_boundary_pruning_skips_late_children(self, toy_network):
        q = _query(toy_network, 0, 1, 0.0, 2.0)
        bounds = latest_departures(toy_network, 1, 2.0, 0.0)
        root = Label(0, 0.0, 0.0, None)
        children = child_labels(toy_network, bounds, q, root, {0})
        # C arrives at 3 > its boundary, so only the direct child exists
        assert [c.node for c in children] == [1]

    def test_recursion_returns_best_descendant(self, toy_network):
        q = _query(toy_network, 0, 1, 0.0, 8.0)
        bounds = latest_departures(toy_network, 1, 8.0, 0.0)
        root = Label(0, 0.0, 0.0, None)
        best = process_label(toy_network, bounds, q, root, {0})
        assert best is not None
        assert (best.node, best.arrival, best.score) == (1, 5.0, 7.0)
        assert label_sequence(best) == (0, 2, 1)

    def test_label_at_destination_returns_itself(self, toy_network):
        q = _query(toy_network, 0, 1, 0.0, 8.0)
        bounds = latest_departures(toy_network, 1, 8.0, 0.0)
        dest = Label(1, 2.0, 5.0, Label(0, 0.0, 0.0, None))
        assert process_label(toy_network, bounds, q, dest, {0, 1}) is dest


class TestReconstruction:
    def test_chain_to_path(self, toy_network):
        l1 = Label(0, 0.0, 0.0, None)
        l3 = Label(2, 3.0, 0.0, l1)
        l5 = Label(1, 5.0, 7.0, l3)
        path = reconstruct_path(toy_network, l5, t_dep=0.0)
        assert path.nodes == (0, 2, 1)
        assert path.departures == (0.0, 3.0)
        assert path.arrivals == (3.0, 5.0)
        assert path.score == 7.0
        assert path.travel_time == 5.0

    def test_source_only_label(self, toy_network):
        path = reconstruct_path(toy_network, Label(0, 4.0, 0.0, None))
        assert path.nodes == (0,)
        assert path.arrival == 4.0

    def test_forged_repeat_node_detected(self, toy_network):
        l1 = Label(0, 0.0, 0.0, None)
        l3 = Label(2, 3.0, 0.0, l1)
        l4 = Label(0, 4.0, 4.0, l3)
        with pytest.raises(ConsistencyError, match="repeats"):
            reconstruct_path(toy_network, l4)

    def test_wrong_stored_arrival_detected(self, toy_network):
        l1 = Label(0, 0.0, 0.0, None)
        bad = Label(1, 2.5, 5.0, l1)  # true arrival is 2.0
        with pytest.raises(ConsistencyError, match="arrival"):
            reconstruct_path(toy_network, bad)

    def test_wrong_stored_score_detected(self, toy_network):
        l1 = Label(0, 0.0, 0.0, None)
        bad = Label(1, 2.0, 6.0, l1)  # true score is 5.0
        with pytest.raises(ConsistencyError, match="score"):
            reconstruct_path(toy_network, bad)


class TestTieBreaking:
    def test_equal_score_prefers_earlier_arrival(self):
        # two disjoint routes, same score, different arrival
        edges = [
            _edge(0, 1, 1.0, 3.0), _edge(1, 3, 1.0, 3.0),
            _edge(0, 2, 2.0, 3.0), _edge(2, 3, 2.0, 3.0),
        ]
        net = build_network(4, edges)
        res = solve(net, Query.from_budget(0, 3, 0.0, 10.0))
        assert res.path.score == 6.0
        assert res.path.nodes == (0, 1, 3)

    def test_full_tie_prefers_smaller_sequence(self):
        edges = [
            _edge(0, 2, 1.0, 3.0), _edge(2, 3, 1.0, 3.0),
            _edge(0, 1, 1.0, 3.0), _edge(1, 3, 1.0, 3.0),
        ]
        net = build_network(4, edges)
        res = solve(net, Query.from_budget(0, 3, 0.0, 10.0))
        assert res.path.nodes == (0, 1, 3)


class TestEngineEquivalence:
    def test_fast_engine_matches_reference_recursion(self):
        """solve() and the label-based process_label expand the same rules."""
        rng = random.Random(88)
        for _ in range(40):
            net, q = random_instance(rng)
            res = solve(net, q)
            bounds = latest_departures(net, q.destination, q.t_arr, q.t_dep)
            root = Label(q.source, q.t_dep, 0.0, None)
            best = process_label(net, bounds, q, root, {q.source})
            if res.path is None:
                assert best is None
            else:
                assert best is not None
                assert label_sequence(best) == res.path.nodes
                assert best.score == res.path.score
                assert best.arrival == res.path.arrival


class TestAgainstOracle:
    def test_exactness_on_random_instances(self):
        rng = random.Random(123)
        for _ in range(150):
            net, q = random_instance(rng)
            got = solve(net, q)
            want = best_path_by_enumeration(net, q)
            assert got.status == want.status
            if got.path is not None:
                assert got.path.score == want.path.score
                assert got.path.nodes == want.path.nodes

    def test_pruning_changes_nothing_but_work(self):
        rng = random.Random(321)
        strict = 0
        for _ in range(120):
            net, q = random_instance(rng)
            on = solve(net, q, pruning=True)
            off = solve(net, q, pruning=False)
            assert on.status == off.status
            if on.path is not None:
                assert on.path.to_json() == off.path.to_json()
            assert on.explored <= off.explored
            if on.explored < off.explored:
                strict += 1
        assert strict > 0

    def test_exactness_on_generated_rush_hour_grids(self):
        from wayscore.datagen import GenConfig, generate_network, generate_query_sets

        for seed in (1, 2, 3):
            gen = generate_network(
                GenConfig(rows=3, cols=3, score_density=0.4, seed=seed)
            )
            records = generate_query_sets(
                gen.network, seed=seed, count_per_set=4, buckets=((0.0, 3.0),)
            )
            for rec in records:
                q = rec.to_query()
                got = solve(gen.network, q)
                want = best_path_by_enumeration(gen.network, q)
                assert got.status == want.status
                if got.path is not None:
                    assert got.path.score == want.path.score
                    assert got.path.nodes == want.path.nodes

    def test_paths_are_loopless_and_within_budget(self):
        rng = random.Random(999)
        for _ in range(80):
            net, q = random_instance(rng)
            res = solve(net, q)
            if res.path is None:
                continue
            assert len(set(res.path.nodes)) == len(res.path.nodes)
            assert res.path.arrival <= q.t_dep + q.budget + 1e-9


class TestParallel:
    def test_determinism_across_thread_counts(self, toy_network):
        q = _query(toy_network, 0, 1, 0.0, 8.0)
        base = solve(toy_network, q).path.to_json()
        for threads in (1, 2, 4, 8):
            res = solve(toy_network, q, mode="parallel", threads=threads)
            assert res.path.to_json() == base

    def test_forced_fork_agrees_with_sequential(self):
        rng = random.Random(7)
        for _ in range(25):
            net, q = random_instance(rng)
            seq = solve(net, q)
            par = solve(net, q, mode="parallel", threads=2, fork_depth=1)
            assert seq.status == par.status
            if seq.path is not None:
                assert par.path.to_json() == seq.path.to_json()
            assert par.explored == seq.explored

    def test_unknown_mode_rejected(self, toy_network):
        with pytest.raises(ValueError):
            solve(toy_network, _query(toy_network, 0, 1, 0.0, 8.0), mode="magic")


class TestConstraints:
    def test_hop_budget_excludes_detour(self, toy_network):
        q = _query(toy_network, 0, 1, 0.0, 8.0)
        hops = Constraint(cost=lambda edge, t: 1.0, budget=1.0)
        res = solve(toy_network, q, constraints=[hops])
        assert res.path.nodes == (0, 1)
        assert res.path.score == 5.0

    def test_loose_secondary_budget_changes_nothing(self, toy_network):
        q = _query(toy_network, 0, 1, 0.0, 8.0)
        hops = Constraint(cost=lambda edge, t: 1.0, budget=5.0)
        res = solve(toy_network, q, constraints=[hops])
        assert res.path.nodes == (0, 2, 1)

    def test_unsatisfiable_secondary_budget_is_infeasible(self, toy_network):
        q = _query(toy_network, 0, 1, 0.0, 8.0)
        hops = Constraint(cost=lambda edge, t: 1.0, budget=0.5)
        res = solve(toy_network, q, constraints=[hops])
        assert res.status == STATUS_INFEASIBLE

    def test_oracle_agreement_under_constraints(self):
        rng = random.Random(17)
        hops = Constraint(cost=lambda edge, t: 1.0, budget=3.0)
        for _ in range(60):
            net, q = random_instance(rng)
            got = solve(net, q, constraints=[hops])
            want = best_path_by_enumeration(net, q, constraints=[hops])
            assert got.status == want.status
            if got.path is not None:
                assert got.path.score == want.path.score
                assert got.path.nodes == want.path.nodes

    def test_parallel_respects_constraints(self, toy_network):
        q = _query(toy_network, 0, 1, 0.0, 8.0)
        hops = Constraint(cost=lambda edge, t: 1.0, budget=1.0)
        res = solve(
            toy_network, q, constraints=[hops], mode="parallel", threads=2,
            fork_depth=1,
        )
        assert res.path.nodes == (0, 1)


class TestExplorationCap:
    def test_cap_aborts_with_limit_status(self, toy_network):
        q = _query(toy_network, 0, 1, 0.0, 8.0)
        res = solve(toy_network, q, max_expansions=2)
        assert res.status == STATUS_LIMIT
        assert res.path is None
        assert res.explored >= 2

    def test_generous_cap_is_invisible(self, toy_network):
        q = _query(toy_network, 0, 1, 0.0, 8.0)
        res = solve(toy_network, q, max_expansions=10_000)
        assert res.status == STATUS_OK and res.path.score == 7.0


class TestDominanceRegression:
    def test_solver_beats_dominance_pruned_search(self, dominance_trap_network):
        net = dominance_trap_network
        q = Query.from_budget(0, 3, 0.0, 8.0)
        full = solve(net, q)
        assert full.status == STATUS_OK
        assert full.path.score == 7.0
        assert full.path.nodes == (0, 2, 1, 3)  # A -> C -> B -> D
        pruned = best_score_with_dominance(net, q)
        assert pruned == 6.0
