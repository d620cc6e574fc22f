import itertools
import json
import math
import random
from collections import Counter

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from entropywalk.community import tour_key
from entropywalk.errors import MutationError, ParseError
from entropywalk.graph import generate_ring_of_cliques, planted_cliques
from entropywalk.streaming import (
    Budget,
    CountMinSketch,
    GraphMutation,
    MutableGraph,
    TopN,
    apply_mutation,
    parse_mutation,
    read_mutations,
    stream_loop,
)
from entropywalk.walker import WalkParams


def ring(k=3, c=5):
    return MutableGraph.from_graph(generate_ring_of_cliques(k, c))


class TestSketch:
    def test_fresh_is_zero(self):
        s = CountMinSketch(64, 3)
        assert s.estimate((1, 2)) == 0 and s.estimate("anything") == 0

    def test_one_sided(self):
        s = CountMinSketch(64, 3)
        assert s.update((1, 2), 5) >= 5
        assert s.estimate((1, 2)) >= 5

    def test_bad_increment(self):
        with pytest.raises(ValueError):
            CountMinSketch(8, 2).update("k", 0)

    def test_error_bound_with_shadow_counter(self):
        width, n = 2000, 10_000
        s = CountMinSketch(width, 5, seed=3)
        keys = [("key", i) for i in range(n)]
        for k in keys:
            s.update(k)
        bound = math.ceil(math.e / width * n)
        bad = sum(1 for k in keys if s.estimate(k) > 1 + bound)
        assert all(s.estimate(k) >= 1 for k in keys)
        assert bad / n < 0.01

    def test_from_error(self):
        s = CountMinSketch.from_error(0.0013, 0.007)
        assert (s.width, s.depth) == (math.ceil(math.e / 0.0013), 5)

    def test_halve(self):
        s = CountMinSketch(16, 2)
        s.update("a", 9)
        s.halve()
        assert s.estimate("a") == 4

    def test_deterministic_hashing(self):
        a, b = CountMinSketch(128, 4, seed=1), CountMinSketch(128, 4, seed=1)
        for k in range(50):
            a.update((k,))
            b.update((k,))
        assert np.array_equal(a.counters, b.counters)

    @settings(max_examples=40, deadline=None)
    @given(st.lists(st.tuples(st.integers(0, 40), st.integers(1, 5)), max_size=200))
    def test_never_underestimates(self, updates):
        s = CountMinSketch(16, 3)
        exact = Counter()
        for k, inc in updates:
            s.update(k, inc)
            exact[k] += inc
        assert all(s.estimate(k) >= c for k, c in exact.items())
        assert (s.counters >= 0).all()


class TestTopN:
    def test_capacity_and_eviction(self):
        t = TopN(2)
        assert t.offer("a", 5) and t.offer("b", 3)
        assert not t.offer("c", 3)  # must exceed the minimum
        assert t.offer("c", 4)
        assert set(t.entries) == {"a", "c"} and t.evictions == 1
        assert t.ranked() == [("a", 5), ("c", 4)]

    def test_update_in_place(self):
        t = TopN(1)
        t.offer("a", 1)
        t.offer("a", 7)
        assert t.entries == {"a": 7}

    @settings(max_examples=50, deadline=None)
    @given(st.lists(st.integers(0, 30), max_size=300), st.integers(1, 6))
    def test_invariants_against_sketch(self, stream, cap):
        cms, topn = CountMinSketch(32, 3), TopN(cap)
        for k in stream:
            est = cms.update(k)
            before = dict(topn.entries)
            topn.offer(k, est)
            assert len(topn) <= cap
            evicted = set(before) - set(topn.entries)
            for e in evicted:
                assert min(topn.entries.values()) >= before[e]
            if k in topn.entries:
                assert topn.entries[k] == est


class TestMutations:
    def test_parse(self):
        assert parse_mutation("+e a b") == GraphMutation("add-edge", ("a", "b"))
        assert parse_mutation("-n x") == GraphMutation("remove-node", ("x",))
        assert parse_mutation("  ") is None and parse_mutation("# note") is None
        with pytest.raises(ParseError):
            parse_mutation("*e a b", 4)
        with pytest.raises(ParseError):
            parse_mutation("+e a", 4)

    def test_read_stream(self):
        got = list(read_mutations(["+e a b\n", "\n", "+n c\n", "-e a b\n"]))
        assert [m.kind for m in got] == ["add-edge", "add-node", "remove-edge"]

    def test_add_edge(self):
        g = MutableGraph()
        apply_mutation(g, parse_mutation("+e a b"))
        assert g.node_id("b") in g.neighbors(g.node_id("a"))

    def test_add_existing_is_counted_noop(self):
        g = ring()
        assert not apply_mutation(g, parse_mutation("+e q0_0 q0_1"))
        assert not apply_mutation(g, parse_mutation("+n q0_0"))
        assert g.noops == 2

    def test_remove_node(self):
        g = ring()
        v = g.node_id("q1_0")
        edges = g.edge_count
        deg = g.degree(v)
        apply_mutation(g, parse_mutation("-n q1_0"))
        assert all(v not in g.neighbors(u) for u in range(g.node_count))
        assert g.degree(v) == 0 and g.edge_count == edges - deg

    def test_remove_errors(self):
        g = ring()
        with pytest.raises(MutationError):
            apply_mutation(g, parse_mutation("-e q0_0 nope"))
        with pytest.raises(MutationError):
            apply_mutation(g, parse_mutation("-n nope"))
        with pytest.raises(MutationError):
            apply_mutation(g, parse_mutation("-e q0_0 q2_3"))

    def test_directed_remove_node(self):
        g = MutableGraph(directed=True)
        g.add_edge("a", "b")
        g.add_edge("c", "a")
        g.remove_node("a")
        assert g.edge_count == 0

    @settings(max_examples=30, deadline=None)
    @given(st.lists(st.tuples(st.sampled_from(["+e", "-e", "+n", "-n"]), st.integers(0, 6), st.integers(0, 6)), max_size=80))
    def test_graph_invariants_preserved(self, ops):
        g = MutableGraph()
        for op, a, b in ops:
            line = f"{op} n{a} n{b}" if op.endswith("e") else f"{op} n{a}"
            try:
                apply_mutation(g, parse_mutation(line))
            except MutationError:
                pass
            arcs = 0
            for u in range(g.node_count):
                nb = g.neighbors(u)
                assert u not in nb and len(nb) == len(set(nb))
                assert all(u in g.neighbors(v) for v in nb)
                arcs += len(nb)
            assert arcs == 2 * g.edge_count


def run(g, p, **kw):
    kw.setdefault("budget", Budget(tours=10_000))
    return list(stream_loop(g, p, CountMinSketch(2048, 5, seed=p.master_seed), TopN(kw.pop("cap", 3)), **kw))


class TestLoop:
    P = WalkParams(nt=1, lt=15, minm=5, maxm=5, et=0.75, master_seed=1)

    def test_zero_budget(self):
        assert run(ring(), self.P, budget=Budget(tours=0)) == []

    def test_snapshot_cadence(self):
        snaps = run(ring(), self.P, budget=Budget(tours=2500), snapshot_interval=1000)
        assert [s.tours for s in snaps] == [1000, 2000, 2500]

    def test_converges_to_planted(self):
        g = ring()
        snaps = run(g, self.P, budget=Budget(tours=50_000), snapshot_interval=10_000)
        top = {frozenset(k) for k, _ in snaps[-1].entries}
        assert top == set(planted_cliques(g))

    def test_min_matches_filter(self):
        snaps = run(ring(), self.P, budget=Budget(tours=1000), min_matches=10**9)
        assert snaps[-1].entries == []

    def test_source_close_without_budget(self):
        g = ring()
        muts = [parse_mutation("+e q0_0 q1_1"), parse_mutation("-e q0_0 q1_1")]
        snaps = list(stream_loop(g, self.P, CountMinSketch(), TopN(3), muts, budget=None, batch_size=50))
        assert snaps[-1].tours == 100 and snaps[-1].mutations == 2

    def test_mutation_errors_are_not_fatal(self):
        g = ring()
        muts = [parse_mutation("-n ghost"), parse_mutation("+e q0_0 q2_2")]
        snaps = run(g, self.P, budget=Budget(tours=500), mutation_source=muts)
        assert snaps[-1].mutations == 1 and snaps[-1].mutation_errors == 1
        assert g.has_edge(g.node_id("q0_0"), g.node_id("q2_2"))

    def test_tours_valid_against_their_version(self):
        rnd = random.Random(5)
        g = ring(4, 5)
        labels = g.labels + [f"x{i}" for i in range(6)]

        def mutations():
            for _ in range(1000):
                op = rnd.choice(["+e", "+e", "-e", "+n", "-n"])
                a, b = rnd.sample(labels, 2)
                yield parse_mutation(f"{op} {a} {b}" if op.endswith("e") else f"{op} {a}")

        edge_sets = {}
        checked = 0

        def observe(tour, version):
            nonlocal checked
            assert version == g.version  # the graph is not mutated mid-batch
            if version not in edge_sets:
                edge_sets[version] = {frozenset(e) for e in g.edges()}
            edges = edge_sets[version]
            for a, b in zip(tour.visits, tour.visits[1:]):
                assert frozenset((a, b)) in edges
            checked += 1

        snaps = list(
            stream_loop(
                g, self.P, CountMinSketch(), TopN(3), mutations(),
                budget=Budget(tours=20_000), batch_size=20, tour_observer=observe,
            )
        )
        assert checked == 20_000 and snaps[-1].mutations + snaps[-1].mutation_errors == 1000
        assert len(edge_sets) > 100

    def test_dissolved_clique_decays_out(self):
        g = ring(3, 5)
        target = frozenset(planted_cliques(g)[0])
        cms = CountMinSketch(2048, 5)
        topn = TopN(3)
        p = self.P
        list(stream_loop(g, p, cms, topn, budget=Budget(tours=20_000)))
        assert target in {frozenset(k) for k in topn.entries}
        key = tuple(sorted(target))
        frozen = cms.estimate(key)
        # dissolve clique 0: drop every internal edge
        labels = [g.label(v) for v in sorted(target)]
        for a, b in itertools.combinations(labels, 2):
            apply_mutation(g, parse_mutation(f"-e {a} {b}"))
        p2 = WalkParams(nt=1, lt=15, minm=5, maxm=5, et=0.75, master_seed=2)
        list(stream_loop(g, p2, cms, topn, budget=Budget(tours=20_000)))
        assert cms.estimate(key) == frozen  # no further updates
        assert target in {frozenset(k) for k in topn.entries}  # without decay it stays
        p3 = WalkParams(nt=1, lt=15, minm=5, maxm=5, et=0.75, master_seed=3)
        list(stream_loop(g, p3, cms, topn, budget=Budget(tours=40_000), decay_interval=2000))
        assert target not in {frozenset(k) for k in topn.entries}

    def test_json_snapshot(self):
        g = ring()
        snap = run(g, self.P, budget=Budget(tours=1000))[-1]
        rec = json.loads(snap.to_json(g))
        assert rec["tours"] == 1000 and len(rec["top"]) == 3
        assert all(len(e["members"]) == 5 for e in rec["top"])

    def test_deterministic(self):
        a = run(ring(), self.P, budget=Budget(tours=3000))
        b = run(ring(), self.P, budget=Budget(tours=3000))
        assert [s.entries for s in a] == [s.entries for s in b]
