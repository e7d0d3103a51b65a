"""Random-walk simulator tests: determinism, termination, convergence."""

import json
from collections import Counter, defaultdict

import numpy as np
import pytest

from clicksim.errors import UnknownField
from clicksim.events import SESSION_END, SESSION_START, EventNode
from clicksim.graph import build_graph
from clicksim.simulate import (
    ConversionRule,
    SimulatedSession,
    SimulationConfig,
    conversion_rate,
    sample_session,
    session_to_json_dict,
    simulate,
)
from tests.helpers import hand_graph, sessions


def ids_to_names(session, named):
    reverse = {node.id: name for name, node in named.items()}
    return [reverse[n] for n in session.node_ids]


class TestSampleSession:
    def test_deterministic_chain(self):
        graph, named = hand_graph({"START": {"A": 1.0}, "A": {"END": 1.0}})
        rng = np.random.default_rng(7)
        for _ in range(50):
            s = sample_session(graph, rng)
            assert ids_to_names(s, named) == ["START", "A", "END"]
            assert s.terminated_by == "reached_end"

    def test_cycle_hits_length_cap(self):
        graph, _ = hand_graph({"START": {"A": 1.0}, "A": {"A": 1.0}})
        s = sample_session(graph, np.random.default_rng(0), max_length=10)
        assert s.terminated_by == "max_length"
        assert len(s.node_ids) == 11  # START plus 10 sampled nodes
        assert SESSION_END.id not in s.node_ids

    def test_max_length_one(self):
        graph, named = hand_graph({"START": {"A": 1.0}, "A": {"END": 1.0}})
        s = sample_session(graph, np.random.default_rng(0), max_length=1)
        assert ids_to_names(s, named) == ["START", "A"]
        assert s.terminated_by == "max_length"

    def test_branch_frequencies_converge(self):
        # two equally likely first steps: at n=10000 the observed share
        # of either branch sits within 0.02 of one half (4 sigma)
        graph, named = hand_graph(
            {"START": {"A": 0.5, "B": 0.5}, "A": {"END": 1.0}, "B": {"END": 1.0}}
        )
        walks = simulate(graph, SimulationConfig(n_sessions=10_000, seed=11))
        freq_a = sum(ids_to_names(w, named)[1] == "A" for w in walks) / 10_000
        assert abs(freq_a - 0.5) <= 0.02


class TestSimulatedSessionInvariants:
    def test_must_start_at_start(self):
        with pytest.raises(ValueError):
            SimulatedSession(node_ids=(SESSION_END.id,), terminated_by="reached_end")

    def test_end_membership_matches_termination(self):
        a = EventNode.from_descriptor({"actionType": "A"})
        with pytest.raises(ValueError):
            SimulatedSession(
                node_ids=(SESSION_START.id, a.id), terminated_by="reached_end"
            )
        with pytest.raises(ValueError):
            SimulatedSession(
                node_ids=(SESSION_START.id, SESSION_END.id), terminated_by="max_length"
            )

    def test_end_only_final(self):
        a = EventNode.from_descriptor({"actionType": "A"})
        with pytest.raises(ValueError):
            SimulatedSession(
                node_ids=(SESSION_START.id, SESSION_END.id, a.id, SESSION_END.id),
                terminated_by="reached_end",
            )

    def test_unknown_termination_label(self):
        with pytest.raises(ValueError):
            SimulatedSession(node_ids=(SESSION_START.id,), terminated_by="crashed")


class TestSimulate:
    def branching_graph(self):
        return hand_graph(
            {
                "START": {"A": 0.6, "B": 0.4},
                "A": {"B": 0.3, "END": 0.7},
                "B": {"A": 0.2, "B": 0.3, "END": 0.5},
            }
        )[0]

    def test_same_seed_identical(self):
        graph = self.branching_graph()
        cfg = SimulationConfig(n_sessions=200, seed=42)
        assert simulate(graph, cfg) == simulate(graph, cfg)

    def test_different_seed_differs(self):
        graph = self.branching_graph()
        a = simulate(graph, SimulationConfig(n_sessions=200, seed=1))
        b = simulate(graph, SimulationConfig(n_sessions=200, seed=2))
        assert a != b

    def test_session_count(self):
        graph = self.branching_graph()
        assert len(simulate(graph, SimulationConfig(n_sessions=37, seed=0))) == 37

    def test_per_index_substreams_make_prefixes_stable(self):
        # session k depends only on (seed, k), so growing n keeps a prefix
        graph = self.branching_graph()
        small = simulate(graph, SimulationConfig(n_sessions=5, seed=9))
        large = simulate(graph, SimulationConfig(n_sessions=50, seed=9))
        assert large[:5] == small

    def test_thread_count_does_not_change_output(self):
        graph = self.branching_graph()
        cfg = SimulationConfig(n_sessions=300, seed=5)
        assert simulate(graph, cfg, threads=4) == simulate(graph, cfg, threads=1)

    def test_termination_bound_holds(self):
        graph = self.branching_graph()
        cfg = SimulationConfig(n_sessions=500, seed=3, max_length=6)
        for s in simulate(graph, cfg):
            assert len(s.node_ids) <= 6 + 2

    def test_transition_frequencies_converge_to_graph(self):
        # empirical conditional frequencies vs stored probabilities on a
        # graph with five event nodes; sources below 500 visits are skipped
        graph = build_graph(
            sessions(
                [["A", "B", "C"]] * 3
                + [["A", "C", "B"]] * 2
                + [["B", "C"]] * 2
                + [["A", "B"], ["C", "A"], ["B", "A", "C", "B"]]
            ),
            alpha=1.0,
        )
        walks = simulate(graph, SimulationConfig(n_sessions=10_000, seed=17))
        visits = Counter()
        taken = defaultdict(Counter)
        for w in walks:
            for src, dst in zip(w.node_ids, w.node_ids[1:]):
                visits[src] += 1
                taken[src][dst] += 1
        checked = 0
        for src, n_visits in visits.items():
            if n_visits < 500:
                continue
            for edge in graph.edges_from(src):
                freq = taken[src][edge.dst] / n_visits
                assert abs(freq - edge.probability) <= 0.02, (src, edge.dst)
                checked += 1
        assert checked >= 10


class TestConversionRate:
    RULE = ConversionRule(field="actionType", value="Completed purchase")

    def graph_with_conversion(self, p_conv):
        return hand_graph(
            {
                "START": {"Completed purchase": p_conv, "Browsed": 1.0 - p_conv},
                "Completed purchase": {"END": 1.0},
                "Browsed": {"END": 1.0},
            }
        )[0]

    def test_zero_when_never_reached(self):
        graph = self.graph_with_conversion(0.3)
        no_conv, _ = hand_graph({"START": {"Browsed": 1.0}, "Browsed": {"END": 1.0}})
        walks = simulate(no_conv, SimulationConfig(n_sessions=10, seed=0))
        # rate computed against a graph that knows the conversion node
        assert conversion_rate(walks, self.RULE, graph) == 0.0

    def test_one_when_always_reached(self):
        graph, _ = hand_graph(
            {"START": {"Completed purchase": 1.0}, "Completed purchase": {"END": 1.0}}
        )
        walks = simulate(graph, SimulationConfig(n_sessions=10, seed=0))
        assert conversion_rate(walks, self.RULE, graph) == 1.0

    def test_rate_converges(self):
        graph = self.graph_with_conversion(0.3)
        walks = simulate(graph, SimulationConfig(n_sessions=10_000, seed=23))
        assert abs(conversion_rate(walks, self.RULE, graph) - 0.3) <= 0.02

    def test_unknown_field_raises(self):
        graph = self.graph_with_conversion(0.5)
        walks = simulate(graph, SimulationConfig(n_sessions=5, seed=0))
        with pytest.raises(UnknownField):
            conversion_rate(walks, ConversionRule(field="nosuch", value="x"), graph)

    def test_known_field_with_unmatched_value_is_fine(self):
        graph = self.graph_with_conversion(0.5)
        walks = simulate(graph, SimulationConfig(n_sessions=5, seed=0))
        rate = conversion_rate(walks, ConversionRule(field="actionType", value="Nope"), graph)
        assert rate == 0.0

    def test_empty_sessions(self):
        graph = self.graph_with_conversion(0.5)
        assert conversion_rate([], self.RULE, graph) == 0.0


class TestConfig:
    def test_defaults(self):
        cfg = SimulationConfig(seed=1)
        assert cfg.n_sessions == 10_000
        assert cfg.max_length == 100
        assert cfg.conversion == ConversionRule("actionType", "Completed purchase")

    def test_validation(self):
        with pytest.raises(ValueError):
            SimulationConfig(n_sessions=0, seed=1)
        with pytest.raises(ValueError):
            SimulationConfig(max_length=0, seed=1)
        with pytest.raises(ValueError):
            SimulationConfig(seed=-1)
        with pytest.raises(ValueError):
            SimulationConfig(seed=2**64)


class TestExport:
    def test_json_shape(self):
        graph, named = hand_graph({"START": {"A": 1.0}, "A": {"END": 1.0}})
        walks = simulate(graph, SimulationConfig(n_sessions=2, seed=0))
        d = session_to_json_dict(walks[0], index=0)
        assert d == {
            "index": 0,
            "terminated_by": "reached_end",
            "node_ids": [SESSION_START.id, named["A"].id, SESSION_END.id],
        }
        json.dumps(d)  # serializable

    def test_texts_on_request(self):
        graph, _ = hand_graph({"START": {"A": 1.0}, "A": {"END": 1.0}})
        walks = simulate(graph, SimulationConfig(n_sessions=1, seed=0))
        d = session_to_json_dict(walks[0], graph=graph, include_text=True)
        assert d["texts"] == ["session start", '{"actionType": "A"}', "session end"]
        assert "index" not in d
