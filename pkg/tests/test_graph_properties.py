"""Reachability validation against an oracle that enumerates simple paths."""

import json

import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from flowd.errors import GraphError
from flowd.model import parse_flow

from oracles import reachable_by_path_enumeration


def _flow_doc(step_ids, transitions):
    steps = [{"id": "s0", "kind": "Common", "op": "Start"}]
    steps += [{"id": sid, "kind": "Common", "op": "End"} for sid in step_ids[1:]]
    return {
        "name": "random_graph",
        "imports": [],
        "steps": steps,
        "transitions": [
            {"from": a, "to": b, "order": order} for (a, b, order) in transitions
        ],
    }


@st.composite
def graphs(draw):
    count = draw(st.integers(min_value=2, max_value=8))
    ids = [f"s{i}" for i in range(count)]
    edge_count = draw(st.integers(min_value=0, max_value=12))
    edges = []
    orders: dict[str, int] = {}
    for _ in range(edge_count):
        a = draw(st.sampled_from(ids))
        b = draw(st.sampled_from(ids))
        orders[a] = orders.get(a, 0) + 1
        edges.append((a, b, orders[a]))
    return ids, edges


@settings(max_examples=400, deadline=None)
@given(graphs())
def test_reachability_matches_path_enumeration(graph):
    ids, edges = graph
    doc = _flow_doc(ids, edges)
    reachable = reachable_by_path_enumeration(doc)
    should_parse = reachable == set(ids)
    try:
        flow = parse_flow(json.dumps(doc), [])
        parsed = True
    except GraphError as exc:
        parsed = False
        for missing in sorted(set(ids) - reachable):
            assert missing in str(exc)
    assert parsed == should_parse
    if parsed:
        assert {s.id for s in flow.steps} == reachable


def test_oracle_known_case():
    doc = _flow_doc(
        ["s0", "s1", "s2"],
        [("s0", "s1", 1), ("s2", "s1", 1)],
    )
    assert reachable_by_path_enumeration(doc) == {"s0", "s1"}
