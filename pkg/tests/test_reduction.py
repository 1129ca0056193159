import json
from collections import Counter

import pytest
from hypothesis import given
from hypothesis import strategies as st

from fifthgrid.edgecases import CANDIDATES, PART_GENERATORS, EdgeType, Part, enumerate_basic_cases
from fifthgrid.lattice import Configuration, Interpretation, Note, act, configuration_of, exhibits_shape, g, parse_note
from fifthgrid.reduction import (
    GeneratorSet,
    InvalidGeneratorSet,
    all_satisfying_sets,
    explain_false_fundamentals,
    irreducible_sets,
    is_irreducible,
    mask_of,
    mask_summary,
    reduce_once,
    reduction_graph,
    tally,
    terminal_patterns,
    terminal_types,
)

W, W_INV, W2 = g(0, 1), g(0, -1), g(0, 2)
GT = Configuration.GT


def f2_of(config):
    return sorted(PART_GENERATORS[config][Part.F2])


def concrete_satisfying(config):
    """Subsets of the candidates that make X show a shape when placed on a real grid."""
    x = Note(next(c for c in range(12) if configuration_of(c) is config), 4)
    cands = CANDIDATES[config]
    out = set()
    for mask in range(1 << len(cands)):
        s = frozenset(e for i, e in enumerate(cands) if mask >> i & 1)
        if exhibits_shape(Interpretation.from_fundamentals([act(e, x) for e in s]), x):
            out.add(s)
    return out


@pytest.mark.parametrize("config", list(Configuration))
def test_satisfying_sets_match_grid(config):
    sets = set(all_satisfying_sets(config))
    assert sets == concrete_satisfying(config)
    assert len(sets) == 623


@pytest.mark.parametrize("config", list(Configuration))
def test_only_null_is_irreducible_non_basic(config):
    irr = set(irreducible_sets(config))
    basic = {a.generators for a in enumerate_basic_cases(config)}
    assert len(irr) == 27
    assert irr - basic == {frozenset({W_INV, W, f2}) for f2 in f2_of(config)}


def test_reduce_once_examples():
    f2 = f2_of(GT)[0]
    gs = GeneratorSet({W_INV, W, W2, f2}, GT)
    out = reduce_once(gs, W2)
    assert out is not None and out.generators == {W_INV, W, f2}
    assert reduce_once(out, W) is None and reduce_once(out, W_INV) is None
    assert is_irreducible(out)
    with pytest.raises(ValueError):
        reduce_once(out, W2)


def test_basic_cases_irreducible():
    for config in Configuration:
        for a in enumerate_basic_cases(config):
            gs = GeneratorSet(a.generators, config)
            assert all(reduce_once(gs, e) is None for e in gs.generators)
            graph = reduction_graph(gs)
            assert len(graph.nodes) == 1 and list(graph.terminals) == [gs.generators]


def test_invalid_sets_rejected():
    with pytest.raises(InvalidGeneratorSet):
        GeneratorSet({W_INV}, GT)
    with pytest.raises(InvalidGeneratorSet):
        GeneratorSet({W_INV, W, f2_of(GT)[0], g(0, 5)}, GT)


@given(st.sampled_from(list(Configuration)), st.data())
def test_supersets_of_irreducible_reduce(config, data):
    base = data.draw(st.sampled_from(irreducible_sets(config)))
    extra = data.draw(st.sampled_from([e for e in CANDIDATES[config] if e not in base]))
    assert not is_irreducible(GeneratorSet(base | {extra}, config))


@given(st.sampled_from(list(Configuration)), st.data())
def test_graph_properties(config, data):
    root = data.draw(st.sampled_from(all_satisfying_sets(config)))
    graph = reduction_graph(GeneratorSet(root, config))
    assert len(graph.nodes) == len(set(graph.nodes)) <= 2 ** len(root)
    for src, e, dst in graph.edges:
        assert dst == src - {e} and len(dst) == len(src) - 1
    for n in graph.nodes:
        gs = GeneratorSet(n, config)
        if n in graph.terminals:
            assert is_irreducible(gs)
            assert graph.terminals[n] in set(EdgeType) - {EdgeType.NON_BASIC}
        else:
            assert graph.out_degree(n) >= 1
    # every node is reachable from the root through recorded edges
    reach, frontier = {root}, [root]
    while frontier:
        node = frontier.pop()
        for src, _, dst in graph.edges:
            if src == node and dst not in reach:
                reach.add(dst)
                frontier.append(dst)
    assert reach == set(graph.nodes)
    assert terminal_patterns(graph) <= 9


@given(st.sampled_from(list(Configuration)), st.data())
def test_tally_sums_to_one(config, data):
    root = data.draw(st.sampled_from(all_satisfying_sets(config)))
    gs = GeneratorSet(root, config)
    assert sum(tally(gs).values()) == pytest.approx(1.0)
    weights, terms, _ = mask_summary(config, mask_of(root, config))
    assert dict(weights) == pytest.approx(tally(gs))
    assert terms == len(reduction_graph(gs).terminals)


def test_root_reaching_null():
    f2 = f2_of(GT)[0]
    root = frozenset({W_INV, W, W2, g(0, -2), f2})
    graph = reduction_graph(GeneratorSet(root, GT))
    kinds = terminal_types(graph)
    assert EdgeType.NULL in kinds
    assert sum(kinds.values()) == len(graph.terminals) >= 2
    dot = graph.to_dot()
    assert dot.startswith("digraph") and "Type Ø" in dot
    doc = json.loads(graph.to_json())
    assert len(doc["nodes"]) == len(graph.nodes)
    assert len(doc["edges"]) == len(graph.edges)


def test_dedup_merges_paths():
    f2 = f2_of(GT)[0]
    root = frozenset({W_INV, W, W2, g(0, -2), f2})
    graph = reduction_graph(GeneratorSet(root, GT))
    paths = Counter(dst for _, _, dst in graph.edges)
    assert any(c > 1 for c in paths.values())


def test_explain_d4_a5_d6():
    funds = [parse_note(t) for t in ("D4", "A5", "D6")]
    cases = explain_false_fundamentals(funds)
    assert [c["false_fundamental"] for c in cases] == ["D5"]
    d5 = cases[0]
    assert d5["configuration"] == GT.value
    assert d5["type"] == "Ø" and d5["terminals"] == ["Ø"]
    assert set(d5["generator_labels"]) == {str(W_INV), str(W), str(g(1, 0))}
