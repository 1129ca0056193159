import itertools
import json

import pytest
from hypothesis import given
from hypothesis import strategies as st

from fifthgrid.edgecases import (
    BASIC_TYPES,
    CANDIDATES,
    PART_GENERATORS,
    PARTS,
    TYPE_INVARIANTS,
    TYPE_TABLE,
    EdgeCaseRecord,
    EdgeType,
    GeneratingStructure,
    Part,
    Triple,
    basic_cases,
    classify_generators,
    classify_type,
    enumerate_basic_cases,
    invariants_of,
    is_edge_case,
    min_neighborhood_generators,
    min_neighborhood_generators_bruteforce,
    part_generators,
    presents_as_fundamental,
    relative_generators,
    same_type,
    shear,
    type_from_invariants,
)
from fifthgrid.lattice import (
    HEX_ELEMENTS,
    Configuration,
    GroupElement,
    Interpretation,
    Note,
    act,
    configuration_of,
    exhibits_shape,
    g,
    harmonics,
    parse_note,
)

from oracles import generators_of_cell

GG, GT, TG = Configuration.GG, Configuration.GT, Configuration.TG
W = g(0, 1)
W_INV = g(0, -1)
D_INV = g(-1, 0)


def chroma_for(config):
    return next(c for c in range(12) if configuration_of(c) is config)


def relative(x: Note, n: Note) -> GroupElement:
    found = [g(k, l) for k in range(-6, 6) for l in range(-6, 7) if act(g(k, l), x) == n]
    assert len(found) == 1
    return found[0]


def oracle_part_generators(config):
    """Generators per part, found by scanning the chromatic shapes around a concrete X."""
    x = Note(chroma_for(config), 4)
    cells = (x, *harmonics(x))
    return {p: frozenset(relative(x, n) for n in generators_of_cell(cell) - {x})
            for p, cell in zip(PARTS, cells)}


# generator candidates

@pytest.mark.parametrize("config", list(Configuration))
def test_part_generators_match_oracle(config):
    oracle = oracle_part_generators(config)
    for p in PARTS:
        assert part_generators(config, p) == oracle[p]
        assert len(oracle[p]) == 3


@pytest.mark.parametrize("config", list(Configuration))
def test_part_generators_independent_of_chroma(config):
    # every chroma with the same configuration gives the same relative candidates
    for c in range(12):
        if configuration_of(c) is not config:
            continue
        x = Note(c, 4)
        for p, cell in zip(PARTS, (x, *harmonics(x))):
            rel = {relative(x, n) for n in generators_of_cell(cell) - {x}}
            assert rel == PART_GENERATORS[config][p]


def test_part_generator_examples():
    assert part_generators(TG, Part.F1) == {W, W_INV, D_INV}
    assert part_generators(GG, Part.F0) == {W_INV, g(0, -2), g(-1, -2)}
    assert len(CANDIDATES[GG]) == 10


def test_candidates_inside_hexagon():
    for c in Configuration:
        assert set(CANDIDATES[c]) <= HEX_ELEMENTS


def test_configuration_count():
    configs = [configuration_of(c) for c in range(12)]
    assert configs.count(GT) == 5 and configs.count(TG) == 5 and configs.count(GG) == 2
    assert configuration_of(parse_note("D5").chroma) is GT


# enumeration

def _raw_xor_cases(config):
    """Brute force over all 3^4 raw choices, keeping those where every part is hit once."""
    out = set()
    for choice in itertools.product(*(sorted(PART_GENERATORS[config][p]) for p in PARTS)):
        gens = set(choice)
        if all(len(gens & PART_GENERATORS[config][p]) == 1 for p in PARTS):
            out.add(choice)
    return out


@pytest.mark.parametrize("config", list(Configuration))
def test_enumeration_counts(config):
    cases = enumerate_basic_cases(config)
    assert len(cases) == 24
    assert {(a.f0, a.f1, a.f2, a.f3) for a in cases} == _raw_xor_cases(config)
    assert len({a.generators - PART_GENERATORS[config][Part.F2] for a in cases}) == 8
    for a in cases:
        assert not {W, W_INV} <= a.generators
        for p, e in a.chosen.items():
            assert e in PART_GENERATORS[config][p]


def test_72_cases():
    assert len(basic_cases()) == 72


@pytest.mark.parametrize("config", list(Configuration))
def test_types_three_each(config):
    labels = [EdgeCaseRecord.from_assignment(a).type for a in enumerate_basic_cases(config)]
    assert set(labels) == set(BASIC_TYPES)
    assert all(labels.count(t) == 3 for t in BASIC_TYPES)


@pytest.mark.parametrize("config", list(Configuration))
def test_invariants_match_table(config):
    for a in enumerate_basic_cases(config):
        label = classify_type(a.triple, config)
        inv = invariants_of(a.triple)
        assert inv == TYPE_INVARIANTS[label]
        assert inv.gs in (GeneratingStructure.II, GeneratingStructure.IV, GeneratingStructure.V)
        assert type_from_invariants(a.triple) is label
        assert label.fundamentals == len(a.generators)


def test_merged_column_shared():
    strip = lambda c: {a.generators - PART_GENERATORS[c][Part.F2] for a in enumerate_basic_cases(c)}  # noqa: E731
    assert strip(GG) == strip(GT)
    assert strip(GG) != strip(TG)
    assert strip(TG) == {cols[1] for cols in TYPE_TABLE.values()}


@pytest.mark.parametrize("config", list(Configuration))
def test_f2_in_right_column_and_at_most_four(config):
    for a in enumerate_basic_cases(config):
        assert a.f2.signed_k == 1
        assert len(a.generators) <= 4


def test_invariant_examples():
    w2, w_2 = g(0, 2), g(0, -2)
    assert invariants_of(Triple(W_INV, W_INV, g(-1, 1))) == TYPE_INVARIANTS[EdgeType.TYPE3]
    inv = invariants_of(Triple(W_INV, W_INV, g(-1, 1)))
    assert (inv.back_delta, inv.epsilon, inv.gs) == (1, 2, GeneratingStructure.II)
    inv = invariants_of(Triple(w_2, W, W))
    assert (inv.back_delta, inv.epsilon, inv.gs) == (0, 2, GeneratingStructure.IV)
    inv = invariants_of(Triple(w_2, D_INV, w2))
    assert (inv.back_delta, inv.epsilon, inv.gs) == (1, 3, GeneratingStructure.V)


def test_classify_examples():
    for config in Configuration:
        assert classify_type(Triple(W_INV, W_INV, g(0, 2)), config) is EdgeType.TYPE1
    assert classify_type(Triple(g(-1, -2), g(-1, -1), D_INV), GG) is EdgeType.TYPE8
    f2 = sorted(PART_GENERATORS[GT][Part.F2])[0]
    assert classify_generators({W_INV, W, f2}, GT) is EdgeType.NULL
    assert classify_generators({W_INV, W, g(0, 2), f2}, GT) is EdgeType.NON_BASIC


def test_type6_type7_split():
    t6 = Triple(g(0, -2), g(-1, -1), D_INV)
    t7 = Triple(g(-1, -2), g(-1, -1), g(0, 2))
    assert invariants_of(t6) == invariants_of(t7)
    assert type_from_invariants(t6) is EdgeType.TYPE6
    assert type_from_invariants(t7) is EdgeType.TYPE7


# same type

def test_same_type_example():
    assert same_type(Triple(W_INV, W_INV, D_INV), Triple(W_INV, W_INV, g(-1, 1)))


def test_same_type_classes():
    triples = {(c, a.triple) for c in Configuration for a in enumerate_basic_cases(c)}
    distinct = {t for _, t in triples}
    for t in distinct:
        assert same_type(t, t)
    for t1, t2 in itertools.product(distinct, repeat=2):
        assert same_type(t1, t2) == same_type(t2, t1)
    # classes across the three configurations have three members, one from each
    for label in BASIC_TYPES:
        members = {}
        for c in Configuration:
            for a in enumerate_basic_cases(c):
                if classify_type(a.triple, c) is label:
                    members.setdefault(c, set()).add(a.triple)
        reps = [next(iter(members[c])) for c in Configuration]
        assert all(same_type(reps[0], r) or same_type(r, reps[0]) for r in reps)
    # triples of different types are never related
    by_type = {}
    for c in Configuration:
        for a in enumerate_basic_cases(c):
            by_type.setdefault(classify_type(a.triple, c), set()).add(a.triple)
    for t1, t2 in itertools.combinations(BASIC_TYPES, 2):
        for a in by_type[t1]:
            for b in by_type[t2]:
                assert not same_type(a, b)


@given(st.integers(-3, 3), st.integers(-3, 3), st.sampled_from([-1, 0, 1]), st.sampled_from([-1, 0, 1]))
def test_shear_composes(k, l, a, b):
    e = GroupElement(k, l)
    if abs(e.signed_k) <= 1:
        assert shear(shear(e, a), b) == shear(e, a + b)


# neighbourhood minima

def test_table3():
    expected = {GG: (1, 0), TG: (1, 1), GT: (2, 0)}
    for c, want in expected.items():
        assert min_neighborhood_generators(c) == want
        assert min_neighborhood_generators_bruteforce(c) == want


# concrete grids

@pytest.mark.parametrize("config", list(Configuration))
def test_cases_on_concrete_grid(config):
    for c in range(12):
        if configuration_of(c) is not config:
            continue
        x = Note(c, 4)
        for a in enumerate_basic_cases(config):
            funds = [act(e, x) for e in a.generators]
            interp = Interpretation.from_fundamentals(funds)
            assert presents_as_fundamental(interp, x)
            assert is_edge_case(interp, x, funds)
            assert relative_generators(x, funds) == a.generators


def test_blank_interpretation():
    blank = Interpretation.empty()
    assert not any(presents_as_fundamental(blank, Note(c, o)) for c in range(12) for o in range(10))


def test_d4_a5_d6_layout():
    funds = [parse_note(t) for t in ("D4", "A5", "D6")]
    interp = Interpretation.from_fundamentals(funds)
    d5 = parse_note("D5")
    assert is_edge_case(interp, d5, funds)
    rec = EdgeCaseRecord.from_generators(relative_generators(d5, funds), configuration_of(d5.chroma), d5)
    assert rec.type is EdgeType.NULL


def test_record_json():
    a = enumerate_basic_cases(GG)[0]
    doc = json.loads(EdgeCaseRecord.from_assignment(a).to_json())
    assert set(doc) == {"false_fundamental", "configuration", "triple", "g_f2", "back_delta", "epsilon", "gs", "type"}
    assert doc["type"] in {t.value for t in BASIC_TYPES}
    assert len(doc["triple"]) == 3
