"""False fundamentals: generator candidates, basic edge cases and their types.

Everything here works in coordinates relative to the false fundamental
(written X below): a generator is a GroupElement ``e`` meaning the
fundamental sits at ``e(X)``.
"""
from __future__ import annotations

import itertools
import json
from dataclasses import dataclass, field
from enum import Enum
from typing import Iterable, NamedTuple

from .lattice import (
    MOORE,
    VON_NEUMANN,
    Configuration,
    GroupElement,
    Interpretation,
    Note,
    act,
    configuration_of,
    exhibits_shape,
    g,
)


class Part(Enum):
    F0 = 0
    F1 = 1
    F2 = 2
    F3 = 3


PARTS = tuple(Part)

OMEGA_INV = g(0, -1)
OMEGA = g(0, 1)


def _left_turnstile(config: Configuration) -> bool:
    return config is Configuration.TG


def _own_turnstile(config: Configuration) -> bool:
    return config is Configuration.GT


def part_generators(config: Configuration, part: Part) -> frozenset[GroupElement]:
    """The three possible generators of one apparent part of X."""
    left_t = _left_turnstile(config)
    if part is Part.F0:
        return frozenset({g(0, -1), g(0, -2), g(-1, -1) if left_t else g(-1, -2)})
    if part is Part.F1:
        return frozenset({g(0, 1), g(0, -1), g(-1, 0) if left_t else g(-1, -1)})
    if part is Part.F3:
        return frozenset({g(0, 1), g(0, 2), g(-1, 1) if left_t else g(-1, 0)})
    # the twelfth above X sits one octave lower for a turnstile column
    top = 1 if _own_turnstile(config) else 2
    return frozenset({g(1, top), g(1, top - 1), g(1, top - 2)})


PART_GENERATORS = {c: {p: part_generators(c, p) for p in PARTS} for c in Configuration}
CANDIDATES = {c: tuple(sorted(frozenset().union(*PART_GENERATORS[c].values()))) for c in Configuration}


def parts_hit(generators: Iterable[GroupElement], config: Configuration) -> dict[Part, frozenset[GroupElement]]:
    gens = frozenset(generators)
    return {p: gens & PART_GENERATORS[config][p] for p in PARTS}


def satisfies(generators: Iterable[GroupElement], config: Configuration) -> bool:
    return all(parts_hit(generators, config).values())


def is_basic(generators: Iterable[GroupElement], config: Configuration) -> bool:
    gens = frozenset(generators)
    hits = parts_hit(gens, config)
    if any(len(h) != 1 for h in hits.values()):
        return False
    return gens == frozenset().union(*hits.values())


class Triple(NamedTuple):
    f0: GroupElement
    f1: GroupElement
    f3: GroupElement

    def __str__(self) -> str:
        return f"({self.f0}, {self.f1}, {self.f3})"


@dataclass(frozen=True)
class GeneratorAssignment:
    configuration: Configuration
    f0: GroupElement
    f1: GroupElement
    f2: GroupElement
    f3: GroupElement
    false_fundamental: Note | None = None

    @property
    def chosen(self) -> dict[Part, GroupElement]:
        return {Part.F0: self.f0, Part.F1: self.f1, Part.F2: self.f2, Part.F3: self.f3}

    @property
    def generators(self) -> frozenset[GroupElement]:
        return frozenset(self.chosen.values())

    @property
    def triple(self) -> Triple:
        return Triple(self.f0, self.f1, self.f3)


def enumerate_basic_cases(config: Configuration) -> list[GeneratorAssignment]:
    """All choices of one generator per part in which every part is hit exactly once."""
    cands = PART_GENERATORS[config]
    out = []
    for choice in itertools.product(*(sorted(cands[p]) for p in PARTS)):
        gens = frozenset(choice)
        hits = parts_hit(gens, config)
        if all(hits[p] == {choice[i]} for i, p in enumerate(PARTS)):
            out.append(GeneratorAssignment(config, *choice))
    return out


class GeneratingStructure(Enum):
    I = "f0 = f1 = f3"
    II = "f0 = f1 != f3"
    III = "f0 = f3 != f1"
    IV = "f0 != f1 = f3"
    V = "f0 != f1 != f3"


@dataclass(frozen=True)
class EdgeInvariants:
    back_delta: int
    epsilon: int
    gs: GeneratingStructure


def invariants_of(t: Triple) -> EdgeInvariants:
    back = sum(1 for e in t if e.signed_k < 0)
    eps = len(set(t))
    if t.f0 == t.f1 == t.f3:
        gs = GeneratingStructure.I
    elif t.f0 == t.f1:
        gs = GeneratingStructure.II
    elif t.f0 == t.f3:
        gs = GeneratingStructure.III
    elif t.f1 == t.f3:
        gs = GeneratingStructure.IV
    else:
        gs = GeneratingStructure.V
    return EdgeInvariants(back, eps, gs)


class EdgeType(Enum):
    TYPE1 = "1"
    TYPE2 = "2"
    TYPE3 = "3"
    TYPE4 = "4"
    TYPE5 = "5"
    TYPE6 = "6"
    TYPE7 = "7"
    TYPE8 = "8"
    NULL = "Ø"
    NON_BASIC = "NonBasic"

    @property
    def is_basic(self) -> bool:
        return self.value.isdigit()

    @property
    def fundamentals(self) -> int | None:
        """Distinct generators including the one for f2."""
        if self.is_basic:
            return 3 if int(self.value) <= 4 else 4
        return 3 if self is EdgeType.NULL else None


BASIC_TYPES = tuple(t for t in EdgeType if t.is_basic)
TERMINAL_TYPES = BASIC_TYPES + (EdgeType.NULL,)

# Rows of the type table: generators excluding f2, for the ΓΓ/Γ⊢ column and the ⊢Γ column.
TYPE_TABLE: dict[EdgeType, tuple[frozenset[GroupElement], frozenset[GroupElement]]] = {
    EdgeType.TYPE1: (frozenset({g(0, -1), g(0, 2)}), frozenset({g(0, -1), g(0, 2)})),
    EdgeType.TYPE2: (frozenset({g(0, -2), g(0, 1)}), frozenset({g(0, -2), g(0, 1)})),
    EdgeType.TYPE3: (frozenset({g(0, -1), g(-1, 0)}), frozenset({g(0, -1), g(-1, 1)})),
    EdgeType.TYPE4: (frozenset({g(-1, -2), g(0, 1)}), frozenset({g(-1, -1), g(0, 1)})),
    EdgeType.TYPE5: (frozenset({g(0, -2), g(-1, -1), g(0, 2)}), frozenset({g(0, -2), g(-1, 0), g(0, 2)})),
    EdgeType.TYPE6: (frozenset({g(0, -2), g(-1, -1), g(-1, 0)}), frozenset({g(0, -2), g(-1, 0), g(-1, 1)})),
    EdgeType.TYPE7: (frozenset({g(-1, -2), g(-1, -1), g(0, 2)}), frozenset({g(-1, -1), g(-1, 0), g(0, 2)})),
    EdgeType.TYPE8: (frozenset({g(-1, -2), g(-1, -1), g(-1, 0)}), frozenset({g(-1, -1), g(-1, 0), g(-1, 1)})),
}

GS = GeneratingStructure
TYPE_INVARIANTS: dict[EdgeType, EdgeInvariants] = {
    EdgeType.TYPE1: EdgeInvariants(0, 2, GS.II),
    EdgeType.TYPE2: EdgeInvariants(0, 2, GS.IV),
    EdgeType.TYPE3: EdgeInvariants(1, 2, GS.II),
    EdgeType.TYPE4: EdgeInvariants(1, 2, GS.IV),
    EdgeType.TYPE5: EdgeInvariants(1, 3, GS.V),
    EdgeType.TYPE6: EdgeInvariants(2, 3, GS.V),
    EdgeType.TYPE7: EdgeInvariants(2, 3, GS.V),
    EdgeType.TYPE8: EdgeInvariants(3, 3, GS.V),
}


def _column(config: Configuration) -> int:
    return 1 if config is Configuration.TG else 0


def _without_f2(generators: frozenset[GroupElement], config: Configuration) -> frozenset[GroupElement]:
    return generators - PART_GENERATORS[config][Part.F2]


def classify_generators(generators: Iterable[GroupElement], config: Configuration) -> EdgeType:
    """Type label of a generator set that satisfies X.

    Irreducible non-basic sets are exactly omega^-1, omega plus one twelfth
    source; anything else that is not basic is reported as NON_BASIC.
    """
    gens = frozenset(generators)
    hits = parts_hit(gens, config)
    rest = _without_f2(gens, config)
    if len(hits[Part.F2]) == 1 and rest == {OMEGA_INV, OMEGA}:
        return EdgeType.NULL
    if not is_basic(gens, config):
        return EdgeType.NON_BASIC
    col = _column(config)
    for t, cols in TYPE_TABLE.items():
        if cols[col] == rest:
            return t
    return EdgeType.NON_BASIC


def classify_type(t: Triple, config: Configuration) -> EdgeType:
    """Type of a triple; f2 is taken as singly satisfied."""
    f2 = next(iter(sorted(PART_GENERATORS[config][Part.F2])))
    return classify_generators(set(t) | {f2}, config)


def type_from_invariants(t: Triple) -> EdgeType:
    """Same classification via (back-delta, epsilon, G.S.) alone.

    Types 6 and 7 share invariants; they are told apart by the generator in
    X's own column: below X (omega^-2) is type 6, above (omega^2) is type 7.
    """
    inv = invariants_of(t)
    matches = [k for k, v in TYPE_INVARIANTS.items() if v == inv]
    if len(matches) == 1:
        return matches[0]
    if set(matches) == {EdgeType.TYPE6, EdgeType.TYPE7}:
        same_column = [e for e in t if e.k == 0]
        if g(0, -2) in same_column:
            return EdgeType.TYPE6
        if g(0, 2) in same_column:
            return EdgeType.TYPE7
    return EdgeType.NON_BASIC


def shear(e: GroupElement, k: int) -> GroupElement:
    """Image of ``e`` under delta -> omega**k delta."""
    m = e.signed_k
    return GroupElement(m, e.l + k * m)


def same_type(t1: Triple, t2: Triple) -> bool:
    return any(Triple(*(shear(e, k) for e in t1)) == t2 for k in (-1, 0, 1))


def basic_cases() -> list[GeneratorAssignment]:
    return [a for c in Configuration for a in enumerate_basic_cases(c)]


def min_neighborhood_generators(config: Configuration) -> tuple[int, int]:
    """(Moore, von Neumann) minimum generator counts around X.

    Built by picking, for each part, a candidate that serves that part alone,
    preferring outside both neighbourhoods, then Moore-only, then von Neumann.
    """
    def tier(e: GroupElement) -> int:
        return 2 if e in VON_NEUMANN else 1 if e in MOORE else 0

    hits_of = lambda e: [p for p in PARTS if e in PART_GENERATORS[config][p]]  # noqa: E731
    chosen = set()
    for p in PARTS:
        own = [e for e in sorted(PART_GENERATORS[config][p]) if hits_of(e) == [p]]
        chosen.add(min(own, key=tier))
    return sum(e in MOORE for e in chosen), sum(e in VON_NEUMANN for e in chosen)


def min_neighborhood_generators_bruteforce(config: Configuration) -> tuple[int, int]:
    cases = enumerate_basic_cases(config)
    return (min(len(a.generators & MOORE) for a in cases),
            min(len(a.generators & VON_NEUMANN) for a in cases))


def presents_as_fundamental(interp: Interpretation, note: Note) -> bool:
    return exhibits_shape(interp, note)


def is_edge_case(interp: Interpretation, note: Note, fundamentals: Iterable[Note]) -> bool:
    return presents_as_fundamental(interp, note) and note not in set(fundamentals)


def relative_generators(false_fundamental: Note, fundamentals: Iterable[Note]) -> frozenset[GroupElement]:
    """Fundamentals that could produce a part of X, as offsets from X."""
    config = configuration_of(false_fundamental.chroma)
    wanted = {act(e, false_fundamental): e for e in CANDIDATES[config]}
    return frozenset(wanted[f] for f in fundamentals if f in wanted)


@dataclass(frozen=True)
class EdgeCaseRecord:
    false_fundamental: Note | None
    configuration: Configuration
    triple: Triple | None
    g_f2: GroupElement | None
    invariants: EdgeInvariants | None
    type: EdgeType
    generators: frozenset[GroupElement] = field(default=frozenset())

    @classmethod
    def from_generators(cls, generators: Iterable[GroupElement], config: Configuration,
                        false_fundamental: Note | None = None) -> "EdgeCaseRecord":
        gens = frozenset(generators)
        label = classify_generators(gens, config)
        hits = parts_hit(gens, config)
        f2 = next(iter(hits[Part.F2])) if len(hits[Part.F2]) == 1 else None
        triple = inv = None
        if label.is_basic:
            triple = Triple(*(next(iter(hits[p])) for p in (Part.F0, Part.F1, Part.F3)))
            inv = invariants_of(triple)
        return cls(false_fundamental, config, triple, f2, inv, label, gens)

    @classmethod
    def from_assignment(cls, a: GeneratorAssignment) -> "EdgeCaseRecord":
        return cls.from_generators(a.generators, a.configuration, a.false_fundamental)

    def to_dict(self) -> dict:
        return {
            "false_fundamental": self.false_fundamental.name if self.false_fundamental else None,
            "configuration": self.configuration.value,
            "triple": [e.to_pair() for e in self.triple] if self.triple else None,
            "g_f2": self.g_f2.to_pair() if self.g_f2 else None,
            "back_delta": self.invariants.back_delta if self.invariants else None,
            "epsilon": self.invariants.epsilon if self.invariants else None,
            "gs": self.invariants.gs.name if self.invariants else None,
            "type": self.type.value,
        }

    def to_json(self) -> str:
        return json.dumps(self.to_dict(), ensure_ascii=False)
