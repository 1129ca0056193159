"""Reduction of generator sets and reduction graphs."""
from __future__ import annotations

import json
from collections import Counter, deque
from dataclasses import dataclass
from functools import lru_cache
from typing import Iterable

from .edgecases import (
    CANDIDATES,
    PART_GENERATORS,
    PARTS,
    EdgeType,
    Part,
    classify_generators,
    relative_generators,
    satisfies,
)
from .lattice import (
    DEFAULT_OCTAVES,
    HEX_ELEMENTS,
    Configuration,
    GroupElement,
    Interpretation,
    Note,
    configuration_of,
    shape_mask,
)


class InvalidGeneratorSet(ValueError):
    pass


@dataclass(frozen=True)
class GeneratorSet:
    """Generators (offsets from the false fundamental) that together satisfy it."""

    generators: frozenset[GroupElement]
    configuration: Configuration
    false_fundamental: Note | None = None

    def __post_init__(self):
        object.__setattr__(self, "generators", frozenset(self.generators))
        outside = self.generators - HEX_ELEMENTS
        if outside:
            raise InvalidGeneratorSet(f"generators outside the hexagonal region: {sorted(outside)}")
        if not satisfies(self.generators, self.configuration):
            raise InvalidGeneratorSet(f"{self.label_text()} does not satisfy every part")

    @classmethod
    def from_fundamentals(cls, false_fundamental: Note, fundamentals: Iterable[Note]) -> "GeneratorSet":
        return cls(relative_generators(false_fundamental, fundamentals),
                   configuration_of(false_fundamental.chroma), false_fundamental)

    def without(self, e: GroupElement) -> "GeneratorSet":
        return GeneratorSet(self.generators - {e}, self.configuration, self.false_fundamental)

    def label_text(self) -> str:
        return "{" + ", ".join(str(e) for e in sorted(self.generators)) + "}"

    def __len__(self) -> int:
        return len(self.generators)


def reduce_once(gs: GeneratorSet, e: GroupElement) -> GeneratorSet | None:
    """``gs`` minus ``e`` if that still satisfies the false fundamental, else None."""
    if e not in gs.generators:
        raise ValueError(f"{e} is not in {gs.label_text()}")
    rest = gs.generators - {e}
    if not satisfies(rest, gs.configuration):
        return None
    return GeneratorSet(rest, gs.configuration, gs.false_fundamental)


def is_irreducible(gs: GeneratorSet) -> bool:
    return all(reduce_once(gs, e) is None for e in gs.generators)


@dataclass(frozen=True)
class ReductionGraph:
    root: frozenset[GroupElement]
    configuration: Configuration
    nodes: tuple[frozenset[GroupElement], ...]
    edges: tuple[tuple[frozenset[GroupElement], GroupElement, frozenset[GroupElement]], ...]
    terminals: dict

    def out_degree(self, node: frozenset[GroupElement]) -> int:
        return sum(1 for src, _, _ in self.edges if src == node)

    def to_dot(self) -> str:
        ids = {n: f"n{i}" for i, n in enumerate(self.nodes)}
        lines = ["digraph reduction {", "  rankdir=TB;"]
        for n in self.nodes:
            label = "{" + ", ".join(str(e) for e in sorted(n)) + "}"
            if n in self.terminals:
                label += f"\\nType {self.terminals[n].value}"
                lines.append(f'  {ids[n]} [label="{label}", shape=box];')
            else:
                lines.append(f'  {ids[n]} [label="{label}"];')
        for src, e, dst in self.edges:
            lines.append(f'  {ids[src]} -> {ids[dst]} [label="{e}"];')
        lines.append("}")
        return "\n".join(lines) + "\n"

    def to_dict(self) -> dict:
        ids = {n: i for i, n in enumerate(self.nodes)}
        return {
            "configuration": self.configuration.value,
            "nodes": [[e.to_pair() for e in sorted(n)] for n in self.nodes],
            "edges": [[ids[s], e.to_pair(), ids[d]] for s, e, d in self.edges],
            "terminals": {str(ids[n]): t.value for n, t in self.terminals.items()},
        }

    def to_json(self) -> str:
        return json.dumps(self.to_dict(), ensure_ascii=False)


@lru_cache(maxsize=None)
def _graph(root: frozenset[GroupElement], config: Configuration) -> ReductionGraph:
    order = [root]
    seen = {root}
    edges = []
    queue = deque([root])
    while queue:
        node = queue.popleft()
        for e in sorted(node):
            rest = node - {e}
            if not satisfies(rest, config):
                continue
            edges.append((node, e, rest))
            if rest not in seen:
                seen.add(rest)
                order.append(rest)
                queue.append(rest)
    has_out = {src for src, _, _ in edges}
    terminals = {n: classify_generators(n, config) for n in order if n not in has_out}
    return ReductionGraph(root, config, tuple(order), tuple(edges), terminals)


def reduction_graph(gs: GeneratorSet) -> ReductionGraph:
    """Every reduction applied from ``gs`` down to irreducible sets, with merged duplicates."""
    return _graph(gs.generators, gs.configuration)


def terminal_types(graph: ReductionGraph) -> Counter:
    return Counter(graph.terminals.values())


def terminal_patterns(graph: ReductionGraph) -> int:
    """Terminals counted with the twelfth source ignored (at most nine)."""
    f2 = PART_GENERATORS[graph.configuration][Part.F2]
    return len({t - f2 for t in graph.terminals})


def tally(gs: GeneratorSet) -> dict[EdgeType, float]:
    """Fractional type weights of the terminals, summing to one."""
    counts = terminal_types(reduction_graph(gs))
    total = sum(counts.values())
    return {t: c / total for t, c in counts.items()}


def all_satisfying_sets(config: Configuration) -> list[frozenset[GroupElement]]:
    cands = CANDIDATES[config]
    out = []
    for mask in range(1 << len(cands)):
        s = frozenset(e for i, e in enumerate(cands) if mask >> i & 1)
        if satisfies(s, config):
            out.append(s)
    return out


def irreducible_sets(config: Configuration) -> list[frozenset[GroupElement]]:
    """Exhaustive search over every subset of the candidate generators."""
    return [s for s in all_satisfying_sets(config)
            if all(not satisfies(s - {e}, config) for e in s)]


# Bitmask view used by the simulator: bit i <-> CANDIDATES[config][i].

def mask_of(generators: Iterable[GroupElement], config: Configuration) -> int:
    index = {e: i for i, e in enumerate(CANDIDATES[config])}
    return sum(1 << index[e] for e in generators)


@lru_cache(maxsize=None)
def mask_summary(config: Configuration, mask: int) -> tuple[tuple[tuple[EdgeType, float], ...], int, int]:
    """(type weights, terminal count, terminal patterns) for a satisfying mask."""
    gens = frozenset(e for i, e in enumerate(CANDIDATES[config]) if mask >> i & 1)
    graph = _graph(gens, config)
    counts = terminal_types(graph)
    total = sum(counts.values())
    weights = tuple(sorted(((t, c / total) for t, c in counts.items()), key=lambda kv: kv[0].value))
    return weights, len(graph.terminals), terminal_patterns(graph)


def explain_false_fundamentals(fundamentals: Iterable[Note], octaves: int = DEFAULT_OCTAVES) -> list[dict]:
    """Every shape-exhibiting non-fundamental, with its generators, terminal tally and graph."""
    funds = frozenset(fundamentals)
    interp = Interpretation.from_fundamentals(funds, octaves)
    shapes = shape_mask(interp.mask)
    out = []
    for x in interp.notes():
        if x in funds or not shapes[x.chroma, x.octave]:
            continue
        gs = GeneratorSet.from_fundamentals(x, funds)
        graph = reduction_graph(gs)
        weights = tally(gs)
        out.append({
            "false_fundamental": x.name,
            "configuration": gs.configuration.value,
            "generators": [e.to_pair() for e in sorted(gs.generators)],
            "generator_labels": [str(e) for e in sorted(gs.generators)],
            "type": classify_generators(gs.generators, gs.configuration).value,
            "terminals": sorted(t.value for t in graph.terminals.values()),
            "tally": {t.value: w for t, w in sorted(weights.items(), key=lambda kv: kv[0].value)},
            "graph": graph.to_dict(),
        })
    return out


__all__ = [
    "GeneratorSet", "InvalidGeneratorSet", "ReductionGraph", "reduce_once", "is_irreducible",
    "reduction_graph", "terminal_types", "terminal_patterns", "tally", "all_satisfying_sets",
    "irreducible_sets", "mask_of", "mask_summary", "explain_false_fundamentals", "PARTS",
]
