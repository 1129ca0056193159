"""Monte Carlo prevalence of edge types over random sets of fundamentals.

Random numbers come from numpy's PCG64 generator.  Each number of
fundamentals ``n`` gets its own stream seeded with ``[seed, n]`` so results
for one ``n`` do not depend on which other values are run or in what order.

Fundamentals are drawn from the visible grid, but their harmonics are
deposited into ``headroom`` extra octaves above it before shapes are
detected.  A fundamental near the top therefore still exhibits its shape,
and a false fundamental whose upper parts lie above the grid is still
counted.  ``headroom=0`` gives the clamped behaviour.
"""
from __future__ import annotations

import csv
import io
import json
import math
from dataclasses import dataclass, field
from typing import Iterable

import numpy as np

from .edgecases import CANDIDATES, TERMINAL_TYPES, EdgeType
from .lattice import (
    DEFAULT_OCTAVES,
    N_CHROMA,
    TURNSTILE_CHROMAS,
    Interpretation,
    Note,
    configuration_of,
    shape_mask,
)
from .estimators import simple_poly_mask
from .reduction import mask_summary

FOUR_FUNDAMENTAL_TYPES = (EdgeType.TYPE5, EdgeType.TYPE6, EdgeType.TYPE7, EdgeType.TYPE8)
TYPE_KEYS = tuple(t.value for t in TERMINAL_TYPES)
HARMONIC_HEADROOM = 2


def stream(seed: int, n: int) -> np.random.Generator:
    return np.random.default_rng([int(seed), int(n)])


def harmonic_fill(fundamentals: np.ndarray) -> np.ndarray:
    """Boolean grid of fundamentals plus their in-grid harmonics."""
    octaves = fundamentals.shape[1]
    out = fundamentals.copy()
    out[:, 1:] |= fundamentals[:, :-1]
    out[:, 2:] |= fundamentals[:, :-2]
    turn = np.array([c in TURNSTILE_CHROMAS for c in range(N_CHROMA)])
    # twelfth: one column right, one (turnstile) or two (gamma) octaves up
    t_src = np.where(turn[:, None], fundamentals, False)
    g_src = np.where(~turn[:, None], fundamentals, False)
    lift = np.zeros_like(fundamentals)
    lift[:, 1:] |= t_src[:, : octaves - 1]
    lift[:, 2:] |= g_src[:, : octaves - 2]
    out |= np.roll(lift, 1, axis=0)
    return out


def _candidate_index(octaves: int) -> np.ndarray:
    """Per cell: flat indices of its 10 candidate generators (-1 if off-grid)."""
    size = N_CHROMA * octaves
    idx = np.full((size, 10), -1, dtype=np.int64)
    for c in range(N_CHROMA):
        cands = CANDIDATES[configuration_of(c)]
        for o in range(octaves):
            for i, e in enumerate(cands):
                cc, oo = (c + e.k) % N_CHROMA, o + e.l
                if 0 <= oo < octaves:
                    idx[c * octaves + o, i] = cc * octaves + oo
    return idx


_INDEX_CACHE: dict[int, np.ndarray] = {}
_COLUMN_CONFIG = [configuration_of(c) for c in range(N_CHROMA)]


def _index(octaves: int):
    if octaves not in _INDEX_CACHE:
        _INDEX_CACHE[octaves] = _candidate_index(octaves)
    return _INDEX_CACHE[octaves]


def sample_fundamentals(n: int, rng: np.random.Generator, octaves: int = DEFAULT_OCTAVES) -> np.ndarray:
    size = N_CHROMA * octaves
    if not 1 <= n <= size:
        raise ValueError(f"n must lie in [1, {size}], got {n}")
    grid = np.zeros(size, dtype=bool)
    grid[rng.choice(size, size=n, replace=False)] = True
    return grid.reshape(N_CHROMA, octaves)


def _notes(mask: np.ndarray) -> frozenset[Note]:
    cs, os_ = np.nonzero(mask)
    return frozenset(Note(c, o) for c, o in zip(cs, os_))


def _lift(fund: np.ndarray, headroom: int) -> np.ndarray:
    return np.pad(fund, ((0, 0), (0, headroom))) if headroom else fund


def sample_interpretation(n: int, rng: np.random.Generator, octaves: int = DEFAULT_OCTAVES,
                          headroom: int = 0) -> tuple[Interpretation, frozenset[Note]]:
    """``n`` distinct uniform fundamentals with their harmonics marked.

    With ``headroom`` > 0 the interpretation is taller than the sampling grid
    so that no harmonic is lost.
    """
    fund = sample_fundamentals(n, rng, octaves)
    return Interpretation(harmonic_fill(_lift(fund, headroom))), _notes(fund)


def naive_classify(interp: Interpretation) -> frozenset[Note]:
    """Every shape-exhibiting note, taken as a fundamental."""
    return _notes(shape_mask(interp.mask))


def grid_accuracy(tp: int, fp: int, fn: int, cells: int) -> float:
    """Share of grid notes classified correctly, as fundamental or not."""
    return 1.0 - (fp + fn) / cells


def note_accuracy(truth: Iterable[Note] | np.ndarray, estimate: Iterable[Note] | np.ndarray) -> float:
    """TP / (TP + FP + FN); 1.0 when both sets are empty."""
    if isinstance(truth, np.ndarray):
        tp = int((truth & estimate).sum())
        fp = int((estimate & ~truth).sum())
        fn = int((truth & ~estimate).sum())
    else:
        t, e = set(truth), set(estimate)
        tp, fp, fn = len(t & e), len(e - t), len(t - e)
    denom = tp + fp + fn
    return 1.0 if denom == 0 else tp / denom


@dataclass
class TrialRecord:
    n_fundamentals: int
    fundamentals: frozenset[Note]
    false_fundamentals: frozenset[Note]
    type_tallies: dict[EdgeType, float]
    terminal_count_sum: float
    naive_tp: int
    naive_fp: int
    naive_fn: int
    cells: int = N_CHROMA * DEFAULT_OCTAVES
    poly_counts: tuple[int, int, int] | None = None  # (tp, fp, fn) of simple_poly when run

    @property
    def naive_accuracy(self) -> float:
        return grid_accuracy(self.naive_tp, self.naive_fp, self.naive_fn, self.cells)

    @property
    def poly_accuracy(self) -> float | None:
        return None if self.poly_counts is None else grid_accuracy(*self.poly_counts, self.cells)

    @property
    def naive_jaccard(self) -> float:
        denom = self.naive_tp + self.naive_fp + self.naive_fn
        return 1.0 if denom == 0 else self.naive_tp / denom


def _counts(est: np.ndarray, fund: np.ndarray) -> tuple[int, int, int]:
    return int((est & fund).sum()), int((est & ~fund).sum()), int((fund & ~est).sum())


def _analyse(visible: np.ndarray, headroom: int, poly: bool = False):
    """Core of one trial on a boolean fundamentals grid."""
    fund = _lift(visible, headroom)
    octaves = fund.shape[1]
    shapes = shape_mask(harmonic_fill(fund))
    shapes[:, visible.shape[1]:] = False
    false = shapes & ~fund
    idx = _index(octaves)
    flat_f = np.append(fund.reshape(-1), False)  # index -1 reads the False sentinel
    tallies: dict[EdgeType, float] = {}
    terminals = 0
    cells = np.flatnonzero(false.reshape(-1))
    if cells.size:
        bits = flat_f[idx[cells]]
        masks = (bits * (1 << np.arange(10))).sum(axis=1)
        for cell, m in zip(cells, masks):
            config = _COLUMN_CONFIG[int(cell) // octaves]
            weights, _, patterns = mask_summary(config, int(m))
            terminals += patterns
            for t, w in weights:
                tallies[t] = tallies.get(t, 0.0) + w
    counts = _counts(shapes, fund)
    poly_counts = None
    if poly:
        rows = visible.shape[1]
        est = simple_poly_mask(harmonic_fill(fund))[:, :rows]
        poly_counts = _counts(est, visible)
    return false[:, : visible.shape[1]], tallies, terminals, counts, poly_counts


def _record(fund: np.ndarray, headroom: int, poly: bool) -> TrialRecord:
    false, tallies, terminals, counts, poly_counts = _analyse(fund, headroom, poly)
    return TrialRecord(int(fund.sum()), _notes(fund), _notes(false), tallies, float(terminals),
                       *counts, fund.size, poly_counts)


def run_trial(n: int, rng: np.random.Generator, octaves: int = DEFAULT_OCTAVES,
              headroom: int = HARMONIC_HEADROOM, poly: bool = False) -> TrialRecord:
    """Sample, classify naively, and tally reduction-graph terminals per false fundamental."""
    return _record(sample_fundamentals(n, rng, octaves), headroom, poly)


def trial_from_fundamentals(fundamentals: Iterable[Note], octaves: int = DEFAULT_OCTAVES,
                            headroom: int = HARMONIC_HEADROOM, poly: bool = False) -> TrialRecord:
    fund = np.zeros((N_CHROMA, octaves), dtype=bool)
    for f in fundamentals:
        fund[f.chroma, f.octave] = True
    return _record(fund, headroom, poly)


@dataclass
class NStats:
    n: int
    samples: int = 0
    edge_cases: int = 0
    tallies: dict[str, float] = field(default_factory=lambda: {k: 0.0 for k in TYPE_KEYS})
    terminal_sum: float = 0.0
    accuracy_sum: float = 0.0
    poly_accuracy_sum: float = 0.0
    poly_samples: int = 0

    def add(self, rec: TrialRecord) -> None:
        self.samples += 1
        self.edge_cases += len(rec.false_fundamentals)
        for t, w in rec.type_tallies.items():
            self.tallies[t.value] += w
        self.terminal_sum += rec.terminal_count_sum
        self.accuracy_sum += rec.naive_accuracy
        if rec.poly_counts is not None:
            self.poly_samples += 1
            self.poly_accuracy_sum += rec.poly_accuracy

    @property
    def proportions(self) -> dict[str, float]:
        total = sum(self.tallies.values())
        if total == 0:
            return {k: 0.0 for k in TYPE_KEYS}
        return {k: v / total for k, v in self.tallies.items()}

    @property
    def mean_terminals(self) -> float:
        return self.terminal_sum / self.edge_cases if self.edge_cases else 0.0

    @property
    def naive_accuracy(self) -> float:
        return self.accuracy_sum / self.samples if self.samples else 0.0

    @property
    def poly_accuracy(self) -> float | None:
        return self.poly_accuracy_sum / self.poly_samples if self.poly_samples else None

    @property
    def mean_edge_cases(self) -> float:
        return self.edge_cases / self.samples if self.samples else 0.0


@dataclass
class PrevalenceStats:
    seed: int
    samples_per_n: int
    per_n: dict[int, NStats]

    @property
    def ns(self) -> list[int]:
        return sorted(self.per_n)

    def total_tallies(self, ns: Iterable[int] | None = None) -> dict[str, float]:
        out = {k: 0.0 for k in TYPE_KEYS}
        for n in (self.ns if ns is None else ns):
            for k, v in self.per_n[n].tallies.items():
                out[k] += v
        return out

    def pie(self, ns: Iterable[int] | None = None) -> dict[str, float]:
        """Overall proportion of each type across the chosen n values."""
        tot = self.total_tallies(ns)
        s = sum(tot.values())
        return {k: (v / s if s else 0.0) for k, v in tot.items()}

    def mean_edge_cases(self) -> float:
        cases = sum(s.edge_cases for s in self.per_n.values())
        samples = sum(s.samples for s in self.per_n.values())
        return cases / samples if samples else 0.0

    def to_dict(self) -> dict:
        return {
            "seed": self.seed,
            "samples_per_n": self.samples_per_n,
            "per_n": [
                {
                    "n": s.n,
                    "samples": s.samples,
                    "edge_cases": s.edge_cases,
                    "tallies": s.tallies,
                    "terminal_sum": s.terminal_sum,
                    "accuracy_sum": s.accuracy_sum,
                    "poly_accuracy_sum": s.poly_accuracy_sum,
                    "poly_samples": s.poly_samples,
                    "proportions": s.proportions,
                    "mean_terminals": s.mean_terminals,
                    "naive_accuracy": s.naive_accuracy,
                    "poly_accuracy": s.poly_accuracy,
                }
                for s in (self.per_n[n] for n in self.ns)
            ],
            "pie": self.pie(),
            "mean_edge_cases": self.mean_edge_cases(),
        }

    def to_json(self) -> str:
        return json.dumps(self.to_dict(), ensure_ascii=False, indent=1)

    @classmethod
    def from_json(cls, text: str) -> "PrevalenceStats":
        doc = json.loads(text)
        per_n = {}
        for row in doc["per_n"]:
            s = NStats(row["n"], row["samples"], row["edge_cases"], dict(row["tallies"]),
                       row["terminal_sum"], row["accuracy_sum"],
                       row.get("poly_accuracy_sum", 0.0), row.get("poly_samples", 0))
            per_n[s.n] = s
        return cls(doc["seed"], doc["samples_per_n"], per_n)

    def to_csv(self) -> str:
        buf = io.StringIO()
        w = csv.writer(buf, lineterminator="\n")
        w.writerow(["n", "type", "proportion", "mean_terminals", "naive_accuracy"])
        for n in self.ns:
            s = self.per_n[n]
            props = s.proportions
            for k in TYPE_KEYS:
                w.writerow([n, k, repr(props[k]), repr(s.mean_terminals), repr(s.naive_accuracy)])
        return buf.getvalue()

    def __eq__(self, other) -> bool:
        return isinstance(other, PrevalenceStats) and self.to_dict() == other.to_dict()


def run_experiment(samples_per_n: int, n_range: Iterable[int] | tuple[int, int], seed: int,
                   octaves: int = DEFAULT_OCTAVES, headroom: int = HARMONIC_HEADROOM,
                   poly: bool = False, progress=None) -> PrevalenceStats:
    """``n_range`` is an iterable of n values or an inclusive (low, high) pair."""
    if samples_per_n < 1:
        raise ValueError("samples_per_n must be at least 1")
    if isinstance(n_range, tuple) and len(n_range) == 2:
        ns = range(n_range[0], n_range[1] + 1)
    else:
        ns = n_range
    per_n = {}
    for n in ns:
        rng = stream(seed, n)
        acc = NStats(n)
        for _ in range(samples_per_n):
            acc.add(run_trial(n, rng, octaves, headroom, poly))
        per_n[n] = acc
        if progress:
            progress(n)
    return PrevalenceStats(seed, samples_per_n, per_n)


def export_stats(stats: PrevalenceStats, path, fmt: str | None = None) -> None:
    path = str(path)
    fmt = fmt or ("json" if path.endswith(".json") else "csv")
    text = stats.to_json() if fmt == "json" else stats.to_csv()
    with open(path, "w", encoding="utf-8", newline="") as fh:
        fh.write(text)


def four_fundamental_share(stats: PrevalenceStats, ns: Iterable[int] | None = None) -> float:
    pie = stats.pie(ns)
    return math.fsum(pie[t.value] for t in FOUR_FUNDAMENTAL_TYPES)
