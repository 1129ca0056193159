"""Pitch estimators: HPS baseline, shape-based mono and poly, and the sink iteration."""
from __future__ import annotations

import json
from functools import lru_cache
from dataclasses import dataclass, field
from typing import Iterable

import numpy as np

from .dsp import ALPHA_FACTOR, N_BINS, Frame, audible, bin_to_note, frame_to_grid, threshold_interpretation
from .lattice import (
    Interpretation,
    Note,
    exhibits_shape,
    generators_of,
    harmonics,
    shape_cells,
    shape_mask,
)

HPS_OFFSETS = (0, 12, 19, 24)  # semitones to f0, f1, f2, f3
COMPANION_WEIGHT = 0.25
POLY_THRESHOLD = 2


@dataclass(frozen=True)
class MonoEstimate:
    note: Note | None
    confidence: float = 0.0

    def to_dict(self, frame_index: int = 0) -> dict:
        return {"frame_index": frame_index,
                "notes": [] if self.note is None else [self.note.name],
                "confidence": self.confidence}


@dataclass(frozen=True)
class PolyEstimate:
    notes: frozenset[Note]
    discarded: frozenset[Note] = field(default_factory=frozenset)

    def __post_init__(self):
        object.__setattr__(self, "notes", frozenset(self.notes))
        object.__setattr__(self, "discarded", frozenset(self.discarded))
        if self.notes & self.discarded:
            raise ValueError("a note cannot be both accepted and discarded")

    def to_dict(self, frame_index: int = 0) -> dict:
        return {"frame_index": frame_index,
                "notes": [n.name for n in sorted(self.notes)],
                "discarded": [n.name for n in sorted(self.discarded)],
                "confidence": float(len(self.notes))}

    def to_json(self, frame_index: int = 0) -> str:
        return json.dumps(self.to_dict(frame_index), ensure_ascii=False)


def hps_estimate(frame: Frame, n_harmonics: int = 3, alpha_factor: float = ALPHA_FACTOR) -> MonoEstimate:
    """Audible bin maximising the product of magnitudes at the partial offsets.

    Only bins at or above the audibility threshold compete; otherwise a lone
    sine loses to its sub-octave, whose product picks up the real tone as a
    partial while the tone's own partials are mere leakage.
    """
    offsets = HPS_OFFSETS[: n_harmonics + 1]
    b = frame.bins
    if not b.any():
        return MonoEstimate(None)
    prod = np.ones(N_BINS)
    for off in offsets:
        shifted = np.zeros(N_BINS)
        shifted[: N_BINS - off] = b[off:]
        prod *= shifted
    prod[~audible(frame, alpha_factor)] = 0.0
    if not prod.any():
        # every product vanished (partials off the top); fall back to the strongest bin
        k = int(np.argmax(b))
        return MonoEstimate(bin_to_note(k), float(b[k]))
    k = int(np.argmax(prod))
    return MonoEstimate(bin_to_note(k), float(prod[k]))


def _chromatic_neighbours(note: Note) -> list[Note]:
    out = []
    for step in (-1, 1):
        k = note.chromatic_index + step
        if 0 <= k < N_BINS:
            out.append(Note.from_chromatic(k))
    return out


def _shape_energy(grid: Interpretation, note: Note) -> float:
    return sum(grid.value(c) for c in shape_cells(note))


def naive_mono(frame: Frame | Interpretation, alpha_factor: float = ALPHA_FACTOR,
               companion_weight: float = COMPANION_WEIGHT) -> MonoEstimate:
    """Lowest shape-exhibiting note that is not a leakage sideband of a neighbour.

    Every candidate is scored by its own shape energy plus ``companion_weight``
    times the shape energy one semitone either side (five steps either way
    along the fifths axis).  A candidate scoring below a chromatic neighbour
    is taken to be that neighbour's leakage.
    """
    if isinstance(frame, Frame):
        weights = frame_to_grid(frame)
        mask = threshold_interpretation(frame, alpha_factor)
    else:
        weights = frame
        mask = Interpretation(frame.mask)
    candidates = [n for n in mask.notes() if exhibits_shape(mask, n)]
    if not candidates:
        return MonoEstimate(None)

    def score(n: Note) -> float:
        return _shape_energy(weights, n) + companion_weight * sum(
            _shape_energy(weights, m) for m in _chromatic_neighbours(n))

    for n in sorted(candidates, key=lambda n: n.sort_key):
        s = score(n)
        if all(s >= score(m) for m in _chromatic_neighbours(n)):
            return MonoEstimate(n, s)
    best = max(candidates, key=score)
    return MonoEstimate(best, score(best))


def sink_iteration(interp: Interpretation) -> frozenset[Note]:
    """Repeatedly collect notes with all three harmonics present and no present generator.

    Edges run from a harmonic to each present note it could be a harmonic of.
    After each round the collected notes are removed together with the
    harmonic cells they alone account for: a harmonic cell goes once no
    remaining note could have generated it, unless it shows a full shape
    itself.  Removal cascades, so an octave left behind by a removed octave
    goes too.
    """
    present = set(interp.notes())
    found: set[Note] = set()
    while True:
        sinks = [n for n in present
                 if all(h in present for h in harmonics(n))
                 and not any(g in present for g in generators_of(n))]
        if not sinks:
            return frozenset(found)
        found.update(sinks)
        present.difference_update(sinks)
        pending = {h for s in sinks for h in harmonics(s)}
        while pending:
            orphans = {h for h in pending
                       if h in present
                       and not all(c in present for c in shape_cells(h))
                       and not any(g in present for g in generators_of(h))}
            present.difference_update(orphans)
            pending = {h for o in orphans for h in harmonics(o)}


def _claims(note: Note, accepted: set[Note]) -> bool:
    return any(h in accepted for h in harmonics(note))


def simple_poly(source: Frame | Interpretation, alpha_factor: float = ALPHA_FACTOR,
                threshold: int = POLY_THRESHOLD) -> PolyEstimate:
    """Traverse shape-exhibiting notes bottom row first, left to right within a row.

    The first is always accepted.  A later one is discarded when at least
    ``threshold`` of itself and its three generators already have a harmonic
    among the accepted notes.
    """
    interp = threshold_interpretation(source, alpha_factor) if isinstance(source, Frame) else source
    accepted: set[Note] = set()
    discarded: set[Note] = set()
    for n in interp.notes():
        if not exhibits_shape(interp, n):
            continue
        if accepted:
            hits = sum(_claims(m, accepted) for m in (n, *generators_of(n)))
            if hits >= threshold:
                discarded.add(n)
                continue
        accepted.add(n)
    return PolyEstimate(frozenset(accepted), frozenset(discarded))


@lru_cache(maxsize=None)
def _poly_tables(octaves: int) -> tuple[np.ndarray, np.ndarray]:
    """Traversal order, and per cell the harmonic cells of itself and its 3 generators (flat, -1 off-grid)."""

    def flat(n: Note) -> int:
        return n.chroma * octaves + n.octave if 0 <= n.octave < octaves else -1

    notes = [Note(c, o) for c in range(12) for o in range(octaves)]
    member_harm = np.array([[[flat(h) for h in harmonics(m)] for m in (n, *generators_of(n))]
                            for n in notes])
    order = np.array(sorted(range(len(notes)), key=lambda i: (i % octaves, i // octaves)))
    return order, member_harm


def simple_poly_mask(mask: np.ndarray, threshold: int = POLY_THRESHOLD) -> np.ndarray:
    """simple_poly on a boolean [chroma, octave] grid; returns the accepted cells."""
    mask = np.asarray(mask, dtype=bool)
    order, member_harm = _poly_tables(mask.shape[1])
    shapes = shape_mask(mask).reshape(-1)
    accepted = np.zeros(shapes.size + 1, dtype=bool)  # last slot: off-grid sentinel
    first = True
    for i in order[shapes[order]]:
        if not first and int(accepted[member_harm[i]].any(axis=1).sum()) >= threshold:
            continue
        first = False
        accepted[i] = True
    return accepted[:-1].reshape(mask.shape)


def naive_mask(mask: np.ndarray) -> np.ndarray:
    return shape_mask(mask.astype(bool))


def estimate_frames(frames: Iterable[Frame], poly: bool = False,
                    alpha_factor: float = ALPHA_FACTOR) -> list[dict]:
    out = []
    for i, f in enumerate(frames):
        est = simple_poly(f, alpha_factor) if poly else naive_mono(f, alpha_factor)
        out.append(est.to_dict(i))
    return out


__all__ = [
    "MonoEstimate", "PolyEstimate", "hps_estimate", "naive_mono", "sink_iteration", "simple_poly",
    "simple_poly_mask", "naive_mask", "estimate_frames", "HPS_OFFSETS", "COMPANION_WEIGHT",
    "POLY_THRESHOLD",
]
