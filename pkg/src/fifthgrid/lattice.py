"""Note grid ordered by fifths, its group action, and harmonic shapes.

Columns of the grid are pitch chromas along the circle of fifths
(C, G, D, A, E, B, F#, C#, G#, Eb, Bb, F) and rows are octaves.  The chroma
axis wraps, the octave axis does not.  ``delta`` moves one column to the
right (up a fifth, octave unchanged) and ``omega`` moves one octave up.
"""
from __future__ import annotations

import csv
import io
import json
import re
from dataclasses import dataclass
from enum import Enum
from typing import Iterable, Sequence

import numpy as np

N_CHROMA = 12
DEFAULT_OCTAVES = 10

FIFTHS_NAMES = ("C", "G", "D", "A", "E", "B", "F#", "C#", "G#", "Eb", "Bb", "F")
# fifths index -> pitch class and back; multiplication by 7 is its own inverse mod 12
_LETTER_PC = {"C": 0, "D": 2, "E": 4, "F": 5, "G": 7, "A": 9, "B": 11}

# C, C#, D, Eb, E: the fifth above stays inside the next octave
TURNSTILE_CHROMAS = frozenset({0, 7, 2, 9, 4})


class NoteNameError(ValueError):
    """Raised for note names that do not parse as scientific pitch notation."""


def fifths_to_pc(index: int) -> int:
    return (7 * index) % 12


def pc_to_fifths(pc: int) -> int:
    return (7 * pc) % 12


@dataclass(frozen=True, order=True)
class Note:
    """A cell of the grid: chroma as fifths index, octave as pitch height."""

    chroma: int
    octave: int

    def __post_init__(self):
        object.__setattr__(self, "chroma", int(self.chroma) % N_CHROMA)
        object.__setattr__(self, "octave", int(self.octave))

    @property
    def pitch_class(self) -> int:
        return fifths_to_pc(self.chroma)

    @property
    def chromatic_index(self) -> int:
        """Semitones above C0."""
        return 12 * self.octave + self.pitch_class

    @property
    def sort_key(self) -> tuple[int, int]:
        return (self.octave, self.pitch_class)

    @property
    def name(self) -> str:
        return f"{FIFTHS_NAMES[self.chroma]}{self.octave}"

    @classmethod
    def from_chromatic(cls, index: int) -> "Note":
        octave, pc = divmod(int(index), 12)
        return cls(pc_to_fifths(pc), octave)

    @classmethod
    def from_name(cls, text: str) -> "Note":
        return parse_note(text)

    def __str__(self) -> str:
        return self.name


_NOTE_RE = re.compile(r"^\s*([A-Ga-g])([#♯b♭]*)(-?\d+)\s*$")


def parse_note(text: str) -> Note:
    """Parse "C4", "F#3", "Eb5", "E♭3" into a Note (enharmonics collapse)."""
    m = _NOTE_RE.match(text)
    if not m:
        raise NoteNameError(f"unknown note name: {text!r}")
    letter, accidentals, octave = m.groups()
    pc = _LETTER_PC[letter.upper()]
    for ch in accidentals:
        pc += 1 if ch in "#♯" else -1
    # B#3 is C4, Cb4 is B3: carry octave with the raw semitone count
    return Note.from_chromatic(12 * int(octave) + pc)


class Shape(Enum):
    TURNSTILE = "⊢"
    GAMMA = "Γ"


def shape_class(chroma: int) -> Shape:
    return Shape.TURNSTILE if chroma % N_CHROMA in TURNSTILE_CHROMAS else Shape.GAMMA


@dataclass(frozen=True, order=True)
class GroupElement:
    """delta**k omega**l; k is reduced mod 12."""

    k: int = 0
    l: int = 0

    def __post_init__(self):
        object.__setattr__(self, "k", int(self.k) % N_CHROMA)
        object.__setattr__(self, "l", int(self.l))

    @property
    def signed_k(self) -> int:
        return self.k - N_CHROMA if self.k > N_CHROMA // 2 else self.k

    def __mul__(self, other: "GroupElement") -> "GroupElement":
        return GroupElement(self.k + other.k, self.l + other.l)

    def __pow__(self, n: int) -> "GroupElement":
        return GroupElement(self.k * n, self.l * n)

    def inverse(self) -> "GroupElement":
        return GroupElement(-self.k, -self.l)

    def __call__(self, note: Note) -> Note:
        return act(self, note)

    def to_pair(self) -> list[int]:
        return [self.signed_k, self.l]

    @classmethod
    def from_pair(cls, pair: Sequence[int]) -> "GroupElement":
        return cls(pair[0], pair[1])

    def __str__(self) -> str:
        if self.k == 0 and self.l == 0:
            return "1"
        return _power("ω", self.l) + _power("δ", self.signed_k)

    __repr__ = __str__


_SUPERSCRIPT = str.maketrans("-0123456789", "⁻⁰¹²³⁴⁵⁶⁷⁸⁹")


def _power(symbol: str, n: int) -> str:
    if n == 0:
        return ""
    if n == 1:
        return symbol
    return symbol + str(n).translate(_SUPERSCRIPT)


IDENTITY = GroupElement(0, 0)
DELTA = GroupElement(1, 0)
OMEGA = GroupElement(0, 1)


def g(k: int = 0, l: int = 0) -> GroupElement:
    """Shorthand: g(k, l) is delta**k omega**l."""
    return GroupElement(k, l)


def act(element: GroupElement, note: Note) -> Note:
    return Note(note.chroma + element.k, note.octave + element.l)


SHAPE_ELEMENTS = {
    Shape.TURNSTILE: (IDENTITY, g(0, 1), g(1, 1), g(0, 2)),
    Shape.GAMMA: (IDENTITY, g(0, 1), g(1, 2), g(0, 2)),
}
INVERSE_SHAPE_ELEMENTS = {s: tuple(e.inverse() for e in els) for s, els in SHAPE_ELEMENTS.items()}

_FORWARD = frozenset(SHAPE_ELEMENTS[Shape.TURNSTILE] + SHAPE_ELEMENTS[Shape.GAMMA])
_BACKWARD = frozenset(INVERSE_SHAPE_ELEMENTS[Shape.TURNSTILE] + INVERSE_SHAPE_ELEMENTS[Shape.GAMMA])
HEX_ELEMENTS = frozenset(a * b for a in _BACKWARD for b in _FORWARD)

VON_NEUMANN = frozenset({g(1, 0), g(-1, 0), g(0, 1), g(0, -1)})
MOORE = VON_NEUMANN | frozenset(g(k, l) for k in (-1, 1) for l in (-1, 1))


def shape_elements(note: Note) -> tuple[GroupElement, ...]:
    return SHAPE_ELEMENTS[shape_class(note.chroma)]


def harmonics(note: Note) -> tuple[Note, Note, Note]:
    """First three harmonics: octave, twelfth, double octave."""
    _, f1, f2, f3 = shape_elements(note)
    return (f1(note), f2(note), f3(note))


def shape_cells(note: Note) -> tuple[Note, Note, Note, Note]:
    return (note,) + harmonics(note)


def f2_generator_offset(chroma: int) -> GroupElement:
    """Offset from a note to the fundamental whose twelfth lands on it."""
    left = shape_class(chroma - 1)
    return g(-1, -1) if left is Shape.TURNSTILE else g(-1, -2)


def generators_of(note: Note) -> tuple[Note, Note, Note]:
    """The three notes having ``note`` among their harmonics (f1, f3, f2 sources)."""
    return (act(g(0, -1), note), act(g(0, -2), note), act(f2_generator_offset(note.chroma), note))


def inverse_positions(note: Note) -> frozenset[Note]:
    return frozenset(act(e, note) for e in _BACKWARD)


def hex_region(note: Note) -> frozenset[Note]:
    return frozenset(act(e, note) for e in HEX_ELEMENTS)


def neighborhood(note: Note, kind: str = "moore") -> frozenset[Note]:
    kind = kind.lower().replace(" ", "").replace("_", "")
    if kind in ("vonneumann", "vn"):
        elements = VON_NEUMANN
    elif kind == "moore":
        elements = MOORE
    else:
        raise ValueError(f"unknown neighbourhood kind {kind!r}")
    return frozenset(act(e, note) for e in elements)


class Configuration(Enum):
    """Shape of the column left of a note, then shape of the note's own column."""

    GG = "ΓΓ"
    GT = "Γ⊢"
    TG = "⊢Γ"

    @classmethod
    def parse(cls, text: str) -> "Configuration":
        for c in cls:
            if text in (c.name, c.value):
                return c
        raise ValueError(f"unknown configuration {text!r}")


def configuration_of(chroma: int) -> Configuration:
    pair = (shape_class(chroma - 1), shape_class(chroma))
    if pair == (Shape.GAMMA, Shape.GAMMA):
        return Configuration.GG
    if pair == (Shape.GAMMA, Shape.TURNSTILE):
        return Configuration.GT
    if pair == (Shape.TURNSTILE, Shape.GAMMA):
        return Configuration.TG
    raise AssertionError(f"two turnstile columns adjacent at chroma {chroma}")


class Interpretation:
    """One time slice of the grid, boolean or weighted, indexed [chroma, octave].

    The backing array is read-only; every operation returns a new object.
    """

    __slots__ = ("_grid",)

    def __init__(self, grid):
        arr = np.array(grid, copy=True)
        if arr.ndim != 2 or arr.shape[0] != N_CHROMA:
            raise ValueError(f"grid must be 12 x octaves, got {arr.shape}")
        if arr.dtype != bool:
            arr = arr.astype(float)
        arr.setflags(write=False)
        self._grid = arr

    @classmethod
    def empty(cls, octaves: int = DEFAULT_OCTAVES, weighted: bool = False) -> "Interpretation":
        return cls(np.zeros((N_CHROMA, octaves), dtype=float if weighted else bool))

    @classmethod
    def from_notes(cls, notes: Iterable[Note], octaves: int = DEFAULT_OCTAVES) -> "Interpretation":
        grid = np.zeros((N_CHROMA, octaves), dtype=bool)
        for n in notes:
            if 0 <= n.octave < octaves:
                grid[n.chroma, n.octave] = True
        return cls(grid)

    @classmethod
    def from_fundamentals(cls, fundamentals: Iterable[Note], octaves: int = DEFAULT_OCTAVES) -> "Interpretation":
        """Mark each fundamental with its harmonics; out-of-grid cells are dropped."""
        return cls.from_notes((c for f in fundamentals for c in shape_cells(f)), octaves)

    @property
    def grid(self) -> np.ndarray:
        return self._grid

    @property
    def octaves(self) -> int:
        return self._grid.shape[1]

    @property
    def weighted(self) -> bool:
        return self._grid.dtype != bool

    @property
    def mask(self) -> np.ndarray:
        return self._grid if not self.weighted else self._grid > 0

    def in_bounds(self, note: Note) -> bool:
        return 0 <= note.octave < self.octaves

    def value(self, note: Note) -> float:
        if not self.in_bounds(note):
            return 0.0
        return float(self._grid[note.chroma, note.octave])

    def __contains__(self, note: Note) -> bool:
        return self.in_bounds(note) and bool(self.mask[note.chroma, note.octave])

    def notes(self) -> list[Note]:
        """Set cells in traversal order: bottom-to-top, left-to-right."""
        cs, os_ = np.nonzero(self.mask)
        return sorted((Note(c, o) for c, o in zip(cs, os_)), key=lambda n: (n.octave, n.chroma))

    def __len__(self) -> int:
        return int(self.mask.sum())

    def __eq__(self, other) -> bool:
        return isinstance(other, Interpretation) and np.array_equal(self._grid, other._grid)

    def __hash__(self):
        return hash(self._grid.tobytes())

    def __repr__(self) -> str:
        return f"Interpretation({[n.name for n in self.notes()]})"

    def to_json(self) -> str:
        doc = {
            "octaves": self.octaves,
            "chroma_order": list(FIFTHS_NAMES),
            "cells": [[n.chroma, n.octave] for n in self.notes()],
        }
        if self.weighted:
            doc["values"] = [self.value(n) for n in self.notes()]
        return json.dumps(doc)

    @classmethod
    def from_json(cls, text: str) -> "Interpretation":
        doc = json.loads(text)
        octaves = int(doc.get("octaves", DEFAULT_OCTAVES))
        values = doc.get("values")
        grid = np.zeros((N_CHROMA, octaves), dtype=float if values is not None else bool)
        for i, (c, o) in enumerate(doc["cells"]):
            grid[int(c) % N_CHROMA, int(o)] = values[i] if values is not None else True
        return cls(grid)

    def to_csv(self) -> str:
        """12 rows in fifths order, one column per octave."""
        buf = io.StringIO()
        w = csv.writer(buf, lineterminator="\n")
        w.writerow(["chroma"] + [str(o) for o in range(self.octaves)])
        for c in range(N_CHROMA):
            row = self._grid[c]
            w.writerow([FIFTHS_NAMES[c]] + ([str(int(v)) for v in row] if not self.weighted else [repr(float(v)) for v in row]))
        return buf.getvalue()

    @classmethod
    def from_csv(cls, text: str) -> "Interpretation":
        rows = list(csv.reader(io.StringIO(text)))
        header, body = rows[0], rows[1:]
        if [r[0] for r in body] != list(FIFTHS_NAMES):
            raise ValueError("CSV rows must be in fifths order " + ",".join(FIFTHS_NAMES))
        cells = [r[1:] for r in body]
        if all(v in ("0", "1") for r in cells for v in r):
            return cls(np.array([[v == "1" for v in r] for r in cells], dtype=bool))
        return cls(np.array([[float(v) for v in r] for r in cells]))


WeightedGrid = Interpretation


def exhibits_shape(interp: Interpretation, note: Note) -> bool:
    """All four shape cells set; a harmonic off the top of the grid means no."""
    return all(c in interp for c in shape_cells(note))


def shape_mask(mask: np.ndarray) -> np.ndarray:
    """Vectorised exhibits_shape over a boolean [chroma, octave] grid."""
    octaves = mask.shape[1]
    out = mask.copy()
    up1 = np.zeros_like(mask)
    up2 = np.zeros_like(mask)
    up1[:, : octaves - 1] = mask[:, 1:]
    up2[:, : octaves - 2] = mask[:, 2:]
    out &= up1 & up2
    right_up1 = np.roll(up1, -1, axis=0)
    right_up2 = np.roll(up2, -1, axis=0)
    turn = np.array([c in TURNSTILE_CHROMAS for c in range(N_CHROMA)])
    out &= np.where(turn[:, None], right_up1, right_up2)
    return out


def build_interpretation(sorted_notes: Sequence[Note], amplitudes: Sequence[float] | None = None,
                         octaves: int = DEFAULT_OCTAVES) -> Interpretation:
    """Grid from an ascending note list, discarding notes that fit no harmonic pattern.

    A note is kept when one of its generators has already been placed, or when
    its own three harmonics are all in the (still undiscarded) input.  With
    ``amplitudes`` the kept cells hold the amplitude instead of True.
    """
    notes = list(sorted_notes)
    if amplitudes is not None and len(amplitudes) != len(notes):
        raise ValueError("amplitudes must match notes one to one")
    keys = [n.sort_key for n in notes]
    if any(a >= b for a, b in zip(keys, keys[1:])):
        raise ValueError("notes must be strictly ascending by (octave, pitch)")
    if any(not 0 <= n.octave < octaves for n in notes):
        raise ValueError(f"notes must lie in octaves 0..{octaves - 1}")
    weighted = amplitudes is not None
    grid = np.zeros((N_CHROMA, octaves), dtype=float if weighted else bool)
    placed = np.zeros((N_CHROMA, octaves), dtype=bool)
    pending = set(notes)

    def is_placed(n: Note) -> bool:
        return 0 <= n.octave < octaves and bool(placed[n.chroma, n.octave])

    for idx, n in enumerate(notes):
        keep = any(is_placed(src) for src in generators_of(n))
        if not keep:
            keep = all(h in pending for h in harmonics(n))
        if keep:
            placed[n.chroma, n.octave] = True
            grid[n.chroma, n.octave] = abs(amplitudes[idx]) if weighted else True
        else:
            pending.discard(n)
    return Interpretation(grid)


PLANES = ("chroma-time", "height-time", "chroma-height")


def project(slices: Sequence[Interpretation], plane: str = "chroma-time") -> np.ndarray:
    """Max-projection of a stack of grids (time as the last axis)."""
    if len(slices) == 0:
        raise ValueError("cannot project an empty sequence")
    cube = np.stack([np.asarray(s.grid, dtype=float) for s in slices], axis=-1)
    if plane == "chroma-time":
        return cube.max(axis=1)
    if plane == "height-time":
        return cube.max(axis=0)
    if plane == "chroma-height":
        return cube.max(axis=2)
    raise ValueError(f"unknown plane {plane!r}; expected one of {PLANES}")
