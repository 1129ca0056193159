import json

import numpy as np
import pytest
from hypothesis import assume, given, settings
from hypothesis import strategies as st

from fifthgrid.dsp import N_BINS, Frame, analyze, cqt_frame, note_to_bin, select_window, synth_note
from fifthgrid.estimators import (
    MonoEstimate,
    PolyEstimate,
    estimate_frames,
    hps_estimate,
    naive_mono,
    simple_poly,
    simple_poly_mask,
    sink_iteration,
)
from fifthgrid.lattice import Interpretation, Note, exhibits_shape, harmonics, parse_note, shape_cells
from fifthgrid.prevalence import harmonic_fill, sample_fundamentals, stream

N = parse_note
RATE = 44100
low_notes = st.builds(Note, st.integers(0, 11), st.integers(0, 7))


def best_frame(notes, seconds=0.5):
    seq = analyze(synth_note(notes, seconds))
    return seq.frames[select_window(seq.frames)]


# HPS

def test_hps_synth_and_silence():
    assert hps_estimate(best_frame(N("C4"))).note == N("C4")
    assert hps_estimate(Frame(0, np.zeros(N_BINS))) == MonoEstimate(None)


def test_hps_pure_sine():
    x = np.sin(2 * np.pi * 440.0 * np.arange(4096) / RATE)
    assert hps_estimate(cqt_frame(x, RATE)).note == N("A4")


def test_hps_product_rule():
    bins = np.zeros(N_BINS)
    k = note_to_bin(N("E3"))
    for off, a in zip((0, 12, 19, 24), (1.0, 0.5, 0.5, 0.5)):
        bins[k + off] = a
    bins[k + 12] = 1.0  # louder octave still loses, its own partials are missing
    assert hps_estimate(Frame(0, bins)).note == N("E3")


def test_hps_tie_takes_lowest_bin():
    bins = np.zeros(N_BINS)
    for k in (10, 50):
        for off in (0, 12, 19, 24):
            bins[k + off] = 1.0
    assert hps_estimate(Frame(0, bins)).note == Note.from_chromatic(10)


# naive mono

def test_naive_mono_examples():
    assert naive_mono(Frame(0, np.zeros(N_BINS))) == MonoEstimate(None)
    assert naive_mono(best_frame(N("G4"))).note == N("G4")
    interp = Interpretation.from_fundamentals([N("F3")])
    assert naive_mono(interp).note == N("F3")


@given(low_notes)
@settings(max_examples=40)
def test_naive_mono_single_shape_exact(n):
    assert naive_mono(Interpretation.from_fundamentals([n])).note == n


def test_naive_mono_ignores_leakage_sideband():
    # a weaker copy of the shape one semitone down, as leakage would leave
    bins = np.zeros(N_BINS)
    d4 = N("D4")
    for cell, a in zip(shape_cells(d4), (1.0, 0.6, 0.4, 0.3)):
        bins[note_to_bin(cell)] = a
        bins[note_to_bin(cell) - 1] = 0.45 * a
    est = naive_mono(Frame(0, bins))
    assert est.note == d4
    assert est.confidence > 0


def test_mono_json():
    doc = MonoEstimate(N("C4"), 1.5).to_dict(3)
    assert doc == {"frame_index": 3, "notes": ["C4"], "confidence": 1.5}
    assert MonoEstimate(None).to_dict()["notes"] == []


# sink iteration

def test_sink_examples():
    assert sink_iteration(Interpretation.from_fundamentals([N("C3"), N("G4")])) == {N("C3"), N("G4")}
    assert sink_iteration(Interpretation.from_fundamentals([N("A2")])) == {N("A2")}
    assert sink_iteration(Interpretation.empty()) == frozenset()


@given(st.lists(low_notes, max_size=6))
def test_sink_disjoint_shapes_recovered(funds):
    cells = [set(shape_cells(f)) for f in funds]
    assume(sum(len(c) for c in cells) == len(set().union(*cells)))
    assert sink_iteration(Interpretation.from_fundamentals(funds)) == set(funds)


@given(st.lists(low_notes, max_size=20))
def test_sink_output_are_present_shapes(funds):
    interp = Interpretation.from_fundamentals(funds)
    for n in sink_iteration(interp):
        assert n in interp and all(h in interp for h in harmonics(n))


# simple poly

def test_poly_examples():
    single = simple_poly(Interpretation.from_fundamentals([N("E3")]))
    assert single.notes == {N("E3")} and not single.discarded
    chord = simple_poly(Interpretation.from_fundamentals([N(t) for t in ("D4", "A5", "D6")]))
    assert N("D4") in chord.notes
    assert simple_poly(Interpretation.empty()) == PolyEstimate(frozenset())


@given(st.lists(low_notes, max_size=30), st.integers(1, 4))
def test_poly_partitions_shape_notes(funds, thr):
    interp = Interpretation.from_fundamentals(funds)
    est = simple_poly(interp, threshold=thr)
    shapes = {n for n in interp.notes() if exhibits_shape(interp, n)}
    assert est.notes | est.discarded == shapes
    assert not est.notes & est.discarded
    if shapes:
        assert min(shapes, key=lambda n: (n.octave, n.chroma)) in est.notes


def test_poly_mask_matches_object_version():
    for n in (1, 3, 8, 20, 45, 90):
        rng = stream(99, n)
        for _ in range(15):
            fund = sample_fundamentals(n, rng)
            grid = harmonic_fill(fund)
            est = simple_poly(Interpretation(grid))
            mask = simple_poly_mask(grid)
            assert {Note(c, o) for c, o in zip(*np.nonzero(mask))} == est.notes


def test_poly_rejects_overlap():
    with pytest.raises(ValueError):
        PolyEstimate(frozenset({N("C4")}), frozenset({N("C4")}))


def test_poly_json():
    doc = json.loads(PolyEstimate(frozenset({N("C4")}), frozenset({N("G5")})).to_json(2))
    assert doc["notes"] == ["C4"] and doc["discarded"] == ["G5"] and doc["frame_index"] == 2


def test_estimate_frames():
    seq = analyze(synth_note(N("A3"), 0.2))
    mono = estimate_frames(seq.frames)
    poly = estimate_frames(seq.frames, poly=True)
    assert len(mono) == len(poly) == len(seq.frames)
    best = select_window(seq.frames)
    assert mono[best]["notes"] == ["A3"] and "A3" in poly[best]["notes"]
