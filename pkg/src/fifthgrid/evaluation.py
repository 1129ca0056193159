"""Benchmark harness: ground truth, per-file evaluation, reports and confusion matrices."""
from __future__ import annotations

import csv
import json
from collections import defaultdict
from dataclasses import dataclass, field
from pathlib import Path
from typing import Callable, Iterable, Sequence

import numpy as np

from .dsp import ALPHA_FACTOR, FRAME_LENGTH, HOP, AudioFormatError, Frame, analyze, load_audio, select_complete_window
from .estimators import MonoEstimate, hps_estimate, naive_mono, simple_poly
from .lattice import Note, NoteNameError, parse_note
from .prevalence import PrevalenceStats, run_experiment

GT_HEADER = ("path", "instrument", "style", "notes")
DEFAULT_OUTLIERS = ("violin:pizz", "viola:pizz", "cello:pizz", "bass:pizz", "tuba")


class GroundTruthError(ValueError):
    pass


@dataclass(frozen=True)
class TruthEntry:
    path: Path
    instrument: str
    style: str
    notes: frozenset[Note]

    @property
    def is_mono(self) -> bool:
        return len(self.notes) == 1

    @property
    def note(self) -> Note:
        if not self.is_mono:
            raise ValueError(f"{self.path} holds {len(self.notes)} notes")
        return next(iter(self.notes))


@dataclass
class GroundTruth:
    entries: list[TruthEntry]

    def __len__(self) -> int:
        return len(self.entries)

    def __iter__(self):
        return iter(self.entries)

    def missing(self) -> list[Path]:
        return [e.path for e in self.entries if not e.path.exists()]


def load_ground_truth(csv_path: str | Path) -> GroundTruth:
    """Read ``path,instrument,style,notes`` rows; relative paths resolve against the CSV's folder."""
    csv_path = Path(csv_path)
    base = csv_path.parent
    entries = []
    with open(csv_path, newline="", encoding="utf-8") as fh:
        reader = csv.reader(fh)
        header = next(reader, None)
        if header is None or tuple(h.strip().lower() for h in header) != GT_HEADER:
            raise GroundTruthError(f"{csv_path}:1: expected header {','.join(GT_HEADER)}, got {header}")
        for row in reader:
            line = reader.line_num
            if not row or all(not c.strip() for c in row):
                continue
            if len(row) != 4:
                raise GroundTruthError(f"{csv_path}:{line}: expected 4 fields, got {len(row)}")
            path, instrument, style, notes = (c.strip() for c in row)
            if not path or not notes:
                raise GroundTruthError(f"{csv_path}:{line}: path and notes are required")
            try:
                parsed = frozenset(parse_note(t) for t in notes.split())
            except NoteNameError as exc:
                raise GroundTruthError(f"{csv_path}:{line}: {exc}") from exc
            p = Path(path)
            entries.append(TruthEntry(p if p.is_absolute() else base / p, instrument, style, parsed))
    return GroundTruth(entries)


def write_ground_truth(gt: GroundTruth, csv_path: str | Path) -> None:
    csv_path = Path(csv_path)
    with open(csv_path, "w", newline="", encoding="utf-8") as fh:
        w = csv.writer(fh, lineterminator="\n")
        w.writerow(GT_HEADER)
        for e in gt.entries:
            try:
                path = e.path.relative_to(csv_path.parent)
            except ValueError:
                path = e.path
            w.writerow([path.as_posix(), e.instrument, e.style, " ".join(n.name for n in sorted(e.notes))])


def parse_outliers(specs: Iterable[str]) -> list[tuple[str, str | None]]:
    """``"cello:pizz"`` -> ("cello", "pizz"); ``"tuba"`` -> ("tuba", None)."""
    out = []
    for s in specs:
        inst, _, style = s.partition(":")
        out.append((inst.strip().lower(), style.strip().lower() or None))
    return out


def is_outlier(instrument: str, style: str, outliers: Sequence[tuple[str, str | None]]) -> bool:
    inst, sty = instrument.lower(), style.lower()
    for o_inst, o_style in outliers:
        # "bass" matches "Bass" and "Double Bass" but not "Bass Clarinet"
        if inst == o_inst or inst.endswith(" " + o_inst):
            if o_style is None or sty == o_style:
                return True
    return False


MonoEstimator = Callable[[Frame, float], MonoEstimate]

ESTIMATORS: dict[str, MonoEstimator] = {
    "naive": naive_mono,
    "hps": lambda frame, alpha_factor: hps_estimate(frame, alpha_factor=alpha_factor),
}


@dataclass(frozen=True)
class FileResult:
    path: str
    instrument: str
    style: str
    truth: Note
    estimate: Note | None
    window: int

    @property
    def exact(self) -> bool:
        return self.estimate == self.truth

    @property
    def chroma_ok(self) -> bool:
        return self.estimate is not None and self.estimate.chroma == self.truth.chroma


def _share(results: Sequence[FileResult], key) -> float | None:
    return sum(1 for r in results if key(r)) / len(results) if results else None


@dataclass
class EvalReport:
    estimator: str
    results: list[FileResult]
    failures: list[tuple[str, str]] = field(default_factory=list)
    outliers: list[tuple[str, str | None]] = field(default_factory=lambda: parse_outliers(DEFAULT_OUTLIERS))

    def _kept(self) -> list[FileResult]:
        return [r for r in self.results if not is_outlier(r.instrument, r.style, self.outliers)]

    @property
    def overall_accuracy(self) -> float | None:
        return _share(self.results, lambda r: r.exact)

    @property
    def no_outlier_accuracy(self) -> float | None:
        return _share(self._kept(), lambda r: r.exact)

    @property
    def chroma_accuracy(self) -> float | None:
        return _share(self.results, lambda r: r.chroma_ok)

    def groups(self) -> dict[tuple[str, str], list[FileResult]]:
        out: dict[tuple[str, str], list[FileResult]] = defaultdict(list)
        for r in self.results:
            out[(r.instrument, r.style)].append(r)
        return dict(sorted(out.items(), key=lambda kv: (kv[0][0].lower(), kv[0][1].lower())))

    def per_group(self) -> list[dict]:
        """One row per (instrument, style); outlier groups carry None in the no-outlier column."""
        rows = []
        for (inst, style), rs in self.groups().items():
            outlier = is_outlier(inst, style, self.outliers)
            rows.append({
                "instrument": inst,
                "style": style,
                "files": len(rs),
                "overall": _share(rs, lambda r: r.exact),
                "no_outliers": None if outlier else _share(rs, lambda r: r.exact),
                "chroma": _share(rs, lambda r: r.chroma_ok),
            })
        return rows

    def to_dict(self) -> dict:
        return {
            "estimator": self.estimator,
            "files": len(self.results),
            "failures": [{"path": p, "error": e} for p, e in self.failures],
            "overall_accuracy": self.overall_accuracy,
            "no_outlier_accuracy": self.no_outlier_accuracy,
            "chroma_accuracy": self.chroma_accuracy,
            "per_group": self.per_group(),
            "results": [
                {"path": r.path, "instrument": r.instrument, "style": r.style, "truth": r.truth.name,
                 "estimate": None if r.estimate is None else r.estimate.name, "window": r.window}
                for r in self.results
            ],
        }

    def to_json(self) -> str:
        return json.dumps(self.to_dict(), ensure_ascii=False, indent=1)

    @classmethod
    def from_json(cls, text: str) -> "EvalReport":
        doc = json.loads(text)
        results = [FileResult(r["path"], r["instrument"], r["style"], parse_note(r["truth"]),
                              None if r["estimate"] is None else parse_note(r["estimate"]), r["window"])
                   for r in doc["results"]]
        return cls(doc["estimator"], results, [(f["path"], f["error"]) for f in doc["failures"]])


def _pct(x: float | None) -> str:
    return "-" if x is None else f"{100 * x:.2f}%"


def format_table(reports: Sequence[EvalReport]) -> str:
    """Per-instrument breakdown with columns 1 (all), 2 (without outliers), 3 (chroma) per estimator."""
    head = ["Instrument", "Type"]
    for rep in reports:
        head += [f"{rep.estimator} 1", f"{rep.estimator} 2", f"{rep.estimator} 3"]
    keys = sorted({k for rep in reports for k in rep.groups()}, key=lambda k: (k[0].lower(), k[1].lower()))
    rows = [head]
    by_rep = [{(g["instrument"], g["style"]): g for g in rep.per_group()} for rep in reports]
    for k in keys:
        row = [k[0], k[1]]
        for table in by_rep:
            g = table.get(k)
            row += ["-"] * 3 if g is None else [_pct(g["overall"]), _pct(g["no_outliers"]), _pct(g["chroma"])]
        rows.append(row)
    summary = [("Overall", "overall_accuracy"), ("No Outliers", "no_outlier_accuracy"),
               ("Chroma Accuracy", "chroma_accuracy")]
    for label, attr in summary:
        row = [label, ""]
        for rep in reports:
            row += [_pct(getattr(rep, attr)), "", ""]
        rows.append(row)
    widths = [max(len(r[i]) if i < len(r) else 0 for r in rows) for i in range(len(head))]
    return "\n".join("  ".join(c.ljust(w) for c, w in zip(r, widths)).rstrip() for r in rows) + "\n"


def evaluate_mono(gt: GroundTruth, estimator: str | MonoEstimator = "naive", alpha_factor: float = ALPHA_FACTOR,
                  frame_length: int = FRAME_LENGTH, hop: int = HOP,
                  outliers: Iterable[str] = DEFAULT_OUTLIERS) -> EvalReport:
    """Pick the best window of every file and score the estimator's note against the truth."""
    name = estimator if isinstance(estimator, str) else getattr(estimator, "__name__", "custom")
    if isinstance(estimator, str):
        if estimator not in ESTIMATORS:
            raise ValueError(f"unknown estimator {estimator!r}; choose from {sorted(ESTIMATORS)}")
        estimator = ESTIMATORS[estimator]
    results, failures = [], []
    for e in gt.entries:
        if not e.is_mono:
            failures.append((str(e.path), f"expected one note, found {len(e.notes)}"))
            continue
        try:
            signal = load_audio(e.path)
            seq = analyze(signal, frame_length, hop)
        except (OSError, AudioFormatError, ValueError) as exc:
            failures.append((str(e.path), str(exc)))
            continue
        i = select_complete_window(seq.frames, len(signal), frame_length, alpha_factor)
        frame = seq.frames[i]
        est = estimator(frame, alpha_factor)
        results.append(FileResult(str(e.path), e.instrument, e.style, e.note, est.note, i))
    return EvalReport(name, results, failures, parse_outliers(outliers))


def beats(a: EvalReport, b: EvalReport) -> bool:
    """True when ``a`` is strictly ahead of ``b`` on all three aggregate accuracies."""
    pairs = [(a.overall_accuracy, b.overall_accuracy), (a.no_outlier_accuracy, b.no_outlier_accuracy),
             (a.chroma_accuracy, b.chroma_accuracy)]
    return all(x is not None and y is not None and x > y for x, y in pairs)


@dataclass
class ConfusionMatrix:
    """Rows are true notes, columns estimated notes, both chromatic from ``low``."""

    low: Note
    high: Note
    counts: np.ndarray
    outside: np.ndarray  # per row: estimates that were None or off the tested range

    @property
    def labels(self) -> list[str]:
        lo = self.low.chromatic_index
        return [Note.from_chromatic(lo + i).name for i in range(self.counts.shape[0])]

    def row_totals(self) -> np.ndarray:
        return self.counts.sum(axis=1) + self.outside

    def image(self) -> np.ndarray:
        """Grayscale image, estimate upwards and truth rightwards; darker means more."""
        m = self.counts.T[::-1].astype(float)
        peak = m.max()
        norm = m / peak if peak else m
        return np.round(255 * (1 - norm)).astype(np.uint8)

    def to_dict(self) -> dict:
        return {"labels": self.labels, "counts": self.counts.tolist(), "outside": self.outside.tolist()}


def confusion_matrix(results: Sequence[FileResult]) -> ConfusionMatrix:
    if not results:
        raise ValueError("no results for this group")
    idx = [r.truth.chromatic_index for r in results]
    lo, hi = min(idx), max(idx)
    size = hi - lo + 1
    counts = np.zeros((size, size), dtype=np.int64)
    outside = np.zeros(size, dtype=np.int64)
    for r in results:
        row = r.truth.chromatic_index - lo
        if r.estimate is None or not lo <= r.estimate.chromatic_index <= hi:
            outside[row] += 1
        else:
            counts[row, r.estimate.chromatic_index - lo] += 1
    return ConfusionMatrix(Note.from_chromatic(lo), Note.from_chromatic(hi), counts, outside)


def evaluate_poly(gt: GroundTruth, alpha_factor: float = ALPHA_FACTOR, frame_length: int = FRAME_LENGTH,
                  hop: int = HOP) -> dict:
    """Per-file TP/FP/FN of simple_poly on the selected window, with totals."""
    rows, failures = [], []
    tp = fp = fn = 0
    for e in gt.entries:
        try:
            signal = load_audio(e.path)
            seq = analyze(signal, frame_length, hop)
        except (OSError, AudioFormatError, ValueError) as exc:
            failures.append({"path": str(e.path), "error": str(exc)})
            continue
        i = select_complete_window(seq.frames, len(signal), frame_length, alpha_factor)
        est = simple_poly(seq.frames[i], alpha_factor)
        a, b, c = len(est.notes & e.notes), len(est.notes - e.notes), len(e.notes - est.notes)
        tp, fp, fn = tp + a, fp + b, fn + c
        rows.append({"path": str(e.path), "truth": [n.name for n in sorted(e.notes)],
                     "estimate": [n.name for n in sorted(est.notes)], "tp": a, "fp": b, "fn": c})
    denom = tp + fp + fn
    return {"estimator": "poly", "files": len(rows), "failures": failures, "tp": tp, "fp": fp, "fn": fn,
            "note_accuracy": tp / denom if denom else None, "results": rows}


def evaluate_poly_simulated(samples_per_n: int, n_range=(1, 120), seed: int = 0, **kw) -> PrevalenceStats:
    """Naive and simple_poly accuracy on the prevalence sampler, per n."""
    return run_experiment(samples_per_n, n_range, seed, poly=True, **kw)
