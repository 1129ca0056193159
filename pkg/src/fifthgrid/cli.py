"""Command-line interface.

Exit codes: 0 success, 1 usage error, 2 data error, 3 I/O error.
"""
from __future__ import annotations

import argparse
import json
import sys
from pathlib import Path

from . import dsp, estimators, evaluation, prevalence, reduction, render
from .edgecases import EdgeCaseRecord, enumerate_basic_cases
from .lattice import Configuration, Interpretation, Note, parse_note

EXIT_OK, EXIT_USAGE, EXIT_DATA, EXIT_IO = 0, 1, 2, 3


class UsageError(Exception):
    pass


class _Parser(argparse.ArgumentParser):
    def error(self, message):
        self.print_usage(sys.stderr)
        self.exit(EXIT_USAGE, f"{self.prog}: error: {message}\n")


def _emit(text: str, out: str | None) -> None:
    if out:
        Path(out).write_text(text, encoding="utf-8")
    else:
        sys.stdout.write(text)


def cmd_analyze(args) -> int:
    signal = dsp.load_audio(args.wav)
    seq = dsp.analyze(signal, args.length, args.hop)
    if args.out == "csv":
        _emit(seq.to_csv(), args.output)
        return EXIT_OK
    best = dsp.select_complete_window(seq.frames, len(signal), args.length, args.alpha)
    frames = estimators.estimate_frames(seq.frames, poly=args.poly, alpha_factor=args.alpha)
    doc = {
        "sample_rate": signal.sample_rate,
        "frame_length": args.length,
        "hop": args.hop,
        "selected_frame": best,
        "notes": frames[best]["notes"],
        "frames": frames,
    }
    _emit(json.dumps(doc, ensure_ascii=False, indent=1) + "\n", args.output)
    return EXIT_OK


def cmd_simulate(args) -> int:
    if args.n_min > args.n_max:
        raise UsageError("--n-min must not exceed --n-max")
    stats = prevalence.run_experiment(args.samples, (args.n_min, args.n_max), args.seed,
                                      headroom=args.headroom, poly=args.poly)
    fmt = args.format or ("json" if args.out and args.out.endswith(".json") else "csv")
    _emit(stats.to_json() + "\n" if fmt == "json" else stats.to_csv(), args.out)
    return EXIT_OK


def _load_classify_input(path: str) -> tuple[list[Note], int]:
    doc = json.loads(Path(path).read_text(encoding="utf-8"))
    octaves = int(doc.get("octaves", 10))
    if "fundamentals" in doc:
        return [parse_note(n) for n in doc["fundamentals"]], octaves
    # a bare interpretation: fundamentals are whatever simple_poly accepts
    interp = Interpretation.from_json(json.dumps(doc))
    return sorted(estimators.simple_poly(interp).notes), interp.octaves


def cmd_classify(args) -> int:
    fundamentals, octaves = _load_classify_input(args.interp)
    interp = Interpretation.from_fundamentals(fundamentals, octaves)
    cases = reduction.explain_false_fundamentals(fundamentals, octaves)
    if not args.graphs:
        for c in cases:
            c.pop("graph")
    doc = {
        "fundamentals": [n.name for n in sorted(fundamentals)],
        "naive": [n.name for n in sorted(prevalence.naive_classify(interp))],
        "false_fundamentals": cases,
    }
    _emit(json.dumps(doc, ensure_ascii=False, indent=1) + "\n", args.output)
    return EXIT_OK


def cmd_benchmark(args) -> int:
    gt = evaluation.load_ground_truth(args.truth)
    if args.estimator == "poly":
        _emit(json.dumps(evaluation.evaluate_poly(gt, args.alpha), indent=1) + "\n", args.output)
        return EXIT_OK
    names = ["naive", "hps"] if args.estimator == "both" else [args.estimator]
    reports = [evaluation.evaluate_mono(gt, n, args.alpha, outliers=args.outliers) for n in names]
    if args.confusion_dir:
        outdir = Path(args.confusion_dir)
        outdir.mkdir(parents=True, exist_ok=True)
        for rep in reports:
            for (inst, style), rs in rep.groups().items():
                cm = evaluation.confusion_matrix(rs)
                stem = f"{rep.estimator}_{inst}_{style}".replace(" ", "_").replace("/", "_")
                render.write_ppm(outdir / f"{stem}.ppm", render.upscale(cm.image(), 8))
    if args.output:
        doc = [r.to_dict() for r in reports]
        Path(args.output).write_text(json.dumps(doc if len(doc) > 1 else doc[0], ensure_ascii=False, indent=1),
                                     encoding="utf-8")
    sys.stdout.write(evaluation.format_table(reports))
    for rep in reports:
        for path, err in rep.failures:
            sys.stderr.write(f"skipped {path}: {err}\n")
    return EXIT_OK


def cmd_render(args) -> int:
    src = Path(args.input)
    if args.confusion:
        doc = json.loads(src.read_text(encoding="utf-8"))
        rep = evaluation.EvalReport.from_json(json.dumps(doc[0] if isinstance(doc, list) else doc))
        img = render.upscale(evaluation.confusion_matrix(rep.results).image(), args.scale)
    else:
        signal = dsp.load_audio(src)
        seq = dsp.analyze(signal)
        if args.heatmap:
            frame = seq.frames[dsp.select_complete_window(seq.frames, len(signal))]
            img = render.heatmap_image(dsp.frame_to_grid(frame), args.scale)
        else:
            img = render.pianoroll_image(seq, args.scale)
    render.save_image(args.output, img)
    return EXIT_OK


def cmd_enumerate(args) -> int:
    configs = list(Configuration) if args.config == "all" else [Configuration.parse(args.config)]
    lines = [EdgeCaseRecord.from_assignment(a).to_json() for c in configs for a in enumerate_basic_cases(c)]
    _emit("\n".join(lines) + "\n", args.output)
    return EXIT_OK


def cmd_synth(args) -> int:
    """Write harmonic test tones plus a ground-truth CSV."""
    outdir = Path(args.outdir)
    outdir.mkdir(parents=True, exist_ok=True)
    entries = []
    for spec in args.notes:
        notes = [parse_note(t) for t in spec.split("+")]
        name = "_".join(n.name.replace("#", "s") for n in notes) + ".wav"
        dsp.write_wav(outdir / name, dsp.synth_note(notes, args.seconds, args.rate))
        entries.append(evaluation.TruthEntry(outdir / name, args.instrument, args.style, frozenset(notes)))
    evaluation.write_ground_truth(evaluation.GroundTruth(entries), outdir / "truth.csv")
    sys.stdout.write(f"wrote {len(entries)} files and {outdir / 'truth.csv'}\n")
    return EXIT_OK


def build_parser() -> argparse.ArgumentParser:
    p = _Parser(prog="fifthgrid", description="Pitch grids ordered by fifths: analysis, simulation, benchmarks.")
    sub = p.add_subparsers(dest="command", required=True, parser_class=_Parser)

    a = sub.add_parser("analyze", help="estimate notes in a WAV file")
    a.add_argument("wav")
    a.add_argument("--poly", action="store_true", help="polyphonic estimator")
    a.add_argument("--alpha", type=float, default=dsp.ALPHA_FACTOR, help="threshold as a multiple of the bin mean")
    a.add_argument("--out", choices=("json", "csv"), default="json", help="estimates (json) or heat sequence (csv)")
    a.add_argument("--output", "-o", help="file to write instead of stdout")
    a.add_argument("--length", type=int, default=dsp.FRAME_LENGTH)
    a.add_argument("--hop", type=int, default=dsp.HOP)
    a.set_defaults(func=cmd_analyze)

    s = sub.add_parser("simulate", help="edge-type prevalence over random fundamentals")
    s.add_argument("--samples", type=int, default=1000)
    s.add_argument("--n-min", type=int, default=1)
    s.add_argument("--n-max", type=int, default=120)
    s.add_argument("--seed", type=int, default=0)
    s.add_argument("--out", help="output path; .json selects JSON, anything else CSV")
    s.add_argument("--format", choices=("csv", "json"))
    s.add_argument("--headroom", type=int, default=prevalence.HARMONIC_HEADROOM,
                   help="octaves above the grid that still receive harmonics (0 clamps)")
    s.add_argument("--poly", action="store_true", help="also score simple_poly (JSON only)")
    s.set_defaults(func=cmd_simulate)

    c = sub.add_parser("classify", help="edge types and reduction graphs for an interpretation")
    c.add_argument("--interp", required=True,
                   help='JSON with "fundamentals": ["D4", ...] or a saved interpretation')
    c.add_argument("--graphs", action="store_true", help="include reduction graphs")
    c.add_argument("--output", "-o")
    c.set_defaults(func=cmd_classify)

    b = sub.add_parser("benchmark", help="score an estimator against a ground-truth CSV")
    b.add_argument("--truth", required=True)
    b.add_argument("--estimator", choices=("naive", "hps", "both", "poly"), default="both")
    b.add_argument("--alpha", type=float, default=dsp.ALPHA_FACTOR)
    b.add_argument("--outliers", nargs="*", default=list(evaluation.DEFAULT_OUTLIERS),
                   help="instrument[:style] groups left out of the no-outlier figure")
    b.add_argument("--confusion-dir", help="write one confusion matrix image per group here")
    b.add_argument("--output", "-o", help="report JSON")
    b.set_defaults(func=cmd_benchmark)

    r = sub.add_parser("render", help="draw a heatmap, piano roll or confusion matrix")
    kind = r.add_mutually_exclusive_group(required=True)
    kind.add_argument("--heatmap", action="store_true", help="grid of the best window of a WAV")
    kind.add_argument("--pianoroll", action="store_true", help="bins over time of a WAV")
    kind.add_argument("--confusion", action="store_true", help="confusion matrix of a report JSON")
    r.add_argument("input")
    r.add_argument("output", help=".ppm or .png")
    r.add_argument("--scale", type=int, default=8)
    r.set_defaults(func=cmd_render)

    e = sub.add_parser("enumerate", help="list the basic edge cases of a configuration")
    e.add_argument("--config", default="all", choices=("GG", "GT", "TG", "all"))
    e.add_argument("--output", "-o")
    e.set_defaults(func=cmd_enumerate)

    y = sub.add_parser("synth", help="write synthetic harmonic tones and their ground truth")
    y.add_argument("outdir")
    y.add_argument("notes", nargs="+", help='note names; join with "+" for a chord, e.g. D4+A5+D6')
    y.add_argument("--seconds", type=float, default=0.5)
    y.add_argument("--rate", type=int, default=dsp.SYNTH_RATE)
    y.add_argument("--instrument", default="Synth")
    y.add_argument("--style", default="nonvib")
    y.set_defaults(func=cmd_synth)
    return p


def main(argv: list[str] | None = None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    try:
        return args.func(args)
    except UsageError as exc:
        sys.stderr.write(f"fifthgrid: {exc}\n")
        return EXIT_USAGE
    except (OSError, RuntimeError) as exc:
        sys.stderr.write(f"fifthgrid: {exc}\n")
        return EXIT_IO
    except (ValueError, KeyError, json.JSONDecodeError) as exc:
        sys.stderr.write(f"fifthgrid: {exc}\n")
        return EXIT_DATA


if __name__ == "__main__":
    sys.exit(main())
