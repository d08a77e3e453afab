"""``clockforge`` command line: generate, read, calibrate, evaluate, plot, demo.

Exit status is 0 on success, 1 for usage errors and 2 for bad input data.
``--seed`` falls back to ``$CLOCKFORGE_SEED`` and then to 0.
"""

from __future__ import annotations

import argparse
import os
import sys
from concurrent.futures import ThreadPoolExecutor
from pathlib import Path

import numpy as np

from . import FORMAT_VERSION, __version__
from .dataio import (
    PRED_HEADER,
    csv_text,
    PredictionRow,
    atomic_write_text,
    list_images,
    load_image,
    load_labels,
    load_predictions,
    load_series,
    save_predictions,
    save_series,
    write_dataset,
    write_json,
    dumps_json,
)
from .errors import ClockforgeError
from .evalkit import LabeledPrediction, evaluate, overall_correct
from .georeader import read_time
from .synclock import MILD_JITTER, GenerateConfig, generate, generate_timelapse, simple_style
from .uniformity import (
    DEFAULT_ITERATIONS,
    DEFAULT_MARGIN,
    PredictionSeries,
    run_calibration,
    sawtooth_svg,
    sawtooth_values,
)

EXIT_OK, EXIT_USAGE, EXIT_DATA = 0, 1, 2


class UsageError(Exception):
    pass


class _Parser(argparse.ArgumentParser):
    def error(self, message):
        self.print_usage(sys.stderr)
        raise UsageError(f"{self.prog}: error: {message}")


def _default_seed() -> int:
    raw = os.environ.get("CLOCKFORGE_SEED")
    if raw is None or raw.strip() == "":
        return 0
    try:
        return int(raw)
    except ValueError:
        raise UsageError(f"CLOCKFORGE_SEED must be an integer, got {raw!r}") from None


def _positive(text):
    v = int(text)
    if v < 1:
        raise argparse.ArgumentTypeError("must be >= 1")
    return v


def build_parser() -> argparse.ArgumentParser:
    p = _Parser(prog="clockforge", description=__doc__.splitlines()[0])
    p.add_argument("--version", action="version", version=f"%(prog)s {__version__}")
    sub = p.add_subparsers(dest="command", parser_class=_Parser, required=True)

    def common(sp, threads=False):
        sp.add_argument("--seed", type=int, default=None, help="default: $CLOCKFORGE_SEED or 0")
        if threads:
            sp.add_argument("--threads", type=_positive, default=1, help="worker threads (output is identical)")

    g = sub.add_parser("generate", help="write a synthetic labelled clock dataset")
    common(g, threads=True)
    g.add_argument("--n", type=_positive, required=True)
    g.add_argument("--preset", choices=("simple", "full"), default="full")
    g.add_argument("--size", type=_positive, default=224)
    g.add_argument("--out", type=Path, required=True)
    g.add_argument("--no-warp", action="store_true")
    g.add_argument("--no-artefacts", action="store_true")
    g.add_argument("--no-augment", action="store_true")

    r = sub.add_parser("read", help="read clocks with the geometric reader")
    common(r, threads=True)
    r.add_argument("--in", dest="inp", type=Path, required=True, help="image file or directory")
    r.add_argument("--out", type=Path, help="prediction CSV (default: stdout)")

    c = sub.add_parser("calibrate", help="fit a sawtooth to per-frame predictions")
    common(c)
    c.add_argument("--in", dest="inp", type=Path, required=True, help="CSV frame_index,pred_class")
    c.add_argument("--out", type=Path, help="calibrated CSV (written only when the series is accepted)")
    c.add_argument("--report", type=Path, help="JSON fit report (default: stdout)")
    c.add_argument("--iterations", type=_positive, default=DEFAULT_ITERATIONS)
    c.add_argument("--margin", type=float, default=DEFAULT_MARGIN)

    e = sub.add_parser("evaluate", help="score predictions against labels")
    e.add_argument("--labels", type=Path, required=True)
    e.add_argument("--preds", type=Path, required=True)
    e.add_argument("--report", type=Path, help="also write the JSON report here")

    pl = sub.add_parser("plot", help="SVG of predictions with the fitted sawtooth")
    common(pl)
    pl.add_argument("--in", dest="inp", type=Path, required=True)
    pl.add_argument("--out", type=Path, required=True)
    pl.add_argument("--iterations", type=_positive, default=DEFAULT_ITERATIONS)

    d = sub.add_parser("demo", help="synthetic timelapse -> reader -> calibration -> accuracy")
    common(d, threads=True)
    d.add_argument("--frames", type=_positive, default=200)
    d.add_argument("--rate", type=float, default=3.0, help="minutes per frame")
    d.add_argument("--outlier-fraction", type=float, default=0.0)
    d.add_argument("--out", type=Path, help="directory for series, calibrated CSV, report and plot")
    return p


# ---------------------------------------------------------------------------


def _map(fn, items, threads):
    if threads <= 1:
        return [fn(x) for x in items]
    with ThreadPoolExecutor(max_workers=threads) as pool:
        return list(pool.map(fn, items))


def cmd_generate(a, seed):
    cfg = GenerateConfig(a.preset, a.size, not a.no_warp, not a.no_artefacts, not a.no_augment)
    manifest = write_dataset(a.out, generate(seed, a.n, cfg, threads=a.threads))
    print(f"wrote {manifest.image_count} images to {a.out}")


def cmd_read(a, seed):
    paths = list_images(a.inp)
    if not paths:
        raise ClockforgeError(f"no images under {a.inp}")
    results = _map(lambda p: read_time(load_image(p)), paths, a.threads)
    rows = [
        PredictionRow(p.name, cls, score, rank)
        for p, res in zip(paths, results)
        for rank, (cls, score) in enumerate(res.candidates, start=1)
    ]
    if a.out is None:
        sys.stdout.write(csv_text(PRED_HEADER, [(r.filename, r.pred_class, f"{r.score:.6f}", r.rank) for r in rows]))
    else:
        save_predictions(a.out, rows)
        unread = sum(1 for r in results if not r.candidates)
        print(f"read {len(paths)} images ({unread} without hands) -> {a.out}")


def _calibration(a, seed):
    frames, preds = load_series(a.inp)
    series = PredictionSeries(frames, preds)
    return series, run_calibration(series, seed, a.iterations, getattr(a, "margin", DEFAULT_MARGIN))


def cmd_calibrate(a, seed):
    series, rep = _calibration(a, seed)
    report = rep.to_dict()
    if a.report is None:
        sys.stdout.write(dumps_json(report))
    else:
        write_json(a.report, report)
    if a.out is not None and rep.calibrated is not None:
        save_series(a.out, rep.calibrated.frames, rep.calibrated.preds)
    status = "accepted" if rep.decision.accepted else "rejected (" + ", ".join(sorted(rep.decision.reasons)) + ")"
    print(status, file=sys.stderr)


def cmd_evaluate(a, seed):
    labels = load_labels(a.labels)
    preds = load_predictions(a.preds)
    report = evaluate(LabeledPrediction(t.index, tuple(preds.get(name, ()))) for name, t in labels)
    sys.stdout.write(dumps_json(report.to_dict()))
    print(report.table())
    if a.report is not None:
        write_json(a.report, report.to_dict())


def cmd_plot(a, seed):
    series, rep = _calibration(a, seed)
    atomic_write_text(a.out, sawtooth_svg(series, rep.fit))
    print(f"wrote {a.out}")


def run_demo(seed: int, frames: int = 200, rate: float = 3.0, outlier_fraction: float = 0.0, threads: int = 1):
    """Timelapse through reader and calibration; returns a summary dict."""
    rng = np.random.default_rng(seed)
    start = int(rng.integers(0, 720))
    images, truth = generate_timelapse(
        int(rng.integers(0, 2**31 - 1)), simple_style(), start, rate, frames, outlier_fraction, MILD_JITTER
    )
    tops = [r.top1 for r in _map(read_time, images, threads)]
    raw_ok = [t is not None and overall_correct(t, c) for t, c in zip(tops, truth.times)]
    keep = [i for i, t in enumerate(tops) if t is not None]
    series = PredictionSeries(np.array(keep), np.array([tops[i] for i in keep])) if len(keep) >= 2 else None
    rep = run_calibration(series, seed) if series is not None else None
    if rep is not None and rep.fit is not None:
        cal = sawtooth_values(rep.fit.slope, rep.fit.intercept, truth.frames)
        cal_ok = [overall_correct(int(c), int(t)) for c, t in zip(cal, truth.times)]
    else:
        cal, cal_ok = None, raw_ok
    summary = {
        "format_version": FORMAT_VERSION,
        "seed": seed,
        "frames": frames,
        "rate": rate,
        "start": start,
        "read_frames": len(keep),
        "raw_accuracy": float(np.mean(raw_ok)),
        "calibrated_accuracy": float(np.mean(cal_ok)),
        "fit": None if rep is None else rep.to_dict(),
    }
    return summary, series, rep, cal


def cmd_demo(a, seed):
    if not 0 <= a.outlier_fraction < 1:
        raise UsageError("--outlier-fraction must be in [0, 1)")
    if a.rate <= 0:
        raise UsageError("--rate must be > 0")
    summary, series, rep, cal = run_demo(seed, a.frames, a.rate, a.outlier_fraction, a.threads)
    fit = summary["fit"] or {}
    print(f"frames read:          {summary['read_frames']}/{summary['frames']}")
    print(f"fit:                  slope {fit.get('slope')}, inlier ratio {fit.get('inlier_ratio')}")
    print(f"video accepted:       {fit.get('accepted', False)}")
    print(f"raw accuracy:         {100 * summary['raw_accuracy']:.2f}%")
    print(f"calibrated accuracy:  {100 * summary['calibrated_accuracy']:.2f}%")
    if a.out is not None:
        write_json(a.out / "demo.json", summary)
        if series is not None:
            save_series(a.out / "predictions.csv", series.frames, series.preds)
            atomic_write_text(a.out / "sawtooth.svg", sawtooth_svg(series, rep.fit))
        if cal is not None:
            save_series(a.out / "calibrated.csv", np.arange(len(cal)), cal)


COMMANDS = {
    "generate": cmd_generate,
    "read": cmd_read,
    "calibrate": cmd_calibrate,
    "evaluate": cmd_evaluate,
    "plot": cmd_plot,
    "demo": cmd_demo,
}


def main(argv=None) -> int:
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
        seed = getattr(args, "seed", None)
        if seed is None:
            seed = _default_seed()
        COMMANDS[args.command](args, seed)
    except SystemExit as exc:  # --help / --version
        return int(exc.code or 0)
    except UsageError as exc:
        print(exc, file=sys.stderr)
        return EXIT_USAGE
    except (ClockforgeError, OSError, ValueError) as exc:
        print(f"clockforge: {exc}", file=sys.stderr)
        return EXIT_DATA
    return EXIT_OK


if __name__ == "__main__":
    sys.exit(main())
