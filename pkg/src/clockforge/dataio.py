"""Files on disk: label and prediction CSVs, PNG images, JSON sidecars, crops.

Every writer goes through a temp file in the target directory followed by
``os.replace``, so readers never observe a half-written file.
"""

from __future__ import annotations

import csv
import io
import json
import os
import tempfile
from dataclasses import dataclass
from pathlib import Path
from typing import Iterable

import numpy as np
from PIL import Image

from . import FORMAT_VERSION
from .errors import EmptyBox, ParseError, RangeError
from .timecore import ClockTime, N_CLASSES

LABEL_HEADER = ("filename", "hour", "minute")
PRED_HEADER = ("filename", "pred_class", "score", "rank")
SERIES_HEADER = ("frame_index", "pred_class")
IMAGE_SUFFIXES = (".png", ".jpg", ".jpeg", ".bmp")


# ---------------------------------------------------------------------------
# atomic writes
# ---------------------------------------------------------------------------


def atomic_write_bytes(path, data: bytes) -> Path:
    path = Path(path)
    path.parent.mkdir(parents=True, exist_ok=True)
    fd, tmp = tempfile.mkstemp(dir=path.parent, prefix=f".{path.name}.", suffix=".tmp")
    try:
        with os.fdopen(fd, "wb") as fh:
            fh.write(data)
        os.replace(tmp, path)
    except BaseException:
        if os.path.exists(tmp):
            os.unlink(tmp)
        raise
    return path


def atomic_write_text(path, text: str) -> Path:
    return atomic_write_bytes(path, text.encode("utf-8"))


def dumps_json(obj) -> str:
    """Stable JSON: sorted keys, fixed indent, trailing newline."""
    return json.dumps(obj, sort_keys=True, indent=2) + "\n"


def write_json(path, obj) -> Path:
    if isinstance(obj, dict) and "format_version" not in obj:
        obj = {**obj, "format_version": FORMAT_VERSION}
    return atomic_write_text(path, dumps_json(obj))


def read_json(path) -> dict:
    try:
        with open(path, encoding="utf-8") as fh:
            return json.load(fh)
    except json.JSONDecodeError as exc:
        raise ParseError(f"{path}: invalid JSON ({exc.msg})", exc.lineno) from exc


def csv_text(header, rows) -> str:
    buf = io.StringIO()
    w = csv.writer(buf, lineterminator="\n")
    w.writerow(header)
    w.writerows(rows)
    return buf.getvalue()


# ---------------------------------------------------------------------------
# images
# ---------------------------------------------------------------------------


def save_png(path, img: np.ndarray) -> Path:
    arr = np.asarray(img)
    if arr.dtype != np.uint8:
        raise ValueError("images must be uint8")
    buf = io.BytesIO()
    Image.fromarray(arr).save(buf, format="PNG")
    return atomic_write_bytes(path, buf.getvalue())


def load_image(path) -> np.ndarray:
    """RGB uint8 array; grey or RGBA inputs are converted."""
    try:
        with Image.open(path) as im:
            return np.asarray(im.convert("RGB"), dtype=np.uint8).copy()
    except (OSError, ValueError) as exc:
        raise ParseError(f"{path}: cannot decode image ({exc})") from exc


def list_images(path) -> list[Path]:
    path = Path(path)
    if path.is_file():
        return [path]
    if not path.is_dir():
        raise FileNotFoundError(path)
    return sorted(p for p in path.iterdir() if p.suffix.lower() in IMAGE_SUFFIXES)


# ---------------------------------------------------------------------------
# CSV schemas
# ---------------------------------------------------------------------------


def _rows(path, header):
    """Yield (line number, row) after checking the header."""
    with open(path, newline="", encoding="utf-8") as fh:
        reader = csv.reader(fh)
        try:
            first = next(reader)
        except StopIteration:
            raise ParseError("empty file, expected a header", 1) from None
        if tuple(c.strip() for c in first) != header:
            raise ParseError(f"expected header {','.join(header)}", 1)
        for row in reader:
            if not row or all(not c.strip() for c in row):
                continue
            if len(row) != len(header):
                raise ParseError(f"expected {len(header)} fields, got {len(row)}", reader.line_num)
            yield reader.line_num, [c.strip() for c in row]


def _int(text, line, what):
    try:
        return int(text)
    except ValueError:
        raise ParseError(f"{what} is not an integer: {text!r}", line) from None


def load_labels(path) -> list[tuple[str, ClockTime]]:
    out, seen = [], set()
    for line, (name, h, m) in _rows(path, LABEL_HEADER):
        if not name:
            raise ParseError("empty filename", line)
        if name in seen:
            raise ParseError(f"duplicate filename {name!r}", line)
        hour, minute = _int(h, line, "hour"), _int(m, line, "minute")
        try:
            t = ClockTime(hour, minute)
        except ValueError as exc:
            raise RangeError(str(exc), line) from None
        seen.add(name)
        out.append((name, t))
    return out


def save_labels(path, rows: Iterable[tuple[str, ClockTime]]) -> Path:
    return atomic_write_text(path, csv_text(LABEL_HEADER, [(n, t.hour, f"{t.minute:02d}") for n, t in rows]))


@dataclass(frozen=True)
class PredictionRow:
    filename: str
    pred_class: int
    score: float
    rank: int


def save_predictions(path, rows: Iterable[PredictionRow]) -> Path:
    return atomic_write_text(
        path, csv_text(PRED_HEADER, [(r.filename, r.pred_class, f"{r.score:.6f}", r.rank) for r in rows])
    )


def load_predictions(path) -> dict[str, list[int]]:
    """Filename -> candidate classes ordered by rank (rank 1 first)."""
    by_name: dict[str, dict[int, int]] = {}
    for line, (name, cls, score, rank) in _rows(path, PRED_HEADER):
        c, r = _int(cls, line, "pred_class"), _int(rank, line, "rank")
        if not 0 <= c < N_CLASSES:
            raise RangeError(f"pred_class {c} outside [0, {N_CLASSES - 1}]", line)
        if not 1 <= r <= 3:
            raise RangeError(f"rank {r} outside [1, 3]", line)
        try:
            float(score)
        except ValueError:
            raise ParseError(f"score is not a number: {score!r}", line) from None
        ranks = by_name.setdefault(name, {})
        if r in ranks:
            raise ParseError(f"duplicate rank {r} for {name!r}", line)
        ranks[r] = c
    return {n: [ranks[k] for k in sorted(ranks)] for n, ranks in by_name.items()}


def load_series(path) -> tuple[np.ndarray, np.ndarray]:
    frames, preds = [], []
    for line, (f, p) in _rows(path, SERIES_HEADER):
        fi, pi = _int(f, line, "frame_index"), _int(p, line, "pred_class")
        if fi < 0:
            raise RangeError("frame_index must be >= 0", line)
        if frames and fi <= frames[-1]:
            raise ParseError("frame indices must be strictly increasing", line)
        if not 0 <= pi < N_CLASSES:
            raise RangeError(f"pred_class {pi} outside [0, {N_CLASSES - 1}]", line)
        frames.append(fi)
        preds.append(pi)
    if len(frames) < 2:
        raise ParseError("a series needs at least two rows")
    return np.array(frames, dtype=np.int64), np.array(preds, dtype=np.int64)


def save_series(path, frames, preds) -> Path:
    return atomic_write_text(path, csv_text(SERIES_HEADER, [(int(f), int(p)) for f, p in zip(frames, preds)]))


# ---------------------------------------------------------------------------
# crops
# ---------------------------------------------------------------------------


def crop_with_context(img: np.ndarray, bbox, context_fraction: float = 0.2) -> np.ndarray:
    """Cut ``bbox = (x, y, w, h)`` grown by ``context_fraction`` of its size on every side.

    Parts of the grown box outside the image are black, so the output size
    never depends on where the box sits.
    """
    if context_fraction < 0:
        raise ValueError("context_fraction must be >= 0")
    x, y, w, h = (float(v) for v in bbox)
    if w <= 0 or h <= 0:
        raise EmptyBox(f"box has no area: {bbox}")
    mx = int(np.floor(w * context_fraction + 0.5))
    my = int(np.floor(h * context_fraction + 0.5))
    x0, y0 = int(np.floor(x + 0.5)) - mx, int(np.floor(y + 0.5)) - my
    out_w, out_h = int(np.floor(w + 0.5)) + 2 * mx, int(np.floor(h + 0.5)) + 2 * my
    if out_w < 1 or out_h < 1:
        raise EmptyBox(f"box rounds to zero pixels: {bbox}")
    arr = np.asarray(img)
    out = np.zeros((out_h, out_w) + arr.shape[2:], dtype=arr.dtype)
    H, W = arr.shape[:2]
    sx0, sy0 = max(x0, 0), max(y0, 0)
    sx1, sy1 = min(x0 + out_w, W), min(y0 + out_h, H)
    if sx1 > sx0 and sy1 > sy0:
        out[sy0 - y0:sy1 - y0, sx0 - x0:sx1 - x0] = arr[sy0:sy1, sx0:sx1]
    return out


# ---------------------------------------------------------------------------
# dataset layout
# ---------------------------------------------------------------------------


@dataclass(frozen=True)
class DatasetManifest:
    root: Path
    labels_file: Path
    image_count: int
    format_version: str = FORMAT_VERSION

    def to_dict(self) -> dict:
        return {
            "format_version": self.format_version,
            "image_count": self.image_count,
            "labels_file": self.labels_file.name,
        }


def image_name(index: int) -> str:
    return f"{index:06d}.png"


def write_dataset(root, samples) -> DatasetManifest:
    """``images/``, ``meta/`` and ``labels.csv`` (paths relative to ``images/``)."""
    root = Path(root)
    labels = []
    for s in samples:
        name = image_name(s.index)
        save_png(root / "images" / name, s.image)
        write_json(root / "meta" / f"{s.index:06d}.json", {**s.meta(), "format_version": FORMAT_VERSION})
        labels.append((name, s.time))
    save_labels(root / "labels.csv", labels)
    manifest = DatasetManifest(root, root / "labels.csv", len(labels))
    write_json(root / "manifest.json", manifest.to_dict())
    return manifest


def open_dataset(root) -> DatasetManifest:
    """Check that every label row names an existing image."""
    root = Path(root)
    labels_file = root / "labels.csv"
    rows = load_labels(labels_file)
    for line, (name, _) in enumerate(rows, start=2):
        if not (root / "images" / name).is_file():
            raise ParseError(f"missing image {name!r}", line)
    version = FORMAT_VERSION
    if (root / "manifest.json").is_file():
        version = read_json(root / "manifest.json").get("format_version", FORMAT_VERSION)
    return DatasetManifest(root, labels_file, len(rows), version)
