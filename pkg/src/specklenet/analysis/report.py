"""Figure-ready output: metric tables, correlation CSVs, and overlay images."""

from __future__ import annotations

import csv
import json
import math
from dataclasses import dataclass
from pathlib import Path

import numpy as np

from ..errors import ShapeError
from ..formats import write_pgm
from .correlation import CorrelationStudy

# Overlay gray levels: agreement (true positive / true negative), false
# positive, false negative. Every pixel belongs to exactly one class.
LEVEL_MATCH = 255
LEVEL_FALSE_POSITIVE = 170
LEVEL_FALSE_NEGATIVE = 85


@dataclass
class MetricRow:
    record_id: int
    diffuser_id: str
    split: str
    class_tag: str
    ji: float
    pcc: float  # NaN when the correlation is undefined for the pair


@dataclass
class MetricReport:
    """Per-record JI/PCC rows plus group aggregates recomputable from them."""

    rows: list[MetricRow]

    def aggregates(self) -> dict:
        def summarize(rows: list[MetricRow]) -> dict:
            ji = np.array([r.ji for r in rows], dtype=np.float64)
            pc = np.array([r.pcc for r in rows], dtype=np.float64)
            valid = pc[np.isfinite(pc)]
            return {
                "n": len(rows),
                "ji_mean": float(ji.mean()) if len(ji) else math.nan,
                "ji_std": float(ji.std()) if len(ji) else math.nan,
                "pcc_mean": float(valid.mean()) if len(valid) else math.nan,
                "pcc_std": float(valid.std()) if len(valid) else math.nan,
            }

        out: dict = {"overall": summarize(self.rows), "by_split": {}, "by_diffuser": {}, "by_class": {}}
        for key_name, key_fn in (
            ("by_split", lambda r: r.split),
            ("by_diffuser", lambda r: f"{r.split}/{r.diffuser_id}"),
            ("by_class", lambda r: f"{r.split}/{r.class_tag}"),
        ):
            groups: dict[str, list[MetricRow]] = {}
            for r in self.rows:
                groups.setdefault(key_fn(r), []).append(r)
            out[key_name] = {k: summarize(v) for k, v in sorted(groups.items())}
        return out


def overlay_masks(prediction: np.ndarray, truth: np.ndarray) -> np.ndarray:
    """Three-level agreement overlay of two binary masks.

    Pixels where prediction equals truth take the agreement level; spurious
    detections the false-positive level; misses the false-negative level.
    """
    prediction = np.asarray(prediction).astype(bool)
    truth = np.asarray(truth).astype(bool)
    if prediction.shape != truth.shape:
        raise ShapeError(f"overlay shapes differ: {prediction.shape} vs {truth.shape}")
    out = np.full(prediction.shape, LEVEL_MATCH, dtype=np.uint8)
    out[prediction & ~truth] = LEVEL_FALSE_POSITIVE
    out[~prediction & truth] = LEVEL_FALSE_NEGATIVE
    return out


def _write_csv(path: Path, header: list[str], rows) -> None:
    with open(path, "w", newline="") as fh:
        writer = csv.writer(fh)
        writer.writerow(header)
        writer.writerows(rows)


def emit_report(obj, path: str | Path) -> list[Path]:
    """Write an analysis artifact to disk; returns the files created.

    Dispatches on type: a MetricReport becomes ``metrics.csv`` plus
    ``summary.json``; a list of CorrelationStudy becomes ``decorrelation.csv``
    plus histogram counts; an activation curve (rows of layer_index,
    mean_pcc, std_pcc) becomes ``activations.csv``; a 2D float map in
    [-1, 1] becomes a PGM remapped to [0, 1].
    """
    path = Path(path)
    path.mkdir(parents=True, exist_ok=True) if path.suffix == "" else path.parent.mkdir(
        parents=True, exist_ok=True
    )
    created: list[Path] = []

    if isinstance(obj, MetricReport):
        base = path if path.suffix == "" else path.parent
        metrics = base / "metrics.csv"
        _write_csv(
            metrics,
            ["record_id", "diffuser_id", "split", "class", "ji", "pcc"],
            (
                [r.record_id, r.diffuser_id, r.split, r.class_tag, f"{r.ji:.9f}",
                 "" if not math.isfinite(r.pcc) else f"{r.pcc:.9f}"]
                for r in obj.rows
            ),
        )
        summary = base / "summary.json"
        summary.write_text(json.dumps(obj.aggregates(), indent=2))
        created += [metrics, summary]
    elif isinstance(obj, list) and obj and isinstance(obj[0], CorrelationStudy):
        base = path if path.suffix == "" else path.parent
        samples = base / "decorrelation.csv"
        _write_csv(
            samples,
            ["category", "pcc"],
            ((s.category, f"{v:.9f}") for s in obj for v in s.pccs),
        )
        hist = base / "decorrelation_hist.csv"
        _write_csv(
            hist,
            ["category", "bin_lo", "bin_hi", "count"],
            (
                (s.category, f"{s.bin_edges[i]:.4f}", f"{s.bin_edges[i + 1]:.4f}", int(c))
                for s in obj
                for i, c in enumerate(s.hist_counts)
            ),
        )
        created += [samples, hist]
    elif isinstance(obj, np.ndarray) and obj.ndim == 2 and obj.shape[1] == 3:
        target = path if path.suffix else path / "activations.csv"
        _write_csv(
            target,
            ["layer_index", "mean_pcc", "std_pcc"],
            ((int(r[0]), f"{r[1]:.9f}", f"{r[2]:.9f}") for r in obj),
        )
        created.append(target)
    elif isinstance(obj, np.ndarray) and obj.ndim == 2:
        target = path if path.suffix else path / "map.pgm"
        write_pgm(target, (obj + 1.0) / 2.0)
        created.append(target)
    else:
        raise TypeError(f"emit_report cannot handle {type(obj)!r}")
    return created
