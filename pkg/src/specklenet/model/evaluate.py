"""Split evaluation: per-record JI and PCC against the preprocessed targets."""

from __future__ import annotations

import math
from pathlib import Path

import numpy as np

from ..analysis.metrics import jaccard, pcc
from ..analysis.report import MetricReport, MetricRow, overlay_masks
from ..datagen.preprocess import preprocess
from ..errors import DegenerateInputError
from ..formats import write_pgm
from .arch import NetworkState


def evaluate(
    net: NetworkState,
    manifest,
    splits: list[str],
    overlay_dir: str | Path | None = None,
    max_overlays: int = 0,
) -> MetricReport:
    """Run the network over the requested splits and score every record.

    JI compares the nonzero support of the predicted object map against the
    target's; PCC correlates the maps directly and is recorded as NaN when
    either side is constant (for example an all-background prediction).
    Optionally writes agreement overlays for the first records of each split.
    """
    rows: list[MetricRow] = []
    written = 0
    if overlay_dir is not None:
        Path(overlay_dir).mkdir(parents=True, exist_ok=True)
    for split in splits:
        for rec in manifest.split(split):
            x, t = preprocess(manifest.load_speckle(rec), manifest.load_object(rec), net.task)
            obj_map, _ = net.predict(x)
            pred_mask = (obj_map > 0).astype(np.uint8)
            true_mask = (t[0] > 0).astype(np.uint8)
            ji = jaccard(pred_mask, true_mask)
            try:
                rho = pcc(obj_map, t[0])
            except DegenerateInputError:
                rho = math.nan
            rows.append(
                MetricRow(rec.record_id, rec.diffuser_id, split, rec.class_tag, ji, rho)
            )
            if overlay_dir is not None and written < max_overlays:
                write_pgm(
                    Path(overlay_dir) / f"overlay_{split}_r{rec.record_id:06d}.pgm",
                    overlay_masks(pred_mask, true_mask) / 255.0,
                )
                written += 1
    return MetricReport(rows)
