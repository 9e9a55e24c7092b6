"""Record preprocessing: 2x2 binning, max-normalization, two-channel targets."""

from __future__ import annotations

import numpy as np

from ..errors import DegenerateInputError, InvalidInputError

TASKS = ("binary", "grayscale")


def bin2x2(a: np.ndarray) -> np.ndarray:
    """Average each 2x2 neighborhood; both dimensions must be even."""
    a = np.asarray(a)
    if a.ndim != 2 or a.shape[0] % 2 or a.shape[1] % 2:
        raise InvalidInputError(f"2x2 binning needs an even-sized 2D grid, got {a.shape}")
    return a.reshape(a.shape[0] // 2, 2, a.shape[1] // 2, 2).mean(axis=(1, 3))


def crop_center(a: np.ndarray, size: int) -> np.ndarray:
    """Central size x size window of a 2D array."""
    h, w = a.shape
    if size > h or size > w:
        raise InvalidInputError(f"crop size {size} exceeds grid {a.shape}")
    r0, c0 = h // 2 - size // 2, w // 2 - size // 2
    return a[r0 : r0 + size, c0 : c0 + size]


def preprocess(
    speckle: np.ndarray, obj: np.ndarray, task: str = "binary", crop: int | None = None
) -> tuple[np.ndarray, np.ndarray]:
    """Turn a raw (speckle, object) record into a network input/target pair.

    The speckle is 2x2 binned and divided by its maximum, giving a single
    input channel in [0, 1]. The object is 2x2 binned and expanded into two
    complementary channels: for the binary task channel 0 marks every pixel
    that remains nonzero after binning; for the grayscale task channel 0 is
    the binned object itself. Channel 1 is one minus channel 0 in both cases.

    ``crop`` keeps only the central crop x crop window of both grids before
    binning, which feeds smaller network input sizes from the same records.

    Returns float32 arrays of shapes (1, h, w) and (2, h, w) with h = H/2.
    """
    if task not in TASKS:
        raise InvalidInputError(f"unknown task {task!r}; choose from {TASKS}")
    speckle = np.asarray(speckle, dtype=np.float64)
    obj = np.asarray(obj, dtype=np.float64)
    if crop is not None:
        speckle = crop_center(speckle, crop)
        obj = crop_center(obj, crop)
    binned = bin2x2(speckle)
    peak = float(binned.max())
    if peak <= 0.0:
        raise DegenerateInputError("speckle is all zero; max-normalization undefined")
    x = (binned / peak)[None, :, :]

    target0 = bin2x2(obj)
    if task == "binary":
        target0 = (target0 > 0.0).astype(np.float64)
    else:
        target0 = np.clip(target0, 0.0, 1.0)
    target = np.stack([target0, 1.0 - target0], axis=0)
    return x.astype(np.float32), target.astype(np.float32)
