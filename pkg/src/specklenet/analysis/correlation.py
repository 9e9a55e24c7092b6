"""Speckle decorrelation statistics and cross-correlation invariance maps."""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

from ..errors import ConfigurationError, DegenerateInputError, ShapeError
from .metrics import pcc

HIST_RANGE = (-0.2, 1.0)
HIST_BINS = 50

CATEGORIES = ("same_diffuser_diff_objects", "same_object_diff_diffusers", "diff_both")


@dataclass
class CorrelationStudy:
    """PCC samples for one pairing category, plus a fixed-width histogram."""

    category: str
    pccs: np.ndarray
    hist_counts: np.ndarray = field(init=False)
    bin_edges: np.ndarray = field(init=False)

    def __post_init__(self) -> None:
        self.pccs = np.asarray(self.pccs, dtype=np.float64)
        self.hist_counts, self.bin_edges = np.histogram(
            np.clip(self.pccs, HIST_RANGE[0], HIST_RANGE[1] - 1e-12),
            bins=HIST_BINS,
            range=HIST_RANGE,
        )

    @property
    def mean(self) -> float:
        return float(self.pccs.mean())

    @property
    def std(self) -> float:
        return float(self.pccs.std())


def decorrelation_study(manifest, n_pairs: int, seed: int = 0) -> list[CorrelationStudy]:
    """Sample speckle-pair correlations for the three pairing categories.

    Draws ``n_pairs`` record pairs per category from the manifest (training
    and group1 splits provide every object-diffuser combination):
    different objects through the same diffuser, the same object through two
    diffusers, and different objects through different diffusers.
    """
    index: dict[tuple[int, str], object] = {}
    for rec in manifest.records:
        if rec.split in ("train", "group1"):
            index[(rec.object_id, rec.diffuser_id)] = rec
    object_ids = sorted({o for o, _ in index})
    diffuser_ids = sorted({d for _, d in index})
    if len(object_ids) < 2 or len(diffuser_ids) < 2:
        raise ConfigurationError(
            "decorrelation study needs at least two objects and two diffusers"
        )

    rng = np.random.default_rng(seed)
    cache: dict[tuple[int, str], np.ndarray] = {}

    def speckle(obj: int, dif: str) -> np.ndarray:
        key = (obj, dif)
        if key not in cache:
            cache[key] = manifest.load_speckle(index[key])
        return cache[key]

    def draw(same_object: bool, same_diffuser: bool) -> float:
        for _ in range(1000):
            o1 = object_ids[rng.integers(len(object_ids))]
            o2 = o1 if same_object else object_ids[rng.integers(len(object_ids))]
            d1 = diffuser_ids[rng.integers(len(diffuser_ids))]
            d2 = d1 if same_diffuser else diffuser_ids[rng.integers(len(diffuser_ids))]
            if (not same_object and o1 == o2) or (not same_diffuser and d1 == d2):
                continue
            if (o1, d1) in index and (o2, d2) in index:
                return pcc(speckle(o1, d1), speckle(o2, d2))
        raise ConfigurationError("could not sample a valid record pair; dataset too small")

    studies = []
    for category, same_o, same_d in (
        (CATEGORIES[0], False, True),
        (CATEGORIES[1], True, False),
        (CATEGORIES[2], False, False),
    ):
        samples = np.array([draw(same_o, same_d) for _ in range(n_pairs)])
        studies.append(CorrelationStudy(category, samples))
    return studies


def cross_correlation_map(a: np.ndarray, b: np.ndarray) -> np.ndarray:
    """Mean-subtracted, energy-normalized 2D cross-correlation, center-shifted.

    Computed as the inverse transform of the spectral product; the map of an
    image with itself peaks at the center with value exactly 1.
    """
    a = np.asarray(a, dtype=np.float64)
    b = np.asarray(b, dtype=np.float64)
    if a.shape != b.shape:
        raise ShapeError(f"cross-correlation inputs differ: {a.shape} vs {b.shape}")
    a0 = a - a.mean()
    b0 = b - b.mean()
    na = np.sqrt((a0**2).sum())
    nb = np.sqrt((b0**2).sum())
    if na == 0.0 or nb == 0.0:
        raise DegenerateInputError("cross-correlation undefined for zero-variance input")
    spec = np.fft.fft2(a0) * np.conj(np.fft.fft2(b0))
    return np.fft.fftshift(np.fft.ifft2(spec)).real / (na * nb)


def crop_center(img: np.ndarray, size: int) -> np.ndarray:
    """Central size x size window of a 2D array."""
    h, w = img.shape
    r0 = h // 2 - size // 2
    c0 = w // 2 - size // 2
    return img[r0 : r0 + size, c0 : c0 + size]
