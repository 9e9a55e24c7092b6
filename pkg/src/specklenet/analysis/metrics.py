"""Image similarity metrics: Pearson correlation and Jaccard index."""

from __future__ import annotations

import numpy as np

from ..errors import DegenerateInputError, InvalidInputError, ShapeError


def pcc(a: np.ndarray, b: np.ndarray) -> float:
    """Pearson correlation coefficient over flattened pixel values.

    Raises DegenerateInputError when either input has zero variance.
    """
    a = np.asarray(a, dtype=np.float64).ravel()
    b = np.asarray(b, dtype=np.float64).ravel()
    if a.shape != b.shape:
        raise ShapeError(f"pcc inputs differ in size: {a.shape} vs {b.shape}")
    da = a - a.mean()
    db = b - b.mean()
    na = np.sqrt(np.dot(da, da))
    nb = np.sqrt(np.dot(db, db))
    if na == 0.0 or nb == 0.0:
        raise DegenerateInputError("pcc undefined for zero-variance input")
    return float(np.clip(np.dot(da, db) / (na * nb), -1.0, 1.0))


def jaccard(a: np.ndarray, b: np.ndarray) -> float:
    """Intersection over union of two binary masks.

    Both masks empty is defined as perfect agreement (1.0).
    """
    a = np.asarray(a)
    b = np.asarray(b)
    if a.shape != b.shape:
        raise ShapeError(f"jaccard inputs differ in shape: {a.shape} vs {b.shape}")
    if not (np.isin(a, (0, 1)).all() and np.isin(b, (0, 1)).all()):
        raise InvalidInputError("jaccard expects binary masks with values in {0, 1}")
    a = a.astype(bool)
    b = b.astype(bool)
    union = np.logical_or(a, b).sum()
    if union == 0:
        return 1.0
    return float(np.logical_and(a, b).sum() / union)


def spearman(x: np.ndarray, y: np.ndarray) -> float:
    """Spearman rank correlation (average ranks for ties)."""

    def ranks(v: np.ndarray) -> np.ndarray:
        order = np.argsort(v, kind="stable")
        r = np.empty(len(v), dtype=np.float64)
        r[order] = np.arange(len(v), dtype=np.float64)
        # average ranks over tied groups
        sv = v[order]
        i = 0
        while i < len(sv):
            j = i
            while j + 1 < len(sv) and sv[j + 1] == sv[i]:
                j += 1
            if j > i:
                r[order[i : j + 1]] = 0.5 * (i + j)
            i = j + 1
        return r

    x = np.asarray(x, dtype=np.float64).ravel()
    y = np.asarray(y, dtype=np.float64).ravel()
    if x.shape != y.shape:
        raise ShapeError(f"spearman inputs differ in size: {x.shape} vs {y.shape}")
    return pcc(ranks(x), ranks(y))
