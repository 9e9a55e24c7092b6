"""Two-channel averaged cross-entropy with its analytic gradient."""

from __future__ import annotations

import numpy as np

from ..errors import ShapeError

PROB_CLAMP = 1e-7


def cross_entropy_loss(pred: np.ndarray, target: np.ndarray):
    """Averaged cross-entropy over all pixels of both channels.

    ``pred`` and ``target`` are (batch, 2, h, w); targets may be binary or
    continuous in [0, 1]. Predictions are clamped to
    [1e-7, 1 - 1e-7] before the logs, which also makes 0*log(0) total. The
    sum of -(g*log(p) + (1-g)*log(1-p)) is divided by 2N per sample
    (N = pixels per channel) and averaged over the batch.

    Returns ``(loss, grad)`` where ``grad`` is dL/dpred; entries whose
    prediction sat outside the clamp range get zero gradient so the loss is
    differentiable everywhere.
    """
    pred = np.asarray(pred)
    target = np.asarray(target)
    if pred.shape != target.shape:
        raise ShapeError(f"pred {pred.shape} and target {target.shape} differ")
    if pred.ndim != 4 or pred.shape[1] != 2:
        raise ShapeError(f"expected (batch, 2, h, w), got {pred.shape}")
    b, _, h, w = pred.shape
    n = h * w
    inside = (pred > PROB_CLAMP) & (pred < 1.0 - PROB_CLAMP)
    p = np.clip(pred, PROB_CLAMP, 1.0 - PROB_CLAMP)
    loss = float(
        -(target * np.log(p) + (1.0 - target) * np.log1p(-p)).sum() / (2.0 * n * b)
    )
    grad = (-(target / p) + (1.0 - target) / (1.0 - p)) / (2.0 * n * b)
    grad = np.where(inside, grad, 0.0).astype(pred.dtype, copy=False)
    return loss, grad
