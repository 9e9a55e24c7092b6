"""Cross-diffuser similarity of network activations, layer by layer."""

from __future__ import annotations

from itertools import combinations

import numpy as np

from ..errors import DegenerateInputError, InvalidInputError
from .metrics import pcc


def _channel_mean_pcc(a: np.ndarray, b: np.ndarray) -> float:
    """PCC per channel map, averaged over channels with usable variance."""
    vals = []
    for c in range(a.shape[0]):
        try:
            vals.append(pcc(a[c], b[c]))
        except DegenerateInputError:
            continue  # dead channel in one of the maps
    if not vals:
        return float("nan")
    return float(np.mean(vals))


def activation_similarity(net, inputs: list[np.ndarray], layer_indices=None) -> np.ndarray:
    """Mean pairwise activation PCC per layer over inputs of one object.

    ``inputs`` are preprocessed speckle tensors of the same object seen
    through different diffusers. For every input pair and requested layer the
    corresponding post-activation maps are correlated channel by channel and
    averaged; pairs are then averaged per layer. Returns rows
    ``(layer_index, mean_pcc, std_pcc)``.
    """
    if len(inputs) < 2:
        raise InvalidInputError("activation similarity needs at least two inputs")
    if layer_indices is None:
        layer_indices = list(range(net.num_activation_layers))
    stacks = [net.extract_activations(x, layer_indices) for x in inputs]
    rows = []
    for li, layer in enumerate(layer_indices):
        pair_vals = []
        for i, j in combinations(range(len(inputs)), 2):
            v = _channel_mean_pcc(stacks[i][li], stacks[j][li])
            if np.isfinite(v):
                pair_vals.append(v)
        if not pair_vals:
            rows.append((layer, float("nan"), float("nan")))
        else:
            rows.append((layer, float(np.mean(pair_vals)), float(np.std(pair_vals))))
    return np.asarray(rows, dtype=np.float64)
