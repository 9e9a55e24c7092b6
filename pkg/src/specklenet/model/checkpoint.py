"""Checkpoints: a JSON manifest plus one SPKT blob per tensor.

Loading reproduces forward outputs bit-exactly (parameters are stored and
trained in float32) and restores optimizer moments so interrupted runs can
resume mid-schedule.
"""

from __future__ import annotations

import json
from pathlib import Path

import numpy as np

from ..errors import CheckpointError, FormatError
from ..formats import read_spkt, write_spkt
from ..nn.optim import AdamState
from .arch import ArchSpec, NetworkState

CHECKPOINT_FORMAT = 1


def _blob_name(index: int, key: str) -> str:
    return f"t{index:04d}_{key.replace('.', '_')}.spkt"


def save_checkpoint(net: NetworkState, path: str | Path) -> Path:
    path = Path(path)
    path.mkdir(parents=True, exist_ok=True)
    blobs: dict[str, dict] = {"params": {}, "buffers": {}, "adam_m": {}, "adam_v": {}}
    index = 0
    for section, tensors in (
        ("params", net.params),
        ("buffers", net.buffers),
        ("adam_m", {k: s.m for k, s in net.adam.items()}),
        ("adam_v", {k: s.v for k, s in net.adam.items()}),
    ):
        for key in sorted(tensors):
            name = _blob_name(index, f"{section}_{key}")
            write_spkt(path / name, tensors[key])
            blobs[section][key] = name
            index += 1
    doc = {
        "format": CHECKPOINT_FORMAT,
        "arch": net.arch.as_dict(),
        "task": net.task,
        "epoch": net.epoch,
        "adam_t": {k: s.t for k, s in net.adam.items()},
        "blobs": blobs,
    }
    (path / "manifest.json").write_text(json.dumps(doc, indent=1, sort_keys=True))
    return path


def load_checkpoint(path: str | Path) -> NetworkState:
    path = Path(path)
    manifest = path / "manifest.json"
    if not manifest.exists():
        raise CheckpointError(f"{path}: no checkpoint manifest found")
    try:
        doc = json.loads(manifest.read_text())
    except json.JSONDecodeError as exc:
        raise CheckpointError(f"{path}: unreadable checkpoint manifest") from exc
    if doc.get("format") != CHECKPOINT_FORMAT:
        raise CheckpointError(
            f"{path}: unsupported checkpoint format {doc.get('format')!r}"
        )
    try:
        arch = ArchSpec.from_dict(doc["arch"])
        net = NetworkState(arch, doc["task"])
        blobs = doc["blobs"]
        for key, name in blobs["params"].items():
            net.params[key] = read_spkt(path / name)
        for key, name in blobs["buffers"].items():
            net.buffers[key] = read_spkt(path / name)
        adam_t = doc.get("adam_t", {})
        for key in net.params:
            state = AdamState.for_param(net.params[key])
            if key in blobs.get("adam_m", {}):
                state.m = read_spkt(path / blobs["adam_m"][key])
                state.v = read_spkt(path / blobs["adam_v"][key])
                state.t = int(adam_t.get(key, 0))
            net.adam[key] = state
        net.epoch = int(doc.get("epoch", 0))
    except (KeyError, FormatError, ValueError) as exc:
        raise CheckpointError(f"{path}: corrupt or incompatible checkpoint: {exc}") from exc

    # cheap structural sanity: a forward pass needs every expected tensor
    expected = NetworkState(arch, doc["task"])
    from .arch import build_network  # local import to avoid cycle at module load

    reference = build_network(arch, doc["task"], seed=0)
    missing = set(reference.params) - set(net.params)
    if missing:
        raise CheckpointError(f"{path}: checkpoint misses parameters {sorted(missing)[:4]}")
    for key, ref in reference.params.items():
        if net.params[key].shape != ref.shape:
            raise CheckpointError(
                f"{path}: parameter {key} has shape {net.params[key].shape}, "
                f"expected {ref.shape}"
            )
    return net
