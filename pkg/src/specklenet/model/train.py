"""Training loop: epoch shuffling, stepped learning rate, loss logging."""

from __future__ import annotations

import csv
from dataclasses import dataclass, field
from pathlib import Path

import numpy as np

from ..datagen.preprocess import preprocess
from ..errors import ConfigurationError
from ..nn.loss import cross_entropy_loss
from ..nn.optim import adam_step
from .arch import NetworkState
from .checkpoint import save_checkpoint


@dataclass(frozen=True)
class TrainConfig:
    """Epoch budget, stepped LR schedule, batching, and the run seed.

    The default schedule keeps the 3:1:1 phase proportions of a 500-epoch
    1e-4/1e-5/1e-6 ladder, compressed to the 50-epoch desk scale.
    """

    epochs: int = 50
    lr_schedule: tuple = ((0, 1e-4), (30, 1e-5), (40, 1e-6))
    batch_size: int = 16
    seed: int = 0

    def __post_init__(self) -> None:
        if self.epochs < 1:
            raise ConfigurationError("epochs must be positive")
        if self.batch_size < 2:
            raise ConfigurationError("batch_size must be at least 2 (batch norm)")
        starts = [int(e) for e, _ in self.lr_schedule]
        if not starts or starts[0] != 0:
            raise ConfigurationError("lr_schedule must start at epoch 0")
        if any(b <= a for a, b in zip(starts, starts[1:])):
            raise ConfigurationError("lr_schedule epochs must be strictly increasing")

    def lr_at(self, epoch: int) -> float:
        lr = self.lr_schedule[0][1]
        for start, value in self.lr_schedule:
            if epoch >= start:
                lr = value
        return float(lr)

    def phase_starts(self) -> list[int]:
        return [int(e) for e, _ in self.lr_schedule]

    def as_dict(self) -> dict:
        return {
            "epochs": self.epochs,
            "lr_schedule": [[int(e), float(lr)] for e, lr in self.lr_schedule],
            "batch_size": self.batch_size,
            "seed": self.seed,
        }


def record_crop(manifest, input_size: int) -> int | None:
    """Central crop (pre-binning) that feeds records to a given input size."""
    stored = 2 * int(manifest.preprocessing.get("input_size", input_size))
    needed = 2 * input_size
    if needed > stored:
        raise ConfigurationError(
            f"records hold {stored}px patches; cannot feed input size {input_size}"
        )
    return None if needed == stored else needed


def load_training_arrays(manifest, task: str, diffusers: list[str] | None = None,
                         split: str = "train", records=None, crop: int | None = None):
    """Preprocess a split (or explicit record list) into stacked arrays."""
    if records is None:
        records = manifest.split(split)
    if diffusers is not None:
        records = [r for r in records if r.diffuser_id in diffusers]
    if not records:
        raise ConfigurationError(f"no records in split {split!r} after filtering")
    xs, ts = [], []
    for rec in records:
        x, t = preprocess(manifest.load_speckle(rec), manifest.load_object(rec), task, crop)
        xs.append(x)
        ts.append(t)
    return np.stack(xs), np.stack(ts), records


def train(
    net: NetworkState,
    manifest,
    cfg: TrainConfig,
    diffusers: list[str] | None = None,
    records=None,
    checkpoint_dir: str | Path | None = None,
    log_path: str | Path | None = None,
) -> list[tuple[int, float, float]]:
    """Train in place; returns the per-epoch log as (epoch, lr, mean_loss).

    Shuffling is derived from (seed, epoch), so a fixed seed gives a
    bit-identical run. Training resumes from ``net.epoch`` (zero for a fresh
    network), which makes restarting from a phase checkpoint a no-op for the
    epochs already done. ``diffusers`` restricts the training split to the
    named diffusers; ``records`` overrides the split entirely. A trailing
    batch of one record is folded into the previous batch (batch norm needs
    at least two). Checkpoints are written at every learning-rate phase
    boundary and at the end when ``checkpoint_dir`` is given.
    """
    crop = record_crop(manifest, net.arch.input_size)
    inputs, targets, _ = load_training_arrays(
        manifest, net.task, diffusers, records=records, crop=crop
    )
    n = inputs.shape[0]
    if n < 2:
        raise ConfigurationError("training needs at least two records")

    log: list[tuple[int, float, float]] = []
    phase_starts = set(cfg.phase_starts()[1:])
    for epoch in range(net.epoch, cfg.epochs):
        lr = cfg.lr_at(epoch)
        order = np.random.default_rng((cfg.seed, epoch)).permutation(n)
        bounds = list(range(0, n, cfg.batch_size))
        losses = []
        for bi, start in enumerate(bounds):
            stop = start + cfg.batch_size
            if n - stop == 1:  # fold the would-be singleton into this batch
                stop = n
            if stop > n:
                stop = n
            idx = order[start:stop]
            if len(idx) < 2:
                continue
            x = inputs[idx]
            t = targets[idx]
            p, tape = net.forward(x, training=True, want_tape=True)
            loss, dldp = cross_entropy_loss(p, t)
            if not np.isfinite(loss):
                raise ConfigurationError(f"non-finite loss at epoch {epoch}")
            losses.append(loss)
            grads = net.backward(dldp, tape)
            for key, grad in grads.items():
                adam_step(net.params[key], grad.astype(net.dtype, copy=False),
                          net.adam[key], lr)
            if stop == n:
                break
        net.epoch = epoch + 1
        log.append((epoch, lr, float(np.mean(losses))))
        if checkpoint_dir is not None and (epoch + 1) in phase_starts:
            save_checkpoint(net, Path(checkpoint_dir) / f"epoch{epoch + 1:04d}")
    if checkpoint_dir is not None:
        save_checkpoint(net, Path(checkpoint_dir) / "final")
    if log_path is not None:
        Path(log_path).parent.mkdir(parents=True, exist_ok=True)
        with open(log_path, "w", newline="") as fh:
            writer = csv.writer(fh)
            writer.writerow(["epoch", "lr", "mean_loss"])
            writer.writerows((e, f"{lr:.3e}", f"{ls:.9f}") for e, lr, ls in log)
    return log
