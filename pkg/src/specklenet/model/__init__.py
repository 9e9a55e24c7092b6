"""Dense-block encoder-decoder: assembly, training, inference, checkpoints."""

from .arch import ArchSpec, NetworkState, build_network, parameter_count
from .train import TrainConfig, train
from .checkpoint import load_checkpoint, save_checkpoint
from .evaluate import evaluate

__all__ = [
    "ArchSpec",
    "NetworkState",
    "build_network",
    "parameter_count",
    "TrainConfig",
    "train",
    "save_checkpoint",
    "load_checkpoint",
    "evaluate",
]
