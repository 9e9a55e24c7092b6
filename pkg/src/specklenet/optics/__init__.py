"""Fourier-optics engine: coherent fields, diffusers, and speckle formation."""

from .config import SystemConfig
from .field import ComplexField, IntensityImage
from .propagation import (
    apply_lens,
    apply_pupil,
    lens_fourier_transform,
    propagate_angular_spectrum,
)
from .diffuser import Diffuser, generate_diffuser
from .imaging import (
    add_gaussian_noise,
    characterize_isoplanatism,
    embed_object,
    make_point_object,
    measure_speckle_size,
    simulate_speckle,
)

__all__ = [
    "SystemConfig",
    "ComplexField",
    "IntensityImage",
    "propagate_angular_spectrum",
    "apply_lens",
    "apply_pupil",
    "lens_fourier_transform",
    "Diffuser",
    "generate_diffuser",
    "simulate_speckle",
    "embed_object",
    "make_point_object",
    "measure_speckle_size",
    "characterize_isoplanatism",
    "add_gaussian_noise",
]
