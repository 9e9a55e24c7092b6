"""Random phase screens modelling thin ground-glass diffusers.

A screen is a Gaussian random surface-height field whose autocorrelation is
Gaussian with a 1/e half-width equal to the grit feature size. Surface height
converts to optical phase through the substrate index and is rescaled so the
sample phase standard deviation matches the request exactly. For deep screens
the complex transmission exp(i*phase) decorrelates over a distance
feature_size / phase_std, which sets the scattering angle and lets the
scattered light fill the system pupil.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from ..errors import DegenerateInputError, InvalidInputError
from .config import SystemConfig
from .field import ComplexField

TWO_PI = 2.0 * math.pi


@dataclass
class Diffuser:
    """A realized phase screen plus the statistics that generated it."""

    phase_screen: np.ndarray
    feature_size: float
    phase_std: float
    seed: int
    id: str

    def __post_init__(self) -> None:
        self.phase_screen = np.asarray(self.phase_screen, dtype=np.float64)
        if self.phase_screen.ndim != 2 or self.phase_screen.shape[0] != self.phase_screen.shape[1]:
            raise InvalidInputError(
                f"phase screen must be square 2D, got {self.phase_screen.shape}"
            )

    def apply(self, field: ComplexField) -> ComplexField:
        if field.grid.shape != self.phase_screen.shape:
            raise InvalidInputError(
                f"field grid {field.grid.shape} does not match screen "
                f"{self.phase_screen.shape}"
            )
        return ComplexField(
            field.grid * np.exp(1j * self.phase_screen), field.pitch, field.wavelength
        )


def generate_diffuser(
    cfg: SystemConfig,
    feature_size: float = 63.0,
    phase_std: float = TWO_PI,
    seed: int = 0,
    id: str | None = None,
) -> Diffuser:
    """Generate a reproducible phase screen on the configured grid.

    White Gaussian noise is filtered to a Gaussian autocorrelation
    rho(r) = exp(-r^2 / feature_size^2), converted to phase, and rescaled so
    the sample phase standard deviation equals ``phase_std`` exactly (zero
    mean). Regeneration from the same arguments is bit-identical.
    """
    if feature_size < 2.0 * cfg.object_pitch:
        raise InvalidInputError(
            f"feature_size {feature_size} um is below two samples "
            f"({2 * cfg.object_pitch} um); the screen would be unresolvable"
        )
    if phase_std < 0:
        raise InvalidInputError("phase_std must be nonnegative")
    n = cfg.grid_size
    rng = np.random.default_rng(seed)
    white = rng.standard_normal((n, n))

    if phase_std == 0.0:
        phase = np.zeros((n, n))
    else:
        f = (np.arange(n) - n // 2) / (n * cfg.object_pitch)
        fx, fy = np.meshgrid(f, f, indexing="ij")
        # sqrt of the Gaussian correlation spectrum: filter amplitude
        filt = np.exp(-0.5 * (np.pi * feature_size) ** 2 * (fx**2 + fy**2))
        spec = np.fft.fft2(white) * np.fft.ifftshift(filt)
        height = np.fft.ifft2(spec).real
        height -= height.mean()
        std = height.std()
        if std == 0.0:
            raise DegenerateInputError("filtered height field collapsed to a constant")
        # nominal conversion is phase = (2*pi/lambda)*(n-1)*height; the exact
        # rescale below absorbs it while pinning the sample std
        phase = height * (phase_std / std)

    return Diffuser(
        phase_screen=phase,
        feature_size=feature_size,
        phase_std=phase_std,
        seed=seed,
        id=id if id is not None else f"seed{seed}",
    )


def surface_autocorr_width(diffuser: Diffuser, pitch: float) -> float:
    """1/e half-width (um) of the sample autocorrelation of the phase surface."""
    return _autocorr_width(diffuser.phase_screen, pitch)


def transmission_autocorr_width(diffuser: Diffuser, pitch: float) -> float:
    """1/e half-width (um) of the sample autocorrelation of exp(i*phase)."""
    return _autocorr_width(np.exp(1j * diffuser.phase_screen), pitch)


def _autocorr_width(screen: np.ndarray, pitch: float) -> float:
    n = screen.shape[0]
    sample = screen - screen.mean()
    spec = np.fft.fft2(sample)
    ac = np.fft.fftshift(np.fft.ifft2(np.abs(spec) ** 2))
    mag = np.abs(ac)
    mag /= mag[n // 2, n // 2]
    target = 1.0 / math.e

    def cross(profile: np.ndarray) -> float:
        for i in range(len(profile) - 1):
            a, b = profile[i], profile[i + 1]
            if a >= target > b:
                return i + (a - target) / (a - b)
        return float(len(profile) - 1)

    w_row = cross(mag[n // 2, n // 2 :])
    w_col = cross(mag[n // 2 :, n // 2])
    return 0.5 * (w_row + w_col) * pitch
