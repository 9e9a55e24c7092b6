"""Sampled optical field and intensity carriers."""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from ..errors import InvalidInputError


def _check_square_2d(grid: np.ndarray, what: str) -> None:
    if grid.ndim != 2 or grid.shape[0] != grid.shape[1]:
        raise InvalidInputError(f"{what} grid must be square 2D, got shape {grid.shape}")


@dataclass
class ComplexField:
    """A monochromatic scalar field sampled on a square grid.

    ``grid`` holds complex amplitudes, ``pitch`` the physical sample spacing
    (um) and ``wavelength`` the illumination wavelength (um).
    """

    grid: np.ndarray
    pitch: float
    wavelength: float

    def __post_init__(self) -> None:
        self.grid = np.asarray(self.grid)
        if not np.iscomplexobj(self.grid):
            self.grid = self.grid.astype(np.complex128)
        _check_square_2d(self.grid, "field")
        if self.pitch <= 0:
            raise InvalidInputError(f"pitch must be positive, got {self.pitch}")
        if self.wavelength <= 0:
            raise InvalidInputError(f"wavelength must be positive, got {self.wavelength}")

    @property
    def n(self) -> int:
        return self.grid.shape[0]

    @property
    def power(self) -> float:
        """Total power as the plain sum of |amplitude|^2 over samples."""
        return float(np.sum(np.abs(self.grid) ** 2))

    @property
    def physical_power(self) -> float:
        """Power weighted by sample area; invariant under pitch changes."""
        return self.power * self.pitch**2

    def intensity(self) -> "IntensityImage":
        return IntensityImage(np.abs(self.grid) ** 2, self.pitch)

    def coords(self) -> np.ndarray:
        """Centered 1D physical coordinates of the samples (um)."""
        n = self.n
        return (np.arange(n) - n // 2) * self.pitch


@dataclass
class IntensityImage:
    """A nonnegative intensity pattern on a square grid with physical pitch."""

    grid: np.ndarray
    pitch: float

    def __post_init__(self) -> None:
        self.grid = np.asarray(self.grid, dtype=np.float64)
        _check_square_2d(self.grid, "intensity")
        if self.pitch <= 0:
            raise InvalidInputError(f"pitch must be positive, got {self.pitch}")
        if np.any(self.grid < 0):
            raise InvalidInputError("intensity values must be nonnegative")

    @property
    def n(self) -> int:
        return self.grid.shape[0]

    def total(self) -> float:
        return float(self.grid.sum())

    def crop_center(self, size: int) -> "IntensityImage":
        n = self.n
        if size > n:
            raise InvalidInputError(f"crop size {size} exceeds grid size {n}")
        lo = n // 2 - size // 2
        return IntensityImage(self.grid[lo : lo + size, lo : lo + size].copy(), self.pitch)
