"""System geometry for the diffuser-behind-the-object 4F imaging bench.

All lengths are in micrometres. The default numbers describe a HeNe-illuminated
amplitude object relayed by a 200 mm / 125 mm lens pair with a 9 mm iris at the
shared pupil plane, and a thin ground-glass diffuser a short distance behind
the object plane.
"""

from __future__ import annotations

from dataclasses import dataclass, field

from ..errors import InvalidInputError


def _is_power_of_two(n: int) -> bool:
    return n >= 1 and (n & (n - 1)) == 0


@dataclass(frozen=True)
class SystemConfig:
    """Physical and sampling parameters of the simulated bench.

    Attributes
    ----------
    wavelength : float
        Illumination wavelength (um).
    f1, f2 : float
        Focal lengths of the first and second relay lens (um).
    pupil_diameter : float
        Iris diameter at the common focal (pupil) plane (um).
    object_pitch : float
        Grid sample spacing at the object plane (um).
    grid_size : int
        Samples per side of the square simulation grid (power of two).
    defocus : float
        Object-plane-to-diffuser distance (um). ``None`` resolves to 0.15*f1.
    refractive_index : float
        Diffuser substrate index, used to convert surface height to phase.
    """

    wavelength: float = 0.632
    f1: float = 200_000.0
    f2: float = 125_000.0
    pupil_diameter: float = 9_000.0
    object_pitch: float = 8.0
    grid_size: int = 256
    defocus: float | None = field(default=None)
    refractive_index: float = 1.52

    def __post_init__(self) -> None:
        if self.defocus is None:
            object.__setattr__(self, "defocus", 0.15 * self.f1)
        for name in ("wavelength", "f1", "f2", "pupil_diameter", "object_pitch"):
            if getattr(self, name) <= 0:
                raise InvalidInputError(f"{name} must be strictly positive")
        if self.defocus < 0 or self.defocus >= self.f1:
            raise InvalidInputError(
                f"defocus must lie in [0, f1); got {self.defocus} vs f1={self.f1}"
            )
        if not _is_power_of_two(self.grid_size):
            raise InvalidInputError(f"grid_size must be a power of two, got {self.grid_size}")
        if not 0.0 < self.na < 1.0:
            raise InvalidInputError(f"derived NA must be in (0, 1), got {self.na}")
        if self.refractive_index <= 1.0:
            raise InvalidInputError("refractive_index must exceed 1")

    @property
    def na(self) -> float:
        """Object-side numerical aperture of the relay."""
        return self.pupil_diameter / (2.0 * self.f1)

    @property
    def magnification(self) -> float:
        """Lateral magnification from object plane to image plane."""
        return self.f2 / self.f1

    @property
    def image_pitch(self) -> float:
        """Sample spacing at the image plane (um)."""
        return self.magnification * self.object_pitch

    @property
    def fov(self) -> float:
        """Object-plane field of view (um)."""
        return self.grid_size * self.object_pitch

    @property
    def speckle_size_object(self) -> float:
        """Theoretical mean speckle size referred to the object plane (um)."""
        return self.wavelength / (2.0 * self.na)

    @property
    def speckle_size_image(self) -> float:
        """Theoretical mean speckle size at the image plane (um)."""
        return self.magnification * self.speckle_size_object

    def as_dict(self) -> dict:
        return {
            "wavelength": self.wavelength,
            "f1": self.f1,
            "f2": self.f2,
            "pupil_diameter": self.pupil_diameter,
            "object_pitch": self.object_pitch,
            "grid_size": self.grid_size,
            "defocus": self.defocus,
            "refractive_index": self.refractive_index,
        }

    @classmethod
    def from_dict(cls, d: dict) -> "SystemConfig":
        return cls(**{k: d[k] for k in cls.__dataclass_fields__ if k in d})
