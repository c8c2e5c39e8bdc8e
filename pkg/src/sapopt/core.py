"""Units, grids, wavefunction storage and elementary state algebra.

Conventions used throughout the toolkit:

* all public interfaces are SI (meters, seconds, joules);
* wavefunctions are stored on uniform grids with quadrature norm
  ``sum(|psi|^2) * cell_volume = 1`` (midpoint rule), so ``|psi|^2`` is a
  probability density in 1/m (1D) or 1/m^2 (2D);
* grids are periodic-convention: ``x_i = x_min + i*dx`` with
  ``dx = (x_max - x_min)/n`` and the right endpoint excluded, which is the
  natural layout for the FFT-based kinetic step;
* grid sizes are powers of two (required by the spectral kernel).

All types are immutable values after construction and safe to share
between parallel workers.
"""
from dataclasses import dataclass, field
from functools import cached_property

import numpy as np

from .constants import AMU, BOHR_RADIUS, HBAR
from .errors import DegenerateStateError, DomainError, GridMismatchError

NORM_TOL = 1e-8  # tolerance on the unit-norm invariant


@dataclass(frozen=True)
class Species:
    """An atomic species: mass and 3D s-wave scattering length."""
    mass: float                 # kg
    scattering_length_3d: float  # m, negative for attractive interactions
    label: str = ""

    def __post_init__(self):
        if not self.mass > 0:
            raise ValueError(f"mass must be positive, got {self.mass}")


RB85 = Species(mass=84.911789738 * AMU,
               scattering_length_3d=-369.0 * BOHR_RADIUS, label="Rb85")
RB87 = Species(mass=86.909180527 * AMU,
               scattering_length_3d=100.4 * BOHR_RADIUS, label="Rb87")

SPECIES = {"Rb85": RB85, "Rb87": RB87}


@dataclass(frozen=True)
class UnitSystem:
    """Reference scales of the trap: propagation runs with hbar=m=omega=1.

    ``ref_length = sqrt(hbar/(m*omega))`` is the oscillator length of the
    reference frequency; energies scale with ``hbar*omega``.
    """
    mass: float           # kg
    ref_frequency: float  # rad/s
    ref_length: float = field(init=False)
    ref_time: float = field(init=False)
    ref_energy: float = field(init=False)

    def __post_init__(self):
        if not (self.mass > 0 and self.ref_frequency > 0):
            raise ValueError("mass and ref_frequency must be positive")
        object.__setattr__(self, "ref_length",
                           np.sqrt(HBAR / (self.mass * self.ref_frequency)))
        object.__setattr__(self, "ref_time", 1.0 / self.ref_frequency)
        object.__setattr__(self, "ref_energy", HBAR * self.ref_frequency)
        # consistency: l^2 * m * omega = hbar to relative 1e-12
        check = self.ref_length ** 2 * self.mass * self.ref_frequency
        if abs(check / HBAR - 1.0) > 1e-12:
            raise ValueError("inconsistent unit system")


@dataclass(frozen=True)
class Grid1D:
    """Uniform periodic-convention spatial grid."""
    x_min: float   # m
    x_max: float   # m
    n_points: int

    def __post_init__(self):
        if not self.x_max > self.x_min:
            raise ValueError("x_max must exceed x_min")
        n = self.n_points
        if n < 16 or (n & (n - 1)) != 0:
            raise ValueError(
                f"n_points must be a power of two >= 16, got {n}")

    @property
    def dx(self):
        return (self.x_max - self.x_min) / self.n_points

    @cached_property
    def x(self):
        x = self.x_min + self.dx * np.arange(self.n_points)
        x.setflags(write=False)
        return x

    @cached_property
    def k(self):
        """Angular wavenumbers matching numpy's FFT ordering."""
        k = 2.0 * np.pi * np.fft.fftfreq(self.n_points, d=self.dx)
        k.setflags(write=False)
        return k

    @property
    def cell_volume(self):
        return self.dx


@dataclass(frozen=True)
class Grid2D:
    """Tensor grid for the (x, z) plane of the two-dimensional checks."""
    x_axis: Grid1D
    z_axis: Grid1D

    @property
    def shape(self):
        return (self.x_axis.n_points, self.z_axis.n_points)

    @property
    def cell_volume(self):
        return self.x_axis.dx * self.z_axis.dx


@dataclass(frozen=True)
class WaveFunction:
    """Complex amplitudes on a grid; immutable after construction."""
    grid: object           # Grid1D | Grid2D
    amplitudes: np.ndarray

    def __post_init__(self):
        amp = np.asarray(self.amplitudes, dtype=np.complex128)
        expected = (self.grid.n_points,) if isinstance(self.grid, Grid1D) \
            else self.grid.shape
        if amp.shape != expected:
            raise GridMismatchError(
                f"amplitudes shape {amp.shape} does not match grid {expected}")
        amp = amp.copy()
        amp.setflags(write=False)
        object.__setattr__(self, "amplitudes", amp)

    def norm(self):
        return float(np.sqrt(
            np.sum(np.abs(self.amplitudes) ** 2) * self.grid.cell_volume))

    def density(self):
        return np.abs(self.amplitudes) ** 2


def inner_product(a, b):
    """Overlap <a|b> = sum conj(a)*b * cell_volume on the common grid."""
    if a.grid != b.grid:
        raise GridMismatchError("states live on different grids")
    return complex(np.sum(np.conj(a.amplitudes) * b.amplitudes)
                   * a.grid.cell_volume)


def normalize(psi):
    """Return psi scaled to unit quadrature norm."""
    n = psi.norm()
    if n < 1e-300 or not np.isfinite(n):
        raise DegenerateStateError("cannot normalize a zero-norm state")
    return WaveFunction(psi.grid, psi.amplitudes / n)


def gaussian_state(grid, center, width):
    """Normalized Gaussian exp(-(x-center)^2/(2 width^2)) on a 1D grid.

    The +-4 sigma support must fit inside the grid so the state is
    resolvable and its tails do not wrap around the periodic boundary.
    """
    if width <= 0:
        raise DomainError("width must be positive")
    if center - 4 * width < grid.x_min or center + 4 * width > grid.x_max:
        raise DomainError(
            "gaussian support [center +- 4 width] escapes the grid")
    amp = np.exp(-(grid.x - center) ** 2 / (2.0 * width ** 2))
    return normalize(WaveFunction(grid, amp.astype(np.complex128)))


def gaussian_state_2d(grid2d, center_x, width_x, center_z, width_z):
    """Tensor-product Gaussian on a 2D grid (trial state for imaginary time)."""
    gx = gaussian_state(grid2d.x_axis, center_x, width_x).amplitudes
    gz = gaussian_state(grid2d.z_axis, center_z, width_z).amplitudes
    return normalize(WaveFunction(grid2d, np.outer(gx, gz)))


def reflect(psi):
    """Mirror a 1D state through x=0 on a symmetric grid.

    On the periodic-convention grid the x -> -x map is index i -> (-i) mod n;
    the state must vanish at the boundary for this to be meaningful.
    """
    amp = psi.amplitudes
    mirrored = np.roll(amp[::-1], 1)
    return WaveFunction(psi.grid, mirrored)
