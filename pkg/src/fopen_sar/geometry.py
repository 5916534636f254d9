"""Stripmap broadside geometry: platform, targets, range-cell grid.

Coordinates: the platform flies along-track (azimuth) at altitude H_p with
effective velocity v_p; slow time eta is centered on the scene so eta = 0 is
the closest approach of a broadside (y = 0) target. Range cells are slant
range bins of extent c/(2B), laid out so cell M//2 sits at the reference
slant range R_c at closest approach.
"""

import warnings
from dataclasses import dataclass

import numpy as np

C_LIGHT = 299792458.0


@dataclass(frozen=True)
class PlatformParams:
    altitude_m: float
    velocity_mps: float
    aperture_s: float
    carrier_hz: float
    reference_range_m: float
    antenna_length_m: float | None = None
    prf_hz: float = 256.0

    def __post_init__(self):
        if self.altitude_m <= 0:
            raise ValueError("altitude_m must be > 0")
        if self.velocity_mps <= 0:
            raise ValueError("velocity_mps must be > 0")
        if self.aperture_s <= 0:
            raise ValueError("aperture_s must be > 0")
        if self.carrier_hz <= 0:
            raise ValueError("carrier_hz must be > 0")
        if self.reference_range_m < self.altitude_m:
            raise ValueError("reference_range_m must be >= altitude_m")
        if self.prf_hz <= 0:
            raise ValueError("prf_hz must be > 0")
        if self.antenna_length_m is None:
            object.__setattr__(self, "antenna_length_m", self.derived_antenna_length())
        elif self.antenna_length_m <= 0:
            raise ValueError("antenna_length_m must be > 0")
        # Azimuth Nyquist check is advisory: desk-scale runs may under-sample.
        if self.prf_hz < self.doppler_bandwidth_hz:
            warnings.warn(
                f"prf {self.prf_hz:.1f} Hz below Doppler bandwidth "
                f"{self.doppler_bandwidth_hz:.1f} Hz (2*v/L_a): azimuth aliasing",
                stacklevel=2,
            )

    @property
    def wavelength_m(self) -> float:
        return C_LIGHT / self.carrier_hz

    @property
    def doppler_bandwidth_hz(self) -> float:
        """Beam-limited Doppler bandwidth 2*v_p/L_a."""
        return 2.0 * self.velocity_mps / self.antenna_length_m

    @property
    def doppler_rate_hz_per_s(self) -> float:
        """Azimuth chirp rate K_a = 2*v_p^2/(lambda*R_c) at the reference range."""
        return 2.0 * self.velocity_mps**2 / (self.wavelength_m * self.reference_range_m)

    def derived_antenna_length(self) -> float:
        """Antenna length that makes the 3-dB footprint dwell equal T_a."""
        return self.wavelength_m * self.reference_range_m / (
            self.velocity_mps * self.aperture_s)

    def n_pulses(self) -> int:
        return int(round(self.aperture_s * self.prf_hz))

    def slow_time_axis(self) -> np.ndarray:
        """Slow-time sample instants, uniform at 1/prf over [-T_a/2, T_a/2)."""
        n = self.n_pulses()
        return (np.arange(n) - n / 2.0) / self.prf_hz


@dataclass(frozen=True)
class PointTarget:
    """Point scatterer: fixed range cell, along-track position, complex RCS."""

    range_cell: int
    azimuth_m: float = 0.0
    rcs: complex = 1.0 + 0.0j


@dataclass(frozen=True)
class Scene:
    targets: tuple
    n_range_cells: int

    def __post_init__(self):
        object.__setattr__(self, "targets", tuple(self.targets))
        for t in self.targets:
            if not 0 <= t.range_cell <= self.n_range_cells - 1:
                raise ValueError(
                    f"target cell {t.range_cell} outside [0, {self.n_range_cells - 1}]")
        seen = {}
        for t in self.targets:
            key = (t.range_cell, float(t.azimuth_m))
            if key in seen:
                raise ValueError(
                    f"two targets share cell {t.range_cell} and azimuth {t.azimuth_m} m")
            seen[key] = t


@dataclass(frozen=True)
class RangeGrid:
    """Slant-range cell grid: pitch c/(2B), cell M//2 at the reference range."""

    n_cells: int
    bandwidth_hz: float
    reference_range_m: float
    altitude_m: float

    @property
    def cell_extent_m(self) -> float:
        return C_LIGHT / (2.0 * self.bandwidth_hz)

    def slant_range_of_cell(self, cell: int | np.ndarray) -> np.ndarray:
        """Slant range at closest approach for a target in the given cell."""
        return self.reference_range_m + (np.asarray(cell) - self.n_cells // 2) * self.cell_extent_m

    def ground_x_of_cell(self, cell: int | np.ndarray) -> np.ndarray:
        """Ground-plane across-track coordinate x_m of a cell."""
        r = self.slant_range_of_cell(cell)
        arg = r**2 - self.altitude_m**2
        if np.any(arg < 0):
            raise ValueError("range grid extends above the nadir point")
        return np.sqrt(arg)


def make_grid(n_cells: int, bandwidth_hz: float, platform: PlatformParams) -> RangeGrid:
    return RangeGrid(n_cells, bandwidth_hz, platform.reference_range_m, platform.altitude_m)


def slant_range(target: PointTarget, grid: RangeGrid, platform: PlatformParams,
                eta: float | np.ndarray) -> np.ndarray:
    """R(eta) = sqrt(x_m^2 + H_p^2 + v_p^2 (eta - y/v_p)^2) for the target."""
    x = grid.ground_x_of_cell(target.range_cell)
    du = platform.velocity_mps * np.asarray(eta) - target.azimuth_m
    return np.sqrt(x**2 + platform.altitude_m**2 + du**2)


def azimuth_gain(platform: PlatformParams, target: PointTarget, grid: RangeGrid,
                 eta: float | np.ndarray) -> np.ndarray:
    """Two-way azimuth beam weighting sinc(L_a * theta / lambda)^2.

    theta is the off-boresight angle in the slant plane relative to the
    target's closest-approach range; normalized sinc, so boresight gives 1.
    """
    r0 = grid.slant_range_of_cell(target.range_cell)
    du = platform.velocity_mps * np.asarray(eta) - target.azimuth_m
    theta = np.arctan2(du, r0)
    return np.sinc(platform.antenna_length_m * theta / platform.wavelength_m) ** 2


def weighting_coefficient(target: PointTarget, grid: RangeGrid,
                          platform: PlatformParams,
                          eta: float | np.ndarray) -> np.ndarray:
    """g_m = sigma_m * eps_a(eta) * exp(-j 4 pi f_c R_m(eta) / c)."""
    r = slant_range(target, grid, platform, eta)
    gain = azimuth_gain(platform, target, grid, eta)
    phase = np.exp(-4j * np.pi * platform.carrier_hz * r / C_LIGHT)
    return target.rcs * gain * phase


def gm_vector(scene: Scene, grid: RangeGrid, platform: PlatformParams,
              eta: float) -> np.ndarray:
    """Length-M weighting RCS coefficient vector at slow time eta.

    Cell m holds the coherent sum over all targets in that cell; empty
    cells are zero.
    """
    g = np.zeros(scene.n_range_cells, dtype=complex)
    for t in scene.targets:
        g[t.range_cell] += weighting_coefficient(t, grid, platform, eta)
    return g
