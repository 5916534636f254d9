"""Statistical two-way foliage transfer function F(omega, eta, gamma_g).

Per pulse, F is a complex multiplier over the range-line frequency grid:
F_k = A_k exp(j Phi_k). The amplitude combines a deterministic mean
attenuation (a power-law fit in frequency, scaled by grazing angle) with a
multiplicative fluctuation delta_A = delta_omega * delta_eta, where
delta_omega is a centered Gamma draw per frequency bin and delta_eta tracks
the flight path through the exponential of a fractional Brownian motion.
The phase is the incoherent-field fluctuation arctan(dA sin psi / (1 + dA
cos psi)) with psi uniform on [-pi, pi].

The per-bin draws (delta_omega and psi) model a fixed foliage environment
and are frozen per run by default; pulse-to-pulse variation enters through
delta_eta. Set redraw_per_pulse=True for fully independent pulses.
"""

import csv
from dataclasses import dataclass

import numpy as np

from .rng import substream

# Mean-attenuation power-law constants (dB, f in GHz) per polarization.
ATTENUATION_CONSTANTS = {
    "HH": (0.79, 0.05),  # (alpha, beta)
    "VV": (0.5, 0.45),
}


@dataclass(frozen=True)
class FoliageParams:
    polarization: str = "HH"
    grazing_angle_rad: float = np.pi / 4
    gamma_shape: float = 4.0
    gamma_scale: float = 0.25
    hurst: float = 0.4
    seed: int = 0
    redraw_per_pulse: bool = False
    spectral_smoothing_bins: int = 0
    amplitude_floor: float = 1e-6  # clamp for 1 + delta_A <= 0

    def __post_init__(self):
        if self.polarization not in ATTENUATION_CONSTANTS:
            raise ValueError(f"polarization must be one of {sorted(ATTENUATION_CONSTANTS)}")
        if not 0.0 < self.grazing_angle_rad <= np.pi / 2:
            raise ValueError("grazing_angle_rad must be in (0, pi/2]")
        if self.gamma_shape <= 0 or self.gamma_scale <= 0:
            raise ValueError("gamma_shape and gamma_scale must be > 0")
        if not 0.0 < self.hurst < 1.0:
            raise ValueError("hurst must be in (0, 1)")
        if self.spectral_smoothing_bins < 0:
            raise ValueError("spectral_smoothing_bins must be >= 0")

    @property
    def alpha(self) -> float:
        return ATTENUATION_CONSTANTS[self.polarization][0]

    @property
    def beta(self) -> float:
        return ATTENUATION_CONSTANTS[self.polarization][1]


@dataclass(frozen=True)
class FoliageRealization:
    """One pulse's transfer function with its polar decomposition."""

    freq_response: np.ndarray
    amplitude: np.ndarray
    phase: np.ndarray
    pulse_index: int

    def __post_init__(self):
        for name in ("freq_response", "amplitude", "phase"):
            arr = getattr(self, name)
            arr.setflags(write=False)


def mean_attenuation_db(freq_hz: float | np.ndarray, params: FoliageParams) -> np.ndarray:
    """Mean foliage attenuation beta * f_GHz^alpha * sin(45 deg)/sin(gamma_g), in dB."""
    f = np.asarray(freq_hz, dtype=float)
    if np.any(f <= 0):
        raise ValueError("frequency must be > 0")
    sin_g = np.sin(params.grazing_angle_rad)
    if sin_g == 0.0:
        raise ZeroDivisionError("grazing angle of 0 is singular")
    return params.beta * (f / 1e9) ** params.alpha * (np.sin(np.pi / 4) / sin_g)


def sample_gamma_fluctuation(params: FoliageParams, n: int,
                             rng: np.random.Generator) -> np.ndarray:
    """n i.i.d. Gamma(shape a, scale b) samples; mean a*b, variance a*b^2."""
    return rng.gamma(params.gamma_shape, params.gamma_scale, size=n)


def _fgn_davies_harte(n: int, hurst: float, rng: np.random.Generator) -> np.ndarray:
    """Exact fractional Gaussian noise by circulant embedding, unit variance."""
    k = np.arange(n + 1, dtype=float)
    rho = 0.5 * ((k + 1) ** (2 * hurst) + np.abs(k - 1) ** (2 * hurst)
                 - 2 * k ** (2 * hurst))
    circ = np.concatenate([rho, rho[n - 1:0:-1]])
    eig = np.fft.fft(circ).real
    if np.any(eig < -1e-12 * eig.max()):
        raise ValueError("circulant embedding not nonnegative definite")
    eig = np.maximum(eig, 0.0)
    m = 2 * n
    z = np.empty(m, dtype=complex)
    z[0] = np.sqrt(2.0) * rng.standard_normal()
    z[n] = np.sqrt(2.0) * rng.standard_normal()
    v = rng.standard_normal((n - 1, 2))
    z[1:n] = v[:, 0] + 1j * v[:, 1]
    z[n + 1:] = np.conj(z[1:n][::-1])
    return np.fft.fft(np.sqrt(eig / (2.0 * m)) * z)[:n].real


def _fgn_hosking(n: int, hurst: float, rng: np.random.Generator) -> np.ndarray:
    """O(n^2) Hosking recursion; fallback when the embedding fails."""
    gamma = lambda k: 0.5 * ((k + 1) ** (2 * hurst) + abs(k - 1) ** (2 * hurst)
                             - 2 * k ** (2 * hurst))
    out = np.empty(n)
    phi = np.zeros(n)
    prev = np.zeros(n)
    v = 1.0
    out[0] = rng.standard_normal()
    for i in range(1, n):
        phi[i - 1] = gamma(i)
        for j in range(i - 1):
            phi[j] = prev[j]
            phi[i - 1] -= prev[j] * gamma(i - 1 - j)
        phi[i - 1] /= v
        for j in range(i - 1):
            phi[j] = prev[j] - phi[i - 1] * prev[i - 2 - j]
        v *= 1 - phi[i - 1] * phi[i - 1]
        out[i] = np.sqrt(v) * rng.standard_normal() + phi[:i][::-1] @ out[:i]
        prev[:i] = phi[:i]
    return out


def fbm_path(hurst: float, n: int, step_s: float,
             rng: np.random.Generator) -> np.ndarray:
    """Fractional Brownian motion sampled at n points, step_s apart.

    path[0] = 0; increments are exact fGn scaled so the structure function
    is E[(B(t+tau) - B(t))^2] = tau^(2H) with tau in seconds.
    """
    if not 0.0 < hurst < 1.0:
        raise ValueError("hurst must be in (0, 1)")
    if n < 2:
        raise ValueError("need at least 2 path points")
    if step_s <= 0:
        raise ValueError("step_s must be > 0")
    try:
        fgn = _fgn_davies_harte(n - 1, hurst, rng)
    except ValueError:
        fgn = _fgn_hosking(n - 1, hurst, rng)
    path = np.empty(n)
    path[0] = 0.0
    np.cumsum(fgn * step_s**hurst, out=path[1:])
    return path


def phase_fluctuation(delta_a: np.ndarray, psi: np.ndarray) -> np.ndarray:
    """Incoherent-field phase arctan(dA sin psi / (1 + dA cos psi)).

    Uses the two-argument arctangent, so the result stays in (-pi, pi] even
    when 1 + dA cos(psi) goes negative; for |dA| < 1 it lies in (-pi/2, pi/2).
    """
    return np.arctan2(delta_a * np.sin(psi), 1.0 + delta_a * np.cos(psi))


def draw_uniform_phase(rng: np.random.Generator, n: int) -> np.ndarray:
    return rng.uniform(-np.pi, np.pi, size=n)


class FoliageChannel:
    """Per-run foliage realization factory for a fixed frequency grid.

    The fBm flight path (and, unless redraw_per_pulse, the per-bin Gamma
    and uniform-phase draws) is generated once up front; realizations for
    individual pulses are then independent and may be computed in parallel.
    """

    def __init__(self, params: FoliageParams, freq_grid_hz: np.ndarray,
                 n_pulses: int, pulse_interval_s: float):
        if n_pulses < 1:
            raise ValueError("n_pulses must be >= 1")
        self.params = params
        self.freq_grid_hz = np.asarray(freq_grid_hz, dtype=float)
        self.n_pulses = n_pulses
        a0_db = mean_attenuation_db(self.freq_grid_hz, params)
        self._a0_linear = 10.0 ** (-a0_db / 20.0)  # field amplitude, not power
        if n_pulses >= 2:
            path = fbm_path(params.hurst, n_pulses, pulse_interval_s,
                            substream(params.seed, "foliage_fbm"))
        else:
            path = np.zeros(1)
        self._delta_eta = np.exp(path)
        self._frozen_gamma = None
        self._frozen_psi = None
        if not params.redraw_per_pulse:
            self._frozen_gamma = self._draw_gamma(0)
            self._frozen_psi = draw_uniform_phase(
                substream(params.seed, "foliage_phase", 0), len(self.freq_grid_hz))

    def _draw_gamma(self, index: int) -> np.ndarray:
        rng = substream(self.params.seed, "foliage_gamma", index)
        raw = sample_gamma_fluctuation(self.params, len(self.freq_grid_hz), rng)
        mean = self.params.gamma_shape * self.params.gamma_scale
        d = (raw - mean) / mean  # zero-mean, relative scale; std = 1/sqrt(a)
        k = self.params.spectral_smoothing_bins
        if k > 1:
            d = np.convolve(d, np.ones(k) / k, mode="same")
        return d

    def delta_eta(self, pulse_index: int) -> float:
        """Flight-path amplitude factor exp(eta_H) at the given pulse."""
        return float(self._delta_eta[pulse_index])

    def _fluctuation(self, pulse_index: int):
        d_omega = (self._frozen_gamma if self._frozen_gamma is not None
                   else self._draw_gamma(1 + pulse_index))
        delta_a = d_omega * self._delta_eta[pulse_index]
        amp = self._a0_linear * (1.0 + delta_a)
        floor = self.params.amplitude_floor * self._a0_linear
        return np.maximum(amp, floor), delta_a

    def amplitude_fluctuation(self, pulse_index: int) -> np.ndarray:
        """A_k = A0_linear(f_k) * (1 + delta_A,k), clamped positive."""
        return self._fluctuation(pulse_index)[0]

    def realize(self, pulse_index: int) -> FoliageRealization:
        """Transfer function F_k = A_k exp(j Phi_k) for one pulse."""
        if not 0 <= pulse_index < self.n_pulses:
            raise IndexError(f"pulse_index {pulse_index} outside [0, {self.n_pulses})")
        amp, delta_a = self._fluctuation(pulse_index)
        psi = (self._frozen_psi if self._frozen_psi is not None
               else draw_uniform_phase(
                   substream(self.params.seed, "foliage_phase", 1 + pulse_index),
                   len(self.freq_grid_hz)))
        phi = phase_fluctuation(delta_a, psi)
        return FoliageRealization(amp * np.exp(1j * phi), amp, phi, pulse_index)


def dump_realizations_csv(path, channel: FoliageChannel, pulse_indices=None):
    """Write (pulse_index, bin, Re F, Im F) rows for inspection."""
    if pulse_indices is None:
        pulse_indices = range(channel.n_pulses)
    with open(path, "w", newline="") as fh:
        w = csv.writer(fh)
        w.writerow(["pulse_index", "bin", "re", "im"])
        for p in pulse_indices:
            r = channel.realize(p)
            for k, v in enumerate(r.freq_response):
                w.writerow([p, k, repr(v.real), repr(v.imag)])
