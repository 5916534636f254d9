"""Raw data synthesis: per-pulse convolution, foliage injection, noise.

Each range line is the linear convolution of the transmitted pulse (length
N+M-1) with the length-M weighting RCS coefficient vector evaluated at that
pulse's slow time, giving N+2M-2 samples. Foliage, when configured,
multiplies the full range-line spectrum per pulse; receiver noise is added
after the foliage, matching the signal-flow order of the channel model.
"""

import os
import struct
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass

import numpy as np

from .foliage import FoliageChannel, FoliageParams, FoliageRealization
from .geometry import PlatformParams, Scene, gm_vector, make_grid
from .rng import substream
from .waveform import (NoiseSpec, OfdmSpec, PulseSamples, generate_noise_pulse,
                       generate_ofdm_pulse, match_energy)

FSAR_MAGIC = b"FSAR"
FSAR_VERSION = 1
_HEADER = struct.Struct("<4sIII16s")  # magic, version, n_pulses, line_length, reserved


@dataclass(frozen=True)
class SimulationConfig:
    """Everything needed to synthesize one raw data matrix."""

    waveform_kind: str  # "ofdm" | "noise"
    ofdm: OfdmSpec
    scene: Scene
    platform: PlatformParams
    foliage: FoliageParams | None = None
    noise_variance: float = 1.0  # pre-normalization noise-pulse power
    snr_db: float | None = None  # None disables receiver noise
    master_seed: int = 0

    def __post_init__(self):
        if self.waveform_kind not in ("ofdm", "noise"):
            raise ValueError("waveform_kind must be 'ofdm' or 'noise'")
        if self.scene.n_range_cells != self.ofdm.n_range_cells:
            raise ValueError("scene and waveform disagree on the range cell count")

    @property
    def line_length(self) -> int:
        return self.ofdm.n_subcarriers + 2 * self.ofdm.n_range_cells - 2


@dataclass(frozen=True)
class RawDataMatrix:
    """Slow-time x fast-time complex echo samples plus axes."""

    data: np.ndarray
    slow_time_s: np.ndarray
    sample_interval_s: float
    waveform_kind: str

    def __post_init__(self):
        if self.data.ndim != 2:
            raise ValueError("raw data must be 2-D [pulse, fast-time]")

    @property
    def n_pulses(self) -> int:
        return self.data.shape[0]

    @property
    def line_length(self) -> int:
        return self.data.shape[1]


def transmitted_pulse(config: SimulationConfig) -> PulseSamples:
    """The pulse actually transmitted for this config.

    The noise pulse is rescaled to the energy of the config's OFDM pulse so
    the two waveforms are compared at equal transmit energy.
    """
    ofdm_pulse = generate_ofdm_pulse(config.ofdm)
    if config.waveform_kind == "ofdm":
        return ofdm_pulse
    spec = NoiseSpec(n_samples=config.ofdm.pulse_length,
                     variance=config.noise_variance,
                     noise_seed=config.master_seed)
    raw = generate_noise_pulse(spec, config.ofdm.sample_interval)
    return match_energy(raw, ofdm_pulse)


def foliage_channel(config: SimulationConfig) -> FoliageChannel | None:
    """Build the per-run foliage channel on the raw-line frequency grid."""
    if config.foliage is None:
        return None
    freqs = config.platform.carrier_hz + np.fft.fftfreq(
        config.line_length, d=config.ofdm.sample_interval)
    return FoliageChannel(config.foliage, freqs, config.platform.n_pulses(),
                          1.0 / config.platform.prf_hz)


def apply_foliage(line: np.ndarray, realization: FoliageRealization) -> np.ndarray:
    """Multiply the range line by F_k in the frequency domain."""
    line = np.asarray(line)
    if realization.freq_response.shape != line.shape:
        raise ValueError(
            f"foliage realization length {realization.freq_response.shape} "
            f"does not match line length {line.shape}")
    return np.fft.ifft(np.fft.fft(line) * realization.freq_response)


def _noise_sigma2(config: SimulationConfig, pulse: PulseSamples) -> float:
    """Per-sample complex noise variance from the configured SNR.

    SNR is referenced to the peak instantaneous power of the transmitted
    pulse, which a unit-RCS boresight target echoes unattenuated; this keeps
    the knob scene-independent.
    """
    peak = float(np.max(np.abs(pulse.samples) ** 2))
    return peak / 10.0 ** (config.snr_db / 10.0)


def synthesize_pulse(config: SimulationConfig, pulse_index: int,
                     pulse: PulseSamples | None = None,
                     channel: FoliageChannel | None = None) -> np.ndarray:
    """One raw range line z = g * s (+ foliage, + noise), length N+2M-2.

    pulse and channel may be passed in to amortize their construction across
    pulses; they must match the config.
    """
    platform = config.platform
    n_pulses = platform.n_pulses()
    if not 0 <= pulse_index < n_pulses:
        raise IndexError(f"pulse_index {pulse_index} outside [0, {n_pulses})")
    if pulse is None:
        pulse = transmitted_pulse(config)
    if channel is None:
        channel = foliage_channel(config)
    eta = platform.slow_time_axis()[pulse_index]
    grid = make_grid(config.scene.n_range_cells, config.ofdm.bandwidth_hz, platform)
    g = gm_vector(config.scene, grid, platform, eta)
    line = np.convolve(g, pulse.samples)
    if channel is not None:
        line = apply_foliage(line, channel.realize(pulse_index))
    if config.snr_db is not None:
        sigma2 = _noise_sigma2(config, pulse)
        rng = substream(config.master_seed, "receiver_noise", pulse_index)
        line = line + np.sqrt(sigma2 / 2.0) * (
            rng.standard_normal(len(line)) + 1j * rng.standard_normal(len(line)))
    return line


def synthesize_raw(config: SimulationConfig, threads: int = 1) -> RawDataMatrix:
    """Synthesize all pulses into the raw data matrix.

    Pulses are independent given the pre-generated foliage path, so they may
    be computed on a thread pool; results are assembled by index and are
    bit-identical for any thread count.
    """
    platform = config.platform
    n_pulses = platform.n_pulses()
    pulse = transmitted_pulse(config)
    channel = foliage_channel(config)
    data = np.empty((n_pulses, config.line_length), dtype=complex)

    def work(j):
        data[j] = synthesize_pulse(config, j, pulse, channel)

    if threads > 1:
        with ThreadPoolExecutor(max_workers=threads) as pool:
            list(pool.map(work, range(n_pulses)))
    else:
        for j in range(n_pulses):
            work(j)
    return RawDataMatrix(data, platform.slow_time_axis(),
                         config.ofdm.sample_interval, config.waveform_kind)


def synthesize_from_g(g: np.ndarray, pulse: PulseSamples) -> np.ndarray:
    """Raw line for an explicit weighting vector (single-pulse test hook)."""
    return np.convolve(np.asarray(g, dtype=complex), pulse.samples)


def write_fsar(path, raw: RawDataMatrix) -> None:
    """Binary export: 32-byte header then little-endian f64 (Re, Im) pairs."""
    header = _HEADER.pack(FSAR_MAGIC, FSAR_VERSION, raw.n_pulses,
                          raw.line_length, b"\0" * 16)
    flat = np.empty((raw.n_pulses, raw.line_length, 2), dtype="<f8")
    flat[:, :, 0] = raw.data.real
    flat[:, :, 1] = raw.data.imag
    tmp = str(path) + ".tmp"
    with open(tmp, "wb") as fh:
        fh.write(header)
        fh.write(flat.tobytes())
    os.replace(tmp, path)


def read_fsar(path) -> tuple[np.ndarray, int]:
    """Read an FSAR file; returns (complex matrix, version)."""
    with open(path, "rb") as fh:
        head = fh.read(_HEADER.size)
        if len(head) != _HEADER.size:
            raise ValueError("truncated FSAR header")
        magic, version, n_pulses, line_length, _ = _HEADER.unpack(head)
        if magic != FSAR_MAGIC:
            raise ValueError(f"bad magic {magic!r}, expected {FSAR_MAGIC!r}")
        body = np.frombuffer(fh.read(), dtype="<f8")
    expect = n_pulses * line_length * 2
    if body.size != expect:
        raise ValueError(f"FSAR payload has {body.size} floats, expected {expect}")
    body = body.reshape(n_pulses, line_length, 2)
    return body[:, :, 0] + 1j * body[:, :, 1], version


def write_raw_csv(path, raw: RawDataMatrix) -> None:
    """CSV export for small matrices: pulse, sample, re, im."""
    import csv

    with open(path, "w", newline="") as fh:
        w = csv.writer(fh)
        w.writerow(["pulse", "sample", "re", "im"])
        for j in range(raw.n_pulses):
            for i in range(raw.line_length):
                v = raw.data[j, i]
                w.writerow([j, i, repr(v.real), repr(v.imag)])
