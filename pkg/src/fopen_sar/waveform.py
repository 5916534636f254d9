"""Transmit waveforms: cyclic-prefix OFDM pulse and band-limited noise pulse.

The OFDM pulse is the unitary inverse DFT of N unit-modulus symbols,
cyclically extended by M-1 samples (a cyclic suffix: the sample index simply
keeps running past N, so s[i+N] = s[i]). The random-noise pulse is white
complex circular Gaussian at the same sample rate and, by construction, the
same length, so the two waveforms are directly comparable.
"""

from dataclasses import dataclass

import numpy as np

from .rng import substream


@dataclass(frozen=True)
class OfdmSpec:
    """Parameters of the CP-OFDM pulse.

    n_subcarriers is N, n_range_cells is M (the cyclic extension is M-1
    samples), bandwidth_hz is B (the complex sample rate), symbol_seed feeds
    the BPSK symbol draw.
    """

    n_subcarriers: int
    n_range_cells: int
    bandwidth_hz: float
    symbol_seed: int = 0

    def __post_init__(self):
        if self.n_subcarriers < 1:
            raise ValueError("n_subcarriers must be >= 1")
        if self.n_range_cells < 1:
            raise ValueError("n_range_cells must be >= 1")
        if self.bandwidth_hz <= 0:
            raise ValueError("bandwidth_hz must be > 0")

    @property
    def sample_interval(self) -> float:
        return 1.0 / self.bandwidth_hz

    @property
    def pulse_length(self) -> int:
        """Samples per pulse, N + M - 1."""
        return self.n_subcarriers + self.n_range_cells - 1


@dataclass(frozen=True)
class NoiseSpec:
    """Parameters of the random-noise pulse.

    n_samples must equal the OFDM pulse length (N + M - 1) for a fair
    comparison; variance is the complex per-sample power E|s|^2.
    """

    n_samples: int
    variance: float = 1.0
    noise_seed: int = 0

    def __post_init__(self):
        if self.n_samples < 1:
            raise ValueError("n_samples must be >= 1")
        if self.variance <= 0:
            raise ValueError("variance must be > 0")


@dataclass(frozen=True)
class PulseSamples:
    """A generated baseband pulse: complex samples plus bookkeeping."""

    samples: np.ndarray
    sample_interval: float
    kind: str  # "ofdm" | "noise"

    def __post_init__(self):
        object.__setattr__(self, "samples", np.asarray(self.samples, dtype=complex))
        self.samples.setflags(write=False)

    @property
    def energy(self) -> float:
        return float(np.sum(np.abs(self.samples) ** 2))


def generate_bpsk_symbols(seed: int, n: int) -> np.ndarray:
    """Draw n BPSK symbols (exactly -1 or +1) deterministically from seed."""
    if n < 1:
        raise ValueError("symbol count must be >= 1")
    rng = substream(seed, "bpsk_symbols")
    bits = rng.integers(0, 2, size=n)
    return np.where(bits == 0, 1.0, -1.0).astype(complex)


def generate_ofdm_pulse(spec: OfdmSpec, symbols: np.ndarray | None = None) -> PulseSamples:
    """Generate the CP-OFDM pulse s_i = (1/sqrt(N)) sum_k X_k e^{j2*pi*k*i/N}.

    The index i runs 0 .. N+M-2, so the last M-1 samples repeat the first
    M-1 (cyclic suffix). If symbols is omitted, BPSK symbols are drawn from
    spec.symbol_seed; if given, every entry must have unit modulus.
    """
    n = spec.n_subcarriers
    if symbols is None:
        symbols = generate_bpsk_symbols(spec.symbol_seed, n)
    else:
        symbols = np.asarray(symbols, dtype=complex)
        if symbols.shape != (n,):
            raise ValueError(f"expected {n} symbols, got shape {symbols.shape}")
        if not np.allclose(np.abs(symbols), 1.0, rtol=0, atol=1e-12):
            raise ValueError("all symbols must have unit modulus")
    core = np.sqrt(n) * np.fft.ifft(symbols)
    samples = np.concatenate([core, core[: spec.n_range_cells - 1]])
    return PulseSamples(samples, spec.sample_interval, "ofdm")


def generate_noise_pulse(spec: NoiseSpec, sample_interval: float) -> PulseSamples:
    """Generate the band-limited noise pulse: white complex circular Gaussian.

    I and Q are independent zero-mean Gaussians with variance/2 each, so the
    complex per-sample power is spec.variance. Sampling white at the complex
    rate B realizes the band limit.
    """
    rng = substream(spec.noise_seed, "noise_waveform")
    scale = np.sqrt(spec.variance / 2.0)
    s = scale * (rng.standard_normal(spec.n_samples)
                 + 1j * rng.standard_normal(spec.n_samples))
    return PulseSamples(s, sample_interval, "noise")


def match_energy(pulse: PulseSamples, reference: PulseSamples) -> PulseSamples:
    """Rescale pulse so its total energy equals the reference pulse's.

    Used to give the noise pulse the same transmit energy as the OFDM pulse
    before echo synthesis; the OFDM pulse itself is never rescaled (its
    absolute scale carries the exact sqrt(N) recovery property).
    """
    e_ref = reference.energy
    e = pulse.energy
    if e == 0:
        raise ValueError("cannot rescale a zero-energy pulse")
    return PulseSamples(pulse.samples * np.sqrt(e_ref / e),
                        pulse.sample_interval, pulse.kind)
