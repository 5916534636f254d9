"""Image formation: range compression, azimuth FFT, RCMC, azimuth compression.

CP-OFDM range lines are compressed by per-subcarrier equalization: drop the
M-1 guard samples at each end, transform, divide by the known symbols,
inverse transform, keep the first M outputs. For a noiseless, foliage-free
line this recovers sqrt(N) times the weighting coefficient vector exactly.
Noise-waveform lines are compressed by correlation with the transmitted
replica. Azimuth processing is a fixed-reference range-Doppler chain.
"""

import os
import struct
import zlib
from dataclasses import dataclass

import numpy as np
from scipy.signal import correlate

from .echo import RawDataMatrix
from .geometry import C_LIGHT, PlatformParams, RangeGrid
from .waveform import OfdmSpec, PulseSamples

FIMG_MAGIC = b"FIMG"
FIMG_VERSION = 1
_HEADER = struct.Struct("<4sIII16s")

RCMC_MODES = ("off", "spectral", "sinc8", "nearest")


@dataclass(frozen=True)
class RangeCompressedMatrix:
    data: np.ndarray  # [pulse, range_cell]
    slow_time_s: np.ndarray
    waveform_kind: str

    @property
    def n_pulses(self) -> int:
        return self.data.shape[0]

    @property
    def n_cells(self) -> int:
        return self.data.shape[1]


@dataclass(frozen=True)
class RangeDopplerMatrix:
    """Azimuth-FFT'd data; rows ordered by the attached Doppler axis."""

    data: np.ndarray  # [doppler, range_cell]
    doppler_hz: np.ndarray  # monotonically increasing, 0 at the center bin
    prf_hz: float


@dataclass(frozen=True)
class FocusedImage:
    pixels: np.ndarray  # [azimuth, range_cell]
    slow_time_s: np.ndarray
    range_axis_m: np.ndarray
    cell_extent_m: float

    @property
    def shape(self):
        return self.pixels.shape


def range_compress_ofdm(raw: RawDataMatrix, spec: OfdmSpec,
                        symbols: np.ndarray) -> RangeCompressedMatrix:
    """Equalize each pulse: FFT, divide by symbols, IFFT, keep M cells.

    The de-prefixed window starts at fast-time sample M-1; the transform is
    phase-referenced to absolute fast time (circular pre-roll by M-1), which
    is what makes the recovery g_hat = sqrt(N) * g exact for the cyclic
    pulse. Transforms are unitary (1/sqrt(N) each way).
    """
    n, m = spec.n_subcarriers, spec.n_range_cells
    symbols = np.asarray(symbols, dtype=complex)
    if symbols.shape != (n,):
        raise ValueError(f"expected {n} symbols, got {symbols.shape}")
    if np.any(symbols == 0):
        raise ZeroDivisionError("symbols must be nonzero for equalization")
    if raw.line_length != n + 2 * m - 2:
        raise ValueError(
            f"raw line length {raw.line_length} != N+2M-2 = {n + 2 * m - 2}")
    window = raw.data[:, m - 1:m - 1 + n]
    if m > 1:
        window = np.roll(window, m - 1, axis=1)
    zk = np.fft.fft(window, axis=1) / np.sqrt(n)
    g_full = np.sqrt(n) * np.fft.ifft(zk / symbols, axis=1)
    return RangeCompressedMatrix(np.ascontiguousarray(g_full[:, :m]),
                                 raw.slow_time_s, raw.waveform_kind)


def range_compress_noise(raw: RawDataMatrix, replica: PulseSamples,
                         n_cells: int) -> RangeCompressedMatrix:
    """Matched-filter each pulse against the transmitted noise replica.

    The correlation is sampled at lags 0 .. M-1 (the valid overlap of the
    N+2M-2 line with the N+M-1 replica) and normalized by the replica
    energy, so a unit single-tap channel gives a unit-magnitude peak.
    """
    rep = replica.samples
    expect = len(rep) + n_cells - 1
    if raw.line_length != expect:
        raise ValueError(
            f"raw line length {raw.line_length} incompatible with replica "
            f"({len(rep)}) and {n_cells} cells; expected {expect}")
    energy = np.sum(np.abs(rep) ** 2)
    out = correlate(raw.data, rep[None, :], mode="valid", method="fft") / energy
    return RangeCompressedMatrix(out, raw.slow_time_s, raw.waveform_kind)


def azimuth_fft(rc: RangeCompressedMatrix, prf_hz: float) -> RangeDopplerMatrix:
    """Transform each range cell to the Doppler domain (axis centered at 0)."""
    if rc.n_pulses < 2:
        raise ValueError("need at least 2 pulses for azimuth processing")
    spec = np.fft.fftshift(np.fft.fft(rc.data, axis=0), axes=0)
    fd = np.fft.fftshift(np.fft.fftfreq(rc.n_pulses, d=1.0 / prf_hz))
    return RangeDopplerMatrix(spec, fd, prf_hz)


def migration_shift_cells(platform: PlatformParams, cell_extent_m: float,
                          doppler_hz: np.ndarray) -> np.ndarray:
    """RCMC shift per Doppler bin: lambda^2 R_c f^2 / (8 v^2), in cells."""
    lam = platform.wavelength_m
    dr = lam**2 * platform.reference_range_m * np.asarray(doppler_hz) ** 2 / (
        8.0 * platform.velocity_mps**2)
    return dr / cell_extent_m


def _shift_row_sinc8(row: np.ndarray, shift: float) -> np.ndarray:
    """out[m] = row[m + shift] by 8-tap Hann-weighted sinc, zero edge fill."""
    n = len(row)
    src = np.arange(n) + shift
    i0 = np.floor(src).astype(int)
    frac = src - i0
    acc = np.zeros(n, dtype=row.dtype)
    wsum = np.zeros(n)
    for k in range(-3, 5):
        d = k - frac
        w = np.sinc(d) * 0.5 * (1.0 + np.cos(np.pi * d / 4.0))
        idx = i0 + k
        valid = (idx >= 0) & (idx < n)
        acc[valid] += row[idx[valid]] * w[valid]
        wsum[valid] += w[valid]
    ok = wsum != 0
    acc[ok] /= wsum[ok]
    return acc


def rcmc(rd: RangeDopplerMatrix, platform: PlatformParams, cell_extent_m: float,
         mode: str = "spectral") -> RangeDopplerMatrix:
    """Range cell migration correction at the fixed reference range.

    Every Doppler row is advanced in range by the reference-range migration
    law. Modes: "spectral" (exact circular FFT phase-ramp shift), "sinc8"
    (truncated 8-tap Hann-weighted sinc), "nearest" (integer shift), "off"
    (identity).
    """
    if mode not in RCMC_MODES:
        raise ValueError(f"rcmc mode must be one of {RCMC_MODES}")
    if mode == "off":
        return rd
    shifts = migration_shift_cells(platform, cell_extent_m, rd.doppler_hz)
    n_cells = rd.data.shape[1]
    if mode == "spectral":
        nu = np.fft.fftfreq(n_cells)
        ramp = np.exp(2j * np.pi * np.outer(shifts, nu))
        out = np.fft.ifft(np.fft.fft(rd.data, axis=1) * ramp, axis=1)
    elif mode == "nearest":
        out = np.zeros_like(rd.data)
        for r, s in enumerate(np.round(shifts).astype(int)):
            if s == 0:
                out[r] = rd.data[r]
            elif 0 < s < n_cells:
                out[r, :n_cells - s] = rd.data[r, s:]
            elif -n_cells < s < 0:
                out[r, -s:] = rd.data[r, :n_cells + s]
    else:
        out = np.empty_like(rd.data)
        for r, s in enumerate(shifts):
            out[r] = _shift_row_sinc8(rd.data[r], s)
    return RangeDopplerMatrix(out, rd.doppler_hz, rd.prf_hz)


def azimuth_compress(rd: RangeDopplerMatrix, platform: PlatformParams,
                     slow_time_s: np.ndarray, range_axis_m: np.ndarray,
                     cell_extent_m: float, window: str = "none") -> FocusedImage:
    """Apply the reference-range azimuth matched filter and invert the FFT.

    H(f) = exp(-j pi f^2 / K_a) with K_a = 2 v^2 / (lambda R_c); the static
    phase exp(+j 4 pi f_c R_c / c) plus the quadratic-chirp stationary-phase
    constant exp(+j pi / 4) then make a boresight reference point's peak
    real-positive.
    """
    ka = platform.doppler_rate_hz_per_s
    h = np.exp(-1j * np.pi * rd.doppler_hz**2 / ka)
    if window == "hann":
        h = h * np.hanning(len(h))
    elif window != "none":
        raise ValueError("window must be 'none' or 'hann'")
    spec = np.fft.ifftshift(rd.data * h[:, None], axes=0)
    img = np.fft.ifft(spec, axis=0)
    img = img * np.exp(1j * (4.0 * np.pi * platform.carrier_hz
                             * platform.reference_range_m / C_LIGHT + np.pi / 4))
    return FocusedImage(img, slow_time_s, range_axis_m, cell_extent_m)


def focus(raw: RawDataMatrix, spec: OfdmSpec, platform: PlatformParams,
          grid: RangeGrid, symbols: np.ndarray | None = None,
          replica: PulseSamples | None = None, rcmc_mode: str = "off",
          azimuth_window: str = "none") -> FocusedImage:
    """Full image formation for either waveform.

    The reference configuration runs with rcmc_mode="off": the raw-data
    model places every scatterer at a fixed range cell (no envelope walk),
    so the matched migration correction is zero. Enable RCMC only for data
    that actually migrates.
    """
    if raw.waveform_kind == "ofdm":
        if symbols is None:
            raise ValueError("OFDM focusing needs the transmitted symbols")
        rc = range_compress_ofdm(raw, spec, symbols)
    else:
        if replica is None:
            raise ValueError("noise focusing needs the transmitted replica")
        rc = range_compress_noise(raw, replica, spec.n_range_cells)
    rd = azimuth_fft(rc, platform.prf_hz)
    rd = rcmc(rd, platform, grid.cell_extent_m, rcmc_mode)
    cells = np.arange(spec.n_range_cells)
    return azimuth_compress(rd, platform, raw.slow_time_s,
                            grid.slant_range_of_cell(cells),
                            grid.cell_extent_m, azimuth_window)


def point_rcs_estimate(rc_line: np.ndarray, grid: RangeGrid,
                       platform: PlatformParams, eta: float,
                       n_subcarriers: int) -> np.ndarray:
    """Single-pulse RCS estimate: undo the sqrt(N) scale, two-way carrier
    phase, and beam gain of each cell's weighting coefficient (diagnostic)."""
    from .geometry import PointTarget, azimuth_gain, slant_range

    cells = np.arange(len(rc_line))
    out = np.empty(len(rc_line), dtype=complex)
    for m in cells:
        t = PointTarget(range_cell=int(m))
        r = slant_range(t, grid, platform, eta)
        gain = azimuth_gain(platform, t, grid, eta)
        phase = np.exp(4j * np.pi * platform.carrier_hz * r / C_LIGHT)
        out[m] = rc_line[m] * phase / (np.sqrt(n_subcarriers) * max(gain, 1e-300))
    return out


def write_fimg(path, img: FocusedImage) -> None:
    """Binary image export, same layout as FSAR with magic FIMG."""
    n_az, n_cells = img.pixels.shape
    header = _HEADER.pack(FIMG_MAGIC, FIMG_VERSION, n_az, n_cells, b"\0" * 16)
    flat = np.empty((n_az, n_cells, 2), dtype="<f8")
    flat[:, :, 0] = img.pixels.real
    flat[:, :, 1] = img.pixels.imag
    tmp = str(path) + ".tmp"
    with open(tmp, "wb") as fh:
        fh.write(header)
        fh.write(flat.tobytes())
    os.replace(tmp, path)


def read_fimg(path) -> np.ndarray:
    with open(path, "rb") as fh:
        head = fh.read(_HEADER.size)
        if len(head) != _HEADER.size:
            raise ValueError("truncated FIMG header")
        magic, _version, n_az, n_cells, _ = _HEADER.unpack(head)
        if magic != FIMG_MAGIC:
            raise ValueError(f"bad magic {magic!r}, expected {FIMG_MAGIC!r}")
        body = np.frombuffer(fh.read(), dtype="<f8")
    expect = n_az * n_cells * 2
    if body.size != expect:
        raise ValueError(f"FIMG payload has {body.size} floats, expected {expect}")
    body = body.reshape(n_az, n_cells, 2)
    return body[:, :, 0] + 1j * body[:, :, 1]


def _db_image(pixels: np.ndarray, floor_db: float) -> np.ndarray:
    """Magnitude in dB re the image peak, clipped at floor_db, scaled to [0, 1]."""
    mag = np.abs(pixels)
    peak = mag.max()
    if peak == 0:
        return np.zeros_like(mag)
    db = 20.0 * np.log10(np.maximum(mag / peak, 10.0 ** (floor_db / 20.0)))
    return (db - floor_db) / (-floor_db)


def write_pgm(path, img: FocusedImage, floor_db: float = -50.0) -> None:
    """16-bit binary PGM of the dB-scaled magnitude."""
    scaled = np.round(_db_image(img.pixels, floor_db) * 65535.0).astype(">u2")
    tmp = str(path) + ".tmp"
    with open(tmp, "wb") as fh:
        fh.write(f"P5\n{scaled.shape[1]} {scaled.shape[0]}\n65535\n".encode())
        fh.write(scaled.tobytes())
    os.replace(tmp, path)


def write_png(path, img: FocusedImage, floor_db: float = -50.0) -> None:
    """16-bit grayscale PNG of the dB-scaled magnitude (stdlib encoder)."""
    scaled = np.round(_db_image(img.pixels, floor_db) * 65535.0).astype(">u2")
    h, w = scaled.shape
    raw = b"".join(b"\x00" + scaled[r].tobytes() for r in range(h))

    def chunk(tag, payload):
        out = struct.pack(">I", len(payload)) + tag + payload
        return out + struct.pack(">I", zlib.crc32(tag + payload) & 0xFFFFFFFF)

    ihdr = struct.pack(">IIBBBBB", w, h, 16, 0, 0, 0, 0)  # 16-bit grayscale
    png = (b"\x89PNG\r\n\x1a\n" + chunk(b"IHDR", ihdr)
           + chunk(b"IDAT", zlib.compress(raw, 6)) + chunk(b"IEND", b""))
    tmp = str(path) + ".tmp"
    with open(tmp, "wb") as fh:
        fh.write(png)
    os.replace(tmp, path)
