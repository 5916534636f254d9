import numpy as np
import pytest

from fopen_sar.geometry import PlatformParams, PointTarget, Scene, make_grid
from fopen_sar.waveform import OfdmSpec


@pytest.fixture
def tiny_spec():
    """Small OFDM spec for fast unit tests."""
    return OfdmSpec(n_subcarriers=32, n_range_cells=8, bandwidth_hz=4e9,
                    symbol_seed=11)


@pytest.fixture
def tiny_platform():
    return PlatformParams(altitude_m=5000.0, velocity_mps=150.0,
                          aperture_s=0.125, carrier_hz=9e9,
                          reference_range_m=5000.0 * np.sqrt(2.0),
                          antenna_length_m=15.0, prf_hz=128.0)


@pytest.fixture
def tiny_grid(tiny_spec, tiny_platform):
    return make_grid(tiny_spec.n_range_cells, tiny_spec.bandwidth_hz,
                     tiny_platform)


@pytest.fixture
def single_target_scene(tiny_spec):
    return Scene((PointTarget(range_cell=4),), tiny_spec.n_range_cells)
