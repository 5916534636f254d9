"""UWB stripmap SAR simulator for foliage penetration.

Synthesizes cyclic-prefix OFDM and random-noise radar echoes from point
target scenes, passes them through a statistical foliage channel, forms
focused images with a range-Doppler chain, and quantifies sidelobe
performance (ISLR / PSLR).
"""

__version__ = "0.1.0"

from .echo import (RawDataMatrix, SimulationConfig, apply_foliage, read_fsar,
                   synthesize_pulse, synthesize_raw, write_fsar)
from .foliage import (FoliageChannel, FoliageParams, FoliageRealization,
                      fbm_path, mean_attenuation_db, phase_fluctuation,
                      sample_gamma_fluctuation)
from .geometry import (PlatformParams, PointTarget, RangeGrid, Scene,
                       azimuth_gain, gm_vector, make_grid, slant_range,
                       weighting_coefficient)
from .imaging import (FocusedImage, RangeCompressedMatrix, azimuth_compress,
                      azimuth_fft, focus, range_compress_noise,
                      range_compress_ofdm, rcmc, read_fimg, write_fimg)
from .metrics import (MetricsReport, Profile, extract_profiles, image_metrics,
                      islr, mainlobe_width_3db, pslr, upsample_complex)
from .scenario import (Scenario, load_scenario, preset_scenario, run_metrics,
                       run_pipeline, tank_scenario, validate_scenario)
from .waveform import (NoiseSpec, OfdmSpec, PulseSamples, generate_bpsk_symbols,
                       generate_noise_pulse, generate_ofdm_pulse, match_energy)
