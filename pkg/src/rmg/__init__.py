"""Radar muscle-deformation sensing: FMCW phase recovery and deformation-EMG modelling."""
from .domain import (
    SPEED_OF_LIGHT,
    BiosignalTrace,
    ChirpCube,
    DeformationModel,
    PhaseSignal,
    RadarConfig,
    RangeBinSignal,
    RangeProfile,
    make_radar_config,
)
from .simulator import (
    Constant,
    NoiseSpec,
    PiecewiseLinear,
    Sinusoid,
    TargetTrajectory,
    synthesize_beat_sample,
    synthesize_cube,
)
from .ranging import extract_range_bin_signal, range_fft, select_range_bin
from .phase import (
    arctangent_demodulate,
    check_velocity_budget,
    dc_correct,
    phase_to_displacement,
    unwrap,
)
from .pipeline import process_cube
from .biosignal import AlignedPair, align_to_slow_time, envelope, normalize
from .analysis import (
    deformation_rate_report,
    fit_exponential,
    hysteresis_curve,
    predict_deformation,
    r_squared,
    segment_stages,
)

__version__ = "0.1.0"
