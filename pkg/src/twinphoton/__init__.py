"""Twin-photon transmittance estimation: phase matching, event simulation,
coincidence counting, CC/SC estimators and concentration fitting."""

from .coinc import CoincidenceResult, G2Histogram, accidental_counts, count_coincidences, g2_histogram
from .estimate import (
    AdvantageReport,
    ChannelCounts,
    TransmittanceEstimate,
    advantage,
    batch_stats,
    correct_counts,
    fresnel_index,
    quantum_efficiency,
    sensitivity_db,
    snr_db,
    transmittance_cc,
    transmittance_sc,
    uncertainty_cc,
    uncertainty_sc,
)
from .fitmodel import ConcentrationModel, FitResult, concentration_uncertainty, eval_model, fit, invert
from .phasematch import (
    CrystalConfig,
    SellmeierCoefficients,
    TuningCurvePoint,
    default_crystal,
    effective_index,
    pm_residual,
    refractive_index,
    sinc_envelope,
    solve_signal_angle,
    tuning_curve,
)
from .twinstream import SampleModel, SourceConfig, TimestampStream, apply_dead_time, generate_gate

__version__ = "0.1.0"
