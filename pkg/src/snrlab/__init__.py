"""Signal-to-noise analysis of lensless compressive imaging versus pinhole and lens imaging."""

from .architectures import LensGain, TrialResult, run_lai_trial, run_lci_trial, run_pai_trial
from .errors import (
    AggregationError,
    CapacityError,
    DegenerateSceneError,
    DomainError,
    SizeError,
    SnrlabError,
    SnrlabIOError,
    UsageError,
)
from .harness import SweepConfig, run_oracle, run_sweep, run_theory
from .noise_model import NoiseParams, SeedSpec, contaminate, sample_additive, sample_shot
from .scene import SceneVector, flat_scene, random_uniform_scene, scene_from_image
from .snr_analysis import (
    SnrEstimate,
    empirical_snr,
    lci_variance_oracle,
    ratio_lci_lai,
    ratio_lci_pai,
    snr_lai_theory,
    snr_lci_bound,
    snr_lci_theory,
    snr_pai_theory,
    to_db,
)
from .walsh_hadamard import SensingOperator, apply_inverse, apply_sensing, fwht, materialize

__version__ = "0.1.0"
