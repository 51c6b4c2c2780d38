"""Adaptive Bayesian phase estimation with few-photon entangled states."""

from .fock import (
    DetectorArrayConfig,
    OutcomeDistribution,
    TwoModeFockState,
    apply_phases,
    beamsplitter,
    derive_harmonic_matrix,
    output_distribution,
    projection_probability,
)
from .likelihood import (
    CalibrationMatrix,
    HarmonicLikelihood,
    RetentionVector,
    apply_retention,
    compute_retention,
    cramer_rao_bound,
    experimental_fixture,
    fisher_information,
    fisher_summary,
    fit_coefficients,
    ideal_fixture,
    noon_likelihood,
    product_likelihood,
)
from .posterior import (
    PhasePosterior,
    bayes_update,
    density,
    estimate,
    holevo_variance,
    sharpness,
    uniform_prior,
)
from .policy import PolicyConfig, adaptive_theta, expected_sharpness, nonadaptive_theta
from .runner import (
    MeasurementRecord,
    SequencePlan,
    TrialStatistics,
    bootstrap_ci,
    db_improvement,
    enumerate_plans,
    optimize_sequence,
    reference_curves,
    run_batch,
    run_trial,
    simulate_state_loss,
)

__version__ = "0.1.0"
