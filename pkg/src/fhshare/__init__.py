"""Randomized frequency hopping in shared spectrum.

Exact interference spectra, achievable-rate bounds, Monte Carlo mutual
information, hopping-parameter optimization, and network-level spectrum
usage measures for decentralized frequency-hopping networks.
"""
from .bounds import (
    RateBound,
    asymptotic_multiplexing_gain,
    expected_free_subbands,
    lower_bound_rate,
    mc_mutual_information,
    regulated_rate,
    upper_bound_rate,
)
from .gains import (
    SmgProfile,
    integer_hop_mixture,
    maximize_on_interval,
    per_user_gains,
    sample_hop,
    sample_occupancy,
    smg,
    smg_fair,
    smg_fair_opt,
    two_generator_profile,
    v_opt,
)
from .measures import (
    BackoffComparison,
    ConditionCheck,
    FdConfig,
    MeasureReport,
    ReferenceValueCheck,
    UserCountPmf,
    build_measure_reports,
    epsilon_backoff_region,
    eta1_fd,
    eta1_fh,
    eta1_sufficient_condition,
    eta2_fd,
    eta2_fh,
    eta2_fh_poisson_closed,
    eta2_sufficient_condition,
    eta3,
    eta4,
    eta_afh,
)
from .mixture import (
    GaussianMixture1D,
    GaussianMixtureDiag,
    entropy_mc,
    entropy_quadrature,
    entropy_upper_bound,
    gaussian_entropy,
    log_density,
)
from .model import (
    HoppingProfile,
    InterferenceLevel,
    InterferenceSpectrum,
    NetworkScenario,
    enumerate_interference_spectrum,
    prob_interference_free,
    scenario_from_json,
    scenario_to_json,
)
from .sim import (
    SimConfig,
    SimStats,
    read_sample_dump,
    run,
    sample_received,
    write_sample_dump,
)

__version__ = "0.1.0"

__all__ = [
    "BackoffComparison",
    "ConditionCheck",
    "FdConfig",
    "GaussianMixture1D",
    "GaussianMixtureDiag",
    "HoppingProfile",
    "InterferenceLevel",
    "InterferenceSpectrum",
    "MeasureReport",
    "NetworkScenario",
    "RateBound",
    "ReferenceValueCheck",
    "SimConfig",
    "SimStats",
    "SmgProfile",
    "UserCountPmf",
    "asymptotic_multiplexing_gain",
    "build_measure_reports",
    "entropy_mc",
    "entropy_quadrature",
    "entropy_upper_bound",
    "enumerate_interference_spectrum",
    "epsilon_backoff_region",
    "eta1_fd",
    "eta1_fh",
    "eta1_sufficient_condition",
    "eta2_fd",
    "eta2_fh",
    "eta2_fh_poisson_closed",
    "eta2_sufficient_condition",
    "eta3",
    "eta4",
    "eta_afh",
    "expected_free_subbands",
    "gaussian_entropy",
    "integer_hop_mixture",
    "log_density",
    "lower_bound_rate",
    "maximize_on_interval",
    "mc_mutual_information",
    "per_user_gains",
    "prob_interference_free",
    "read_sample_dump",
    "regulated_rate",
    "run",
    "sample_hop",
    "sample_occupancy",
    "sample_received",
    "scenario_from_json",
    "scenario_to_json",
    "smg",
    "smg_fair",
    "smg_fair_opt",
    "two_generator_profile",
    "upper_bound_rate",
    "v_opt",
    "write_sample_dump",
]
