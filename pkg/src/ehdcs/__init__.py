"""Compressive data gathering in energy-harvesting sensor networks.

Signal generation for jointly sparse sensor ensembles, energy-constrained
compressive acquisition, independent and joint sparse recovery, analytic
delivery-failure bounds, and Monte Carlo campaigns tying them together.
"""

from .analysis import (
    BoundReport,
    asymptotic_bounds,
    cs_infeasible,
    dcs_bound_report,
    dcs_necessary_violated,
    dcs_sufficient,
    oracle_pidr,
    pidr_cs_bound,
    pidr_dcs_bound,
)
from .energy import EhParams, EnergyDraw, budget, hypoexp_pdf, hypoexp_sf, sample_harvest
from .montecarlo import (
    CampaignLedger,
    EnergySearchResult,
    eh_from_ratio,
    energy_for_target,
    run_campaign,
    run_real_campaign,
)
from .recovery import RecoveryResult, cs_recover, dcs_recover, is_success, rel_sq_errors
from .scci import (
    LocationMatrix,
    ScciEnsemble,
    ScciParams,
    generate_ensemble,
    location_full_rank,
    location_matrix_dense,
    overlap_size,
)
from .sensing import (
    MeasurementSet,
    SensingEnsemble,
    acquire,
    build_extended,
    dequantize,
    gaussian_matrix,
    quantize,
    subsample_matrix,
)
from .solver import (
    ConvergenceError,
    InfeasibleProblemError,
    SolveOptions,
    SolverError,
    basis_pursuit,
    basis_pursuit_denoise,
    omp,
)
from .util import PidrEstimate, config_digest, wilson_interval

__version__ = "0.1.0"

__all__ = [
    "BoundReport",
    "CampaignLedger",
    "ConvergenceError",
    "EhParams",
    "EnergyDraw",
    "EnergySearchResult",
    "InfeasibleProblemError",
    "LocationMatrix",
    "MeasurementSet",
    "PidrEstimate",
    "RecoveryResult",
    "ScciEnsemble",
    "ScciParams",
    "SensingEnsemble",
    "SolveOptions",
    "SolverError",
    "acquire",
    "asymptotic_bounds",
    "basis_pursuit",
    "basis_pursuit_denoise",
    "budget",
    "build_extended",
    "config_digest",
    "cs_infeasible",
    "cs_recover",
    "dcs_bound_report",
    "dcs_necessary_violated",
    "dcs_recover",
    "dcs_sufficient",
    "dequantize",
    "eh_from_ratio",
    "energy_for_target",
    "gaussian_matrix",
    "generate_ensemble",
    "hypoexp_pdf",
    "hypoexp_sf",
    "is_success",
    "location_full_rank",
    "location_matrix_dense",
    "omp",
    "oracle_pidr",
    "overlap_size",
    "pidr_cs_bound",
    "pidr_dcs_bound",
    "quantize",
    "rel_sq_errors",
    "run_campaign",
    "run_real_campaign",
    "sample_harvest",
    "subsample_matrix",
    "wilson_interval",
]
