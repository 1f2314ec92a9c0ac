"""Exact and numerical checks for the Kontsevich-type Hermitian matrix model
with external field and its BKP integrable structure."""
__version__ = "0.1.0"

from .algebra import OddPolynomial, StrictPartition, strict_partitions
from .cache import CONVENTION_VERSION, QCache
from .gaussmoments import (
    BudgetExceeded,
    CoincidentSpectrumError,
    MomentRequest,
    PotentialSpec,
    SpectralData,
    cumulants,
    moment_perturbative,
    trace_moment,
)
from .hirota import (
    BKP_EQ6,
    BKP_EQ8,
    HirotaPolynomial,
    TauSeries,
    bkp_equation_residuals,
    bkp_residue_defect,
    hirota_eval,
    tau_from_moments,
    tau_from_q_expansion,
)
from .qschur import gaussian_average_q, hook_ratio_check, q_schur, verify_cauchy

__all__ = [
    "__version__",
    "OddPolynomial",
    "StrictPartition",
    "strict_partitions",
    "CONVENTION_VERSION",
    "QCache",
    "BudgetExceeded",
    "CoincidentSpectrumError",
    "MomentRequest",
    "PotentialSpec",
    "SpectralData",
    "cumulants",
    "moment_perturbative",
    "trace_moment",
    "BKP_EQ6",
    "BKP_EQ8",
    "HirotaPolynomial",
    "TauSeries",
    "bkp_equation_residuals",
    "bkp_residue_defect",
    "hirota_eval",
    "tau_from_moments",
    "tau_from_q_expansion",
    "gaussian_average_q",
    "hook_ratio_check",
    "q_schur",
    "verify_cauchy",
]
