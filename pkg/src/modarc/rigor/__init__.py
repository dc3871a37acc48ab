"""Certified numerics: tail bounds, grid extrema, the D-integral and index thresholds."""

from .dintegral import d_integral_bound, derive_partition, published_step_bounds, verify_published_partition
from .extrema import CertifiedBound, certify_extremum, certify_majorant
from .tails import TailCertificate, sigma_bound, tail_bound
from .thresholds import decay_factor, theorem_threshold, threshold_report

__all__ = [
    "CertifiedBound",
    "TailCertificate",
    "certify_extremum",
    "certify_majorant",
    "d_integral_bound",
    "decay_factor",
    "derive_partition",
    "published_step_bounds",
    "sigma_bound",
    "tail_bound",
    "theorem_threshold",
    "threshold_report",
    "verify_published_partition",
]
