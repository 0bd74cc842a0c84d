"""Entropy maximizers, rearrangements and energy bounds for vorticity on the unit disk."""

__version__ = "0.1.0"

from .errors import ConvergenceError, DomainError
from .radial import (
    EntropyKind,
    RadialProfile,
    entropy,
    extremal_profiles,
    free_energy,
    kinetic_energy,
    mass_function,
    rearrange_decreasing,
    stream_function,
)
from .maximizer import (
    MaximizerReport,
    certify,
    el_residual,
    onsager_exact,
    solve_constrained,
    solve_probability,
)
from .disk import DiskField, greens_energy, talenti_report
from .curve import concavity_report, duality_check, scan, temperature_monotonicity
from .transport import (
    brenier_map,
    energy_inequality_check,
    entropy_identity_check,
    jensen_defect,
    quantitative_jensen,
)
from .angmom import boundary_patch_energy, crossover_demo, radial_envelope_bound

__all__ = [
    "ConvergenceError",
    "DomainError",
    "EntropyKind",
    "RadialProfile",
    "entropy",
    "extremal_profiles",
    "free_energy",
    "kinetic_energy",
    "mass_function",
    "rearrange_decreasing",
    "stream_function",
    "MaximizerReport",
    "certify",
    "el_residual",
    "onsager_exact",
    "solve_constrained",
    "solve_probability",
    "DiskField",
    "greens_energy",
    "talenti_report",
    "concavity_report",
    "duality_check",
    "scan",
    "temperature_monotonicity",
    "brenier_map",
    "energy_inequality_check",
    "entropy_identity_check",
    "jensen_defect",
    "quantitative_jensen",
    "boundary_patch_energy",
    "crossover_demo",
    "radial_envelope_bound",
]
