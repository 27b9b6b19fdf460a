"""Numerical tolerances shared by every module.

Every threshold used anywhere in the package lives here so tests and the CLI
can pin or override them in one place.
"""

from __future__ import annotations

from dataclasses import dataclass, replace


@dataclass(frozen=True)
class Tolerances:
    hermitian: float = 1e-12  # asymmetry absorbed by symmetrization
    pure_norm: float = 1e-12
    density_psd: float = 1e-10
    density_trace: float = 1e-10
    povm: float = 1e-10
    sqrt_negative: float = 1e-8  # eigenvalues below -this reject psd_sqrt
    support: float = 1e-12  # relative cutoff for inverse square roots
    degeneracy: float = 1e-12
    helstrom_kernel: float = 1e-12
    completion_rank: float = 1e-10  # relative to lambda_max(V)
    completion_floor: float = 1e-12
    genericity_floor: float = 1e-3
    kernel_rank: float = 1e-9  # relative to lambda_max(M_b)
    extremal: float = 1e-10
    phase_overlap: float = 1e-12
    det_orthogonal: float = 1e-6
    orthogonal: float = 1e-9
    overlap_slack: float = 1e-12
    bargmann_modulus: float = 1e-14
    profile: float = 1e-8
    dedup_overlap: float = 1e-10


DEFAULT = Tolerances()


def with_overrides(**kwargs: float) -> Tolerances:
    """Return the default tolerances with selected fields replaced."""
    return replace(DEFAULT, **{k: v for k, v in kwargs.items() if v is not None})
