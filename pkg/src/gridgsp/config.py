"""Central numeric tolerances, overridable through the environment.

All spectral and solver checks read from a single Tolerances record so the
property tests have one knob. The CLI builds its record via
``tolerances_from_env`` (variables listed below); library callers usually
keep ``DEFAULT_TOLERANCES``.
"""

from __future__ import annotations

import os
from dataclasses import dataclass, replace

_ENV_PREFIX = "GRIDGSP_TOL_"

# env var suffix -> field name
_ENV_FIELDS = {
    "SPECTRAL": "spectral_residual",
    "ORTHOGONALITY": "orthogonality",
    "SINGULARITY": "singularity",
    "PROJECTOR": "projector",
    "SOLVER_PRIMAL": "solver_primal",
    "SOLVER_DUAL": "solver_dual",
    "SOLVER_OBJECTIVE": "solver_objective",
}


@dataclass(frozen=True)
class Tolerances:
    # relative Frobenius residual of S U - U diag(lambda)
    spectral_residual: float = 1e-10
    # Frobenius residual of U^T U - I
    orthogonality: float = 1e-8
    # relative singularity threshold for solves / interior blocks
    singularity: float = 1e-12
    # relative SVD cutoff for projector pseudo-inverses
    projector: float = 1e-10
    # ADMM stopping: primal/dual residual and relative objective change
    solver_primal: float = 1e-6
    solver_dual: float = 1e-6
    solver_objective: float = 1e-8


DEFAULT_TOLERANCES = Tolerances()


def tolerances_from_env(base: Tolerances = DEFAULT_TOLERANCES) -> Tolerances:
    """Return `base` with any GRIDGSP_TOL_* environment overrides applied."""
    overrides = {}
    for suffix, field in _ENV_FIELDS.items():
        raw = os.environ.get(_ENV_PREFIX + suffix)
        if raw is not None:
            overrides[field] = float(raw)
    return replace(base, **overrides) if overrides else base
