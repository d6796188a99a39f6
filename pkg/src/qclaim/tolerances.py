"""Every floating-point threshold used by the library, in one record."""

from __future__ import annotations

import dataclasses
import math
import os
from dataclasses import dataclass

from .errors import ValidationError

TOL_SCALE_ENV = "QCLAIM_TOL_SCALE"


@dataclass(frozen=True)
class Tolerances:
    """Numerical thresholds behind every exact statement in the library.

    Exact identities hold only in exact arithmetic; any check against a
    stored matrix or a solver output goes through one of these fields.
    """

    hermiticity: float = 1e-9
    orthonormality: float = 1e-9
    trace: float = 1e-9
    psd: float = 1e-9
    null_space: float = 1e-9
    reconstruction: float = 1e-8
    price: float = 1e-8
    calibration: float = 1e-8
    budget: float = 1e-8
    marginal_floor: float = 1e-12
    correlation: float = 1e-10
    additivity: float = 1e-10
    excess_identity: float = 1e-10
    optimality: float = 1e-9
    solver_budget_rel: float = 1e-12
    completeness: float = 1e-12

    def scaled(self, factor: float) -> "Tolerances":
        """Return a copy with every threshold multiplied by ``factor``."""
        factor = float(factor)
        if not math.isfinite(factor) or factor <= 0.0:
            raise ValidationError(f"tolerance scale must be a positive finite number, got {factor!r}")
        return Tolerances(
            **{f.name: getattr(self, f.name) * factor for f in dataclasses.fields(self)}
        )


DEFAULT_TOLERANCES = Tolerances()


def tolerances_from_env(environ=None) -> Tolerances:
    """Default tolerances scaled by the ``QCLAIM_TOL_SCALE`` variable (default 1)."""
    env = os.environ if environ is None else environ
    raw = env.get(TOL_SCALE_ENV)
    if raw is None or raw.strip() == "":
        return DEFAULT_TOLERANCES
    try:
        factor = float(raw)
    except ValueError:
        raise ValidationError(f"{TOL_SCALE_ENV} must parse as a float, got {raw!r}") from None
    return DEFAULT_TOLERANCES.scaled(factor)
