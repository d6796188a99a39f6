"""Utility-optimal payout schedules, their returns, and divergence analytics.

Fixing a measurement basis reduces the problem to classical allocation
across outcomes: maximize expected utility of the payout subject to the
budget constraint that the claim's price equals the initial capital.  The
optimum equalizes marginal utility times physical probability against the
multiplier times pricing probability, outcome by outcome.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from .errors import (
    DegenerateMarginalError,
    DimensionMismatchError,
    NumericalError,
    SolverError,
    ValidationError,
)
from .pricing import PricingKernel
from .quantum import DensityMatrix, MeasurementBasis, basis_marginals
from .tolerances import DEFAULT_TOLERANCES, Tolerances

__all__ = [
    "UtilityFunction",
    "OptimalInvestment",
    "ReturnReport",
    "DivergenceReport",
    "optimal_payouts",
    "solve_multiplier",
    "expected_utility",
    "verify_optimality",
    "rate_of_return",
    "excess_return_factor",
    "kl_divergence",
]

_BRACKET = (1e-12, 1e12)
_BRACKET_LIMIT = (1e-300, 1e300)
_EXPANSION = 1e3
_MAX_BISECTIONS = 200


@dataclass(frozen=True)
class UtilityFunction:
    """Strictly increasing, strictly concave utility on positive payouts.

    Two families: ``log`` with value log(x), and ``power`` with value
    x**p / p for an exponent p < 1, p != 0.  Marginal utility maps
    (0, inf) onto itself, so its inverse is defined for every positive
    argument.
    """

    kind: str
    exponent: float | None = None

    def __post_init__(self):
        if self.kind == "log":
            if self.exponent is not None:
                raise ValidationError("log utility takes no exponent")
        elif self.kind == "power":
            p = self.exponent
            if p is None or not math.isfinite(p) or p >= 1.0 or p == 0.0:
                raise ValidationError(
                    f"power utility exponent must be finite, below 1 and nonzero, got {p!r}"
                )
        else:
            raise ValidationError(f'utility kind must be "log" or "power", got {self.kind!r}')

    @classmethod
    def log(cls) -> "UtilityFunction":
        return cls("log")

    @classmethod
    def power(cls, exponent: float) -> "UtilityFunction":
        return cls("power", float(exponent))

    def value(self, payout):
        if self.kind == "log":
            return np.log(payout)
        return np.power(payout, self.exponent) / self.exponent

    def marginal(self, payout):
        if self.kind == "log":
            return 1.0 / np.asarray(payout, dtype=float)
        return np.power(payout, self.exponent - 1.0)

    def inverse_marginal(self, slope):
        if self.kind == "log":
            return 1.0 / np.asarray(slope, dtype=float)
        return np.power(slope, 1.0 / (self.exponent - 1.0))


class OptimalInvestment:
    """Solver output: strictly positive payouts that exactly spend the budget."""

    __slots__ = ("basis", "payouts", "multiplier", "budget", "realized_price")

    def __init__(
        self,
        basis: MeasurementBasis,
        payouts,
        multiplier: float,
        budget: float,
        realized_price: float,
        *,
        tol: Tolerances = DEFAULT_TOLERANCES,
    ):
        arr = np.array(payouts, dtype=float)
        if arr.ndim != 1 or arr.shape[0] != basis.dim:
            raise DimensionMismatchError(
                f"{arr.size} payouts for a dimension-{basis.dim} basis"
            )
        if not np.isfinite(arr).all() or (arr <= 0).any():
            raise ValidationError("optimal payouts must be strictly positive and finite")
        if not (math.isfinite(multiplier) and multiplier > 0):
            raise ValidationError(f"budget multiplier must be positive, got {multiplier!r}")
        gap = abs(realized_price - budget)
        if gap > tol.budget * max(1.0, abs(budget)):
            raise ValidationError(
                f"budget not saturated: realized price {realized_price!r} vs budget {budget!r}"
            )
        arr.setflags(write=False)
        self.basis = basis
        self.payouts = arr
        self.multiplier = float(multiplier)
        self.budget = float(budget)
        self.realized_price = float(realized_price)

    def __repr__(self) -> str:
        return (
            f"OptimalInvestment(dim={self.basis.dim}, budget={self.budget!r},"
            f" multiplier={self.multiplier!r})"
        )


@dataclass(frozen=True)
class ReturnReport:
    """Gross return and its decomposition into interest and excess rates."""

    gross_return: float
    total_rate: float
    interest_rate: float
    excess_rate: float
    horizon: float

    def __post_init__(self):
        for name in ("gross_return", "total_rate", "interest_rate", "excess_rate", "horizon"):
            if not math.isfinite(getattr(self, name)):
                raise ValidationError(f"return report field {name} must be finite")
        if self.horizon <= 0:
            raise ValidationError("horizon must be positive")
        scale = max(1.0, abs(self.gross_return))
        if abs(self.gross_return - math.exp(self.total_rate * self.horizon)) > 1e-10 * scale:
            raise ValidationError("gross return inconsistent with total rate")
        if abs(self.total_rate - self.interest_rate - self.excess_rate) > 1e-10:
            raise ValidationError("rates do not decompose")


@dataclass(frozen=True)
class DivergenceReport:
    """Relative entropy between outcome distributions on a common basis."""

    kl: float
    p_marginals: np.ndarray
    q_marginals: np.ndarray

    def __post_init__(self):
        if not math.isfinite(self.kl) or self.kl < 0.0:
            raise ValidationError(f"divergence must be finite and nonnegative, got {self.kl!r}")
        for name in ("p_marginals", "q_marginals"):
            arr = np.asarray(getattr(self, name), dtype=float)
            arr.setflags(write=False)
            object.__setattr__(self, name, arr)


def _checked_distribution(values, name: str, tol: Tolerances) -> np.ndarray:
    arr = np.asarray(values, dtype=float)
    if arr.ndim != 1 or arr.size == 0:
        raise ValidationError(f"{name} must be a nonempty vector")
    if not np.isfinite(arr).all() or (arr < 0).any():
        raise ValidationError(f"{name} must be finite and nonnegative")
    total = float(arr.sum())
    if abs(total - 1.0) > tol.trace:
        raise ValidationError(f"{name} must sum to 1, got {total:.12g}")
    return arr


def solve_multiplier(
    coefficients,
    budget: float,
    discount: float,
    utility: UtilityFunction,
    *,
    tol: Tolerances = DEFAULT_TOLERANCES,
) -> float:
    """Root of the budget equation by bracketing bisection.

    ``coefficients`` is a sequence of (pricing weight, slope ratio) pairs;
    the budget map discount * sum_j I(multiplier * ratio_j) * weight_j is
    strictly decreasing, so the bracket [1e-12, 1e12] is expanded
    geometrically until it straddles the budget and then bisected at
    geometric midpoints until the relative budget error drops below
    tolerance.  Bisection is immune to the flat tails that defeat
    Newton steps here.
    """
    pairs = list(coefficients)
    if not pairs:
        raise ValidationError("at least one outcome is required")
    weights = np.array([p[0] for p in pairs], dtype=float)
    ratios = np.array([p[1] for p in pairs], dtype=float)
    if (weights <= 0).any() or (ratios <= 0).any():
        raise ValidationError("pricing weights and slope ratios must be positive")
    budget = float(budget)
    if not math.isfinite(budget) or budget <= 0:
        raise ValidationError(f"budget must be positive, got {budget!r}")
    if not 0.0 < float(discount) <= 1.0:
        raise ValidationError(f"discount factor must lie in (0, 1], got {discount!r}")

    def spent(multiplier: float) -> float:
        with np.errstate(over="ignore", divide="ignore"):
            return float(discount) * float(utility.inverse_marginal(multiplier * ratios) @ weights)

    lo, hi = _BRACKET
    while spent(lo) < budget:
        lo /= _EXPANSION
        if lo < _BRACKET_LIMIT[0]:
            raise SolverError("bracket expansion exhausted below; inputs are pathological")
    while spent(hi) > budget:
        hi *= _EXPANSION
        if hi > _BRACKET_LIMIT[1]:
            raise SolverError("bracket expansion exhausted above; inputs are pathological")
    for _ in range(_MAX_BISECTIONS):
        mid = math.sqrt(lo) * math.sqrt(hi)
        value = spent(mid)
        if abs(value - budget) <= tol.solver_budget_rel * budget:
            return mid
        if value > budget:
            lo = mid
        else:
            hi = mid
    raise SolverError(
        f"budget bisection did not reach relative error {tol.solver_budget_rel:g} "
        f"in {_MAX_BISECTIONS} iterations"
    )


def _positive_marginals(
    state: DensityMatrix,
    kernel: PricingKernel,
    basis: MeasurementBasis,
    tol: Tolerances,
) -> tuple[np.ndarray, np.ndarray]:
    p_m = basis_marginals(state, basis, tol=tol)
    q_m = basis_marginals(kernel.q, basis, tol=tol)
    for label, arr in (("physical", p_m), ("pricing", q_m)):
        small = int(np.argmin(arr))
        if arr[small] <= tol.marginal_floor:
            raise DegenerateMarginalError(
                f"{label} probability {arr[small]:.3e} at outcome {small} is below the "
                f"marginal floor; the allocation problem is ill posed on this basis"
            )
    return p_m, q_m


def optimal_payouts(
    state: DensityMatrix,
    kernel: PricingKernel,
    basis: MeasurementBasis,
    budget: float,
    utility: UtilityFunction,
    *,
    tol: Tolerances = DEFAULT_TOLERANCES,
) -> OptimalInvestment:
    """Expected-utility-maximizing payout schedule on ``basis`` under the budget.

    Outcome j receives I(multiplier * q_j / p_j) where p_j and q_j are the
    physical and pricing probabilities of the outcome and I inverts
    marginal utility; the multiplier is solved so the claim's price equals
    the budget exactly.
    """
    if not (state.dim == kernel.dim == basis.dim):
        raise DimensionMismatchError(
            f"state, kernel and basis dimensions differ: {state.dim}, {kernel.dim}, {basis.dim}"
        )
    p_m, q_m = _positive_marginals(state, kernel, basis, tol)
    ratios = q_m / p_m
    multiplier = solve_multiplier(
        list(zip(q_m, ratios)), budget, kernel.discount, utility, tol=tol
    )
    payouts = np.asarray(utility.inverse_marginal(multiplier * ratios), dtype=float)
    realized = kernel.discount * float(payouts @ q_m)
    return OptimalInvestment(basis, payouts, multiplier, float(budget), realized, tol=tol)


def expected_utility(
    state: DensityMatrix,
    basis: MeasurementBasis,
    payouts,
    utility: UtilityFunction,
    *,
    tol: Tolerances = DEFAULT_TOLERANCES,
) -> float:
    """Expectation of utility of the payout under the state's basis marginals."""
    arr = np.asarray(payouts, dtype=float)
    if arr.ndim != 1 or arr.shape[0] != basis.dim:
        raise DimensionMismatchError(f"{arr.size} payouts for a dimension-{basis.dim} basis")
    if not np.isfinite(arr).all():
        raise ValidationError("payouts must be finite")
    if (arr <= 0).any():
        j = int(np.argmin(arr))
        raise ValidationError(f"utility undefined at nonpositive payout {arr[j]:.6g} (outcome {j})")
    marginals = basis_marginals(state, basis, tol=tol)
    return float(utility.value(arr) @ marginals)


def verify_optimality(
    candidate: OptimalInvestment,
    state: DensityMatrix,
    kernel: PricingKernel,
    utility: UtilityFunction,
    trials: int = 1000,
    rng: np.random.Generator | None = None,
    *,
    tol: Tolerances = DEFAULT_TOLERANCES,
) -> bool:
    """Check the candidate is not beaten by random budget-exhausting payouts.

    Alternatives spread the budget across outcomes with uniform-on-simplex
    weights (good coverage of extreme allocations) and are scaled to spend
    the budget exactly.  Returns False as soon as any alternative exceeds
    the candidate's expected utility beyond the optimality tolerance.
    """
    if not isinstance(trials, (int, np.integer)) or trials < 1:
        raise ValidationError(f"trials must be a positive integer, got {trials!r}")
    if rng is None:
        rng = np.random.default_rng(0)
    p_m, q_m = _positive_marginals(state, kernel, candidate.basis, tol)
    base = float(utility.value(candidate.payouts) @ p_m)
    shares = rng.dirichlet(np.ones(candidate.basis.dim), size=int(trials))
    alternatives = candidate.budget * shares / (kernel.discount * q_m)
    with np.errstate(divide="ignore", over="ignore"):
        scores = utility.value(alternatives) @ p_m
    return bool(np.all(scores <= base + tol.optimality))


def excess_return_factor(p_marginals, q_marginals, *, tol: Tolerances = DEFAULT_TOLERANCES) -> float:
    """Growth factor sum_j p_j^2 / q_j of the log-optimal payout schedule."""
    p_m = _checked_distribution(p_marginals, "physical marginals", tol)
    q_m = _checked_distribution(q_marginals, "pricing marginals", tol)
    if p_m.shape != q_m.shape:
        raise DimensionMismatchError("marginal vectors differ in length")
    mask = p_m > 0.0
    if (q_m[mask] == 0.0).any():
        raise ValidationError("pricing marginals vanish where physical marginals do not")
    return float(np.sum(p_m[mask] ** 2 / q_m[mask]))


def kl_divergence(
    p_marginals, q_marginals, *, tol: Tolerances = DEFAULT_TOLERANCES
) -> DivergenceReport:
    """Relative entropy sum_j p_j log(p_j / q_j); zero-probability terms drop out."""
    p_m = _checked_distribution(p_marginals, "physical marginals", tol)
    q_m = _checked_distribution(q_marginals, "pricing marginals", tol)
    if p_m.shape != q_m.shape:
        raise DimensionMismatchError("marginal vectors differ in length")
    mask = p_m > 0.0
    if (q_m[mask] == 0.0).any():
        j = int(np.flatnonzero(mask & (q_m == 0.0))[0])
        raise ValidationError(
            f"support violation at outcome {j}: physical mass {p_m[j]:.6g} where pricing mass is 0"
        )
    kl = float(np.sum(p_m[mask] * np.log(p_m[mask] / q_m[mask])))
    return DivergenceReport(max(kl, 0.0), p_m, q_m)


def rate_of_return(
    state: DensityMatrix,
    kernel: PricingKernel,
    basis: MeasurementBasis,
    payouts,
    horizon: float = 1.0,
    *,
    verify_log_optimal: bool = False,
    tol: Tolerances = DEFAULT_TOLERANCES,
) -> ReturnReport:
    """Gross return, total/interest/excess rates of a payout schedule.

    The gross return is expected payout divided by price; the interest
    rate comes from the discount factor alone.  With
    ``verify_log_optimal`` the discounted gross return is cross-checked
    against the closed-form growth factor of the log-optimal schedule.
    """
    if not (state.dim == kernel.dim == basis.dim):
        raise DimensionMismatchError(
            f"state, kernel and basis dimensions differ: {state.dim}, {kernel.dim}, {basis.dim}"
        )
    arr = np.asarray(payouts, dtype=float)
    if arr.ndim != 1 or arr.shape[0] != basis.dim:
        raise DimensionMismatchError(f"{arr.size} payouts for a dimension-{basis.dim} basis")
    if not np.isfinite(arr).all() or (arr < 0).any():
        raise ValidationError("payouts must be finite and nonnegative")
    t = float(horizon)
    if not math.isfinite(t) or t <= 0:
        raise ValidationError(f"horizon must be positive, got {horizon!r}")
    p_m = basis_marginals(state, basis, tol=tol)
    q_m = basis_marginals(kernel.q, basis, tol=tol)
    initial = kernel.discount * float(arr @ q_m)
    if initial <= 0.0:
        raise ValidationError("payout schedule has zero price; return undefined")
    gross = float(arr @ p_m) / initial
    if gross <= 0.0:
        raise ValidationError("gross return must be positive for rate decomposition")
    interest = -math.log(kernel.discount) / t
    total = math.log(gross) / t
    report = ReturnReport(gross, total, interest, total - interest, t)
    if verify_log_optimal:
        factor = excess_return_factor(p_m, q_m, tol=tol)
        gap = abs(gross * kernel.discount - factor)
        if gap > tol.excess_identity * max(1.0, factor):
            raise NumericalError(
                f"discounted gross return {gross * kernel.discount:.12g} does not match "
                f"the log-optimal growth factor {factor:.12g}"
            )
    return report
