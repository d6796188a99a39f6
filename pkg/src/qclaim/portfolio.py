"""Joint states over two (or more) subsystems: portfolio payouts and correlations.

A two-leg portfolio holds weighted positions in one observable per
subsystem.  Its expected payout and price split additively across the
subsystem marginals for every joint state, entangled or not; correlations
show up only at the level of covariances.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Sequence

import numpy as np

from .errors import DimensionMismatchError, NumericalError, ValidationError
from .pricing import PricingKernel
from .quantum import (
    DensityMatrix,
    HermitianOperator,
    partial_trace,
    subsystem_marginal,
)
from .tolerances import DEFAULT_TOLERANCES, Tolerances

__all__ = [
    "TwoPartyState",
    "PortfolioObservable",
    "CorrelationReport",
    "product_state",
    "separable_mixture",
    "is_ppt",
    "portfolio_observable",
    "portfolio_expected_payout",
    "portfolio_price",
    "payout_covariance",
    "nparty_portfolio_operator",
    "nparty_expected_payout",
]


class TwoPartyState:
    """Joint state over a pair of subsystems of the given dimensions."""

    __slots__ = ("dims", "rho")

    def __init__(self, dims: tuple[int, int], rho: DensityMatrix):
        n, m = dims
        if not (isinstance(n, (int, np.integer)) and isinstance(m, (int, np.integer))) or n < 1 or m < 1:
            raise ValidationError(f"subsystem dimensions must be positive integers, got {dims!r}")
        n, m = int(n), int(m)
        if n * m != rho.dim:
            raise DimensionMismatchError(
                f"subsystem dimensions {n}x{m} do not compose to state dimension {rho.dim}"
            )
        self.dims = (n, m)
        self.rho = rho

    def marginal(self, which: str, *, tol: Tolerances = DEFAULT_TOLERANCES) -> DensityMatrix:
        """Reduced state of the "first" or "second" subsystem."""
        reduced = partial_trace(self.rho, self.dims, which, tol=tol)
        return DensityMatrix(reduced.entries, tol=tol)

    def __repr__(self) -> str:
        return f"TwoPartyState(dims={self.dims})"


@dataclass(frozen=True)
class PortfolioObservable:
    """Two weighted single-subsystem positions; weights may be negative (shorts)."""

    first: HermitianOperator
    second: HermitianOperator
    weights: tuple[float, float]

    def __post_init__(self):
        w = self.weights
        if len(w) != 2 or not all(math.isfinite(float(x)) for x in w):
            raise ValidationError(f"weights must be two finite reals, got {w!r}")
        object.__setattr__(self, "weights", (float(w[0]), float(w[1])))

    @property
    def dims(self) -> tuple[int, int]:
        return (self.first.dim, self.second.dim)

    def as_operator(self, *, tol: Tolerances = DEFAULT_TOLERANCES) -> HermitianOperator:
        """Materialize w1 * (first x id) + w2 * (id x second) on the joint space."""
        n, m = self.dims
        joint = self.weights[0] * np.kron(self.first.entries, np.eye(m)) + self.weights[
            1
        ] * np.kron(np.eye(n), self.second.entries)
        return HermitianOperator(joint, tol=tol)


@dataclass(frozen=True)
class CorrelationReport:
    """Covariance of two subsystem observables under a joint state.

    ``computed_under`` records whether the state was the physical or the
    pricing one.  The covariance is raw (not normalized): callers that
    want a correlation coefficient must divide by standard deviations
    themselves and handle degenerate (zero-variance) legs.
    """

    covariance: float
    marginal_means: tuple[float, float]
    computed_under: str

    def __post_init__(self):
        if self.computed_under not in ("physical", "pricing"):
            raise ValidationError(
                f'computed_under must be "physical" or "pricing", got {self.computed_under!r}'
            )
        if not math.isfinite(self.covariance) or not all(
            math.isfinite(m) for m in self.marginal_means
        ):
            raise ValidationError("correlation report fields must be finite")


def product_state(
    first: DensityMatrix, second: DensityMatrix, *, tol: Tolerances = DEFAULT_TOLERANCES
) -> TwoPartyState:
    """Uncorrelated joint state: Kronecker product of the two factors."""
    joint = DensityMatrix(np.kron(first.entries, second.entries), tol=tol)
    return TwoPartyState((first.dim, second.dim), joint)


def separable_mixture(
    components: Sequence[tuple[float, DensityMatrix, DensityMatrix]],
    *,
    tol: Tolerances = DEFAULT_TOLERANCES,
) -> TwoPartyState:
    """Convex mixture of product states with explicit weights."""
    items = list(components)
    if not items:
        raise ValidationError("a mixture needs at least one component")
    dims = (items[0][1].dim, items[0][2].dim)
    total = 0.0
    joint = np.zeros((dims[0] * dims[1], dims[0] * dims[1]), dtype=complex)
    for k, (weight, first, second) in enumerate(items):
        w = float(weight)
        if not math.isfinite(w) or w < 0.0:
            raise ValidationError(f"component {k}: weight must be nonnegative, got {weight!r}")
        if (first.dim, second.dim) != dims:
            raise DimensionMismatchError(
                f"component {k}: factor dimensions {(first.dim, second.dim)} differ from {dims}"
            )
        joint += w * np.kron(first.entries, second.entries)
        total += w
    if abs(total - 1.0) > tol.trace:
        raise ValidationError(f"mixture weights must sum to 1, got {total:.12g}")
    return TwoPartyState(dims, DensityMatrix(joint, tol=tol))


def is_ppt(state: TwoPartyState, *, tol: Tolerances = DEFAULT_TOLERANCES) -> bool:
    """Whether the partial transpose over the second subsystem stays PSD.

    A negative eigenvalue certifies entanglement.  A nonnegative spectrum
    certifies separability only for factor dimensions 2x2 and 2x3; beyond
    those sizes PPT entangled states exist and this test stays one-sided.
    """
    n, m = state.dims
    blocks = state.rho.entries.reshape(n, m, n, m)
    transposed = blocks.transpose(0, 3, 2, 1).reshape(n * m, n * m)
    smallest = float(np.linalg.eigvalsh(transposed)[0])
    return smallest >= -tol.psd


def portfolio_observable(
    first: HermitianOperator, second: HermitianOperator, weights: tuple[float, float]
) -> PortfolioObservable:
    """Bundle one observable per subsystem with position weights."""
    return PortfolioObservable(first, second, (float(weights[0]), float(weights[1])))


def _real_trace_product(a: np.ndarray, b: np.ndarray) -> float:
    # tr(ab) for Hermitian a, b without forming the product matrix.
    return float(np.real(np.sum(a * b.T)))


def _check_dims(state: TwoPartyState, observable: PortfolioObservable) -> None:
    if state.dims != observable.dims:
        raise DimensionMismatchError(
            f"state dimensions {state.dims} differ from observable dimensions {observable.dims}"
        )


def portfolio_expected_payout(
    state: TwoPartyState,
    observable: PortfolioObservable,
    *,
    tol: Tolerances = DEFAULT_TOLERANCES,
) -> float:
    """Expected portfolio payout, verified to split across subsystem marginals.

    The joint-space expectation must agree with the weighted sum of
    single-subsystem expectations for every state; disagreement beyond
    tolerance signals a numerical fault, not a property of the state.
    """
    _check_dims(state, observable)
    joint = _real_trace_product(state.rho.entries, observable.as_operator(tol=tol).entries)
    first = partial_trace(state.rho, state.dims, "first", tol=tol)
    second = partial_trace(state.rho, state.dims, "second", tol=tol)
    split = observable.weights[0] * _real_trace_product(
        first.entries, observable.first.entries
    ) + observable.weights[1] * _real_trace_product(second.entries, observable.second.entries)
    if abs(joint - split) > tol.additivity * max(1.0, abs(joint)):
        raise NumericalError(
            f"additivity violated numerically: joint {joint!r} vs marginal split {split!r}"
        )
    return joint


def portfolio_price(
    kernel: PricingKernel,
    observable: PortfolioObservable,
    *,
    tol: Tolerances = DEFAULT_TOLERANCES,
) -> float:
    """Present value of the portfolio under a joint-space kernel, split-verified."""
    n, m = observable.dims
    if kernel.dim != n * m:
        raise DimensionMismatchError(
            f"kernel dimension {kernel.dim} does not match joint dimension {n * m}"
        )
    pricing_state = TwoPartyState((n, m), kernel.q)
    return kernel.discount * portfolio_expected_payout(pricing_state, observable, tol=tol)


def payout_covariance(
    state: TwoPartyState,
    first: HermitianOperator,
    second: HermitianOperator,
    under: str = "physical",
    *,
    tol: Tolerances = DEFAULT_TOLERANCES,
) -> CorrelationReport:
    """Covariance of two one-per-subsystem payouts under the joint state.

    Both observables are centered by their marginal means before taking
    the joint expectation.  Pass the pricing state with under="pricing" to
    label the result accordingly.
    """
    n, m = state.dims
    if first.dim != n or second.dim != m:
        raise DimensionMismatchError(
            f"observable dimensions {(first.dim, second.dim)} differ from state dimensions {state.dims}"
        )
    reduced_first = partial_trace(state.rho, state.dims, "first", tol=tol)
    reduced_second = partial_trace(state.rho, state.dims, "second", tol=tol)
    mean_first = _real_trace_product(reduced_first.entries, first.entries)
    mean_second = _real_trace_product(reduced_second.entries, second.entries)
    centered = np.kron(
        first.entries - mean_first * np.eye(n), second.entries - mean_second * np.eye(m)
    )
    covariance = _real_trace_product(state.rho.entries, centered)
    return CorrelationReport(covariance, (mean_first, mean_second), under)


def nparty_portfolio_operator(
    operators: Sequence[HermitianOperator],
    weights: Sequence[float],
    *,
    tol: Tolerances = DEFAULT_TOLERANCES,
) -> HermitianOperator:
    """Sum of weighted one-per-subsystem positions on an N-fold joint space."""
    ops = list(operators)
    w = [float(x) for x in weights]
    if not ops or len(ops) != len(w):
        raise ValidationError("need one weight per operator, at least one of each")
    if not all(math.isfinite(x) for x in w):
        raise ValidationError("weights must be finite")
    dims = [op.dim for op in ops]
    total_dim = int(np.prod(dims))
    joint = np.zeros((total_dim, total_dim), dtype=complex)
    for i, op in enumerate(ops):
        term = np.eye(1)
        for j, other in enumerate(ops):
            term = np.kron(term, other.entries if j == i else np.eye(dims[j]))
        joint += w[i] * term
    return HermitianOperator(joint, tol=tol)


def nparty_expected_payout(
    state: DensityMatrix,
    operators: Sequence[HermitianOperator],
    weights: Sequence[float],
    *,
    tol: Tolerances = DEFAULT_TOLERANCES,
) -> float:
    """Expected N-leg portfolio payout, verified additive across marginals."""
    ops = list(operators)
    dims = [op.dim for op in ops]
    joint_op = nparty_portfolio_operator(ops, weights, tol=tol)
    if state.dim != joint_op.dim:
        raise DimensionMismatchError(
            f"state dimension {state.dim} does not match joint dimension {joint_op.dim}"
        )
    joint = _real_trace_product(state.entries, joint_op.entries)
    split = 0.0
    for i, op in enumerate(ops):
        reduced = subsystem_marginal(state, dims, i, tol=tol)
        split += float(weights[i]) * _real_trace_product(reduced.entries, op.entries)
    if abs(joint - split) > tol.additivity * max(1.0, abs(joint)):
        raise NumericalError(
            f"additivity violated numerically: joint {joint!r} vs marginal split {split!r}"
        )
    return joint
