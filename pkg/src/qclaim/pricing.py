"""Claims as observables, the linear pricing rule, its axioms, and calibration.

A claim pays ``payouts[j]`` when a measurement in its basis yields outcome
j; as an operator it is the Hermitian matrix with those eigenvalues on
that eigenbasis.  A pricing kernel is a discount factor together with a
pricing state q; the price of a claim X is discount * tr(q X).
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from .errors import (
    CalibrationError,
    DimensionMismatchError,
    NumericalError,
    ValidationError,
)
from .quantum import (
    DensityMatrix,
    HermitianOperator,
    MeasurementBasis,
    basis_marginals,
    eigendecompose,
    from_spectrum,
    standard_basis,
)
from .tolerances import DEFAULT_TOLERANCES, Tolerances

__all__ = [
    "FinancialClaim",
    "PricingKernel",
    "PriceQuote",
    "AxiomReport",
    "price",
    "expected_payout",
    "discount_bond",
    "arrow_debreu",
    "claim_combine",
    "check_axioms",
    "calibrate",
]


class FinancialClaim:
    """Nonnegative payout schedule attached to a measurement basis."""

    __slots__ = ("basis", "payouts")

    def __init__(self, basis: MeasurementBasis, payouts, *, tol: Tolerances = DEFAULT_TOLERANCES):
        arr = np.array(payouts, dtype=float)
        if arr.ndim != 1 or arr.shape[0] != basis.dim:
            raise DimensionMismatchError(
                f"{arr.size} payouts for a dimension-{basis.dim} basis"
            )
        if not np.isfinite(arr).all():
            raise ValidationError("payouts must be finite")
        if (arr < 0).any():
            j = int(np.argmin(arr))
            raise ValidationError(
                f"negative payout {arr[j]:.6g} at outcome {j}; claims live in the nonnegative cone"
            )
        arr.setflags(write=False)
        self.basis = basis
        self.payouts = arr

    @property
    def dim(self) -> int:
        return self.basis.dim

    def as_operator(self, *, tol: Tolerances = DEFAULT_TOLERANCES) -> HermitianOperator:
        return from_spectrum(self.payouts, self.basis, tol=tol)

    def __repr__(self) -> str:
        return f"FinancialClaim(dim={self.dim})"


class PricingKernel:
    """Discount factor in (0, 1] paired with a pricing state."""

    __slots__ = ("discount", "q")

    def __init__(self, discount: float, q: DensityMatrix):
        d = float(discount)
        if not math.isfinite(d) or not 0.0 < d <= 1.0:
            raise ValidationError(f"discount factor must lie in (0, 1], got {d!r}")
        self.discount = d
        self.q = q

    @property
    def dim(self) -> int:
        return self.q.dim

    def __repr__(self) -> str:
        return f"PricingKernel(dim={self.dim}, discount={self.discount!r})"


@dataclass(frozen=True)
class PriceQuote:
    """Observed market price for an identified claim."""

    claim_id: str
    observed_price: float

    def __post_init__(self):
        if not math.isfinite(self.observed_price) or self.observed_price < 0.0:
            raise ValidationError(
                f"quote {self.claim_id!r}: observed price must be finite and nonnegative"
            )


@dataclass(frozen=True)
class AxiomReport:
    """Outcome of the three arbitrage axiom checks against a physical state."""

    axiom1_holds: bool
    axiom2_holds: bool
    axiom3_holds: bool
    violations: tuple[tuple[str, float], ...]

    def __post_init__(self):
        all_hold = self.axiom1_holds and self.axiom2_holds and self.axiom3_holds
        if all_hold != (len(self.violations) == 0):
            raise ValidationError("axiom report inconsistent with its violation list")

    @property
    def all_hold(self) -> bool:
        return self.axiom1_holds and self.axiom2_holds and self.axiom3_holds


def price(kernel: PricingKernel, claim: FinancialClaim, *, tol: Tolerances = DEFAULT_TOLERANCES) -> float:
    """Present value: discount * tr(q X).  Nonnegative for every claim."""
    if kernel.dim != claim.dim:
        raise DimensionMismatchError(
            f"dimension-{kernel.dim} kernel against a dimension-{claim.dim} claim"
        )
    marginals = basis_marginals(kernel.q, claim.basis, tol=tol)
    return kernel.discount * float(claim.payouts @ marginals)


def expected_payout(
    state: DensityMatrix, claim: FinancialClaim, *, tol: Tolerances = DEFAULT_TOLERANCES
) -> float:
    """Expectation tr(state X) of the claim's payout."""
    if state.dim != claim.dim:
        raise DimensionMismatchError(
            f"dimension-{state.dim} state against a dimension-{claim.dim} claim"
        )
    marginals = basis_marginals(state, claim.basis, tol=tol)
    return float(claim.payouts @ marginals)


def discount_bond(n: int, *, tol: Tolerances = DEFAULT_TOLERANCES) -> FinancialClaim:
    """Claim paying 1 in every outcome; its operator is the identity."""
    basis = standard_basis(n, tol=tol)
    return FinancialClaim(basis, np.ones(basis.dim), tol=tol)


def arrow_debreu(
    basis: MeasurementBasis, outcome: int, *, tol: Tolerances = DEFAULT_TOLERANCES
) -> FinancialClaim:
    """Claim paying 1 on a single outcome (0-based) of ``basis`` and 0 elsewhere."""
    if not isinstance(outcome, (int, np.integer)) or not 0 <= outcome < basis.dim:
        raise ValidationError(
            f"outcome index {outcome!r} out of range for dimension {basis.dim}"
        )
    payouts = np.zeros(basis.dim)
    payouts[int(outcome)] = 1.0
    return FinancialClaim(basis, payouts, tol=tol)


def claim_combine(
    a: float,
    first: FinancialClaim,
    b: float,
    second: FinancialClaim,
    *,
    tol: Tolerances = DEFAULT_TOLERANCES,
) -> FinancialClaim:
    """Claim whose operator is a * X + b * Y, re-diagonalized.

    Weights must be nonnegative so the result stays in the claim cone.
    When the operators commute the payout multiset is {a u_j + b v_j}
    over the common eigenbasis.
    """
    a = float(a)
    b = float(b)
    if not (math.isfinite(a) and math.isfinite(b)) or a < 0.0 or b < 0.0:
        raise ValidationError(f"combination weights must be nonnegative, got ({a!r}, {b!r})")
    if first.dim != second.dim:
        raise DimensionMismatchError(
            f"claims of dimension {first.dim} and {second.dim}"
        )
    combined = a * first.as_operator(tol=tol).entries + b * second.as_operator(tol=tol).entries
    spectrum = eigendecompose(HermitianOperator(combined, tol=tol), tol=tol)
    payouts = spectrum.eigenvalues.copy()
    tiny = (payouts < 0.0) & (payouts >= -tol.psd)
    payouts[tiny] = 0.0
    if (payouts < 0.0).any():
        raise NumericalError("combination produced a negative payout beyond tolerance")
    return FinancialClaim(spectrum.basis, payouts, tol=tol)


def _commute(x: np.ndarray, y: np.ndarray, tol: Tolerances) -> bool:
    return float(np.abs(x @ y - y @ x).max()) <= tol.hermiticity


def check_axioms(
    kernel: PricingKernel,
    state: DensityMatrix,
    sample_claims,
    *,
    tol: Tolerances = DEFAULT_TOLERANCES,
) -> AxiomReport:
    """Test the pricing rule against the three arbitrage axioms.

    Axiom 1 (zero price iff zero expected payout) is probed on the sample
    claims plus unit claims along null-space eigenvectors of both the
    physical and the pricing state.  Axiom 2 (linearity) is checked on
    commuting pairs, including each claim against the bond.  Axiom 3 pins
    the bond price to the discount factor.  Deterministic; no randomness.
    """
    n = kernel.dim
    if state.dim != n:
        raise DimensionMismatchError(f"dimension-{state.dim} state against a dimension-{n} kernel")
    claims = list(sample_claims)
    for i, claim in enumerate(claims):
        if claim.dim != n:
            raise DimensionMismatchError(f"sample claim {i} has dimension {claim.dim}, expected {n}")
    violations: list[tuple[str, float]] = []

    # Axiom 1: zero price iff zero expectation, with null-space probes.
    probes: list[tuple[str, FinancialClaim]] = [(f"sample claim {i}", c) for i, c in enumerate(claims)]
    for label, probed in (("physical", state), ("pricing", kernel.q)):
        vals, vecs = np.linalg.eigh(probed.entries)
        if (vals < tol.null_space).any():
            eigenbasis = MeasurementBasis(vecs.T.copy(), tol=tol)
            for j in np.flatnonzero(vals < tol.null_space):
                probes.append(
                    (
                        f"unit claim on {label}-state null eigenvector {int(j)}",
                        arrow_debreu(eigenbasis, int(j), tol=tol),
                    )
                )
    axiom1 = True
    for label, claim in probes:
        value = price(kernel, claim, tol=tol)
        expectation = expected_payout(state, claim, tol=tol)
        if (value <= tol.price) != (expectation <= tol.price):
            axiom1 = False
            violations.append(
                (
                    f"axiom 1: {label}: price {value:.6g} vs expected payout {expectation:.6g}",
                    float(max(value, expectation)),
                )
            )

    # Axiom 2: linearity on commuting families (the bond commutes with everything).
    axiom2 = True
    bond = discount_bond(n, tol=tol)
    family = claims + [bond]
    labels = [f"claim {i}" for i in range(len(claims))] + ["bond"]
    operators = [c.as_operator(tol=tol).entries for c in family]
    for i in range(len(family)):
        for j in range(i + 1, len(family)):
            if not _commute(operators[i], operators[j], tol):
                continue
            for a, b in ((1.0, 1.0), (0.5, 2.0)):
                combined = claim_combine(a, family[i], b, family[j], tol=tol)
                gap = abs(
                    price(kernel, combined, tol=tol)
                    - a * price(kernel, family[i], tol=tol)
                    - b * price(kernel, family[j], tol=tol)
                )
                if gap > tol.price:
                    axiom2 = False
                    violations.append(
                        (
                            f"axiom 2: {labels[i]} and {labels[j]} with weights ({a}, {b}): linearity gap",
                            float(gap),
                        )
                    )

    # Axiom 3: the bond trades at the discount factor.
    bond_gap = abs(price(kernel, bond, tol=tol) - kernel.discount)
    axiom3 = bond_gap <= tol.price
    if not axiom3:
        violations.append(("axiom 3: bond price differs from discount factor", float(bond_gap)))

    return AxiomReport(axiom1, axiom2, axiom3, tuple(violations))


def _inner_product_row(operator: np.ndarray, n: int) -> np.ndarray:
    # Real coordinates of X in the trace pairing: tr(qX) is linear in the
    # n^2 real parameters (diagonal, then re/im of each upper entry) of q.
    row = np.empty(n * n)
    row[:n] = operator.diagonal().real
    k = n
    for i in range(n):
        for j in range(i + 1, n):
            row[k] = 2.0 * operator[j, i].real
            row[k + 1] = -2.0 * operator[j, i].imag
            k += 2
    return row


def _hermitian_from_parameters(params: np.ndarray, n: int) -> np.ndarray:
    out = np.zeros((n, n), dtype=complex)
    out[np.diag_indices(n)] = params[:n]
    k = n
    for i in range(n):
        for j in range(i + 1, n):
            out[i, j] = params[k] + 1j * params[k + 1]
            out[j, i] = params[k] - 1j * params[k + 1]
            k += 2
    return out


def calibrate(
    n: int,
    bond_price: float,
    quotes,
    *,
    tol: Tolerances = DEFAULT_TOLERANCES,
) -> PricingKernel:
    """Recover the pricing state from quoted claim prices by least squares.

    Each quote (claim, observed price) contributes one linear equation
    tr(q X) = price / bond_price in the n^2 real parameters of a Hermitian
    q; the unit-trace constraint supplies one more row.  The system must
    have full rank, the least-squares residual must stay below the
    calibration tolerance, and the solution must be a valid state.  A
    negative eigenvalue is reported as an arbitrage inconsistency, never
    repaired.
    """
    if not isinstance(n, (int, np.integer)) or n < 1:
        raise ValidationError(f"dimension must be a positive integer, got {n!r}")
    n = int(n)
    d = float(bond_price)
    if not math.isfinite(d) or not 0.0 < d <= 1.0:
        raise ValidationError(f"bond price must lie in (0, 1], got {d!r}")
    rows = []
    rhs = []
    for idx, (claim, observed) in enumerate(quotes):
        if claim.dim != n:
            raise DimensionMismatchError(
                f"quote {idx}: claim dimension {claim.dim}, expected {n}"
            )
        value = float(observed)
        if not math.isfinite(value) or value < 0.0:
            raise ValidationError(f"quote {idx}: price must be finite and nonnegative, got {value!r}")
        rows.append(_inner_product_row(claim.as_operator(tol=tol).entries, n))
        rhs.append(value / d)
    trace_row = np.zeros(n * n)
    trace_row[:n] = 1.0
    rows.append(trace_row)
    rhs.append(1.0)
    system = np.array(rows)
    target = np.array(rhs)
    rank = int(np.linalg.matrix_rank(system))
    if rank < n * n:
        raise CalibrationError(
            f"quote system is rank-deficient: rank {rank} of {n * n} Hermitian degrees of freedom"
        )
    solution, *_ = np.linalg.lstsq(system, target, rcond=None)
    residual = float(np.abs(system @ solution - target).max())
    if residual > tol.calibration:
        raise CalibrationError(
            f"quotes are mutually inconsistent: max residual {residual:.3e}"
        )
    recovered = _hermitian_from_parameters(solution, n)
    try:
        q = DensityMatrix(recovered, tol=tol)
    except ValidationError as exc:
        raise CalibrationError(
            f"calibrated state is not a valid density matrix (quotes admit arbitrage): {exc}"
        ) from exc
    return PricingKernel(d, q)
