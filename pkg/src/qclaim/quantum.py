"""Dense Hermitian linear algebra on finite-dimensional complex state spaces.

Observables are Hermitian matrices, states are unit-trace positive
semidefinite ones, and measurements are complete orthonormal bases.
Everything is stored densely; the intended regime is dimension <= 64.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Sequence

import numpy as np

from .errors import DimensionMismatchError, NumericalError, ValidationError
from .tolerances import DEFAULT_TOLERANCES, Tolerances

__all__ = [
    "HermitianOperator",
    "DensityMatrix",
    "MeasurementBasis",
    "Spectrum",
    "standard_basis",
    "identity_operator",
    "from_spectrum",
    "eigendecompose",
    "born_probability",
    "basis_marginals",
    "absolutely_continuous",
    "equivalent_states",
    "tensor_product",
    "partial_trace",
    "subsystem_marginal",
    "evolve",
]


def _complex_square(entries, what: str) -> np.ndarray:
    arr = np.array(entries, dtype=complex)
    if arr.ndim != 2 or arr.shape[0] != arr.shape[1]:
        raise ValidationError(f"{what} must be a square matrix, got shape {arr.shape}")
    if arr.shape[0] == 0:
        raise ValidationError(f"{what} must have dimension at least 1")
    if not np.isfinite(arr).all():
        raise ValidationError(f"{what} contains non-finite entries")
    return arr


class HermitianOperator:
    """Square complex matrix equal to its conjugate transpose within tolerance.

    The entry array is copied on construction and frozen; instances are
    safe to share across threads.
    """

    __slots__ = ("entries",)

    def __init__(self, entries, *, tol: Tolerances = DEFAULT_TOLERANCES):
        arr = _complex_square(entries, type(self).__name__)
        deviation = float(np.abs(arr - arr.conj().T).max())
        if deviation > tol.hermiticity:
            raise ValidationError(
                f"{type(self).__name__} is not Hermitian: max |A - A^dagger| = {deviation:.3e}"
            )
        arr.setflags(write=False)
        self.entries = arr

    @property
    def dim(self) -> int:
        return self.entries.shape[0]

    def trace(self) -> float:
        return float(self.entries.trace().real)

    def __repr__(self) -> str:
        return f"{type(self).__name__}(dim={self.dim})"


class DensityMatrix(HermitianOperator):
    """Unit-trace, positive-semidefinite Hermitian operator: a state."""

    __slots__ = ()

    def __init__(self, entries, *, tol: Tolerances = DEFAULT_TOLERANCES):
        super().__init__(entries, tol=tol)
        trace = complex(self.entries.trace())
        if abs(trace - 1.0) > tol.trace:
            raise ValidationError(f"state trace must be 1, got {trace.real:.12g}")
        smallest = float(np.linalg.eigvalsh(self.entries)[0])
        if smallest < -tol.psd:
            raise ValidationError(
                f"state is not positive semidefinite: smallest eigenvalue {smallest:.3e}"
            )


class MeasurementBasis:
    """Complete orthonormal family; ``vectors[j]`` is the j-th outcome vector."""

    __slots__ = ("vectors",)

    def __init__(self, vectors, *, tol: Tolerances = DEFAULT_TOLERANCES):
        arr = _complex_square(vectors, "measurement basis")
        gram = arr.conj() @ arr.T
        deviation = float(np.abs(gram - np.eye(arr.shape[0])).max())
        if deviation > tol.orthonormality:
            raise ValidationError(
                f"basis vectors are not orthonormal: max Gram deviation {deviation:.3e}"
            )
        arr.setflags(write=False)
        self.vectors = arr

    @property
    def dim(self) -> int:
        return self.vectors.shape[0]

    def vector(self, j: int) -> np.ndarray:
        return self.vectors[j]

    def __repr__(self) -> str:
        return f"MeasurementBasis(dim={self.dim})"


@dataclass(frozen=True)
class Spectrum:
    """Eigendecomposition result: ascending eigenvalues paired with a basis."""

    eigenvalues: np.ndarray
    basis: MeasurementBasis

    def __post_init__(self):
        vals = np.asarray(self.eigenvalues, dtype=float)
        if vals.ndim != 1 or vals.shape[0] != self.basis.dim:
            raise DimensionMismatchError(
                f"{vals.size} eigenvalues for a dimension-{self.basis.dim} basis"
            )
        if not np.isfinite(vals).all():
            raise ValidationError("eigenvalues must be finite")
        if (np.diff(vals) < 0).any():
            raise ValidationError("spectrum eigenvalues must be ascending")
        vals.setflags(write=False)
        object.__setattr__(self, "eigenvalues", vals)


def standard_basis(n: int, *, tol: Tolerances = DEFAULT_TOLERANCES) -> MeasurementBasis:
    """Computational basis of dimension ``n``."""
    if not isinstance(n, (int, np.integer)) or n < 1:
        raise ValidationError(f"dimension must be a positive integer, got {n!r}")
    return MeasurementBasis(np.eye(int(n), dtype=complex), tol=tol)


def identity_operator(n: int, *, tol: Tolerances = DEFAULT_TOLERANCES) -> HermitianOperator:
    if not isinstance(n, (int, np.integer)) or n < 1:
        raise ValidationError(f"dimension must be a positive integer, got {n!r}")
    return HermitianOperator(np.eye(int(n), dtype=complex), tol=tol)


def from_spectrum(
    eigenvalues, basis: MeasurementBasis, *, tol: Tolerances = DEFAULT_TOLERANCES
) -> HermitianOperator:
    """Assemble sum_j eigenvalues[j] |v_j><v_j| over the given basis."""
    vals = np.asarray(eigenvalues, dtype=float)
    if vals.ndim != 1 or vals.shape[0] != basis.dim:
        raise DimensionMismatchError(
            f"{vals.size} eigenvalues for a dimension-{basis.dim} basis"
        )
    if not np.isfinite(vals).all():
        raise ValidationError("eigenvalues must be finite")
    vectors = basis.vectors
    out = (vectors.T * vals) @ vectors.conj()
    out = (out + out.conj().T) / 2.0  # kill rounding asymmetry; Hermitian by construction
    return HermitianOperator(out, tol=tol)


def eigendecompose(
    operator: HermitianOperator, *, tol: Tolerances = DEFAULT_TOLERANCES
) -> Spectrum:
    """Ascending eigenvalues and an orthonormal eigenbasis of ``operator``.

    Within a degenerate eigenspace the returned vectors are an arbitrary
    orthonormal choice; only the reconstructed operator is promised.
    """
    try:
        vals, vecs = np.linalg.eigh(operator.entries)
    except np.linalg.LinAlgError as exc:
        raise NumericalError(f"eigendecomposition did not converge: {exc}") from exc
    basis = MeasurementBasis(vecs.T.copy(), tol=tol)
    recon = from_spectrum(vals, basis, tol=tol)
    err = float(np.abs(recon.entries - operator.entries).max())
    if err > tol.reconstruction:
        raise NumericalError(f"eigendecomposition reconstruction error {err:.3e}")
    return Spectrum(np.asarray(vals, dtype=float), basis)


def born_probability(
    state: DensityMatrix, vector, *, tol: Tolerances = DEFAULT_TOLERANCES
) -> float:
    """Probability <v|state|v> of the outcome along a unit vector ``v``."""
    v = np.asarray(vector, dtype=complex)
    if v.ndim != 1 or v.shape[0] != state.dim:
        raise DimensionMismatchError(
            f"vector of length {v.size} against a dimension-{state.dim} state"
        )
    if not np.isfinite(v).all():
        raise ValidationError("outcome vector contains non-finite entries")
    norm = float(np.linalg.norm(v))
    if abs(norm - 1.0) > tol.orthonormality:
        raise ValidationError(f"outcome vector is not normalized: |v| = {norm:.12g}")
    value = float(np.real(v.conj() @ state.entries @ v))
    if value < -tol.psd or value > 1.0 + tol.psd:
        raise NumericalError(f"Born probability {value:.6g} lies outside [0, 1]")
    return min(max(value, 0.0), 1.0)


def basis_marginals(
    state: DensityMatrix, basis: MeasurementBasis, *, tol: Tolerances = DEFAULT_TOLERANCES
) -> np.ndarray:
    """All outcome probabilities of measuring ``state`` in ``basis``."""
    if basis.dim != state.dim:
        raise DimensionMismatchError(
            f"dimension-{basis.dim} basis against a dimension-{state.dim} state"
        )
    vectors = basis.vectors
    vals = np.einsum("ja,ab,jb->j", vectors.conj(), state.entries, vectors).real
    if vals.min() < -tol.psd or vals.max() > 1.0 + tol.psd:
        raise NumericalError("a Born probability lies outside [0, 1]")
    return np.clip(vals, 0.0, 1.0)


def absolutely_continuous(
    reference: DensityMatrix, state: DensityMatrix, *, tol: Tolerances = DEFAULT_TOLERANCES
) -> bool:
    """True iff ``state`` vanishes on the null space of ``reference``.

    Every event impossible under ``reference`` is then impossible under
    ``state`` as well.
    """
    if reference.dim != state.dim:
        raise DimensionMismatchError(
            f"states of dimension {reference.dim} and {state.dim}"
        )
    vals, vecs = np.linalg.eigh(reference.entries)
    null = vecs[:, vals < tol.null_space]
    if null.shape[1] == 0:
        return True
    norms = np.linalg.norm(state.entries @ null, axis=0)
    return bool(norms.max() < tol.null_space)


def equivalent_states(
    a: DensityMatrix, b: DensityMatrix, *, tol: Tolerances = DEFAULT_TOLERANCES
) -> bool:
    """True iff the two states share a null space (agree on impossible events)."""
    return absolutely_continuous(a, b, tol=tol) and absolutely_continuous(b, a, tol=tol)


def tensor_product(
    a: HermitianOperator, b: HermitianOperator, *, tol: Tolerances = DEFAULT_TOLERANCES
) -> HermitianOperator:
    """Kronecker product; row (j, j') of the result is index j * b.dim + j'."""
    return HermitianOperator(np.kron(a.entries, b.entries), tol=tol)


def partial_trace(
    operator: HermitianOperator,
    dims: tuple[int, int],
    keep: str,
    *,
    tol: Tolerances = DEFAULT_TOLERANCES,
) -> HermitianOperator:
    """Trace out one factor of a bipartite operator, keeping "first" or "second"."""
    n, m = dims
    if not (isinstance(n, (int, np.integer)) and isinstance(m, (int, np.integer))) or n < 1 or m < 1:
        raise ValidationError(f"factor dimensions must be positive integers, got {dims!r}")
    if n * m != operator.dim:
        raise DimensionMismatchError(
            f"factor dimensions {n}x{m} do not compose to operator dimension {operator.dim}"
        )
    blocks = operator.entries.reshape(n, m, n, m)
    if keep == "first":
        out = np.einsum("ajbj->ab", blocks)
    elif keep == "second":
        out = np.einsum("jajb->ab", blocks)
    else:
        raise ValidationError(f'keep must be "first" or "second", got {keep!r}')
    return HermitianOperator(out, tol=tol)


def subsystem_marginal(
    operator: HermitianOperator,
    dims: Sequence[int],
    index: int,
    *,
    tol: Tolerances = DEFAULT_TOLERANCES,
) -> HermitianOperator:
    """Trace out all factors of a multipartite operator except ``dims[index]``."""
    dims = [int(d) for d in dims]
    if any(d < 1 for d in dims):
        raise ValidationError(f"factor dimensions must be positive, got {dims!r}")
    if int(np.prod(dims)) != operator.dim:
        raise DimensionMismatchError(
            f"factor dimensions {dims} do not compose to operator dimension {operator.dim}"
        )
    if not 0 <= index < len(dims):
        raise ValidationError(f"subsystem index {index} out of range for {len(dims)} factors")
    before = int(np.prod(dims[:index], initial=1))
    after = int(np.prod(dims[index + 1 :], initial=1))
    out = operator
    if before > 1:
        out = partial_trace(out, (before, dims[index] * after), "second", tol=tol)
    if after > 1:
        out = partial_trace(out, (dims[index], after), "first", tol=tol)
    return out


def evolve(
    state: DensityMatrix,
    generator: HermitianOperator,
    time: float,
    *,
    tol: Tolerances = DEFAULT_TOLERANCES,
) -> DensityMatrix:
    """Unitary evolution e^{+iHt} state e^{-iHt} generated by ``generator``."""
    if state.dim != generator.dim:
        raise DimensionMismatchError(
            f"dimension-{state.dim} state against a dimension-{generator.dim} generator"
        )
    t = float(time)
    if not np.isfinite(t):
        raise ValidationError("evolution time must be finite")
    vals, vecs = np.linalg.eigh(generator.entries)
    phases = np.exp(1j * vals * t)
    unitary = (vecs * phases) @ vecs.conj().T
    out = unitary @ state.entries @ unitary.conj().T
    out = (out + out.conj().T) / 2.0
    return DensityMatrix(out, tol=tol)
