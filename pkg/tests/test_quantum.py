import numpy as np
import pytest

import qclaim as qc
from helpers import bell_state, random_basis, random_density, random_hermitian, shared_support_pair


def test_hermitian_accepts_and_freezes():
    op = qc.HermitianOperator([[1.0, 2.0], [2.0, 1.0]])
    assert op.dim == 2
    assert op.trace() == pytest.approx(2.0)
    with pytest.raises(ValueError):
        op.entries[0, 0] = 5.0


def test_hermitian_rejects_bad_input():
    with pytest.raises(qc.ValidationError):
        qc.HermitianOperator([[0.0, 1.0], [0.0, 0.0]])
    with pytest.raises(qc.ValidationError):
        qc.HermitianOperator([[1.0, 2.0, 3.0]])
    with pytest.raises(qc.ValidationError):
        qc.HermitianOperator([[np.nan, 0.0], [0.0, 1.0]])
    with pytest.raises(qc.ValidationError):
        qc.HermitianOperator(np.zeros((0, 0)))


def test_hermitian_tolerates_roundoff_asymmetry():
    op = qc.HermitianOperator([[1.0, 0.5 + 1e-12j], [0.5 - 1e-12j, 1.0]])
    assert op.entries[0, 1] == pytest.approx(0.5 + 1e-12j)


def test_density_constraints():
    qc.DensityMatrix([[0.5, 0.0], [0.0, 0.5]])
    with pytest.raises(qc.ValidationError):
        qc.DensityMatrix([[0.6, 0.0], [0.0, 0.6]])
    with pytest.raises(qc.ValidationError):
        qc.DensityMatrix([[1.5, 0.0], [0.0, -0.5]])
    with pytest.raises(qc.ValidationError):
        qc.DensityMatrix([[0.5, 0.6], [0.6, 0.5]])


def test_basis_constraints():
    basis = qc.standard_basis(3)
    assert np.array_equal(basis.vectors, np.eye(3))
    with pytest.raises(qc.ValidationError):
        qc.MeasurementBasis([[1.0, 0.0], [1.0, 0.0]])
    with pytest.raises(qc.ValidationError):
        qc.MeasurementBasis([[0.5, 0.0], [0.0, 1.0]])


def test_from_spectrum_diagonal():
    basis = qc.standard_basis(2)
    op = qc.from_spectrum([0.5, -0.5], basis)
    assert np.allclose(op.entries, np.diag([0.5, -0.5]))


def test_from_spectrum_rotated():
    # 3 on (1,1)/sqrt(2) and -1 on (1,-1)/sqrt(2) expands to [[1,2],[2,1]]
    s = 2.0**-0.5
    basis = qc.MeasurementBasis([[s, s], [s, -s]])
    op = qc.from_spectrum([3.0, -1.0], basis)
    assert np.allclose(op.entries, [[1.0, 2.0], [2.0, 1.0]], atol=1e-14)


def test_from_spectrum_circular_projector():
    s = 2.0**-0.5
    basis = qc.MeasurementBasis([[s, 1j * s], [s, -1j * s]])
    op = qc.from_spectrum([1.0, 0.0], basis)
    assert np.allclose(op.entries, [[0.5, -0.5j], [0.5j, 0.5]], atol=1e-14)


def test_eigendecompose_frozen_example():
    spec = qc.eigendecompose(qc.HermitianOperator([[1.0, 2.0], [2.0, 1.0]]))
    assert np.allclose(spec.eigenvalues, [-1.0, 3.0])


def test_spectrum_is_read_only_and_sorted():
    spec = qc.eigendecompose(qc.HermitianOperator(np.diag([2.0, -1.0, 0.5])))
    assert list(spec.eigenvalues) == sorted(spec.eigenvalues)
    with pytest.raises(ValueError):
        spec.eigenvalues[0] = 7.0
    with pytest.raises(qc.ValidationError):
        qc.Spectrum(np.array([1.0, 0.0]), qc.standard_basis(2))


@pytest.mark.parametrize("n", [2, 3, 5, 8])
def test_eigendecompose_round_trip(n):
    rng = np.random.default_rng(n)
    for _ in range(20):
        op = random_hermitian(rng, n, scale=3.0)
        spec = qc.eigendecompose(op)
        rebuilt = qc.from_spectrum(spec.eigenvalues, spec.basis)
        assert np.max(np.abs(rebuilt.entries - op.entries)) < 1e-10


def test_born_probability_pure_cases():
    plus = np.array([1.0, 1.0]) / 2.0**0.5
    state = qc.DensityMatrix(np.outer(plus, plus))
    assert qc.born_probability(state, plus) == pytest.approx(1.0)
    circ = np.array([1.0, 1.0j]) / 2.0**0.5
    assert qc.born_probability(state, circ) == pytest.approx(0.5)
    minus = np.array([1.0, -1.0]) / 2.0**0.5
    assert qc.born_probability(state, minus) == pytest.approx(0.0, abs=1e-15)


def test_born_probability_rejects_unnormalized():
    state = qc.DensityMatrix(np.eye(2) / 2.0)
    with pytest.raises(qc.ValidationError):
        qc.born_probability(state, [1.0, -1.0])


def test_marginals_form_distribution():
    rng = np.random.default_rng(7)
    for _ in range(25):
        n = int(rng.integers(2, 7))
        state = random_density(rng, n)
        basis = random_basis(rng, n)
        prob = qc.basis_marginals(state, basis)
        assert prob.min() >= 0.0
        assert prob.sum() == pytest.approx(1.0, abs=1e-12)
        single = [qc.born_probability(state, v) for v in basis.vectors]
        assert np.allclose(prob, single, atol=1e-12)


def test_absolute_continuity_frozen_pair():
    point = qc.DensityMatrix(np.diag([1.0, 0.0]))
    mixed = qc.DensityMatrix(np.eye(2) / 2.0)
    assert not qc.absolutely_continuous(point, mixed)
    assert qc.absolutely_continuous(mixed, point)
    assert not qc.equivalent_states(point, mixed)


def test_equivalence_on_shared_support():
    rng = np.random.default_rng(11)
    for _ in range(10):
        a, b = shared_support_pair(rng, 5, 3)
        assert qc.equivalent_states(a, b)
        assert qc.equivalent_states(b, a)
        full = random_density(rng, 5)
        assert qc.absolutely_continuous(full, a)
        assert not qc.absolutely_continuous(a, full)


def test_tensor_product_convention():
    sz = qc.HermitianOperator(np.diag([0.5, -0.5]))
    ident = qc.identity_operator(2)
    joint = qc.tensor_product(sz, ident)
    assert np.allclose(joint.entries, np.diag([0.5, 0.5, -0.5, -0.5]))
    # index (a, a') of the first factor varies slowest
    a = qc.HermitianOperator([[1.0, 0.0], [0.0, 2.0]])
    b = qc.HermitianOperator([[3.0, 1.0], [1.0, 4.0]])
    joint = qc.tensor_product(a, b)
    assert joint.entries[0, 1] == pytest.approx(1.0 * 1.0)
    assert joint.entries[2, 3] == pytest.approx(2.0 * 1.0)


def test_partial_trace_of_bell_state():
    bell = bell_state()
    left = qc.partial_trace(bell, (2, 2), keep="first")
    right = qc.partial_trace(bell, (2, 2), keep="second")
    assert np.allclose(left.entries, np.eye(2) / 2.0, atol=1e-14)
    assert np.allclose(right.entries, np.eye(2) / 2.0, atol=1e-14)


def test_partial_trace_splits_products():
    rng = np.random.default_rng(3)
    a = random_hermitian(rng, 2)
    b = random_hermitian(rng, 3)
    joint = qc.tensor_product(a, b)
    left = qc.partial_trace(joint, (2, 3), keep="first")
    assert np.allclose(left.entries, b.trace() * a.entries, atol=1e-12)
    right = qc.partial_trace(joint, (2, 3), keep="second")
    assert np.allclose(right.entries, a.trace() * b.entries, atol=1e-12)
    with pytest.raises(qc.DimensionMismatchError):
        qc.partial_trace(joint, (2, 2), keep="first")


def test_subsystem_marginal_three_factors():
    rng = np.random.default_rng(5)
    parts = [random_density(rng, 2) for _ in range(3)]
    joint = parts[0]
    for part in parts[1:]:
        joint = qc.DensityMatrix(qc.tensor_product(joint, part).entries)
    for k, part in enumerate(parts):
        got = qc.subsystem_marginal(joint, (2, 2, 2), k)
        assert np.allclose(got.entries, part.entries, atol=1e-12)


def test_evolve_half_turn_flips_spin():
    # quarter-cycle phases under the x generator exchange the z outcomes
    generator = qc.HermitianOperator([[0.0, 0.5], [0.5, 0.0]])
    up = qc.DensityMatrix(np.diag([1.0, 0.0]))
    moved = qc.evolve(up, generator, np.pi)
    assert np.allclose(moved.entries, np.diag([0.0, 1.0]), atol=1e-14)


def test_evolve_preserves_spectrum():
    rng = np.random.default_rng(13)
    for _ in range(10):
        state = random_density(rng, 4)
        generator = random_hermitian(rng, 4, scale=2.0)
        moved = qc.evolve(state, generator, rng.uniform(-5.0, 5.0))
        before = np.linalg.eigvalsh(state.entries)
        after = np.linalg.eigvalsh(moved.entries)
        assert np.allclose(before, after, atol=1e-10)
    still = qc.evolve(state, generator, 0.0)
    assert np.allclose(still.entries, state.entries, atol=1e-14)
