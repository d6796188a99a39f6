"""Shared generators for randomized tests."""

from __future__ import annotations

import numpy as np

import qclaim as qc


def random_density(rng, n, rank=None, floor=0.0):
    """Random state of the given rank; ``floor`` blends in the maximally mixed state."""
    rank = n if rank is None else rank
    g = rng.normal(size=(n, rank)) + 1j * rng.normal(size=(n, rank))
    mat = g @ g.conj().T
    mat /= mat.trace().real
    if floor:
        mat = (1.0 - floor) * mat + floor * np.eye(n) / n
    return qc.DensityMatrix(mat)


def random_basis(rng, n):
    g = rng.normal(size=(n, n)) + 1j * rng.normal(size=(n, n))
    q_mat, _ = np.linalg.qr(g)
    return qc.MeasurementBasis(q_mat.T)


def random_hermitian(rng, n, scale=1.0):
    g = rng.normal(size=(n, n)) + 1j * rng.normal(size=(n, n))
    return qc.HermitianOperator(scale * (g + g.conj().T) / 2.0)


def shared_support_pair(rng, n, rank):
    """Two states carried by the same rank-dimensional subspace."""
    frame = random_basis(rng, n).vectors[:rank]

    def build():
        w = rng.uniform(0.2, 1.0, size=rank)
        w /= w.sum()
        mat = (frame.T * w) @ frame.conj()
        return qc.DensityMatrix((mat + mat.conj().T) / 2.0)

    return build(), build()


def bell_state():
    v = np.zeros(4)
    v[0] = v[3] = 2.0**-0.5
    return qc.DensityMatrix(np.outer(v, v))


def spanning_quotes(rng, kernel):
    """n^2 unit claims on random directions, priced under the kernel."""
    quotes = []
    for _ in range(kernel.dim * kernel.dim):
        basis = random_basis(rng, kernel.dim)
        claim = qc.arrow_debreu(basis, 0)
        quotes.append((claim, qc.price(kernel, claim)))
    return quotes
