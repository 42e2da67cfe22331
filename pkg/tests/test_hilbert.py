"""Test truncated Hilbert space arithmetic."""

import math

import numpy as np
import pytest

from hilbert_asip.base_model import ConvergenceError, DomainError
from hilbert_asip.hilbert import HilbertVec, SymOperator, eigh, frobenius, inner, split


def test_vector_basics():
    """Test construction, arithmetic and norms."""
    x = HilbertVec([3.0, 4.0])
    assert x.dim == 2
    assert x.norm() == 5.0
    assert HilbertVec.zeros(3).norm() == 0.0
    assert HilbertVec.basis(3, 2) == HilbertVec([0.0, 1.0, 0.0])
    assert x + HilbertVec([1.0, 1.0]) == HilbertVec([4.0, 5.0])
    assert x - x == HilbertVec.zeros(2)
    assert 2 * x == HilbertVec([6.0, 8.0])
    assert x * 0.5 == HilbertVec([1.5, 2.0])

    with pytest.raises(ValueError, match="read-only"):
        x.coeffs[0] = 1.0
    with pytest.raises(DomainError, match="Basis index"):
        HilbertVec.basis(3, 0)
    with pytest.raises(DomainError, match="finite"):
        HilbertVec([1.0, math.nan])
    with pytest.raises(DomainError, match="non-empty"):
        HilbertVec([])


def test_inner():
    """Test inner products."""
    assert inner(HilbertVec([1, 2, 3]), HilbertVec([4, 5, 6])) == 32.0
    assert inner(HilbertVec.basis(2, 1), HilbertVec.basis(2, 2)) == 0.0
    assert inner(HilbertVec.zeros(4), HilbertVec([1, -2, 3, 7])) == 0.0
    with pytest.raises(DomainError, match="Dimension mismatch"):
        inner(HilbertVec([1, 2]), HilbertVec([1, 2, 3]))


def test_frobenius():
    """Test Frobenius norms."""
    assert frobenius(SymOperator(np.eye(4))) == 2.0
    assert frobenius(SymOperator([[2.0, 1.0], [1.0, 2.0]])) == pytest.approx(math.sqrt(10))
    assert frobenius(SymOperator(np.zeros((3, 3)))) == 0.0


def test_operator_validation():
    """Test that non-symmetric and malformed operators are rejected."""
    with pytest.raises(DomainError, match="not symmetric"):
        SymOperator([[1.0, 2.0], [0.0, 1.0]])
    with pytest.raises(DomainError, match="square"):
        SymOperator([[1.0, 2.0]])
    op = SymOperator.diagonal([1.0, 2.0])
    assert op.apply(HilbertVec([1.0, 1.0])) == HilbertVec([1.0, 2.0])
    assert list(op.diag()) == [1.0, 2.0]


@pytest.mark.parametrize(
    ("matrix", "expected"),
    [
        (np.eye(3), [1.0, 1.0, 1.0]),
        ([[2.0, 1.0], [1.0, 2.0]], [3.0, 1.0]),
        (np.diag([4.0, 2.0, 1.0]), [4.0, 2.0, 1.0]),
        (np.zeros((2, 2)), [0.0, 0.0]),
    ],
)
def test_eigh_examples(matrix, expected):
    """Test eigenvalues of small known operators."""
    values, vectors = eigh(SymOperator(matrix))
    assert values == pytest.approx(expected, abs=1e-12)
    assert vectors.T @ vectors == pytest.approx(np.eye(len(expected)), abs=1e-12)


def test_eigh_round_trip():
    """Test reconstruction and spectral Frobenius identity on random operators."""
    rng = np.random.default_rng(20)
    for dim in (1, 2, 5, 16, 64):
        raw = rng.standard_normal((dim, dim))
        op = SymOperator((raw + raw.T) / 2)
        values, vectors = eigh(op)
        assert np.all(np.diff(values) <= 0)
        scale = frobenius(op)
        reconstructed = vectors @ np.diag(values) @ vectors.T
        assert np.max(np.abs(reconstructed - op.entries)) <= 1e-9 * scale
        assert math.sqrt(np.sum(values**2)) == pytest.approx(scale, rel=1e-9)


def test_eigh_sweep_limit():
    """Test that running out of sweeps raises."""
    with pytest.raises(ConvergenceError):
        eigh(SymOperator([[2.0, 1.0], [1.0, 2.0]]), max_sweeps=0)
    with pytest.raises(DomainError, match="not symmetric"):
        eigh(np.array([[1.0, 1.0], [0.0, 1.0]]))


@pytest.mark.parametrize(
    ("coeffs", "d", "head", "tail"),
    [
        ([1.0, 2.0, 3.0], 2, [1.0, 2.0], [0.0, 0.0, 3.0]),
        ([1.0, 2.0, 3.0], 3, [1.0, 2.0, 3.0], [0.0, 0.0, 0.0]),
        ([5.0, 0.0], 1, [5.0], [0.0, 0.0]),
    ],
)
def test_split(coeffs, d, head, tail):
    """Test splitting into head and tail."""
    x = HilbertVec(coeffs)
    h, t = split(x, d)
    assert h == HilbertVec(head)
    assert t == HilbertVec(tail)
    assert h.norm() ** 2 + t.norm() ** 2 == pytest.approx(x.norm() ** 2, rel=1e-12)


def test_split_range():
    """Test split index bounds."""
    with pytest.raises(DomainError, match="Split index"):
        split(HilbertVec([1.0, 2.0]), 0)
    with pytest.raises(DomainError, match="Split index"):
        split(HilbertVec([1.0, 2.0]), 3)
