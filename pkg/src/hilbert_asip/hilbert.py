"""Provide truncated Hilbert space arithmetic.

Vectors are coefficient sequences with respect to a fixed orthonormal basis
``e_1, ..., e_D``; operators are dense symmetric ``D x D`` arrays. Everything beyond
the truncation ``D`` is treated as exactly zero.
"""

import logging
import math
from dataclasses import dataclass

import numpy as np

from .base_model import ConvergenceError, DomainError

_logger = logging.getLogger(__name__)

SYMMETRY_RTOL = 1e-12
JACOBI_TOL = 1e-12
JACOBI_MAX_SWEEPS = 100


def _frozen(values: np.ndarray) -> np.ndarray:
    values.setflags(write=False)
    return values


@dataclass(frozen=True, eq=False)
class HilbertVec:
    """Coefficient vector of an element of the truncated Hilbert space."""

    coeffs: np.ndarray

    def __post_init__(self) -> None:
        """Validate and freeze coefficients."""
        coeffs = np.array(self.coeffs, dtype=float)
        if coeffs.ndim != 1 or coeffs.size == 0:
            msg = "Coefficients must form a non-empty one-dimensional sequence"
            raise DomainError(msg)
        if not np.all(np.isfinite(coeffs)):
            msg = "Coefficients must be finite"
            raise DomainError(msg)
        object.__setattr__(self, "coeffs", _frozen(coeffs))

    @classmethod
    def zeros(cls, dim: int) -> "HilbertVec":
        """Get the zero vector.

        :param dim: ambient dimension
        :return: zero vector
        """
        return cls(np.zeros(dim))

    @classmethod
    def basis(cls, dim: int, k: int) -> "HilbertVec":
        """Get basis vector ``e_k``.

        :param dim: ambient dimension
        :param k: 1-based basis index
        :return: ``e_k``
        """
        if not 1 <= k <= dim:
            msg = f"Basis index must lie in [1, {dim}], got {k}"
            raise DomainError(msg)
        coeffs = np.zeros(dim)
        coeffs[k - 1] = 1.0
        return cls(coeffs)

    @property
    def dim(self) -> int:
        """Get ambient dimension."""
        return self.coeffs.size

    def norm(self) -> float:
        """Get Hilbert norm, the root of the squared coefficient sum."""
        return math.sqrt(inner(self, self))

    def __add__(self, other: "HilbertVec") -> "HilbertVec":
        """Add vectors of equal dimension."""
        _check_dims(self, other)
        return HilbertVec(self.coeffs + other.coeffs)

    def __sub__(self, other: "HilbertVec") -> "HilbertVec":
        """Subtract vectors of equal dimension."""
        _check_dims(self, other)
        return HilbertVec(self.coeffs - other.coeffs)

    def __mul__(self, scalar: float) -> "HilbertVec":
        """Scale by a real number."""
        return HilbertVec(float(scalar) * self.coeffs)

    __rmul__ = __mul__

    def __eq__(self, other: object) -> bool:
        """Compare coefficients exactly."""
        if not isinstance(other, HilbertVec):
            return NotImplemented
        return bool(np.array_equal(self.coeffs, other.coeffs))

    __hash__ = None


def _check_dims(x: HilbertVec, y: HilbertVec) -> None:
    if x.dim != y.dim:
        msg = f"Dimension mismatch: {x.dim} != {y.dim}"
        raise DomainError(msg)


@dataclass(frozen=True, eq=False)
class SymOperator:
    """Dense symmetric operator on the truncated Hilbert space."""

    entries: np.ndarray

    def __post_init__(self) -> None:
        """Validate symmetry and freeze entries."""
        entries = np.array(self.entries, dtype=float)
        if entries.ndim != 2 or entries.shape[0] != entries.shape[1] or entries.size == 0:
            msg = f"Operator entries must form a non-empty square array, got shape {entries.shape}"
            raise DomainError(msg)
        if not np.all(np.isfinite(entries)):
            msg = "Operator entries must be finite"
            raise DomainError(msg)
        gap = np.abs(entries - entries.T)
        if np.any(gap > SYMMETRY_RTOL * np.maximum(1.0, np.abs(entries))):
            msg = "Operator is not symmetric"
            raise DomainError(msg)
        object.__setattr__(self, "entries", _frozen(entries))

    @classmethod
    def diagonal(cls, values: np.ndarray) -> "SymOperator":
        """Build a diagonal operator.

        :param values: diagonal entries
        :return: operator ``diag(values)``
        """
        return cls(np.diag(np.asarray(values, dtype=float)))

    @property
    def dim(self) -> int:
        """Get ambient dimension."""
        return self.entries.shape[0]

    def diag(self) -> np.ndarray:
        """Get a copy of the diagonal entries."""
        return np.diag(self.entries).copy()

    def apply(self, x: HilbertVec) -> HilbertVec:
        """Apply the operator to a vector."""
        if x.dim != self.dim:
            msg = f"Dimension mismatch: {x.dim} != {self.dim}"
            raise DomainError(msg)
        return HilbertVec(self.entries @ x.coeffs)


def inner(x: HilbertVec, y: HilbertVec) -> float:
    """Compute the inner product ``<x, y>``.

    :param x: first vector
    :param y: second vector
    :return: sum of coefficient products
    :raise DomainError: if dimensions differ
    """
    _check_dims(x, y)
    return float(np.dot(x.coeffs, y.coeffs))


def frobenius(operator: SymOperator) -> float:
    """Compute the Frobenius norm ``sqrt(Tr(A A^T))``.

    :param operator: symmetric operator
    :return: non-negative norm
    """
    return float(np.sqrt(np.sum(operator.entries**2)))


def _off_diagonal_norm(a: np.ndarray) -> float:
    return float(np.sqrt(2.0 * np.sum(np.triu(a, k=1) ** 2)))


def eigh(
    operator: SymOperator | np.ndarray, max_sweeps: int = JACOBI_MAX_SWEEPS
) -> tuple[np.ndarray, np.ndarray]:
    """Diagonalize a symmetric operator by cyclic Jacobi rotations.

    Sweeps zero each off-diagonal pair ``(p, q)`` in row order until the off-diagonal
    Frobenius norm drops below ``JACOBI_TOL * ||A||_F``.

    :param operator: symmetric operator (arrays are validated as ``SymOperator``)
    :param max_sweeps: maximum number of sweeps
    :return: eigenvalues in descending order, and the matching orthonormal
        eigenvectors as columns
    :raise DomainError: if the input is not symmetric
    :raise ConvergenceError: if no sweep count within max_sweeps converges
    """
    if not isinstance(operator, SymOperator):
        operator = SymOperator(operator)
    a = np.array(operator.entries)
    dim = a.shape[0]
    v = np.eye(dim)
    scale = frobenius(operator)
    if scale == 0.0:
        return np.zeros(dim), v
    tol = JACOBI_TOL * scale

    for sweep in range(max_sweeps + 1):
        off = _off_diagonal_norm(a)
        if off < tol:
            _logger.debug("Jacobi converged after %s sweeps (off-norm %.3e)", sweep, off)
            break
        if sweep == max_sweeps:
            msg = f"Jacobi eigensolver did not converge in {max_sweeps} sweeps"
            raise ConvergenceError(msg)
        for p in range(dim - 1):
            for q in range(p + 1, dim):
                apq = a[p, q]
                if apq == 0.0:
                    continue
                theta = (a[q, q] - a[p, p]) / (2.0 * apq)
                sign = 1.0 if theta >= 0 else -1.0
                t = sign / (abs(theta) + math.sqrt(theta * theta + 1.0))
                c = 1.0 / math.sqrt(t * t + 1.0)
                s = t * c

                col_p = a[:, p].copy()
                a[:, p] = c * col_p - s * a[:, q]
                a[:, q] = s * col_p + c * a[:, q]
                row_p = a[p, :].copy()
                a[p, :] = c * row_p - s * a[q, :]
                a[q, :] = s * row_p + c * a[q, :]
                a[p, q] = a[q, p] = 0.0

                v_p = v[:, p].copy()
                v[:, p] = c * v_p - s * v[:, q]
                v[:, q] = s * v_p + c * v[:, q]

    eigenvalues = np.diag(a).copy()
    order = np.argsort(-eigenvalues, kind="stable")
    return eigenvalues[order], v[:, order]


def split(x: HilbertVec, d: int) -> tuple[HilbertVec, HilbertVec]:
    """Split a vector along ``H = H_{<=d} + H_{>d}``.

    :param x: vector to split
    :param d: number of leading coordinates kept in the head
    :return: head (length ``d``) and tail (length ``D``, zero in the first ``d`` slots)
    :raise DomainError: if ``d`` lies outside ``[1, D]``
    """
    if not 1 <= d <= x.dim:
        msg = f"Split index d must lie in [1, {x.dim}], got {d}"
        raise DomainError(msg)
    tail = np.array(x.coeffs)
    tail[:d] = 0.0
    return HilbertVec(x.coeffs[:d]), HilbertVec(tail)
