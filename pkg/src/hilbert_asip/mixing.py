"""Provide quantile-coupling covariance bounds and mixing decay envelopes."""

import logging
import math
from dataclasses import dataclass

import numpy as np

from .base_model import DomainError

_logger = logging.getLogger(__name__)

MERL_FACTOR = 18.0
_INDEX_GUARD = 1e-12


@dataclass(frozen=True, eq=False)
class QuantileFn:
    """Tail quantile function ``Q(u) = inf{t : P(|X| > t) <= u}`` of an empirical law.

    ``Q`` is a non-increasing right-continuous step function, constant on each
    ``[j/N, (j+1)/N)``; for ``u >= 1`` it returns the sample minimum.
    """

    values: np.ndarray

    def __post_init__(self) -> None:
        """Sort and freeze the sample."""
        values = np.sort(np.asarray(self.values, dtype=float))
        values.setflags(write=False)
        object.__setattr__(self, "values", values)

    @property
    def size(self) -> int:
        """Get sample size ``N``."""
        return self.values.size

    def __call__(self, u: float | np.ndarray) -> float | np.ndarray:
        """Evaluate ``Q(u)`` for ``u >= 0``."""
        u_arr = np.asarray(u, dtype=float)
        if np.any(u_arr < 0):
            msg = "Quantile level must be non-negative"
            raise DomainError(msg)
        exceed = np.floor(np.minimum(u_arr, 1.0) * self.size + _INDEX_GUARD).astype(np.int64)
        index = np.clip(self.size - exceed - 1, 0, self.size - 1)
        result = self.values[index]
        return float(result) if np.ndim(result) == 0 else result

    def breakpoints(self) -> np.ndarray:
        """Get the grid ``j/N``, ``j = 0, ..., N - 1``, where ``Q`` may jump."""
        return np.arange(self.size) / self.size

    def table(self) -> list[tuple[float, float]]:
        """Get ``(u, Q(u))`` rows on the breakpoint grid."""
        grid = self.breakpoints()
        return list(zip(grid.tolist(), np.atleast_1d(self(grid)).tolist(), strict=True))

    def sample(self, rng: np.random.Generator, size: int) -> np.ndarray:
        """Resample the law as ``Q(U)`` with ``U`` uniform on ``[0, 1)``."""
        return np.atleast_1d(self(rng.random(size)))


def empirical_quantile(sample: np.ndarray | list[float]) -> QuantileFn:
    """Build the tail quantile function of a non-negative sample.

    :param sample: non-empty sample of norms
    :return: quantile function
    :raise DomainError: if the sample is empty or has negative values
    """
    values = np.asarray(sample, dtype=float).ravel()
    if values.size == 0:
        msg = "Quantile function needs a non-empty sample"
        raise DomainError(msg)
    if np.any(values < 0):
        msg = "Quantile sample must be non-negative"
        raise DomainError(msg)
    return QuantileFn(values)


def merl_bound(qx: QuantileFn, qy: QuantileFn, alpha_bar: float) -> float:
    """Get the covariance bound ``18 int_0^alpha Q_X(u) Q_Y(u) du``.

    The integral is exact: both step functions are constant between consecutive
    points of their merged breakpoint grids.

    :param qx: quantile function of ``||X||``
    :param qy: quantile function of ``||Y||``
    :param alpha_bar: upper limit in ``[0, 1]``
    :return: bound
    """
    if not 0 <= alpha_bar <= 1:
        msg = f"alpha_bar must lie in [0, 1], got {alpha_bar}"
        raise DomainError(msg)
    if alpha_bar == 0:
        return 0.0
    grid = np.union1d(qx.breakpoints(), qy.breakpoints())
    grid = np.append(grid[grid < alpha_bar], alpha_bar)
    left, widths = grid[:-1], np.diff(grid)
    integral = float(np.sum(widths * qx(left) * qy(left)))
    return MERL_FACTOR * integral


def cov_decay_envelope(k: float, beta: float, p: float, pmoment: float) -> float:
    """Get the covariance decay envelope ``exp(-k beta (1 - 2/p)) pmoment^{2/p}``.

    :param k: lag
    :param beta: exponential mixing rate
    :param p: moment order, above 2
    :param pmoment: ``E||X||^p``
    :return: envelope with unit constant
    """
    if p <= 2:
        msg = "p must exceed 2"
        raise DomainError(msg)
    if beta <= 0 or pmoment <= 0:
        msg = "beta and pmoment must be positive"
        raise DomainError(msg)
    return math.exp(-k * beta * (1.0 - 2.0 / p)) * pmoment ** (2.0 / p)
