"""Define core time series model classes.

All model classes should inherit - directly or indirectly - from ``TimeSeriesModel``.
A model knows its ambient truncation dimension, its exponential mixing rate, and how
to draw a stationary path of coefficient vectors from a random generator. Paths are
arrays of shape ``(n, D)`` whose rows are the coefficient vectors of consecutive
observations.
"""

import abc
import logging
import math
from collections.abc import Callable
from typing import Protocol

import numpy as np

from .utils.rng import replica_rng

_logger = logging.getLogger(__name__)


class DomainError(ValueError):
    """Raise when an input violates the mathematical precondition of an operation."""


class ResourceLimitError(DomainError):
    """Raise when a requested simulation exceeds the configured size cap."""


class ConvergenceError(RuntimeError):
    """Raise when an iterative numerical routine exceeds its iteration limit."""


class TimeSeriesModel(abc.ABC):
    """Abstract base class for a stationary Hilbert-space-valued time series."""

    # required attributes
    _model_name: str

    @property
    @abc.abstractmethod
    def dim(self) -> int:
        """Get ambient truncation dimension ``D``."""

    @abc.abstractmethod
    def mixing_rate(self) -> float:
        """Get the exponential rate ``beta`` with ``beta(n) <= C exp(-beta n)``.

        :return: rate, ``math.inf`` for independent sequences
        """

    @abc.abstractmethod
    def _simulate(self, n: int, rng: np.random.Generator) -> np.ndarray:
        """Draw a stationary path.

        :param n: path length
        :param rng: random generator for this path
        :return: array of shape ``(n, D)``
        """

    @property
    def name(self) -> str:
        """Get model tag."""
        return self._model_name

    def moment_order(self) -> float:
        """Get the order ``p`` up to which ``E||X||^p`` is finite.

        :return: moment order, ``math.inf`` when all moments exist
        """
        return math.inf

    def longrun_diagonal(self) -> np.ndarray:
        """Get the diagonal of the long-run covariance operator.

        :return: per-coordinate long-run variances
        :raise DomainError: if the model has no closed-form long-run covariance
        """
        msg = f"Model '{self.name}' has no closed-form long-run covariance"
        raise DomainError(msg)

    def simulate(self, n: int, seed: int, replica: int = 0) -> np.ndarray:
        """Draw a stationary path from the stream keyed by ``(seed, replica)``.

        :param n: path length
        :param seed: experiment seed
        :param replica: replica index
        :return: array of shape ``(n, D)``
        :raise DomainError: if ``n < 1``
        """
        if n < 1:
            msg = f"Path length must be at least 1, got {n}"
            raise DomainError(msg)
        return self._simulate(n, replica_rng(seed, replica))


class GaussianComparator(TimeSeriesModel):
    """I.i.d. centered Gaussian vectors with diagonal covariance.

    Used as the Gaussian target ``eta_i ~ N(0, Gamma)`` that partial sums of a mixing
    model are compared against.
    """

    _model_name = "gaussian"

    def __init__(self, variances: np.ndarray) -> None:
        """Set per-coordinate variances.

        :param variances: non-negative coordinate variances
        """
        variances = np.asarray(variances, dtype=float)
        if variances.ndim != 1 or variances.size == 0 or np.any(variances < 0):
            msg = "Comparator variances must be a non-empty non-negative sequence"
            raise DomainError(msg)
        self.variances = variances

    @classmethod
    def from_model(cls, model: TimeSeriesModel) -> "GaussianComparator":
        """Build the comparator whose covariance is a model's long-run covariance.

        :param model: model providing ``longrun_diagonal()``
        :return: comparator with ``N(0, Gamma)`` increments
        """
        return cls(model.longrun_diagonal())

    @property
    def dim(self) -> int:
        """Get ambient truncation dimension ``D``."""
        return self.variances.size

    def mixing_rate(self) -> float:
        """Get mixing rate; independent sequences mix after one step."""
        return math.inf

    def longrun_diagonal(self) -> np.ndarray:
        """Get long-run variances, equal to the marginal variances."""
        return self.variances.copy()

    def _simulate(self, n: int, rng: np.random.Generator) -> np.ndarray:
        return rng.standard_normal((n, self.dim)) * np.sqrt(self.variances)


class _SimulateCallbackType(Protocol):
    """Define type for CustomModel ``simulate_cb`` arg"""

    def __call__(self, n: int, rng: np.random.Generator) -> np.ndarray:
        """Implicit description of ``simulate_cb`` arg. Shouldn't actually be used.

        :param n: path length
        :param rng: random generator for this path
        """


class CustomModel(TimeSeriesModel):
    """Model using a custom, user-provided path generator.

    Useful for degenerate inputs (constant or zero paths) and for running the
    verification harness against processes this package doesn't ship.
    """

    def __init__(
        self,
        model_name: str,
        dim: int,
        simulate_cb: _SimulateCallbackType,
        mixing_rate: float = math.inf,
        longrun_cb: Callable[[], np.ndarray] | None = None,
    ) -> None:
        """Set common class parameters.

        :param model_name: tag used in verdicts and file names
        :param dim: ambient truncation dimension
        :param simulate_cb: function taking a length and a generator, returning an
            array of shape ``(n, dim)``
        :param mixing_rate: exponential mixing rate to report
        :param longrun_cb: optional function returning long-run variances
        """
        self._model_name = model_name
        self._dim = dim
        self._simulate_cb = simulate_cb
        self._mixing_rate = mixing_rate
        self._longrun_cb = longrun_cb

    @property
    def dim(self) -> int:
        """Get ambient truncation dimension ``D``."""
        return self._dim

    def mixing_rate(self) -> float:
        """Get the user-declared mixing rate."""
        return self._mixing_rate

    def longrun_diagonal(self) -> np.ndarray:
        """Get long-run variances from the user callback, if one was given."""
        if self._longrun_cb is None:
            return super().longrun_diagonal()
        return np.asarray(self._longrun_cb(), dtype=float)

    def _simulate(self, n: int, rng: np.random.Generator) -> np.ndarray:
        path = np.asarray(self._simulate_cb(n, rng), dtype=float)
        if path.shape != (n, self._dim):
            msg = f"Custom simulator returned shape {path.shape}, expected {(n, self._dim)}"
            raise DomainError(msg)
        return path
