"""Provide the functional autoregressive FAR(1) model in a diagonalizing basis.

The operator ``A`` acts as ``A e_k = lambda_k e_k`` and the noise operator satisfies
``B^2 = A``, so every coordinate is an independent scalar AR(1) recursion

    X_{t+1,k} = lambda_k X_{t,k} + sqrt(lambda_k) eps_{t+1,k}

with centered, unit-variance innovations. All covariances are closed form.
"""

import logging
import math
from dataclasses import dataclass

import numpy as np
from scipy.signal import lfilter

from .base_model import DomainError, TimeSeriesModel
from .hilbert import HilbertVec, SymOperator
from .utils.rng import replica_rng

_logger = logging.getLogger(__name__)

NOISE_LAWS = ("gaussian", "uniform", "laplace", "student_t")
STUDENT_T_DF = 5.0


def moment_order(noise: str) -> float:
    """Get the moment order of a noise law.

    :param noise: noise tag
    :return: ``p`` such that moments of order below ``p`` exist (``math.inf`` if all do)
    """
    if noise not in NOISE_LAWS:
        msg = f"Unknown noise law '{noise}', expected one of {NOISE_LAWS}"
        raise DomainError(msg)
    return STUDENT_T_DF if noise == "student_t" else math.inf


def draw_noise(rng: np.random.Generator, noise: str, shape: tuple[int, ...]) -> np.ndarray:
    """Draw centered unit-variance innovations.

    :param rng: random generator
    :param noise: noise tag
    :param shape: output shape, filled in C order
    :return: array of innovations
    """
    if noise == "gaussian":
        return rng.standard_normal(shape)
    if noise == "uniform":
        half_width = math.sqrt(3.0)
        return rng.uniform(-half_width, half_width, shape)
    if noise == "laplace":
        return rng.laplace(0.0, 1.0 / math.sqrt(2.0), shape)
    if noise == "student_t":
        return rng.standard_t(STUDENT_T_DF, shape) * math.sqrt(
            (STUDENT_T_DF - 2.0) / STUDENT_T_DF
        )
    msg = f"Unknown noise law '{noise}', expected one of {NOISE_LAWS}"
    raise DomainError(msg)


@dataclass(frozen=True, eq=False)
class FarModel(TimeSeriesModel):
    """Spectral specification of a diagonal FAR(1) process."""

    lambdas: np.ndarray
    noise: str = "gaussian"
    c: float | None = None
    delta: float | None = None

    _model_name = "far"

    def __post_init__(self) -> None:
        """Validate the spectrum and noise law."""
        lambdas = np.array(self.lambdas, dtype=float)
        if lambdas.ndim != 1 or lambdas.size == 0:
            msg = "AR eigenvalues must form a non-empty sequence"
            raise DomainError(msg)
        if lambdas[0] >= 1.0:
            msg = f"lambda_1 must be below 1 for a stationary solution, got {lambdas[0]}"
            raise DomainError(msg)
        if np.any(lambdas <= 0.0) or np.any(lambdas >= 1.0):
            msg = "AR eigenvalues must lie in (0, 1)"
            raise DomainError(msg)
        if np.any(np.diff(lambdas) > 0.0):
            msg = "AR eigenvalues must be non-increasing"
            raise DomainError(msg)
        moment_order(self.noise)
        lambdas.setflags(write=False)
        object.__setattr__(self, "lambdas", lambdas)

    @property
    def dim(self) -> int:
        """Get ambient truncation dimension ``D``."""
        return self.lambdas.size

    def mixing_rate(self) -> float:
        """Get mixing rate ``-ln lambda_1``."""
        return -math.log(self.lambdas[0])

    def moment_order(self) -> float:
        """Get moment order of the noise law."""
        return moment_order(self.noise)

    def longrun_diagonal(self) -> np.ndarray:
        """Get long-run variances ``g(lambda_k)``."""
        return longrun_gamma(self).diag()

    def _simulate(self, n: int, rng: np.random.Generator) -> np.ndarray:
        return _recurse(self, n, rng, None, 1.0)

    def _stationary_draw(self, rng: np.random.Generator) -> np.ndarray:
        lam = self.lambdas
        if self.noise == "gaussian":
            return rng.standard_normal(self.dim) * np.sqrt(stationary_var(self))
        # truncated moving average X_0 = sum_j A^j B eps_{-j}; lambda_1^J < machine eps
        terms = math.ceil(math.log(np.finfo(float).eps) / math.log(lam[0])) + 1
        eps = draw_noise(rng, self.noise, (terms, self.dim))
        weights = lam[np.newaxis, :] ** np.arange(terms)[:, np.newaxis]
        return np.sqrt(lam) * np.sum(weights * eps, axis=0)


def make_far(D: int, c: float, delta: float, noise: str = "gaussian") -> FarModel:  # noqa: N803
    """Build a FAR(1) model with ``lambda_k = c k^{-delta}``.

    :param D: truncation dimension
    :param c: scale, must satisfy ``c < 1``
    :param delta: polynomial decay, must exceed 1
    :param noise: noise tag, one of ``NOISE_LAWS``
    :return: validated model
    :raise DomainError: if ``lambda_1 >= 1``, ``delta <= 1`` or ``D < 1``
    """
    if D < 1:
        msg = f"Truncation dimension D must be at least 1, got {D}"
        raise DomainError(msg)
    if c <= 0:
        msg = f"Scale c must be positive, got {c}"
        raise DomainError(msg)
    if c >= 1:
        msg = f"lambda_1 must be below 1 for a stationary solution, got c = {c}"
        raise DomainError(msg)
    if delta <= 1:
        msg = f"delta must exceed 1, got {delta}"
        raise DomainError(msg)
    lambdas = c * np.arange(1, D + 1, dtype=float) ** (-delta)
    _logger.debug("Built FAR model with D=%s, c=%s, delta=%s, noise=%s", D, c, delta, noise)
    return FarModel(lambdas, noise=noise, c=c, delta=delta)


def stationary_var(model: FarModel) -> np.ndarray:
    """Get coordinate variances of the stationary law, ``lambda/(1 - lambda^2)``."""
    lam = model.lambdas
    return lam / (1.0 - lam**2)


def autocov(model: FarModel, j: int) -> np.ndarray:
    """Get lag-``j`` autocovariances, ``lambda^{j+1}/(1 - lambda^2)``.

    :param model: FAR model
    :param j: lag, non-negative
    :return: per-coordinate autocovariances
    """
    if j < 0:
        msg = f"Lag must be non-negative, got {j}"
        raise DomainError(msg)
    lam = model.lambdas
    return lam ** (j + 1) / (1.0 - lam**2)


def longrun_gamma(model: FarModel) -> SymOperator:
    """Get the long-run covariance operator ``Gamma``.

    Eigenvalue ``k`` is ``lambda/(1 - lambda^2) + 2 lambda^2/((1 - lambda^2)(1 - lambda))``,
    which simplifies to ``lambda/(1 - lambda)^2``.
    """
    lam = model.lambdas
    one_minus_sq = 1.0 - lam**2
    g = lam / one_minus_sq + 2.0 * lam**2 / (one_minus_sq * (1.0 - lam))
    return SymOperator.diagonal(g)


def _recurse(
    model: FarModel,
    n: int,
    rng: np.random.Generator,
    x0: np.ndarray | None,
    noise_scale: float,
) -> np.ndarray:
    lam = model.lambdas
    if x0 is None:
        x0 = noise_scale * model._stationary_draw(rng)  # noqa: SLF001
    path = np.empty((n, model.dim))
    path[0] = x0
    if n > 1:
        innovations = noise_scale * np.sqrt(lam) * draw_noise(rng, model.noise, (n - 1, model.dim))
        for k in range(model.dim):
            path[1:, k], _ = lfilter(
                [1.0], [1.0, -lam[k]], innovations[:, k], zi=[lam[k] * x0[k]]
            )
    return path


def simulate_path(
    model: FarModel,
    n: int,
    seed: int,
    x0: HilbertVec | None = None,
    noise_scale: float = 1.0,
    replica: int = 0,
) -> np.ndarray:
    """Simulate a stationary FAR(1) path.

    The start ``X_0`` is drawn exactly from the stationary law unless given; Gaussian
    starts are sampled directly, other laws through the moving-average representation
    truncated below machine precision.

    :param model: FAR model
    :param n: path length
    :param seed: experiment seed
    :param x0: optional fixed start
    :param noise_scale: innovation scale; ``0`` gives the deterministic flow ``A^k x0``
    :param replica: replica index selecting the random stream
    :return: array of shape ``(n, D)`` holding ``X_0, ..., X_{n-1}``
    """
    if n < 1:
        msg = f"Path length must be at least 1, got {n}"
        raise DomainError(msg)
    start = None
    if x0 is not None:
        if x0.dim != model.dim:
            msg = f"Dimension mismatch: {x0.dim} != {model.dim}"
            raise DomainError(msg)
        start = np.array(x0.coeffs)
    return _recurse(model, n, replica_rng(seed, replica), start, noise_scale)


def gmc_ratio(model: FarModel, x: HilbertVec, y: HilbertVec) -> float:
    """Get the one-step contraction ratio ``||A(x - y)|| / ||x - y||``.

    Coupled copies started at ``x`` and ``y`` share innovations, so their difference
    evolves deterministically and the moment contraction holds with this ratio.

    :param model: FAR model
    :param x: first start
    :param y: second start
    :return: ratio, at most ``lambda_1``
    :raise DomainError: if ``x == y``
    """
    diff = x - y
    if diff.dim != model.dim:
        msg = f"Dimension mismatch: {diff.dim} != {model.dim}"
        raise DomainError(msg)
    norm = diff.norm()
    if norm == 0.0:
        msg = "Contraction ratio needs distinct starting points"
        raise DomainError(msg)
    return float(np.linalg.norm(model.lambdas * diff.coeffs)) / norm
