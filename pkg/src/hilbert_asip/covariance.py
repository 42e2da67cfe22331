"""Provide exact and empirical covariance analytics for partial sums."""

import logging
import math
from dataclasses import dataclass

import numpy as np

from .base_model import DomainError
from .far import FarModel, autocov, longrun_gamma, stationary_var
from .hilbert import SymOperator, eigh

_logger = logging.getLogger(__name__)


@dataclass(frozen=True)
class CovReport:
    """Distance between ``cov(S_n)`` and ``n Gamma``."""

    n: int
    defect: float
    residuals: tuple[float, ...]

    def to_dict(self) -> dict:
        """Get JSON form."""
        return {"n": self.n, "defect": self.defect, "residuals": list(self.residuals)}

    def to_row(self) -> list:
        """Get CSV row ``n, defect, r_1, ..., r_D``."""
        return [self.n, self.defect, *self.residuals]


def _check_horizon(n: int) -> None:
    if n < 1:
        msg = f"Horizon n must be at least 1, got {n}"
        raise DomainError(msg)


def cov_sn_exact(model: FarModel, n: int) -> SymOperator:
    """Get the exact covariance of ``S_n = X_1 + ... + X_n``.

    Coordinate ``k`` is ``n gamma_0 + 2 sum_{j=1}^{n-1} (n - j) gamma_j``, summed in
    closed form using ``gamma_j = gamma_0 lambda^j``.

    :param model: FAR model
    :param n: horizon
    :return: diagonal operator
    """
    _check_horizon(n)
    lam = model.lambdas
    weighted = lam * (n - n * lam - 1.0 + lam**n) / (1.0 - lam) ** 2
    return SymOperator.diagonal(stationary_var(model) * (n + 2.0 * weighted))


def _residuals(model: FarModel, n: int) -> np.ndarray:
    # cov(S_n) - n g(lambda) = 2 gamma_0 lambda (lambda^n - 1) / (1 - lambda)^2
    lam = model.lambdas
    return 2.0 * stationary_var(model) * lam * (lam**n - 1.0) / (1.0 - lam) ** 2


def gamma_defect(model: FarModel, n: int) -> CovReport:
    """Get ``||cov(S_n) - n Gamma||_F`` with per-coordinate residuals.

    Residuals use their closed form rather than a difference of two quantities that
    grow linearly in ``n``.

    :param model: FAR model
    :param n: horizon
    :return: report
    """
    _check_horizon(n)
    residuals = _residuals(model, n)
    return CovReport(n, float(np.linalg.norm(residuals)), tuple(residuals.tolist()))


def defect_curve(model: FarModel, horizons: list[int]) -> list[CovReport]:
    """Get defect reports over several horizons."""
    return [gamma_defect(model, n) for n in horizons]


def block_cov_eigs(model: FarModel, m1: int, d: int) -> tuple[float, float, bool]:
    """Get extreme eigenvalues of the covariance of a projected big-block sum.

    :param model: FAR model
    :param m1: block length
    :param d: projection dimension in ``[1, D]``
    :return: largest and smallest eigenvalue of ``cov(sum_{i<=m1} X_i^{(d)})``, and
        whether ``lambda_min >= m1 lambda_d`` and ``lambda_max <= m1 g(lambda_1)``
    """
    if not 1 <= d <= model.dim:
        msg = f"Projection dimension d must lie in [1, {model.dim}], got {d}"
        raise DomainError(msg)
    block = SymOperator.diagonal(cov_sn_exact(model, m1).diag()[:d])
    eigenvalues, _ = eigh(block)
    lambda_max, lambda_min = float(eigenvalues[0]), float(eigenvalues[-1])
    g_top = float(longrun_gamma(model).diag()[0])
    bound_ok = lambda_min >= m1 * model.lambdas[d - 1] and lambda_max <= m1 * g_top
    return lambda_max, lambda_min, bool(bound_ok)


def cross_cov_frobenius(model: FarModel, k: int) -> float:
    """Get ``||cov(X_0, X_k)||_F``.

    :param model: FAR model
    :param k: lag, at least 1
    :return: Frobenius norm of the lag-``k`` cross-covariance
    """
    if k < 1:
        msg = f"Lag must be at least 1, got {k}"
        raise DomainError(msg)
    return float(np.linalg.norm(autocov(model, k)))


def tail_energy(model: FarModel, m1: int, d: int) -> tuple[float, float]:
    """Get the variance a block sum puts on ``H_{>d}``.

    :param model: FAR model
    :param m1: block length
    :param d: projection dimension in ``[1, D]``
    :return: ``sum_{k>d} Var(sum_{i<=m1} X_{i,k})`` and its bound
        ``m1 sum_{k>d} g(lambda_k)``
    """
    if not 1 <= d <= model.dim:
        msg = f"Projection dimension d must lie in [1, {model.dim}], got {d}"
        raise DomainError(msg)
    energy = float(cov_sn_exact(model, m1).diag()[d:].sum())
    bound = m1 * float(longrun_gamma(model).diag()[d:].sum())
    return energy, bound


def empirical_cov(samples: np.ndarray) -> SymOperator:
    """Estimate a covariance operator across independent replicas.

    :param samples: array of shape ``(R, D)``, one row per replica
    :return: centered outer-product average
    """
    samples = np.asarray(samples, dtype=float)
    if samples.ndim != 2 or samples.shape[0] < 2:
        msg = "Empirical covariance needs a (R, D) array with R >= 2"
        raise DomainError(msg)
    centered = samples - samples.mean(axis=0)
    cov = centered.T @ centered / samples.shape[0]
    return SymOperator((cov + cov.T) / 2.0)


def covariance_slack(empirical: SymOperator, exact: SymOperator) -> tuple[float, float]:
    """Compare an empirical covariance with an exact one on the diagonal.

    :param empirical: estimated operator
    :param exact: exact operator
    :return: smallest and largest diagonal ratio ``empirical / exact``
    """
    exact_diag = exact.diag()
    positive = exact_diag > 0
    if not np.any(positive):
        return math.nan, math.nan
    ratios = empirical.diag()[positive] / exact_diag[positive]
    return float(ratios.min()), float(ratios.max())
