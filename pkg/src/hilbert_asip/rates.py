"""Evaluate the closed-form rate and exponent formulas.

Every formula is evaluated with ``mpmath`` at ``WORKING_DPS`` decimal digits and
rounded to ``float`` only on return, so branch comparisons between nearly equal
rationals are decided exactly.
"""

import logging
from dataclasses import asdict, dataclass

import mpmath

from .base_model import DomainError

_logger = logging.getLogger(__name__)

WORKING_DPS = 50
BRANCH_CROSSOVER = 42


def _check_p(p: float) -> None:
    if p <= 2:
        msg = "p must exceed 2"
        raise DomainError(msg)


def _check_pprime(pprime: float) -> None:
    if pprime <= 2:
        msg = "pprime must exceed 2"
        raise DomainError(msg)


def _check_deltas(delta1: float, delta2: float) -> None:
    if delta2 <= 1:
        msg = "delta2 must exceed 1"
        raise DomainError(msg)
    if delta1 < delta2:
        msg = "delta1 must be at least delta2"
        raise DomainError(msg)


@dataclass(frozen=True)
class RateInputs:
    """Parameters shared by the rate formulas."""

    p: float
    delta1: float
    delta2: float
    pprime: float | None = None
    epsilon: float | None = None
    d: int | None = None
    beta: float | None = None

    def __post_init__(self) -> None:
        """Validate parameter ranges."""
        _check_p(self.p)
        _check_deltas(self.delta1, self.delta2)
        if self.pprime is not None:
            _check_pprime(self.pprime)
            if self.pprime >= self.p:
                msg = "pprime must be below p"
                raise DomainError(msg)
        if self.epsilon is not None and self.epsilon <= 0:
            msg = "epsilon must be positive"
            raise DomainError(msg)
        if self.d is not None and self.d < 2:
            msg = "d must be at least 2"
            raise DomainError(msg)
        if self.beta is not None and self.beta <= 0:
            msg = "beta must be positive"
            raise DomainError(msg)


@dataclass(frozen=True)
class RateReport:
    """Rates derived from a ``RateInputs``; fields needing absent inputs are ``None``."""

    theta_bar: float
    finite_dim_exp: float
    theta_pprime: float | None = None
    alpha1: float | None = None
    a_d_root: float | None = None
    delta_bar: float | None = None
    corollary_exp: float | None = None
    coupling_exp: float | None = None
    big_block_exp: float | None = None

    def to_dict(self) -> dict:
        """Get JSON form."""
        return asdict(self)


def theta_bar(p: float, delta1: float, delta2: float) -> float:
    """Get the infimum of admissible coupling exponents.

    :param p: moment order, above 2
    :param delta1: fast eigenvalue decay exponent
    :param delta2: slow eigenvalue decay exponent, above 1
    :return: maximum of the two branch ratios
    """
    _check_p(p)
    _check_deltas(delta1, delta2)
    with mpmath.workdps(WORKING_DPS):
        p, d1, d2 = mpmath.mpf(p), mpmath.mpf(delta1), mpmath.mpf(delta2)
        shared_num = (2 * p - 2) * d1 + 2 * d2
        shared_den = (4 * p - 4) * d1 + 2 * p * d2
        first = (shared_num + 23 * p - 4) / (44 * p - 4 + shared_den)
        second = (shared_num + p * (p + 4) / 2 - 4) / (p * (p + 2) - 4 + shared_den)
        return float(max(first, second))


def theta_pprime(pprime: float, delta1: float, delta2: float) -> float:
    """Get the dimension-schedule exponent ``theta_{p'}``.

    :param pprime: working moment order, above 2
    :param delta1: fast eigenvalue decay exponent
    :param delta2: slow eigenvalue decay exponent, above 1
    :return: minimum of the two branch fractions
    """
    _check_pprime(pprime)
    _check_deltas(delta1, delta2)
    with mpmath.workdps(WORKING_DPS):
        q, d1, d2 = mpmath.mpf(pprime), mpmath.mpf(delta1), mpmath.mpf(delta2)
        shared = (2 * q - 2) * d1 + q * d2
        first = (q - 2) / (22 * q - 2 + shared)
        second = (q - 2) / (q * (q + 2) / 2 - 2 + shared)
        return float(min(first, second))


def alpha1_of(pprime: float, delta1: float, delta2: float) -> float:
    """Get the big-block exponent ``alpha1 = (1 + delta1) theta_{p'}``.

    :raise DomainError: if the calibration gives ``alpha1 >= 1``
    """
    with mpmath.workdps(WORKING_DPS):
        alpha1 = (1 + mpmath.mpf(delta1)) * mpmath.mpf(theta_pprime(pprime, delta1, delta2))
        if alpha1 >= 1:
            msg = f"Calibration gives alpha1 = {float(alpha1)}, which must be below 1"
            raise DomainError(msg)
        return float(alpha1)


def delta_bar(p: float, epsilon: float, branch: str | None = None) -> float:
    """Get the decay threshold above which the polynomial corollary applies.

    :param p: moment order, above 2
    :param epsilon: rate slack, positive
    :param branch: force ``"low"`` (``p <= 42``) or ``"high"`` formula; by default
        the branch is chosen from ``p``
    :return: threshold on the eigenvalue decay exponent
    """
    _check_p(p)
    if epsilon <= 0:
        msg = "epsilon must be positive"
        raise DomainError(msg)
    if branch is None:
        branch = "low" if p <= BRANCH_CROSSOVER else "high"
    if branch not in {"low", "high"}:
        msg = f"Unknown branch '{branch}'"
        raise DomainError(msg)
    with mpmath.workdps(WORKING_DPS):
        p, eps = mpmath.mpf(p), mpmath.mpf(epsilon)
        if branch == "low":
            numerator = 25 * p**2 - 54 * p + 8 - (44 * p - 4) * (3 * p - 2) * eps
        else:
            numerator = p**3 / 2 + 3 * p**2 - 12 * p + 8 - (p**2 + 2 * p - 4) * (3 * p - 2) * eps
        return float(numerator / (2 * (3 * p - 2) ** 2 * eps))


def corollary_exponent(p: float, epsilon: float) -> float:
    """Get the polynomial-decay rate exponent ``1/3 + 2/(3(3p - 2)) + epsilon``."""
    _check_p(p)
    with mpmath.workdps(WORKING_DPS):
        p = mpmath.mpf(p)
        return float(mpmath.mpf(1) / 3 + 2 / (3 * (3 * p - 2)) + mpmath.mpf(epsilon))


def finite_dim_exponent(p: float) -> float:
    """Get the finite-dimensional rate exponent ``1/4 + 1/(4(p - 1))``."""
    _check_p(p)
    with mpmath.workdps(WORKING_DPS):
        p = mpmath.mpf(p)
        return float(mpmath.mpf(1) / 4 + 1 / (4 * (p - 1)))


def a_d_root(pprime: float, d: float) -> float:
    """Get ``A_d^{1/p'} = max{d^11, d^{(p'+2)/4} (ln d)^{(p'+1)/2}}`` with unit constant.

    :param pprime: working moment order, above 2
    :param d: projection dimension, at least 2
    :return: root of the Gaussian embedding constant
    """
    _check_pprime(pprime)
    if d < 2:
        msg = f"d must be at least 2, got {d}"
        raise DomainError(msg)
    with mpmath.workdps(WORKING_DPS):
        q, d = mpmath.mpf(pprime), mpmath.mpf(d)
        return float(max(d**11, d ** ((q + 2) / 4) * mpmath.log(d) ** ((q + 1) / 2)))


def coupling_exponent(pprime: float, delta1: float, delta2: float) -> float:
    """Get the dyadic coupling exponent ``(1 - (delta2 - 1) theta_{p'}) / 2``."""
    with mpmath.workdps(WORKING_DPS):
        theta = mpmath.mpf(theta_pprime(pprime, delta1, delta2))
        return float((1 - (mpmath.mpf(delta2) - 1) * theta) / 2)


def big_block_exponent(alpha1: float, pprime: float) -> float:
    """Get the big-block coupling error exponent ``(1 - alpha1)/p' + alpha1/2``."""
    _check_pprime(pprime)
    if not 0 < alpha1 < 1:
        msg = f"alpha1 must lie in (0, 1), got {alpha1}"
        raise DomainError(msg)
    with mpmath.workdps(WORKING_DPS):
        a = mpmath.mpf(alpha1)
        return float((1 - a) / mpmath.mpf(pprime) + a / 2)


def projection_dim(m: int, theta: float) -> int:
    """Get the projection dimension ``floor(2^{m theta})`` used at dyadic level ``m``."""
    if m < 0 or theta < 0:
        msg = "m and theta must be non-negative"
        raise DomainError(msg)
    with mpmath.workdps(WORKING_DPS):
        return int(mpmath.floor(mpmath.power(2, m * mpmath.mpf(theta))))


def branch_crossover() -> int:
    """Get the common branch switch point, the positive root of ``23x - 4 = x(x+4)/2 - 4``."""
    with mpmath.workdps(WORKING_DPS):
        roots = mpmath.polyroots([mpmath.mpf(1) / 2, 2 - 23, 0])
        return int(mpmath.nint(max(mpmath.re(r) for r in roots)))


def rate_report(inputs: RateInputs) -> RateReport:
    """Evaluate every rate computable from the given inputs.

    :param inputs: validated parameters
    :return: report with ``None`` for rates whose inputs are absent
    """
    fields = {
        "theta_bar": theta_bar(inputs.p, inputs.delta1, inputs.delta2),
        "finite_dim_exp": finite_dim_exponent(inputs.p),
    }
    if inputs.epsilon is not None:
        fields["delta_bar"] = delta_bar(inputs.p, inputs.epsilon)
        fields["corollary_exp"] = corollary_exponent(inputs.p, inputs.epsilon)
    if inputs.pprime is not None:
        fields["theta_pprime"] = theta_pprime(inputs.pprime, inputs.delta1, inputs.delta2)
        fields["alpha1"] = alpha1_of(inputs.pprime, inputs.delta1, inputs.delta2)
        fields["coupling_exp"] = coupling_exponent(inputs.pprime, inputs.delta1, inputs.delta2)
        fields["big_block_exp"] = big_block_exponent(fields["alpha1"], inputs.pprime)
        if inputs.d is not None:
            fields["a_d_root"] = a_d_root(inputs.pprime, inputs.d)
    _logger.debug("Rate report for %s: %s", inputs, fields)
    return RateReport(**fields)
