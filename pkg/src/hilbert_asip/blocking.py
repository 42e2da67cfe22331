"""Provide the dyadic big/small blocking scheme.

Each dyadic interval ``[2^m + 1, 2^{m+1}]`` is cut into alternating big blocks
``I_{m,j}`` of length ``m1 = 2^floor(alpha1 m)`` and small blocks ``J_{m,j}`` of length
``m2 = floor(C* ln 2^m)``, followed by a possibly shorter tail pair. Indices are
1-based time indices and blocks are stored as ``range`` objects over them.
"""

import logging
import math
from dataclasses import dataclass

import numpy as np

from .base_model import DomainError

_logger = logging.getLogger(__name__)

_FLOOR_GUARD = 1e-12


@dataclass(frozen=True)
class BlockPlan:
    """Big/small block decomposition of one dyadic interval."""

    m: int
    alpha1: float
    cstar: float
    m1: int
    m2: int
    m2_clamped: bool
    big: tuple[range, ...]
    small: tuple[range, ...]

    @property
    def lo(self) -> int:
        """Get first index of the interval, ``2^m + 1``."""
        return 2**self.m + 1

    @property
    def hi(self) -> int:
        """Get last index of the interval, ``2^{m+1}``."""
        return 2 ** (self.m + 1)

    @property
    def full_blocks(self) -> int:
        """Get number of full big blocks, ``kappa(2^{m+1})``."""
        return len(self.big) - 1

    def to_dict(self) -> dict:
        """Get JSON form; blocks are inclusive ``[first, last]`` pairs or ``[]``."""
        return {
            "m": self.m,
            "alpha1": self.alpha1,
            "cstar": self.cstar,
            "m1": self.m1,
            "m2": self.m2,
            "m2_clamped": self.m2_clamped,
            "big": [_bounds(block) for block in self.big],
            "small": [_bounds(block) for block in self.small],
        }


def _bounds(block: range) -> list[int]:
    return [block.start, block.stop - 1] if len(block) else []


def build_plan(m: int, alpha1: float, cstar: float) -> BlockPlan:
    """Build the blocking of ``[2^m + 1, 2^{m+1}]``.

    The tail big block ends at ``min(2^{m+1}, 2^m + (m1 + m2) kappa + m1)``; whatever
    remains after it forms the tail small block, which is empty whenever the tail big
    block reaches the end of the interval.

    :param m: dyadic level, at least 1
    :param alpha1: big-block exponent in ``(0, 1)``
    :param cstar: small-block constant, positive
    :return: plan
    :raise DomainError: if a parameter is out of range
    """
    if m < 1:
        msg = f"Dyadic level m must be at least 1, got {m}"
        raise DomainError(msg)
    if not 0 < alpha1 < 1:
        msg = f"alpha1 must lie in (0, 1), got {alpha1}"
        raise DomainError(msg)
    if cstar <= 0:
        msg = f"cstar must be positive, got {cstar}"
        raise DomainError(msg)
    m1 = 2 ** math.floor(alpha1 * m + _FLOOR_GUARD)
    raw_m2 = math.floor(cstar * m * math.log(2) + _FLOOR_GUARD)
    m2 = max(raw_m2, 1)
    if raw_m2 < 1:
        _logger.warning("Small block length clamped to 1 at m=%s, cstar=%s", m, cstar)

    origin, hi = 2**m, 2 ** (m + 1)
    period = m1 + m2
    count = (hi - origin) // period
    big, small = [], []
    for j in range(count):
        start = origin + period * j + 1
        big.append(range(start, start + m1))
        small.append(range(start + m1, start + period))
    tail_start = origin + period * count + 1
    tail_end = min(hi, origin + period * count + m1)
    big.append(range(tail_start, tail_end + 1))
    small.append(range(tail_end + 1, hi + 1))

    plan = BlockPlan(m, alpha1, cstar, m1, m2, raw_m2 < 1, tuple(big), tuple(small))
    _logger.debug("Built plan m=%s: m1=%s, m2=%s, kappa=%s", m, m1, m2, count)
    return plan


def kappa(plan: BlockPlan, n: int) -> int:
    """Count full big/small pairs fitting in ``[2^m + 1, n]``.

    :param plan: plan
    :param n: index in ``[2^m + 1, 2^{m+1}]``
    :return: ``floor((n - 2^m) / (m1 + m2))``
    """
    if not plan.lo <= n <= plan.hi:
        msg = f"n must lie in [{plan.lo}, {plan.hi}], got {n}"
        raise DomainError(msg)
    return (n - 2**plan.m) // (plan.m1 + plan.m2)


def check_tiling(plan: BlockPlan) -> bool:
    """Check that the blocks cover ``[2^m + 1, 2^{m+1}]`` index by index, exactly once.

    Also checks that full blocks have lengths ``m1`` and ``m2`` and start at
    ``i_{m,j} = 2^m + (m1 + m2)(j - 1) + 1``.

    :param plan: plan
    :return: whether the plan is a valid tiling
    """
    counts = np.zeros(plan.hi + 1, dtype=np.int64)
    order = [block for pair in zip(plan.big, plan.small, strict=True) for block in pair]
    position = plan.lo
    for block in order:
        if len(block) and block.start != position:
            return False
        counts[block.start : block.stop] += 1
        position += len(block)
    if position != plan.hi + 1 or np.any(counts[plan.lo :] != 1) or np.any(counts[: plan.lo]):
        return False
    full = plan.full_blocks
    if full != kappa(plan, plan.hi):
        return False
    expected = [2**plan.m + (plan.m1 + plan.m2) * j + 1 for j in range(full)]
    lengths_ok = all(len(b) == plan.m1 for b in plan.big[:full]) and all(
        len(b) == plan.m2 for b in plan.small[:full]
    )
    return lengths_ok and list(big_block_starts(plan)) == expected


def big_block_starts(plan: BlockPlan) -> tuple[int, ...]:
    """Get first indices ``i_{m,j}`` of the full big blocks."""
    return tuple(block.start for block in plan.big[: plan.full_blocks])


def plan_prefix(plan: BlockPlan, n: int) -> tuple[tuple[range, ...], tuple[range, ...], range]:
    """Decompose ``[2^m + 1, n]`` into full block pairs and a remainder.

    :param plan: plan
    :param n: index in ``[2^m + 1, 2^{m+1}]``
    :return: big blocks and small blocks ``j <= kappa(n)``, and the remaining indices
    """
    count = kappa(plan, n)
    remainder = range(2**plan.m + (plan.m1 + plan.m2) * count + 1, n + 1)
    return plan.big[:count], plan.small[:count], remainder


def _prefix_sums(path: np.ndarray) -> np.ndarray:
    zero = np.zeros((*path.shape[:-2], 1, path.shape[-1]))
    return np.concatenate([zero, np.cumsum(path, axis=-2)], axis=-2)


def range_sums(path: np.ndarray, blocks: tuple[range, ...]) -> np.ndarray:
    """Sum a path over 1-based index ranges.

    :param path: array of shape ``(..., n, D)`` whose row ``i - 1`` holds ``X_i``
    :param blocks: index ranges
    :return: array of shape ``(..., len(blocks), D)``; empty ranges give zeros
    """
    sums = _prefix_sums(path)
    stops = np.array([block.stop - 1 for block in blocks], dtype=np.int64)
    starts = np.array([block.start - 1 for block in blocks], dtype=np.int64)
    starts = np.minimum(starts, stops)
    return sums[..., stops, :] - sums[..., starts, :]


def block_sums(path: np.ndarray, plan: BlockPlan) -> tuple[np.ndarray, np.ndarray]:
    """Sum a path over every big and small block of a plan.

    :param path: array of shape ``(..., n, D)`` whose row ``i - 1`` holds ``X_i``
    :param plan: plan
    :return: big-block sums ``Y`` and small-block sums ``Z``, each of shape
        ``(..., kappa + 1, D)`` with the tail pair last
    :raise DomainError: if the path does not reach ``2^{m+1}``
    """
    path = np.asarray(path, dtype=float)
    if path.shape[-2] < plan.hi:
        msg = f"Path of length {path.shape[-2]} does not cover index {plan.hi}"
        raise DomainError(msg)
    return range_sums(path, plan.big), range_sums(path, plan.small)


def default_cstar(alpha1: float, pprime: float, beta: float) -> float:
    """Get the smallest admissible small-block constant ``2(1 - alpha1)(p' - 1/2)/beta``.

    :param alpha1: big-block exponent in ``(0, 1)``
    :param pprime: moment order ``p' > 2``
    :param beta: exponential mixing rate
    :return: ``C*``
    """
    if not 0 < alpha1 < 1:
        msg = f"alpha1 must lie in (0, 1), got {alpha1}"
        raise DomainError(msg)
    if pprime <= 2:
        msg = f"pprime must exceed 2, got {pprime}"
        raise DomainError(msg)
    if beta <= 0:
        msg = f"beta must be positive, got {beta}"
        raise DomainError(msg)
    return 2.0 * (1.0 - alpha1) * (pprime - 0.5) / beta
