"""Provide Monte Carlo checks tying simulated paths to moment, block and CLT bounds.

A ``PathBatch`` never holds its replicas in memory. Each check maps a per-replica
functional over the batch; replicas run in parallel through ``joblib`` and their
results are stacked in replica order before any reduction, so summaries do not
depend on the number of workers.
"""

import logging
import math
from collections.abc import Callable
from dataclasses import dataclass, field

import numpy as np
from joblib import Parallel, delayed
from scipy import stats
from tqdm import tqdm

from .base_model import DomainError, ResourceLimitError, TimeSeriesModel
from .blocking import BlockPlan, block_sums, range_sums
from .markov import FiniteChain, beta_exact, sample_pairs
from .mixing import empirical_quantile, merl_bound
from .utils.rng import replica_rng

_logger = logging.getLogger(__name__)

DEFAULT_MAX_CELLS = 500_000_000
DEFAULT_SLOPE_GRID = tuple(2**e for e in range(6, 13))
CLT_MIN_REPLICAS = 500


def _replica_task(
    model: TimeSeriesModel,
    n: int,
    seed: int,
    replica: int,
    fn: Callable[[np.ndarray], np.ndarray],
) -> np.ndarray:
    return np.asarray(fn(model.simulate(n, seed, replica)), dtype=float)


@dataclass(frozen=True)
class PathBatch:
    """``R`` independent stationary replicas of length ``n`` from one model.

    Row ``i - 1`` of a replica path holds ``X_i``; partial sums ``S_i`` are taken over
    these rows, with ``S_0 = 0``.
    """

    model: TimeSeriesModel
    n: int
    replicas: int
    seed: int
    workers: int = 1
    silent: bool = True
    _tqdm_params: dict = field(init=False, repr=False, compare=False)

    def __post_init__(self) -> None:
        """Set progress bar parameters."""
        object.__setattr__(
            self,
            "_tqdm_params",
            {"disable": self.silent, "unit": "replica", "ncols": 80, "desc": self.model.name},
        )

    @property
    def dim(self) -> int:
        """Get ambient dimension of the model."""
        return self.model.dim

    def path(self, replica: int) -> np.ndarray:
        """Simulate a single replica."""
        if not 0 <= replica < self.replicas:
            msg = f"Replica index must lie in [0, {self.replicas - 1}], got {replica}"
            raise DomainError(msg)
        return self.model.simulate(self.n, self.seed, replica)

    def map(self, fn: Callable[[np.ndarray], np.ndarray]) -> np.ndarray:
        """Apply a functional to every replica path.

        :param fn: function of a path of shape ``(n, D)``
        :return: results stacked along a leading replica axis, in replica order
        """
        runner = Parallel(n_jobs=self.workers, return_as="generator")
        results = runner(
            delayed(_replica_task)(self.model, self.n, self.seed, r, fn)
            for r in range(self.replicas)
        )
        return np.stack(list(tqdm(results, total=self.replicas, **self._tqdm_params)))


def simulate_batch(
    model: TimeSeriesModel,
    n: int,
    replicas: int,
    seed: int,
    workers: int = 1,
    max_cells: int = DEFAULT_MAX_CELLS,
    silent: bool = True,
) -> PathBatch:
    """Set up a batch of independent stationary replicas.

    :param model: model to simulate
    :param n: horizon
    :param replicas: number of replicas ``R``
    :param seed: experiment seed
    :param workers: ``joblib`` worker count (``-1`` for all cores)
    :param max_cells: cap on ``n * R * D``
    :param silent: if True, don't show progress bars
    :return: batch
    :raise ResourceLimitError: if the batch exceeds ``max_cells``
    """
    if n < 1 or replicas < 1:
        msg = f"Horizon and replica count must be at least 1, got n={n}, R={replicas}"
        raise DomainError(msg)
    cells = n * replicas * model.dim
    if cells > max_cells:
        msg = f"Batch of {cells} cells exceeds the configured cap of {max_cells}"
        raise ResourceLimitError(msg)
    _logger.info("Batch %s: n=%s, R=%s, seed=%s", model.name, n, replicas, seed)
    return PathBatch(model, n, replicas, seed, workers, silent)


def _fit_slope(x: np.ndarray, y: np.ndarray) -> tuple[float, float]:
    slope, intercept = np.polyfit(x, y, 1)
    return float(slope), float(intercept)


@dataclass(frozen=True)
class SlopeFit:
    """Log-log fit of ``E||S_n||^{p'}`` against ``n``."""

    slope: float
    intercept: float
    table: list[tuple[int, float]]


def moment_slope(
    batch: PathBatch, pprime: float, grid: tuple[int, ...] = DEFAULT_SLOPE_GRID
) -> SlopeFit:
    """Fit the growth exponent of ``E||S_n||^{p'}`` over a dyadic grid.

    All grid horizons are prefixes of the same replica paths.

    :param batch: batch covering the largest grid horizon
    :param pprime: moment order, at least 2
    :param grid: horizons
    :return: slope, intercept and ``(n, mean ||S_n||^{p'})`` table
    :raise DomainError: with fewer than 3 usable grid points or a vanishing moment
    """
    if pprime < 2:
        msg = f"pprime must be at least 2, got {pprime}"
        raise DomainError(msg)
    horizons = [n for n in grid if n <= batch.n]
    if len(horizons) < 3:
        msg = f"Moment slope needs at least 3 grid points within n={batch.n}"
        raise DomainError(msg)
    index = np.array(horizons) - 1

    def functional(path: np.ndarray) -> np.ndarray:
        sums = np.cumsum(path, axis=0)[index]
        return np.linalg.norm(sums, axis=1) ** pprime

    means = batch.map(functional).mean(axis=0)
    if np.any(means <= 0):
        msg = "Moment slope is undefined for paths with vanishing partial sums"
        raise DomainError(msg)
    slope, intercept = _fit_slope(np.log(horizons), np.log(means))
    _logger.debug("Moment slope %.4f for p'=%s", slope, pprime)
    return SlopeFit(slope, intercept, list(zip(horizons, means.tolist(), strict=True)))


def _check_horizon(batch: PathBatch, plans: list[BlockPlan]) -> None:
    if not plans:
        msg = "At least one block plan is required"
        raise DomainError(msg)
    reach = max(plan.hi for plan in plans)
    if batch.n < reach:
        msg = f"Batch horizon {batch.n} does not cover index {reach}"
        raise DomainError(msg)


def _bounded(column: np.ndarray, factor: float) -> bool:
    return bool(column[-1] <= factor * np.median(column))


@dataclass(frozen=True)
class BlockMoments:
    """Normalized block moments per dyadic level."""

    table: list[tuple[int, float, float]]
    passed: bool


def block_moment_check(
    batch: PathBatch, plans: list[BlockPlan], pprime: float, factor: float = 2.0
) -> BlockMoments:
    """Check that normalized big and small block moments stay bounded over ``m``.

    Columns are ``mean ||Y||^{p'} / m1^{p'/2}`` and ``mean ||Z||^{p'} / m2^{p'/2}``
    over full blocks and replicas; a column is bounded when its last value is at
    most ``factor`` times its median.

    :param batch: batch covering the largest plan
    :param plans: one plan per level, in increasing ``m``
    :param pprime: moment order
    :param factor: bounded-growth factor
    :return: table and verdict
    """
    _check_horizon(batch, plans)

    def functional(path: np.ndarray) -> np.ndarray:
        rows = []
        for plan in plans:
            big, small = block_sums(path, plan)
            full = plan.full_blocks
            rows.append(
                [
                    np.mean(np.linalg.norm(big[:full], axis=1) ** pprime),
                    np.mean(np.linalg.norm(small[:full], axis=1) ** pprime),
                ]
            )
        return np.array(rows)

    means = batch.map(functional).mean(axis=0)
    norms = np.array([[p.m1 ** (pprime / 2), p.m2 ** (pprime / 2)] for p in plans])
    ratios = means / norms
    passed = _bounded(ratios[:, 0], factor) and _bounded(ratios[:, 1], factor)
    table = [
        (plan.m, float(y), float(z)) for plan, (y, z) in zip(plans, ratios, strict=True)
    ]
    return BlockMoments(table, passed)


@dataclass(frozen=True)
class GrowthTrend:
    """Normalized partial-sum maxima per dyadic level with a fitted trend."""

    table: list[tuple[int, float]]
    slope: float
    passed: bool


def _masked_maxima(path: np.ndarray, plan: BlockPlan, blocks: tuple[range, ...]) -> float:
    mask = np.zeros(path.shape[0], dtype=bool)
    for block in blocks:
        mask[block.start - 1 : block.stop - 1] = True
    window = slice(plan.lo - 1, plan.hi)
    running = np.cumsum(np.where(mask[window, np.newaxis], path[window], 0.0), axis=0)
    return float(np.linalg.norm(running, axis=1).max())


def _trend(
    batch: PathBatch,
    plans: list[BlockPlan],
    select: Callable[[BlockPlan], tuple[range, ...]],
    scale: Callable[[BlockPlan], float],
    margin: float,
    skip: int,
) -> GrowthTrend:
    _check_horizon(batch, plans)

    def functional(path: np.ndarray) -> np.ndarray:
        return np.array([_masked_maxima(path, plan, select(plan)) for plan in plans])

    maxima = batch.map(functional).mean(axis=0)
    column = maxima / np.array([scale(plan) for plan in plans])
    levels = np.array([plan.m for plan in plans], dtype=float)
    tail = slice(skip, None) if len(plans) - skip >= 2 else slice(None)
    slope, _ = _fit_slope(levels[tail], column[tail])
    table = [(plan.m, float(v)) for plan, v in zip(plans, column, strict=True)]
    return GrowthTrend(table, slope, slope <= margin)


def small_block_growth(
    batch: PathBatch, plans: list[BlockPlan], alpha1: float, margin: float = 0.05
) -> GrowthTrend:
    """Check that small-block partial sums are negligible at the big-block scale.

    Per level, ``max_i ||sum_{l in J(m), l <= i} X_l||`` is normalized by
    ``2^{(1-alpha1)m/2} m ln 2`` and averaged over replicas; the check passes when the
    least-squares slope over ``m``, after the first two levels, is at most ``margin``.

    :param batch: batch covering the largest plan
    :param plans: one plan per level, in increasing ``m``
    :param alpha1: big-block exponent used in the normalization
    :param margin: allowed upward slope
    :return: table, slope and verdict
    """
    return _trend(
        batch,
        plans,
        lambda plan: plan.small,
        lambda plan: 2 ** ((1 - alpha1) * plan.m / 2) * plan.m * math.log(2),
        margin,
        skip=2,
    )


def big_block_growth(
    batch: PathBatch,
    plans: list[BlockPlan],
    alpha1: float,
    pprime: float,
    margin: float = 0.05,
) -> GrowthTrend:
    """Track big-block partial-sum maxima at the coupling error scale.

    Maxima are normalized by ``2^{((1-alpha1)/p' + alpha1/2) m} sqrt(m ln 2)``.

    :param batch: batch covering the largest plan
    :param plans: one plan per level, in increasing ``m``
    :param alpha1: big-block exponent
    :param pprime: moment order
    :param margin: allowed upward slope
    :return: table, slope and verdict
    """
    exponent = (1 - alpha1) / pprime + alpha1 / 2
    return _trend(
        batch,
        plans,
        lambda plan: plan.big,
        lambda plan: 2 ** (exponent * plan.m) * math.sqrt(plan.m * math.log(2)),
        margin,
        skip=2,
    )


@dataclass(frozen=True)
class CltResult:
    """Kolmogorov-Smirnov comparison of standardized partial sums with ``N(0, 1)``."""

    ks_stat: float
    pvalue: float
    passed: bool


def clt_check(
    batch: PathBatch,
    k: int,
    n: int | None = None,
    variance: float | None = None,
    threshold: float = 0.01,
) -> CltResult:
    """Compare ``S_{n,k} / sqrt(variance)`` across replicas with a standard normal.

    :param batch: batch with at least ``CLT_MIN_REPLICAS`` replicas
    :param k: 1-based coordinate
    :param n: horizon, defaulting to the batch horizon
    :param variance: variance to standardize with, defaulting to ``n g(lambda_k)``
    :param threshold: smallest passing p-value
    :return: KS statistic, p-value and verdict
    :raise DomainError: if the batch has too few replicas or the target variance is zero
    """
    if not 1 <= k <= batch.dim:
        msg = f"Coordinate must lie in [1, {batch.dim}], got {k}"
        raise DomainError(msg)
    if batch.replicas < CLT_MIN_REPLICAS:
        msg = f"KS comparison needs at least {CLT_MIN_REPLICAS} replicas, got {batch.replicas}"
        raise DomainError(msg)
    n = batch.n if n is None else n
    if not 1 <= n <= batch.n:
        msg = f"Horizon must lie in [1, {batch.n}], got {n}"
        raise DomainError(msg)
    if variance is None:
        variance = n * float(batch.model.longrun_diagonal()[k - 1])
    if variance <= 0:
        msg = "Target variance g(lambda_k) must be positive"
        raise DomainError(msg)

    values = batch.map(lambda path: path[:n, k - 1].sum(keepdims=True))[:, 0]
    result = stats.kstest(values / math.sqrt(variance), "norm")
    return CltResult(float(result.statistic), float(result.pvalue), result.pvalue > threshold)


@dataclass(frozen=True)
class IndependenceGap:
    """Dependence between consecutive big-block norms against its mixing envelope."""

    corr_abs: float
    envelope: float
    se: float


def independence_gap(
    batch: PathBatch, plan: BlockPlan, beta: float, surrogate: bool = False
) -> IndependenceGap:
    """Measure the correlation between norms of consecutive full big blocks.

    Correlations are taken across replicas for each pair ``(Y_j, Y_{j+1})`` and
    averaged in absolute value. The surrogate pairs each block with the next block of
    a different, randomly chosen replica, which makes them independent.

    :param batch: batch covering the plan
    :param plan: plan with at least 3 full big blocks
    :param beta: exponential mixing rate for the envelope ``exp(-beta m2)``
    :param surrogate: resample blocks independently
    :return: mean absolute correlation, envelope and standard error ``1/sqrt(R)``
    """
    if plan.full_blocks < 3:
        msg = f"Independence gap needs at least 3 full big blocks, plan has {plan.full_blocks}"
        raise DomainError(msg)
    _check_horizon(batch, [plan])
    full = plan.big[: plan.full_blocks]
    norms = batch.map(lambda path: np.linalg.norm(range_sums(path, full), axis=1))
    leading, following = norms[:, :-1], norms[:, 1:]
    if surrogate:
        rng = replica_rng(batch.seed, batch.replicas)
        following = following[rng.permutation(batch.replicas)]
    correlations = [
        np.corrcoef(leading[:, j], following[:, j])[0, 1] for j in range(leading.shape[1])
    ]
    corr_abs = float(np.nanmean(np.abs(correlations)))
    return IndependenceGap(corr_abs, math.exp(-beta * plan.m2), 1.0 / math.sqrt(batch.replicas))


@dataclass(frozen=True)
class MerlDomination:
    """Quantile covariance bound against empirical embedded covariances per lag."""

    table: list[tuple[int, float, float, float, float]]
    passed: bool


def merl_domination(
    chain: FiniteChain, lags: int, samples: int, seed: int, se_band: float = 3.0
) -> MerlDomination:
    """Check ``|Cov<phi(X_0), phi(X_k)>| <= 18 int_0^{beta(k)} Q Q`` by sampling.

    Each lag uses ``samples`` independent stationary pairs from its own stream.

    :param chain: chain with its embedding
    :param lags: largest lag ``k``
    :param samples: pairs per lag
    :param seed: experiment seed
    :param se_band: allowed excess in Monte Carlo standard errors
    :return: rows ``(k, beta(k), bound, |cov|, se)`` and verdict
    """
    table, passed = [], True
    for k in range(1, lags + 1):
        first, lagged = sample_pairs(chain, k, samples, replica_rng(seed, k))
        phi0, phik = chain.embed[first], chain.embed[lagged]
        products = np.einsum("ij,ij->i", phi0, phik)
        cov = float(products.mean() - phi0.mean(axis=0) @ phik.mean(axis=0))
        se = float(products.std(ddof=1) / math.sqrt(samples))
        beta = beta_exact(chain, k)
        bound = merl_bound(
            empirical_quantile(np.linalg.norm(phi0, axis=1)),
            empirical_quantile(np.linalg.norm(phik, axis=1)),
            beta,
        )
        passed = passed and bound >= abs(cov) - se_band * se
        table.append((k, beta, bound, abs(cov), se))
    return MerlDomination(table, passed)
