"""Run verification suites and write their verdicts.

Each suite returns a ``SuiteVerdict``. Hard suites decide the exit status of a run;
diagnostic suites are reported only. Every run directory gets one JSON verdict per
suite, a CSV of the suite's table when it has one, and a manifest holding everything
needed to reproduce the run.
"""

import logging
import math
from collections.abc import Callable
from dataclasses import dataclass, field
from pathlib import Path

import numpy as np

from .base_model import GaussianComparator, TimeSeriesModel
from .blocking import build_plan, check_tiling, kappa
from .config import ExperimentConfig, build_model, build_plans, resolve_cstar
from .covariance import (
    block_cov_eigs,
    cov_sn_exact,
    covariance_slack,
    defect_curve,
    empirical_cov,
)
from .far import FarModel, longrun_gamma, make_far, stationary_var
from .harness import (
    PathBatch,
    big_block_growth,
    block_moment_check,
    clt_check,
    independence_gap,
    merl_domination,
    moment_slope,
    simulate_batch,
    small_block_growth,
)
from .markov import (
    FiniteChain,
    beta_bound,
    beta_exact,
    decay_exponent,
    default_chain,
    drift_check,
    slem,
    solve_cgamma,
    stationary,
)
from .rates import (
    RateInputs,
    branch_crossover,
    corollary_exponent,
    delta_bar,
    finite_dim_exponent,
    rate_report,
    theta_bar,
)
from .utils.export import write_csv, write_json
from .utils.storage import MANIFEST_NAME

_logger = logging.getLogger(__name__)

CLT_HORIZON = 1024
DEFECT_EXPONENTS = range(4, 15)
MIXING_LAGS = 50


@dataclass(frozen=True)
class SuiteVerdict:
    """Outcome of one verification suite."""

    suite: str
    params: dict
    statistics: dict
    passed: bool
    hard: bool
    header: tuple[str, ...] = ()
    table: list = field(default_factory=list)

    def to_dict(self) -> dict:
        """Get JSON verdict document."""
        return {
            "suite": self.suite,
            "params": self.params,
            "statistics": self.statistics,
            "pass": self.passed,
            "hard": self.hard,
        }


@dataclass(frozen=True)
class SuiteContext:
    """Models and plans shared by the suites of one run."""

    config: ExperimentConfig
    model: TimeSeriesModel
    far: FarModel
    chain: FiniteChain
    cstar: float

    @classmethod
    def from_config(cls, config: ExperimentConfig) -> "SuiteContext":
        """Build every model named by a config, resolving ``cstar``."""
        model = build_model(config)
        far = model if isinstance(model, FarModel) else make_far(
            config.D, config.c, config.delta, config.noise
        )
        chain = model if isinstance(model, FiniteChain) else default_chain()
        return cls(config, model, far, chain, resolve_cstar(config, model))

    @property
    def plans(self) -> list:
        """Get one plan per configured level."""
        return build_plans(self.config, self.cstar)

    def batch(self, model: TimeSeriesModel, n: int) -> PathBatch:
        """Set up a batch with the configured replica count, seed and workers."""
        cfg = self.config
        return simulate_batch(
            model, n, cfg.R, cfg.seed, cfg.workers, cfg.max_batch_cells, cfg.silent
        )


def _close(a: float, b: float, rel: float) -> bool:
    return math.isclose(a, b, rel_tol=rel, abs_tol=rel)


def rates_suite(ctx: SuiteContext) -> SuiteVerdict:
    """Check rate formulas against exact values, limits and branch crossovers."""
    cfg = ctx.config
    checks = {
        "theta_bar_4_2_2": _close(theta_bar(4, 2, 2), 26 / 53, 1e-12),
        "delta_bar_4": _close(delta_bar(4, 0.05), 10.6, 1e-12),
        "corollary_4": _close(corollary_exponent(4, 0), 0.4, 1e-12),
        "finite_dim_3": _close(finite_dim_exponent(3), 0.375, 1e-12),
        "crossover": branch_crossover() == 42,
        "delta_bar_continuity": _close(
            delta_bar(42, cfg.epsilon, "low"), delta_bar(42, cfg.epsilon, "high"), 1e-9
        ),
    }
    table = []
    for p in (3, 4, 8, 50):
        for delta in (1e3, 1e4, 1e6):
            gap = abs(theta_bar(p, delta, delta) - p / (3 * p - 2))
            table.append((p, delta, gap, 10 / delta))
    checks["limit_identity"] = all(gap <= bound for *_, gap, bound in table)
    report = rate_report(
        RateInputs(cfg.p, cfg.delta, cfg.delta, pprime=cfg.pprime, epsilon=cfg.epsilon)
    )
    return SuiteVerdict(
        "rates",
        {"p": cfg.p, "delta": cfg.delta, "pprime": cfg.pprime, "epsilon": cfg.epsilon},
        {"checks": checks, "report": report.to_dict()},
        all(checks.values()),
        hard=True,
        header=("p", "delta", "limit_gap", "limit_bound"),
        table=table,
    )


def far_closed_forms_suite(ctx: SuiteContext) -> SuiteVerdict:
    """Check the long-run variance formula and Cesaro convergence of ``cov(S_n)/n``."""
    grid = np.linspace(1e-3, 1 - 1e-3, 1000)
    grid_model = FarModel(np.sort(grid)[::-1])
    g = longrun_gamma(grid_model).diag()
    identity_gap = float(np.max(np.abs(g - grid_model.lambdas / (1 - grid_model.lambdas) ** 2) / g))
    g_half = float(longrun_gamma(FarModel([0.5])).diag()[0])
    g_third = float(longrun_gamma(FarModel([1 / 3])).diag()[0])

    far = ctx.far
    g_far = longrun_gamma(far).diag()
    table, increasing, below = [], True, True
    previous = np.zeros(far.dim)
    for e in DEFECT_EXPONENTS:
        n = 2**e
        ratio = cov_sn_exact(far, n).diag() / n
        increasing = increasing and bool(np.all(ratio >= previous))
        below = below and bool(np.all(ratio <= g_far))
        previous = ratio
        table.append((n, *(g_far - ratio).tolist()))
    passed = (
        identity_gap <= 1e-12
        and _close(g_half, 2.0, 1e-12)
        and _close(g_third, 0.75, 1e-12)
        and increasing
        and below
    )
    return SuiteVerdict(
        "far_closed_forms",
        {"D": far.dim, "c": far.c, "delta": far.delta},
        {
            "identity_max_rel_gap": identity_gap,
            "g_half": g_half,
            "g_third": g_third,
            "cesaro_increasing": increasing,
            "cesaro_below_gamma": below,
        },
        passed,
        hard=True,
        header=("n", *(f"gap_{k}" for k in range(1, far.dim + 1))),
        table=table,
    )


def gamma_defect_suite(ctx: SuiteContext) -> SuiteVerdict:
    """Check that ``||cov(S_n) - n Gamma||_F`` is bounded and Cauchy in ``n``."""
    reports = defect_curve(ctx.far, [2**e for e in DEFECT_EXPONENTS])
    defects = np.array([r.defect for r in reports])
    bounded = bool(defects.max() <= defects[-1] + 1e-9)
    late = [r.defect for r in reports if r.n >= 2**12]
    cauchy = bool(np.all(np.abs(np.diff(late)) < 1e-6))
    return SuiteVerdict(
        "gamma_defect",
        {"D": ctx.far.dim, "horizons": [r.n for r in reports]},
        {"max_defect": float(defects.max()), "final_defect": float(defects[-1]),
         "bounded": bounded, "cauchy": cauchy},
        bounded and cauchy,
        hard=True,
        header=("n", "defect", *(f"r_{k}" for k in range(1, ctx.far.dim + 1))),
        table=[r.to_row() for r in reports],
    )


def block_eigs_suite(ctx: SuiteContext) -> SuiteVerdict:
    """Check block covariance eigenvalue bounds over block lengths and dimensions."""
    table = []
    for m1 in range(2, 65):
        for d in range(1, ctx.far.dim + 1):
            lambda_max, lambda_min, ok = block_cov_eigs(ctx.far, m1, d)
            table.append((m1, d, lambda_max, lambda_min, ok))
    failures = sum(not row[-1] for row in table)
    return SuiteVerdict(
        "block_eigs",
        {"m1": [2, 64], "d": [1, ctx.far.dim]},
        {"cases": len(table), "failures": failures},
        failures == 0,
        hard=True,
        header=("m1", "d", "lambda_max", "lambda_min", "bound_ok"),
        table=table,
    )


def blocking_suite(ctx: SuiteContext) -> SuiteVerdict:
    """Check the tiling of dyadic intervals over a parameter grid and the run's plans."""
    table = []
    for m in range(1, 11):
        for alpha1 in (0.3, 0.5, 0.7):
            for cstar in (1.0, 2.5):
                plan = build_plan(m, alpha1, cstar)
                table.append((m, alpha1, cstar, plan.m1, plan.m2, check_tiling(plan)))
    table.extend(
        (plan.m, plan.alpha1, plan.cstar, plan.m1, plan.m2, check_tiling(plan))
        for plan in ctx.plans
    )
    example = build_plan(4, 0.5, 1.0)
    kappa_ok = kappa(example, 32) == 2 and kappa(example, 25) == 1
    failures = sum(not row[-1] for row in table)
    return SuiteVerdict(
        "blocking",
        {"cstar": ctx.cstar, "alpha1": ctx.config.alpha1},
        {"plans": len(table), "failures": failures, "kappa_examples": kappa_ok},
        failures == 0 and kappa_ok,
        hard=True,
        header=("m", "alpha1", "cstar", "m1", "m2", "tiles"),
        table=table,
    )


def exact_mixing_suite(ctx: SuiteContext) -> SuiteVerdict:
    """Check exact beta-mixing coefficients of the chain."""
    chain = ctx.chain
    betas = [beta_exact(chain, n) for n in range(1, MIXING_LAGS + 1)]
    monotone = bool(np.all(np.diff(betas) <= 1e-15))
    bounded = all(0 <= b <= 1 for b in betas)
    statistics = {"monotone": monotone, "bounded": bounded, "slem": slem(chain)}
    passed = monotone and bounded
    if chain.states == 2:
        pi = stationary(chain)
        a, b = chain.P[0, 1], chain.P[1, 0]
        closed = [2 * pi[0] * pi[1] * abs(1 - a - b) ** n for n in range(1, 31)]
        gap = float(np.max(np.abs(np.array(betas[:30]) - closed)))
        statistics["closed_form_gap"] = gap
        passed = passed and gap <= 1e-12
    return SuiteVerdict(
        "exact_mixing",
        {"states": chain.states, "lags": MIXING_LAGS},
        statistics,
        passed,
        hard=True,
        header=("n", "beta_exact"),
        table=list(enumerate(betas, start=1)),
    )


def drift_exponent_suite(ctx: SuiteContext) -> SuiteVerdict:
    """Compare exact mixing with the drift-based bound; failures are a constant regime."""
    chain = ctx.chain
    violation = drift_check(chain)
    statistics: dict = {"drift_violation": violation}
    table = []
    if violation <= 0:
        cgamma = solve_cgamma(chain.gamma)
        for n in range(1, MIXING_LAGS + 1):
            table.append((n, beta_exact(chain, n), beta_bound(chain, n)))
        dominated = all(exact <= bound for _, exact, bound in table)
        exponent = decay_exponent(chain)
        statistics.update(
            {
                "cgamma": cgamma,
                "decay_exponent": exponent,
                "bound_dominates": dominated,
                "exponent_ok": exponent >= cgamma - 1e-6,
            }
        )
        constant_regime = not (dominated and exponent >= cgamma - 1e-6)
    else:
        constant_regime = True
    if constant_regime:
        _logger.warning("Chain mixing bound falls in the constant regime")
    statistics["constant_regime"] = constant_regime
    return SuiteVerdict(
        "drift_exponent",
        {"gamma": chain.gamma, "K": chain.K},
        statistics,
        not constant_regime,
        hard=False,
        header=("n", "beta_exact", "beta_bound"),
        table=table,
    )


def merl_domination_suite(ctx: SuiteContext) -> SuiteVerdict:
    """Check quantile covariance domination on the embedded chain."""
    cfg = ctx.config
    result = merl_domination(
        ctx.chain, cfg.merl_lags, cfg.merl_samples, cfg.seed, cfg.thresholds.se_band
    )
    return SuiteVerdict(
        "merl_domination",
        {"lags": cfg.merl_lags, "samples": cfg.merl_samples, "seed": cfg.seed},
        {"lags_checked": len(result.table)},
        result.passed,
        hard=True,
        header=("k", "beta", "bound", "abs_cov", "se"),
        table=result.table,
    )


def moment_slope_suite(ctx: SuiteContext) -> SuiteVerdict:
    """Check that ``E||S_n||^{p'}`` grows like ``n^{p'/2}``."""
    cfg, t = ctx.config, ctx.config.thresholds
    fit = moment_slope(ctx.batch(ctx.model, cfg.n), cfg.pprime)
    target = cfg.pprime / 2
    lower, upper = target - t.slope_floor, target + t.slope_margin
    return SuiteVerdict(
        "moment_slope",
        {"model": ctx.model.name, "pprime": cfg.pprime, "R": cfg.R, "seed": cfg.seed},
        {"slope": fit.slope, "intercept": fit.intercept, "lower": lower, "upper": upper},
        lower <= fit.slope <= upper,
        hard=True,
        header=("n", "mean_norm_pprime"),
        table=fit.table,
    )


def block_moments_suite(ctx: SuiteContext) -> SuiteVerdict:
    """Check that normalized block moments stay bounded over dyadic levels."""
    cfg = ctx.config
    plans = ctx.plans
    batch = ctx.batch(ctx.model, max(cfg.n, max(p.hi for p in plans)))
    result = block_moment_check(batch, plans, cfg.pprime, cfg.thresholds.growth_factor)
    return SuiteVerdict(
        "block_moments",
        {"model": ctx.model.name, "m": [cfg.m_lo, cfg.m_hi], "cstar": ctx.cstar},
        {"levels": len(result.table)},
        result.passed,
        hard=True,
        header=("m", "big_ratio", "small_ratio"),
        table=result.table,
    )


def clt_suite(ctx: SuiteContext) -> SuiteVerdict:
    """Check Gaussian limits of partial sums against ``N(0, n g(lambda_1))``."""
    cfg, threshold = ctx.config, ctx.config.thresholds.ks_pvalue
    horizon = min(CLT_HORIZON, cfg.n)
    statistics, table, passed = {}, [], True
    for noise in ("gaussian", "uniform"):
        model = make_far(cfg.D, cfg.c, cfg.delta, noise)
        result = clt_check(ctx.batch(model, horizon), 1, threshold=threshold)
        table.append((noise, horizon, "g", result.ks_stat, result.pvalue, result.passed))
        passed = passed and result.passed
    gaussian = ctx.batch(make_far(cfg.D, cfg.c, cfg.delta, "gaussian"), 1)
    g1 = float(longrun_gamma(ctx.far).diag()[0])
    gamma0 = float(stationary_var(ctx.far)[0])
    against_g = clt_check(gaussian, 1, n=1, variance=g1, threshold=threshold)
    against_gamma0 = clt_check(gaussian, 1, n=1, variance=gamma0, threshold=threshold)
    table.append(("gaussian", 1, "g", against_g.ks_stat, against_g.pvalue, against_g.passed))
    table.append(
        ("gaussian", 1, "gamma0", against_gamma0.ks_stat, against_gamma0.pvalue, against_gamma0.passed)
    )
    control_ok = (not against_g.passed) and against_gamma0.passed
    statistics["negative_control"] = control_ok
    return SuiteVerdict(
        "clt",
        {"coordinate": 1, "n": horizon, "R": cfg.R, "seed": cfg.seed},
        statistics,
        passed and control_ok,
        hard=True,
        header=("noise", "n", "target", "ks_stat", "pvalue", "pass"),
        table=table,
    )


def small_block_suite(ctx: SuiteContext) -> SuiteVerdict:
    """Check small-block negligibility for the model and its Gaussian comparator."""
    cfg = ctx.config
    plans = ctx.plans
    horizon = max(cfg.n, max(p.hi for p in plans))
    table, statistics, passed = [], {}, True
    comparator = GaussianComparator.from_model(ctx.far)
    for model in (ctx.model, comparator):
        trend = small_block_growth(
            ctx.batch(model, horizon), plans, cfg.alpha1, cfg.thresholds.trend_margin
        )
        statistics[f"{model.name}_slope"] = trend.slope
        passed = passed and trend.passed
        table.extend((model.name, m, value) for m, value in trend.table)
    return SuiteVerdict(
        "small_block",
        {"m": [cfg.m_lo, cfg.m_hi], "alpha1": cfg.alpha1, "cstar": ctx.cstar},
        statistics,
        passed,
        hard=True,
        header=("model", "m", "normalized_max"),
        table=table,
    )


def gaussian_comparator_suite(ctx: SuiteContext) -> SuiteVerdict:
    """Check the comparator's marginals and moment growth against ``Gamma``."""
    cfg, t = ctx.config, ctx.config.thresholds
    comparator = GaussianComparator.from_model(ctx.far)
    batch = ctx.batch(comparator, min(CLT_HORIZON, cfg.n))
    table, passed = [], True
    for k in range(1, comparator.dim + 1):
        result = clt_check(batch, k, threshold=t.ks_pvalue)
        table.append((k, result.ks_stat, result.pvalue, result.passed))
        passed = passed and result.passed
    fit = moment_slope(batch, cfg.pprime)
    slope_ok = abs(fit.slope - cfg.pprime / 2) <= t.gaussian_slope_margin
    return SuiteVerdict(
        "gaussian_comparator",
        {"D": comparator.dim, "n": batch.n, "R": cfg.R, "pprime": cfg.pprime},
        {"slope": fit.slope, "slope_ok": slope_ok},
        passed and slope_ok,
        hard=True,
        header=("coordinate", "ks_stat", "pvalue", "pass"),
        table=table,
    )


def independence_gap_suite(ctx: SuiteContext) -> SuiteVerdict:
    """Report big-block dependence against the mixing envelope across levels."""
    cfg = ctx.config
    plans = [plan for plan in ctx.plans if plan.full_blocks >= 3]
    beta = ctx.model.mixing_rate()
    table = []
    if plans:
        batch = ctx.batch(ctx.model, max(cfg.n, max(p.hi for p in plans)))
        for plan in plans:
            gap = independence_gap(batch, plan, beta)
            surrogate = independence_gap(batch, plan, beta, surrogate=True)
            table.append((plan.m, plan.m2, gap.corr_abs, surrogate.corr_abs, gap.envelope, gap.se))
    within = all(row[2] <= row[4] + cfg.thresholds.se_band * row[5] for row in table)
    return SuiteVerdict(
        "independence_gap",
        {"model": ctx.model.name, "beta": beta, "cstar": ctx.cstar},
        {"levels": len(table), "within_envelope": within},
        within,
        hard=False,
        header=("m", "m2", "corr_abs", "surrogate_corr_abs", "envelope", "se"),
        table=table,
    )


def big_block_growth_suite(ctx: SuiteContext) -> SuiteVerdict:
    """Report big-block partial-sum maxima at the coupling error scale."""
    cfg = ctx.config
    plans = ctx.plans
    batch = ctx.batch(ctx.model, max(cfg.n, max(p.hi for p in plans)))
    trend = big_block_growth(batch, plans, cfg.alpha1, cfg.pprime, cfg.thresholds.trend_margin)
    return SuiteVerdict(
        "big_block_growth",
        {"model": ctx.model.name, "alpha1": cfg.alpha1, "pprime": cfg.pprime},
        {"slope": trend.slope},
        trend.passed,
        hard=False,
        header=("m", "normalized_max"),
        table=trend.table,
    )


def covariance_suite(ctx: SuiteContext) -> SuiteVerdict:
    """Report empirical ``cov(S_n)`` across replicas against its exact value."""
    cfg = ctx.config
    horizon = min(CLT_HORIZON, cfg.n)
    batch = ctx.batch(ctx.far, horizon)
    sums = batch.map(lambda path: path.sum(axis=0))
    empirical = empirical_cov(sums)
    exact = cov_sn_exact(ctx.far, horizon)
    low, high = covariance_slack(empirical, exact)
    return SuiteVerdict(
        "covariance",
        {"n": horizon, "R": cfg.R},
        {"min_ratio": low, "max_ratio": high},
        low >= 0.5 and high <= 2.0,
        hard=False,
        header=("k", "empirical", "exact"),
        table=list(zip(range(1, ctx.far.dim + 1), empirical.diag().tolist(), exact.diag().tolist(), strict=True)),
    )


HARD_SUITES: tuple[Callable[[SuiteContext], SuiteVerdict], ...] = (
    rates_suite,
    far_closed_forms_suite,
    gamma_defect_suite,
    block_eigs_suite,
    blocking_suite,
    exact_mixing_suite,
    merl_domination_suite,
    moment_slope_suite,
    block_moments_suite,
    clt_suite,
    small_block_suite,
    gaussian_comparator_suite,
)
DIAGNOSTIC_SUITES: tuple[Callable[[SuiteContext], SuiteVerdict], ...] = (
    drift_exponent_suite,
    independence_gap_suite,
    big_block_growth_suite,
    covariance_suite,
)
SUITES = {fn.__name__.removesuffix("_suite"): fn for fn in HARD_SUITES + DIAGNOSTIC_SUITES}


def build_manifest(ctx: SuiteContext, version: str, command: str) -> dict:
    """Get the run manifest: resolved config, plans per level and library version."""
    config = ctx.config.to_dict()
    config["cstar"] = ctx.cstar
    return {
        "command": command,
        "config": config,
        "plans": [plan.to_dict() for plan in ctx.plans],
        "version": version,
    }


def write_verdict(run_dir: Path, verdict: SuiteVerdict) -> None:
    """Write a suite's JSON verdict and, if it has one, its CSV table."""
    write_json(run_dir / f"{verdict.suite}.json", verdict.to_dict())
    if verdict.header:
        write_csv(run_dir / f"{verdict.suite}.csv", verdict.header, verdict.table)


def run_suites(
    ctx: SuiteContext, run_dir: Path, version: str, names: list[str] | None = None
) -> list[SuiteVerdict]:
    """Run suites and write their outputs and the manifest.

    :param ctx: suite context
    :param run_dir: output directory, created if needed
    :param version: library version recorded in the manifest
    :param names: subset of suite names, defaulting to all
    :return: verdicts in run order
    """
    run_dir.mkdir(parents=True, exist_ok=True)
    write_json(run_dir / MANIFEST_NAME, build_manifest(ctx, version, "verify"))
    selected = list(SUITES) if names is None else names
    verdicts = []
    for name in selected:
        _logger.info("Running suite %s", name)
        verdict = SUITES[name](ctx)
        write_verdict(run_dir, verdict)
        _logger.info("Suite %s %s", name, "passed" if verdict.passed else "failed")
        verdicts.append(verdict)
    return verdicts
