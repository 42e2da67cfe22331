"""Test exact and empirical covariance analytics."""

import math

import numpy as np
import pytest

from hilbert_asip.base_model import DomainError
from hilbert_asip.covariance import (
    block_cov_eigs,
    cov_sn_exact,
    covariance_slack,
    cross_cov_frobenius,
    defect_curve,
    empirical_cov,
    gamma_defect,
    tail_energy,
)
from hilbert_asip.far import FarModel, autocov, longrun_gamma, stationary_var
from hilbert_asip.hilbert import SymOperator


@pytest.fixture(scope="module")
def half():
    """Provide the single-coordinate model with lambda = 1/2."""
    return FarModel([0.5])


def _direct_cov(model, n):
    total = n * stationary_var(model)
    for j in range(1, n):
        total = total + 2 * (n - j) * autocov(model, j)
    return total


def test_cov_sn_exact(half, far_model):
    """Test closed-form partial-sum covariances."""
    assert cov_sn_exact(half, 1).diag() == pytest.approx([2 / 3])
    assert cov_sn_exact(half, 2).diag() == pytest.approx([2.0])
    assert cov_sn_exact(half, 3).diag() == pytest.approx([11 / 3])
    for n in (1, 5, 17, 64):
        assert cov_sn_exact(far_model, n).diag() == pytest.approx(
            _direct_cov(far_model, n), rel=1e-12
        )
    with pytest.raises(DomainError, match="at least 1"):
        cov_sn_exact(half, 0)


def test_cesaro_convergence(far_model):
    """Test that ``cov(S_n)/n`` increases to ``g(lambda)`` from below."""
    g = longrun_gamma(far_model).diag()
    previous = np.zeros(far_model.dim)
    for e in range(15):
        n = 2**e
        ratio = cov_sn_exact(far_model, n).diag() / n
        assert np.all(ratio >= previous)
        assert np.all(ratio <= g)
        previous = ratio
    assert previous == pytest.approx(g, rel=1e-3)


def test_gamma_defect(half, far_model):
    """Test residuals and the bounded, Cauchy defect curve."""
    report = gamma_defect(half, 2)
    assert report.residuals[0] == pytest.approx(-2.0)
    assert report.defect == pytest.approx(2.0)
    assert gamma_defect(half, 3).residuals[0] == pytest.approx(-7 / 3)
    assert report.to_dict() == {"n": 2, "defect": report.defect, "residuals": [report.residuals[0]]}
    assert report.to_row()[:2] == [2, report.defect]

    reports = defect_curve(far_model, [2**e for e in range(4, 15)])
    defects = np.array([r.defect for r in reports])
    assert defects.max() <= defects[-1] + 1e-9
    late = [r.defect for r in reports if r.n >= 2**12]
    assert np.all(np.abs(np.diff(late)) < 1e-6)
    assert defects[-1] == pytest.approx(math.sqrt(sum(r**2 for r in reports[-1].residuals)))
    assert gamma_defect(half, 2**14).residuals[0] == pytest.approx(-8 / 3, rel=1e-9)


def test_block_cov_eigs(far_model):
    """Test block covariance eigenvalue bounds."""
    model = FarModel([0.5, 0.125])
    lambda_max, lambda_min, ok = block_cov_eigs(model, 1, 2)
    assert lambda_max == pytest.approx(2 / 3)
    assert lambda_min == pytest.approx(0.125 / (1 - 0.015625))
    assert ok
    lambda_max, lambda_min, _ = block_cov_eigs(far_model, 7, 1)
    assert lambda_max == lambda_min
    _, lambda_min, ok = block_cov_eigs(model, 4, 2)
    assert lambda_min >= 0.5
    assert ok
    for m1 in range(2, 65):
        for d in range(1, far_model.dim + 1):
            assert block_cov_eigs(far_model, m1, d)[2]
    with pytest.raises(DomainError, match="Projection dimension"):
        block_cov_eigs(model, 4, 3)


def test_cross_cov(far_model):
    """Test lagged cross-covariance norms and their geometric decay."""
    assert cross_cov_frobenius(FarModel([0.5]), 1) == pytest.approx(1 / 3)
    assert cross_cov_frobenius(FarModel([0.5, 0.125]), 1) == pytest.approx(0.33371, abs=1e-5)
    logs = np.log([cross_cov_frobenius(far_model, k) for k in range(8, 30)])
    assert np.diff(logs) == pytest.approx(np.full(21, math.log(0.5)), abs=1e-9)
    with pytest.raises(DomainError, match="Lag"):
        cross_cov_frobenius(far_model, 0)


def test_tail_energy(far_model):
    """Test variance beyond the projection against its long-run bound."""
    for d in (1, 4, 8):
        energy, bound = tail_energy(far_model, 16, d)
        assert 0 <= energy <= bound
    assert tail_energy(far_model, 16, 8) == (0.0, 0.0)


def test_empirical_cov():
    """Test replica covariance estimation and its slack against an exact operator."""
    rng = np.random.default_rng(6)
    samples = rng.standard_normal((20_000, 3)) * np.sqrt([1.0, 4.0, 9.0])
    estimate = empirical_cov(samples)
    low, high = covariance_slack(estimate, SymOperator.diagonal([1.0, 4.0, 9.0]))
    assert 0.95 < low <= high < 1.05
    assert math.isnan(covariance_slack(estimate, SymOperator(np.zeros((3, 3))))[0])
    with pytest.raises(DomainError, match="R >= 2"):
        empirical_cov(np.ones((1, 3)))
