"""Test closed-form rate formulas."""

import numpy as np
import pytest

from hilbert_asip.base_model import DomainError
from hilbert_asip.rates import (
    RateInputs,
    a_d_root,
    alpha1_of,
    big_block_exponent,
    branch_crossover,
    corollary_exponent,
    coupling_exponent,
    delta_bar,
    finite_dim_exponent,
    projection_dim,
    rate_report,
    theta_bar,
    theta_pprime,
)


def test_exact_values():
    """Test formulas against exact rationals."""
    assert theta_bar(4, 2, 2) == pytest.approx(26 / 53, rel=1e-12)
    assert theta_pprime(4, 2, 2) == pytest.approx(1 / 53, rel=1e-12)
    assert alpha1_of(4, 2, 2) == pytest.approx(3 / 53, rel=1e-12)
    assert delta_bar(4, 0.05) == pytest.approx(10.6, rel=1e-12)
    assert corollary_exponent(4, 0) == pytest.approx(0.4, rel=1e-12)
    assert finite_dim_exponent(3) == pytest.approx(0.375, rel=1e-12)
    assert a_d_root(4, 2) == 2048.0
    assert coupling_exponent(4, 2, 2) == pytest.approx(26 / 53, rel=1e-12)
    assert big_block_exponent(0.5, 3) == pytest.approx(0.5 / 3 + 0.25, rel=1e-12)
    assert projection_dim(10, 0.5) == 32


def test_branch_crossover():
    """Test that every two-branch formula switches at the same point."""
    assert branch_crossover() == 42
    assert delta_bar(42, 0.05, "low") == pytest.approx(delta_bar(42, 0.05, "high"), rel=1e-9)
    assert delta_bar(41, 0.05) == delta_bar(41, 0.05, "low")
    assert delta_bar(43, 0.05) == delta_bar(43, 0.05, "high")
    with pytest.raises(DomainError, match="Unknown branch"):
        delta_bar(4, 0.05, "middle")


@pytest.mark.parametrize(
    ("p", "expected", "other_branch"),
    [
        (41, 1103 / 2284, 1082.5 / 2243),
        (42, 113 / 234, 113 / 234),
        (43, 2357 / 4878, 1157 / 2396),
        (100, 1399 / 2847, 674 / 1397),
    ],
)
def test_theta_bar_branches(p, expected, other_branch):
    """Test that the coupling exponent takes the low branch up to 42 and the high one after."""
    value = theta_bar(p, 2, 2)
    assert value == pytest.approx(expected, rel=1e-12)
    assert value >= other_branch


@pytest.mark.parametrize(
    ("pprime", "expected", "other_branch"),
    [
        (41, 39 / 1142, 78 / 2243),
        (42, 4 / 117, 4 / 117),
        (43, 82 / 2439, 41 / 1198),
        (100, 49 / 2847, 49 / 1397),
    ],
)
def test_theta_pprime_branches(pprime, expected, other_branch):
    """Test that the dimension exponent switches branch at 42."""
    value = theta_pprime(pprime, 2, 2)
    assert value == pytest.approx(expected, rel=1e-12)
    assert value <= other_branch


@pytest.mark.parametrize("p", [3, 4, 8, 50])
@pytest.mark.parametrize("delta", [1e3, 1e4, 1e6])
def test_limit_identity(p, delta):
    """Test convergence of the coupling exponent to ``p/(3p - 2)``."""
    assert abs(theta_bar(p, delta, delta) - p / (3 * p - 2)) <= 10 / delta


def test_monotonicity():
    """Test monotonicity in the decay exponent and in ``p``."""
    deltas = np.geomspace(1.1, 1e6, 60)
    for p in (3, 4, 8):
        values = np.array([theta_bar(p, d, d) for d in deltas])
        assert np.all(np.diff(values) <= 1e-15)
        assert np.all(values < 0.5 + 1e-3)
    exponents = [corollary_exponent(p, 0.01) for p in (2.5, 3, 4, 8, 50)]
    assert np.all(np.diff(exponents) < 0)
    assert corollary_exponent(4, 0) == pytest.approx(theta_bar(4, 1e8, 1e8), abs=1e-6)
    assert finite_dim_exponent(1e9) == pytest.approx(0.25)
    assert delta_bar(4, 100) < 0
    assert theta_pprime(2 + 1e-9, 2, 2) < 1e-9


def test_alpha1_range():
    """Test that calibrated big-block exponents lie in the unit interval."""
    for pprime in (2.5, 3, 4, 10, 60):
        for delta in (1.5, 2, 5, 50):
            assert 0 < alpha1_of(pprime, delta, delta) < 1


def test_domain_errors():
    """Test precondition checks."""
    with pytest.raises(DomainError, match="p must exceed 2"):
        theta_bar(2, 2, 2)
    with pytest.raises(DomainError, match="delta2 must exceed 1"):
        theta_bar(4, 2, 1)
    with pytest.raises(DomainError, match="delta1 must be at least delta2"):
        theta_bar(4, 1.5, 2)
    with pytest.raises(DomainError, match="d must be at least 2"):
        a_d_root(4, 1)
    with pytest.raises(DomainError, match="epsilon must be positive"):
        delta_bar(4, 0)
    with pytest.raises(DomainError, match="pprime must be below p"):
        RateInputs(4, 2, 2, pprime=4)


def test_rate_report():
    """Test that reports fill only the rates their inputs determine."""
    report = rate_report(RateInputs(4, 2, 2)).to_dict()
    assert report["theta_bar"] == pytest.approx(26 / 53)
    assert report["finite_dim_exp"] == pytest.approx(1 / 3)
    assert report["theta_pprime"] is None
    assert report["delta_bar"] is None

    report = rate_report(RateInputs(4, 2, 2, pprime=3, epsilon=0.05, d=16)).to_dict()
    assert report["delta_bar"] == pytest.approx(10.6)
    assert report["corollary_exp"] == pytest.approx(0.45)
    assert report["alpha1"] == pytest.approx(3 * report["theta_pprime"])
    assert report["a_d_root"] == pytest.approx(16.0**11)
    assert all(value is not None for value in report.values())
