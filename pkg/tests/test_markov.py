"""Test finite-state Markov chains."""

import json
import math
from dataclasses import replace

import numpy as np
import pytest

from hilbert_asip.base_model import DomainError
from hilbert_asip.markov import (
    FiniteChain,
    beta_bound,
    beta_exact,
    decay_exponent,
    drift_check,
    is_primitive,
    load_chain,
    sample_pairs,
    simulate_embedded,
    simulate_states,
    slem,
    solve_cgamma,
    stationary,
)
from hilbert_asip.utils.rng import replica_rng


def test_load_chain(fixture_dir, two_state_chain):
    """Test loading chain documents."""
    chain = load_chain(fixture_dir / "two_state_chain.json")
    assert chain.to_dict() == two_state_chain.to_dict()
    assert chain.states == 2
    assert chain.dim == 2
    assert chain.C == frozenset({0, 1})
    assert chain.mixing_rate() == pytest.approx(math.log(2))


def test_load_chain_missing_keys(tmp_path):
    """Test that incomplete documents are rejected."""
    spec = tmp_path / "chain.json"
    spec.write_text(json.dumps({"P": [[1.0]], "V": [1.0]}))
    with pytest.raises(DomainError, match="missing keys"):
        load_chain(spec)


def test_chain_validation():
    """Test transition matrix and Lyapunov data validation."""
    with pytest.raises(DomainError, match="sum to 1"):
        FiniteChain.from_matrix([[0.5, 0.4], [0.5, 0.5]])
    with pytest.raises(DomainError, match="non-negative"):
        FiniteChain.from_matrix([[1.5, -0.5], [0.5, 0.5]])
    with pytest.raises(DomainError, match="Lyapunov"):
        FiniteChain([[1.0]], V=[0.5], gamma=0.5, K=1.0, C=frozenset(), embed=[[1.0]])
    with pytest.raises(DomainError, match="Small set"):
        FiniteChain([[1.0]], V=[1.0], gamma=0.5, K=1.0, C=frozenset({1}), embed=[[1.0]])


def test_stationary(two_state_chain):
    """Test invariant distributions."""
    assert stationary(two_state_chain) == pytest.approx([0.5, 0.5], abs=1e-12)
    q = np.array([0.2, 0.3, 0.5])
    assert stationary(FiniteChain.from_matrix(np.tile(q, (3, 1)))) == pytest.approx(q)
    with pytest.raises(DomainError, match="irreducible and aperiodic"):
        stationary(FiniteChain.from_matrix([[0.0, 1.0], [1.0, 0.0]]))
    assert is_primitive(two_state_chain.P)
    assert not is_primitive(np.eye(2))


def test_beta_exact(two_state_chain):
    """Test exact mixing coefficients."""
    assert beta_exact(two_state_chain, 1) == pytest.approx(0.25, abs=1e-15)
    assert beta_exact(two_state_chain, 3) == pytest.approx(0.0625, abs=1e-15)
    for n in range(1, 31):
        assert abs(beta_exact(two_state_chain, n) - 0.5 ** (n + 1)) <= 1e-12
    rows_equal = FiniteChain.from_matrix(np.tile([0.2, 0.3, 0.5], (3, 1)))
    assert all(beta_exact(rows_equal, n) == pytest.approx(0.0, abs=1e-15) for n in (1, 2, 7))
    with pytest.raises(DomainError, match="Lag"):
        beta_exact(two_state_chain, 0)


def test_beta_monotone():
    """Test monotonicity and the spectral decay rate on a three-state chain."""
    chain = FiniteChain.from_matrix(
        [[0.5, 0.3, 0.2], [0.1, 0.6, 0.3], [0.3, 0.3, 0.4]]
    )
    betas = np.array([beta_exact(chain, n) for n in range(1, 40)])
    assert np.all(np.diff(betas) <= 1e-15)
    assert np.all((betas >= 0) & (betas <= 1))
    assert slem(chain) == pytest.approx(0.3)
    assert decay_exponent(chain, 5, 20) == pytest.approx(-math.log(0.3), rel=0.05)


def test_drift(two_state_chain, fixture_dir):
    """Test the Lyapunov drift check."""
    assert drift_check(two_state_chain) == pytest.approx(-1.65)
    trivial = FiniteChain.from_matrix(two_state_chain.P)
    assert drift_check(trivial) == pytest.approx(1 - 0.5 - 1.0)
    failing = load_chain(fixture_dir / "failing_drift_chain.json")
    assert drift_check(failing) > 0
    with pytest.raises(DomainError, match="Drift condition violated"):
        beta_bound(failing, 1)


def test_solve_cgamma():
    """Test the ergodicity constant."""
    assert solve_cgamma(0.5) == pytest.approx(0.3149, abs=1e-4)
    assert solve_cgamma(0.9) == pytest.approx(0.05198, abs=1e-4)
    for gamma in (1 - 1e-9, 1 - 1e-10):
        assert 0 < solve_cgamma(gamma) < 1e-8
    for gamma in (0.1, 0.5, 0.9, 0.99, 1 - 1e-9):
        c = solve_cgamma(gamma)
        assert gamma * math.exp(c) + c < 1
    with pytest.raises(DomainError, match="gamma"):
        solve_cgamma(1.0)


def test_beta_bound(two_state_chain):
    """Test the drift-based mixing bound."""
    cgamma = solve_cgamma(0.9)
    assert beta_bound(two_state_chain, 0) == pytest.approx(1.5)
    assert beta_bound(two_state_chain, 10) == pytest.approx(1.5 * math.exp(-10 * cgamma))
    assert beta_bound(two_state_chain, 10_000) < 1e-200
    for n in range(1, 51):
        assert beta_exact(two_state_chain, n) <= beta_bound(two_state_chain, n)
    assert decay_exponent(two_state_chain) == pytest.approx(math.log(2), rel=1e-2)
    with pytest.raises(DomainError, match="Lag"):
        beta_bound(two_state_chain, -1)

    weak_drift = replace(two_state_chain, gamma=1 - 1e-10)
    assert beta_bound(weak_drift, 0) == pytest.approx(1.5)
    assert beta_bound(weak_drift, 10**9) < beta_bound(weak_drift, 0)


def test_simulate_embedded(two_state_chain):
    """Test centered embedded paths."""
    path = simulate_embedded(two_state_chain, 100, seed=3)
    assert path.shape == (100, 2)
    assert np.array_equal(path, simulate_embedded(two_state_chain, 100, seed=3))
    assert set(np.round(path[:, 0], 12)) <= {-0.5, 0.5}

    flat = FiniteChain.from_matrix(two_state_chain.P, embed=[[1.0, 2.0], [1.0, 2.0]])
    assert simulate_embedded(flat, 50, seed=1) == pytest.approx(np.zeros((50, 2)), abs=1e-12)

    states = simulate_states(two_state_chain, 100_000, replica_rng(8))
    assert np.mean(states == 0) == pytest.approx(0.5, abs=0.02)


def test_sample_pairs(two_state_chain):
    """Test stationary lagged pairs."""
    first, lagged = sample_pairs(two_state_chain, 1, 100_000, replica_rng(2))
    assert np.mean(first == 0) == pytest.approx(0.5, abs=0.01)
    assert np.mean(first == lagged) == pytest.approx(0.75, abs=0.01)
