"""Provide finite-state ergodic Markov chains embedded in Hilbert space.

A chain carries its transition matrix, the Lyapunov data ``(V, gamma, K, C)`` of the
drift condition ``PV <= gamma V + K 1_C``, and an embedding ``phi`` of states as
coefficient vectors. State indices are 0-based throughout, including the set ``C``.
"""

import json
import logging
import math
from dataclasses import dataclass
from pathlib import Path

import numpy as np
from scipy.optimize import bisect

from .base_model import DomainError, TimeSeriesModel

_logger = logging.getLogger(__name__)

ROW_SUM_TOL = 1e-12
STATIONARY_TOL = 1e-12
CGAMMA_MARGIN = 1e-9
DECAY_FLOOR = 1e-13


@dataclass(frozen=True, eq=False)
class FiniteChain(TimeSeriesModel):
    """Finite-state Markov chain with Lyapunov data and a Hilbert embedding."""

    P: np.ndarray
    V: np.ndarray
    gamma: float
    K: float
    C: frozenset[int]
    embed: np.ndarray

    _model_name = "markov"

    def __post_init__(self) -> None:
        """Validate the transition matrix, Lyapunov data and embedding."""
        P = np.array(self.P, dtype=float)  # noqa: N806
        if P.ndim != 2 or P.shape[0] != P.shape[1] or P.size == 0:
            msg = f"Transition matrix must be square and non-empty, got shape {P.shape}"
            raise DomainError(msg)
        if np.any(P < 0):
            msg = "Transition probabilities must be non-negative"
            raise DomainError(msg)
        if np.any(np.abs(P.sum(axis=1) - 1.0) > ROW_SUM_TOL):
            msg = "Every row of the transition matrix must sum to 1"
            raise DomainError(msg)
        states = P.shape[0]
        V = np.array(self.V, dtype=float)  # noqa: N806
        if V.shape != (states,) or np.any(V < 1.0):
            msg = "Lyapunov values must give one value >= 1 per state"
            raise DomainError(msg)
        if not 0 < self.gamma < 1:
            msg = f"Drift factor gamma must lie in (0, 1), got {self.gamma}"
            raise DomainError(msg)
        if self.K <= 0:
            msg = f"Drift constant K must be positive, got {self.K}"
            raise DomainError(msg)
        small_set = frozenset(int(s) for s in self.C)
        if any(not 0 <= s < states for s in small_set):
            msg = f"Small set indices must lie in [0, {states - 1}]"
            raise DomainError(msg)
        embed = np.array(self.embed, dtype=float)
        if embed.ndim != 2 or embed.shape[0] != states or not np.all(np.isfinite(embed)):
            msg = "Embedding must give one finite coefficient vector per state"
            raise DomainError(msg)
        for name, value in (("P", P), ("V", V), ("embed", embed)):
            value.setflags(write=False)
            object.__setattr__(self, name, value)
        object.__setattr__(self, "C", small_set)

    @classmethod
    def from_matrix(cls, P: np.ndarray, embed: np.ndarray | None = None) -> "FiniteChain":  # noqa: N803
        """Build a chain with trivial Lyapunov data ``V = 1``, ``C`` = all states.

        :param P: transition matrix
        :param embed: state embedding, defaulting to the standard basis
        :return: chain
        """
        states = np.asarray(P).shape[0]
        return cls(
            P=P,
            V=np.ones(states),
            gamma=0.5,
            K=1.0,
            C=frozenset(range(states)),
            embed=np.eye(states) if embed is None else embed,
        )

    @property
    def states(self) -> int:
        """Get number of states ``S``."""
        return self.P.shape[0]

    @property
    def dim(self) -> int:
        """Get dimension of the embedding space."""
        return self.embed.shape[1]

    def mixing_rate(self) -> float:
        """Get mixing rate ``-ln slem``."""
        modulus = slem(self)
        return math.inf if modulus == 0.0 else -math.log(modulus)

    def _simulate(self, n: int, rng: np.random.Generator) -> np.ndarray:
        return _center(self, simulate_states(self, n, rng))

    def to_dict(self) -> dict:
        """Get the JSON document form of the chain."""
        return {
            "P": self.P.tolist(),
            "V": self.V.tolist(),
            "gamma": self.gamma,
            "K": self.K,
            "C": sorted(self.C),
            "embed": self.embed.tolist(),
        }


def load_chain(path: Path) -> FiniteChain:
    """Load a chain specification.

    The document has keys ``P``, ``V``, ``gamma``, ``K``, ``C`` (0-based state
    indices) and ``embed``.

    :param path: JSON file
    :return: validated chain
    :raise DomainError: if keys are missing or values are invalid
    """
    with path.open() as f:
        spec = json.load(f)
    missing = {"P", "V", "gamma", "K", "C", "embed"} - spec.keys()
    if missing:
        msg = f"Chain specification {path} is missing keys: {sorted(missing)}"
        raise DomainError(msg)
    return FiniteChain(
        P=spec["P"],
        V=spec["V"],
        gamma=float(spec["gamma"]),
        K=float(spec["K"]),
        C=frozenset(spec["C"]),
        embed=spec["embed"],
    )


def default_chain() -> FiniteChain:
    """Get the shipped symmetric two-state chain.

    ``P = [[0.75, 0.25], [0.25, 0.75]]`` with ``V = (1, 2)``, ``gamma = 0.9``,
    ``K = 2``, ``C`` = both states, and states embedded as ``e_1`` and ``2 e_2``.
    """
    return FiniteChain(
        P=[[0.75, 0.25], [0.25, 0.75]],
        V=[1.0, 2.0],
        gamma=0.9,
        K=2.0,
        C=frozenset({0, 1}),
        embed=[[1.0, 0.0], [0.0, 2.0]],
    )


def is_primitive(P: np.ndarray) -> bool:  # noqa: N803
    """Check irreducibility and aperiodicity.

    A non-negative matrix is primitive iff its power at Wielandt's bound
    ``(S - 1)^2 + 1`` is strictly positive.

    :param P: transition matrix
    :return: whether ``P`` is primitive
    """
    support = (np.asarray(P) > 0).astype(np.int64)
    exponent = (support.shape[0] - 1) ** 2 + 1
    result = np.eye(support.shape[0], dtype=np.int64)
    base = support
    while exponent:
        if exponent & 1:
            result = np.minimum(result @ base, 1)
        base = np.minimum(base @ base, 1)
        exponent >>= 1
    return bool(np.all(result > 0))


def stationary(chain: FiniteChain) -> np.ndarray:
    """Get the invariant distribution.

    Solves ``pi (P - I) = 0`` with one balance equation replaced by ``sum(pi) = 1``.

    :param chain: chain
    :return: probability vector ``pi``
    :raise DomainError: if the chain is reducible or periodic
    """
    if not is_primitive(chain.P):
        msg = "Chain must be irreducible and aperiodic"
        raise DomainError(msg)
    system = chain.P.T - np.eye(chain.states)
    system[-1, :] = 1.0
    rhs = np.zeros(chain.states)
    rhs[-1] = 1.0
    pi = np.linalg.solve(system, rhs)
    residual = float(np.abs(pi @ chain.P - pi).sum())
    if residual > STATIONARY_TOL:
        _logger.warning("Stationary residual %.3e exceeds %.0e", residual, STATIONARY_TOL)
    return pi


def _stochastic_power(P: np.ndarray, n: int) -> np.ndarray:  # noqa: N803
    result = np.eye(P.shape[0])
    base = np.array(P)
    while n:
        if n & 1:
            result = result @ base
            result /= result.sum(axis=1, keepdims=True)
        n >>= 1
        if n:
            base = base @ base
            base /= base.sum(axis=1, keepdims=True)
    return result


def beta_exact(chain: FiniteChain, n: int) -> float:
    """Compute the exact beta-mixing coefficient at lag ``n``.

    ``beta(n) = sum_s pi(s) TV(P^n(s, .), pi)`` with total variation as half the L1
    distance, which equals the supremum over ``[0, 1]``-valued test functions.

    :param chain: chain
    :param n: lag, at least 1
    :return: coefficient in ``[0, 1]``
    """
    if n < 1:
        msg = f"Lag must be at least 1, got {n}"
        raise DomainError(msg)
    pi = stationary(chain)
    rows = _stochastic_power(chain.P, n)
    distances = 0.5 * np.abs(rows - pi).sum(axis=1)
    return float(np.clip(pi @ distances, 0.0, 1.0))


def slem(chain: FiniteChain) -> float:
    """Get the second-largest eigenvalue modulus of ``P``."""
    moduli = np.sort(np.abs(np.linalg.eigvals(chain.P)))[::-1]
    return float(moduli[1]) if moduli.size > 1 else 0.0


def decay_exponent(chain: FiniteChain, n_lo: int = 10, n_hi: int = 50) -> float:
    """Fit the exponential decay rate of ``beta_exact`` over ``[n_lo, n_hi]``.

    Lags whose coefficient falls below ``DECAY_FLOOR`` are dropped, since there the
    matrix powers only carry rounding error.

    :param chain: chain
    :param n_lo: first lag
    :param n_hi: last lag
    :return: minus the least-squares slope of ``log beta(n)``, ``math.inf`` if fewer
        than two lags remain
    """
    lags = np.arange(n_lo, n_hi + 1)
    betas = np.array([beta_exact(chain, int(n)) for n in lags])
    keep = betas > DECAY_FLOOR
    if keep.sum() < 2:
        return math.inf
    slope, _ = np.polyfit(lags[keep], np.log(betas[keep]), 1)
    return float(-slope)


def drift_check(chain: FiniteChain) -> float:
    """Get the largest violation of ``PV <= gamma V + K 1_C``.

    :param chain: chain
    :return: ``max_s [(PV)(s) - gamma V(s) - K 1_C(s)]``; the drift condition holds
        iff this is at most 0
    """
    indicator = np.zeros(chain.states)
    indicator[list(chain.C)] = 1.0
    violation = chain.P @ chain.V - chain.gamma * chain.V - chain.K * indicator
    return float(violation.max())


def solve_cgamma(gamma: float) -> float:
    """Get the ergodicity constant ``C_gamma``.

    Root of ``gamma e^c + c = 1`` on ``(0, -ln gamma)`` by bisection, less a margin
    so that ``gamma e^C + C < 1`` holds strictly. The margin is ``CGAMMA_MARGIN``,
    capped at half the root so that ``C_gamma`` stays positive as ``gamma -> 1``.

    :param gamma: drift factor in ``(0, 1)``
    :return: ``C_gamma``, positive
    """
    if not 0 < gamma < 1:
        msg = f"gamma must lie in (0, 1), got {gamma}"
        raise DomainError(msg)
    root = float(
        bisect(lambda c: gamma * math.exp(c) + c - 1.0, 0.0, -math.log(gamma), xtol=1e-15)
    )
    return root - min(CGAMMA_MARGIN, 0.5 * root)


def beta_bound(chain: FiniteChain, n: int) -> float:
    """Get the drift-based mixing bound ``pi(V) exp(-C_gamma n)``.

    :param chain: chain satisfying the drift condition
    :param n: lag, non-negative
    :return: bound on ``beta(n)``
    :raise DomainError: if the drift condition fails
    """
    violation = drift_check(chain)
    if violation > 0:
        msg = f"Drift condition violated by {violation}"
        raise DomainError(msg)
    if n < 0:
        msg = f"Lag must be non-negative, got {n}"
        raise DomainError(msg)
    return float(stationary(chain) @ chain.V) * math.exp(-solve_cgamma(chain.gamma) * n)


def simulate_states(chain: FiniteChain, n: int, rng: np.random.Generator) -> np.ndarray:
    """Simulate a stationary state sequence.

    :param chain: chain
    :param n: number of states, ``X_0`` through ``X_{n-1}``
    :param rng: random generator
    :return: integer state indices
    """
    pi = stationary(chain)
    cumulative = np.cumsum(chain.P, axis=1)
    uniforms = rng.random(n)
    states = np.empty(n, dtype=np.int64)
    states[0] = min(int(np.searchsorted(np.cumsum(pi), uniforms[0], side="right")), chain.states - 1)
    for t in range(1, n):
        row = cumulative[states[t - 1]]
        states[t] = min(int(np.searchsorted(row, uniforms[t], side="right")), chain.states - 1)
    return states


def _center(chain: FiniteChain, states: np.ndarray) -> np.ndarray:
    return chain.embed[states] - stationary(chain) @ chain.embed


def simulate_embedded(chain: FiniteChain, n: int, seed: int, replica: int = 0) -> np.ndarray:
    """Simulate the centered embedded series ``phi(X_k) - pi(phi)``.

    :param chain: chain
    :param n: path length
    :param seed: experiment seed
    :param replica: replica index selecting the random stream
    :return: array of shape ``(n, D)``
    """
    return chain.simulate(n, seed, replica)


def sample_pairs(
    chain: FiniteChain, k: int, size: int, rng: np.random.Generator
) -> tuple[np.ndarray, np.ndarray]:
    """Draw independent stationary pairs ``(X_0, X_k)``.

    :param chain: chain
    :param k: lag
    :param size: number of pairs
    :param rng: random generator
    :return: arrays of initial and lagged states
    """
    pi = stationary(chain)
    first = rng.choice(chain.states, size=size, p=pi)
    cumulative = np.cumsum(_stochastic_power(chain.P, k), axis=1)
    uniforms = rng.random(size)
    lagged = (uniforms[:, np.newaxis] >= cumulative[first]).sum(axis=1)
    return first, np.minimum(lagged, chain.states - 1)
