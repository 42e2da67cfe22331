"""Simulate beta-mixing Hilbert space time series and check strong invariance principle bounds."""

from importlib.metadata import PackageNotFoundError, version

from hilbert_asip.base_model import (
    ConvergenceError,
    CustomModel,
    DomainError,
    GaussianComparator,
    ResourceLimitError,
    TimeSeriesModel,
)
from hilbert_asip.far import FarModel, make_far
from hilbert_asip.hilbert import HilbertVec, SymOperator
from hilbert_asip.markov import FiniteChain, default_chain, load_chain

try:
    __version__ = version("hilbert-asip")
except PackageNotFoundError:
    __version__ = "unknown"
finally:
    del version, PackageNotFoundError

__all__ = [
    "ConvergenceError",
    "CustomModel",
    "DomainError",
    "FarModel",
    "FiniteChain",
    "GaussianComparator",
    "HilbertVec",
    "ResourceLimitError",
    "SymOperator",
    "TimeSeriesModel",
    "__version__",
    "default_chain",
    "load_chain",
    "make_far",
]
