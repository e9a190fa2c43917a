"""Regional public-service panel analytics.

Stages: composite scoring (:mod:`.preprocess`), coupling coordination
(:mod:`.coupling`), Moran/LISA (:mod:`.spatial`), Theil decomposition
(:mod:`.theil`), dual-cutoff shortboards (:mod:`.shortboard`) and spatial
beta-convergence (:mod:`.convergence`). :mod:`.cli` wires them together.
"""
from .errors import ConfigError, DataError, NumericalError, RegionScopeError
from .kernels import BACKEND

__version__ = "0.1.0"

__all__ = ["BACKEND", "ConfigError", "DataError", "NumericalError", "RegionScopeError", "__version__"]
