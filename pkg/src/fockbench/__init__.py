"""Truncated bosonic Fock spaces with sector-banded operators and self-adjointness diagnostics."""
from .fock import BASIS_ORDER_TAG, FockSpace, enumerate_sector, sector_dimension

__version__ = "0.1.0"

__all__ = ["BASIS_ORDER_TAG", "FockSpace", "enumerate_sector", "sector_dimension", "__version__"]
