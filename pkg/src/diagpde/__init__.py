"""Block-encoding toolkit for PDE generators with Fourier-parameterized diagonal coefficients."""
from .becalc import BlockEncoding, lcu, product, verify
from .linalg import MaterializationError, StateVector, set_materialization_cap

__all__ = ["BlockEncoding", "lcu", "product", "verify", "MaterializationError", "StateVector",
           "set_materialization_cap"]
__version__ = "0.1.0"
