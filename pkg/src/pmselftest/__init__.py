"""Self-testing witnesses for prepare-and-measure scenarios.

Builds state and POVM witnesses, evaluates them on realizations, runs the
robust Wigner reconstruction with explicit error chains, certifies extremal
POVMs and reproduces counterexamples to the Wigner property.
"""

from .config import DEFAULT, Tolerances
from .qmat import SymOp

__all__ = ["DEFAULT", "Tolerances", "SymOp"]
__version__ = "0.1.0"
