"""randfo: first-order logic on finite random relational structures."""

import sys

from .structures import GRAPH, BudgetExceeded, Signature, Structure

__version__ = "0.1.0"

# substituted gadget sentences nest deeply
sys.setrecursionlimit(max(sys.getrecursionlimit(), 20000))

__all__ = ["GRAPH", "BudgetExceeded", "Signature", "Structure", "__version__"]
