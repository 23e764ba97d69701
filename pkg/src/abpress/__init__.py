"""abpress: a software model checker for a small concurrent imperative language.

The engine unwinds the program into an abstract reachability tree with
interpolant-based refinement, prunes interleavings with source-set dynamic
partial-order reduction, and keeps the pruning sound at covered nodes by
summarizing the shared-variable accesses of the covering node's subtree.
"""

from abpress.art import Engine, EngineConfig, run_program
from abpress.lang import parse, lower

__version__ = "0.1.0"

__all__ = ["Engine", "EngineConfig", "run_program", "parse", "lower", "__version__"]
