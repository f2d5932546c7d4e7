"""tierlang: tier-based complexity analysis for an abstract OO language.

The pipeline parses `.aoo` sources, flattens them, infers tier types by a
2-SAT reduction, checks the recursion safety criterion, reports symbolic
polynomial time/heap/stack bounds, and can execute programs under the
pointer-graph small-step semantics to validate those bounds empirically.
"""

__version__ = "0.1.0"
