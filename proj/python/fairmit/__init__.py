"""Group fairness metrics and bias mitigation for binary classifiers.

Thin Python surface over the C++ core. Labels follow the core convention:
0 = female, 1 = male, with male as the positive class.
"""

from ._core import (
    FEMALE,
    MALE,
    ConfigError,
    InputError,
    NumericalError,
    __version__,
    class_weights,
    evaluate,
    load_scores,
    optimize_threshold,
)

__all__ = [
    "FEMALE",
    "MALE",
    "ConfigError",
    "InputError",
    "NumericalError",
    "__version__",
    "class_weights",
    "evaluate",
    "load_scores",
    "optimize_threshold",
]
