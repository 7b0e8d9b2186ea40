"""nullplane: curvature and null-plane structure analysis for
neutral-signature 4-metrics given in Walker coordinate form.

Coordinates are always ordered (u, v, x, y); the metric signature is
(+, +, -, -).  See the README for the expression grammar, the spec-file
format, and the CLI.
"""

__version__ = "0.1.0"

from .errors import NullplaneError  # noqa: E402
from .exprkit import Expr, Jet, diff_expr, eval_jet, parse_expr  # noqa: E402
from .tensor import MetricSpec, conformal_rescale, curvature, metric_jet  # noqa: E402
from .frames import Distribution, ProjParam, Tetrad, walker_tetrad  # noqa: E402

__all__ = [
    "Distribution",
    "Expr",
    "Jet",
    "MetricSpec",
    "NullplaneError",
    "ProjParam",
    "Tetrad",
    "__version__",
    "conformal_rescale",
    "curvature",
    "diff_expr",
    "eval_jet",
    "metric_jet",
    "parse_expr",
    "walker_tetrad",
]
