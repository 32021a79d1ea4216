"""Full-history recursive multilevel Picard approximation toolkit.

Solver (``engine``), problem library (``model``), sample-count schedule and
complexity selector (``schedule``), analytic bound evaluators (``bounds``),
experiment harness (``study``), oracle suites (``verify``), and the keyed
randomness layer (``stream``).  The hot kernel is a compiled extension with
a pure-Python fallback selected at import; ``kernel_backend()`` reports
which one is active.
"""

from mlpicard._kernel import backend as kernel_backend
from mlpicard.engine import CostLedger, MlpParams, Realization, estimate, predicted_cost, replicate
from mlpicard.model import ProblemSpec, builtin, problem_spec, reference_value
from mlpicard.schedule import ComplexityQuery, LpConstants, check_phi_properties, choose_n, kp_constant, phi
from mlpicard.stream import Stream, StreamKey, derive_stream
from mlpicard.study import complexity_study, convergence_study, empirical_lp_error

__version__ = "0.1.0"

__all__ = [
    "CostLedger",
    "MlpParams",
    "Realization",
    "ProblemSpec",
    "ComplexityQuery",
    "LpConstants",
    "Stream",
    "StreamKey",
    "builtin",
    "check_phi_properties",
    "choose_n",
    "complexity_study",
    "convergence_study",
    "derive_stream",
    "empirical_lp_error",
    "estimate",
    "kernel_backend",
    "kp_constant",
    "phi",
    "predicted_cost",
    "problem_spec",
    "reference_value",
    "replicate",
    "__version__",
]
