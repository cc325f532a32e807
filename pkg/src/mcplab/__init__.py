"""mcplab: a desk-scale laboratory for minimum complexity pursuit.

Recover signals of low description length from random Gaussian linear
measurements (noiseless and noisy) by exhaustive search over an explicit
codebook, and verify the recovery bounds and concentration inequalities that
back the method, by Monte Carlo.
"""

__version__ = "0.1.0"

from .quantize import (  # noqa: F401
    QuantizedSignal,
    Resolution,
    binary_expansion,
    quantization_error_bound,
    quantize_vector,
    truncate,
)
from .codebook import (  # noqa: F401
    Codebook,
    ComplexityBudget,
    Family,
    ProgramEntry,
    decode,
    description_length,
    enumerate_entries,
    sample_entry,
)
from .complexity import best_estimate, lz78_length, raw_length, sparse_length  # noqa: F401
from .sensing import (  # noqa: F401
    MeasurementRecord,
    SensingEnsemble,
    draw_ensemble,
    measure,
    measure_noisy,
    sigma_max,
)
from .solver import (  # noqa: F401
    FeasibilityTolerance,
    RecoveryResult,
    reconstruction_error,
    solve_noiseless,
    solve_noisy,
)
from .concentration import (  # noqa: F401
    EventParams,
    TailCheckReport,
    chi_square_bounds,
    event_bounds,
    verify_chi_square,
    verify_events,
    verify_gaussian_dot,
)
from .bounds import (  # noqa: F401
    BoundInputs,
    gamma_constants,
    theorem1_rhs,
    theorem2_bound,
)
from .config import ExperimentConfig  # noqa: F401
from .experiments import (  # noqa: F401
    ExperimentResult,
    TrialRecord,
    run_experiment,
    run_lemmas,
    run_noiseless_scaling,
    run_stability,
)
