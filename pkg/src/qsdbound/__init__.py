"""Bounds on the minimum error probability of quantum state discrimination."""

from .bounds import (
    BoundReport,
    barnum_knill_upper,
    bound_report,
    copies_needed,
    helstrom_exact_two,
    montanaro_lower,
    multicopy_floor,
    multicopy_lower,
    pairwise_fidelities,
    zhang_unambiguous_lower,
)
from .ensemble import (
    DensityMatrix,
    Ensemble,
    load_ensemble,
    make_ensemble,
    random_mixed_ensemble,
    random_pure_ensemble,
    save_ensemble,
    tensor_power,
)
from .linalg import DEFAULT_POLICY, NumericPolicy, fidelity, schatten_norm
from .measurement import (
    OptimizationResult,
    Povm,
    error_probability,
    helstrom_measurement,
    load_povm,
    optimize_measurement,
    pretty_good_measurement,
    random_povm,
    save_povm,
)

__version__ = "0.1.0"
