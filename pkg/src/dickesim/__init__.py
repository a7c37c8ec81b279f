"""dickesim: collective-spin state preparation on the Dicke ladder.

Simulates permutation-symmetric N-emitter states under coherent rotations
and spin squeezing, verifies that this gate set generates the full algebra,
computes spherical and (approximate) planar Wigner functions, and searches
for pulse sequences that prepare cat and grid states.
"""

from .core import (
    Convention,
    DickeSpace,
    DimensionMismatchError,
    NormDriftError,
    NotHermitianError,
    QuantumState,
    SymmetricOperator,
    apply,
    build_sminus,
    build_splus,
    build_sx,
    build_sy,
    build_sz,
    commutator,
    fidelity,
    hermitian_exp,
)
from .gates import (
    DEFAULT_CONVENTIONS,
    GateConventions,
    PulseSequence,
    PulseStep,
    apply_sequence,
    flatten_params,
    rotation_unitary,
    squeeze_x_unitary,
    squeeze_y_unitary,
    step_unitary,
    unflatten_params,
)
from .targets import (
    GkpLattice,
    TargetKind,
    TargetSpec,
    TruncationError,
    TruncationWarning,
    cat2_state,
    cat4_state,
    coherent_state,
    gkp_state,
    make_target,
)
from .wigner import (
    PlaneGrid,
    SphereGrid,
    clebsch_gordan,
    export_grid,
    planar_wigner,
    spherical_wigner,
)
from .algebra import (
    ClosureReport,
    lie_closure,
    oscillator_counterexample,
    synthesis_by_powers,
    trotter_commutator,
    trotter_commutator_error,
    trotter_sum,
    trotter_sum_error,
)
from .optimizer import (
    OptimizationRun,
    OptimizerConfig,
    grow_sequence,
    nelder_mead,
    objective,
    random_restart_search,
)

__version__ = "0.1.0"
