"""Speed limits on quantumness, skew information and coherence.

Evolves qubit-scale observables/states under dephasing-type Liouvillians,
computes the commutator quantumness, Wigner-Yanase skew information and
skew-information coherence, and evaluates the four speed-limit lower bounds
on evolution time against closed-form reference models.
"""

from .bounds import (
    BoundReport,
    BoundRow,
    SingularPairError,
    bound_coherence,
    bound_quantumness,
    bound_quantumness_reference,
    bound_skew_information,
    prefix_integrals,
    sqrtm_derivative,
    time_average,
)
from .dynamics import (
    Generator,
    RateSchedule,
    TimeGrid,
    Trajectory,
    adjoint_superoperator,
    apply_generator,
    build_superoperator,
    propagate,
)
from .measures import (
    Basis,
    check_dim_inequality,
    coherence,
    l1_coherence,
    quantumness,
    skew_information,
    witness_noncommutativity,
)
from .models import (
    PureDephasingModel,
    UnitaryQubitModel,
    coherence_generation_closed_forms,
    coherence_generation_generator,
    coherence_generation_initial_state,
    dephasing_factor_closed_form,
    dephasing_factor_from_spectral_density,
    markov_dephasing_closed_forms,
    markov_generator,
    markov_initial_observable,
    pure_dephasing_closed_forms,
    pure_dephasing_t_q,
    unitary_closed_forms,
    unitary_t_q,
)
from .opalg import (
    OperatorError,
    commutator,
    devectorize,
    expm,
    hs_norm,
    schatten_norm,
    sqrtm_psd,
    vectorize,
)

__all__ = [name for name in dir() if not name.startswith("_")]
__version__ = "0.1.0"
