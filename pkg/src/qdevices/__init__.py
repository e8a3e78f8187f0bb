"""qdevices: optimal quantum devices and noise models at desk scale.

Channels in Kraus/Choi/Stinespring/unitary-dilation form, optimal universal
and phase-covariant cloners and NOT gates, qubit superbroadcasters with
closed-form scaling factors, POVM cleanness and postprocessing-ordering
decision procedures, and Schur-product decoherence maps with exact feedback
inversion.
"""

from .channels import (
    ChannelCheck,
    ChoiOperator,
    IsometryMatrix,
    KrausSet,
    UnitaryDilation,
    apply_choi,
    canonical_kraus,
    channel_check,
    choi_from_kraus,
    dual_apply,
    stinespring,
    unitary_dilation,
)
from .decoherence import (
    EnvironmentModel,
    FeedbackResult,
    RandomUnitaryDecomp,
    entropy_exchange,
    environment_model,
    invert_by_feedback,
    phase_kick,
    phase_kick_info,
    random_unitary_decomp,
    rho_infinity,
    schur_apply,
    shannon_entropy,
    von_neumann_entropy,
)
from .devices import (
    CloneSpec,
    branch_trace,
    cloning_unitary,
    equatorial_seed,
    nsb_d4,
    nsb_d4_decompose,
    nsb_uniform,
    nsb_unique,
    nsb_validate,
    nsb_violations,
    pclone_fidelity,
    pclone_isometry,
    phase_not_apply,
    phase_not_choi,
    phase_not_fidelity,
    phase_not_matchings,
    phase_not_mix,
    phase_not_unitaries,
    phase_rotation,
    triplet_isometry,
    uclone_apply,
    uclone_choi,
    uclone_fidelity,
    unot_choi,
    unot_fidelity,
)
from .exceptions import (
    ContractError,
    DecompositionError,
    DomainError,
    InvariantError,
    NotCPError,
    QDevicesError,
    ShapeError,
    SizeCapError,
    TheoremScopeError,
)
from .linalg import (
    dag,
    max_entangled,
    partial_trace,
    tensor,
    trace_distance,
    unvec,
    vec,
)
from .povm import (
    Povm,
    TruncatedRepeatable,
    effects_equivalent,
    is_observable,
    is_postprocessing_clean,
    is_preprocessing_clean,
    postprocess,
    postprocessing_reachable,
    povm_validate,
    range_sample,
    repeatability_check,
    repeatable_run,
    truncated_repeatable,
)
from .superbroadcast import (
    oracle_compare,
    phase_scaling,
    r_star,
    scaling,
    scaling_r0_diagnostic,
    universal_scaling,
    universal_superbro_choi,
)
from .symmetry import (
    cg_multiplicity,
    cg_projector,
    coupled_basis,
    many_copies_decompose,
    many_copies_reconstruct,
    occupation_indices,
    occupation_vector,
    permutation_matrix,
    schur_basis,
    spin_operator,
    sym_dim,
    sym_projector,
)

__version__ = "0.1.0"
