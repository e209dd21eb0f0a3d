"""Tensor robust PCA under the t-product.

Dense 3-way tensor algebra (t-product, t-SVD, tensor norms), a convex
low-rank + sparse ADMM solver, and a deterministic exact-recovery
certificate engine (incoherence, support concentration, gamma ranges,
dual certificates).
"""

from .errors import (
    ConvergenceFailure,
    DomainError,
    IndexOutOfRange,
    InfeasiblePattern,
    MaxItersExceeded,
    NonConvergence,
    NotAProjector,
    RankTooLarge,
    ShapeMismatch,
    SizeOverflow,
    SymmetryViolation,
    TrpcaError,
    ZeroTensor,
)
from .tensor import (
    BCIRC_CAP,
    FourierSlices,
    Tensor3,
    basis,
    bcirc,
    column_basis,
    dft_mode3,
    fold,
    identity_tensor,
    idft_mode3,
    inner,
    norm,
    read_tensor,
    tprod,
    ttranspose,
    tube_basis,
    unfold,
    write_tensor,
)
from .tsvd import (
    TSvdFactors,
    nuclear_norm,
    spectral_norm,
    subgradient_member,
    tnn_zhang,
    tsvd_skinny,
    tsvt_prox,
    tubal_rank,
)
from .tangent import (
    SupportMask,
    TangentBasis,
    project_T,
    project_T_perp,
    project_omega,
    project_omega_comp,
    sign_of,
    support_of,
    tangent_of,
    transversality_gauge,
)
from .certify import (
    CertificateReport,
    DualCertificate,
    beta_incoherence,
    beta_spans,
    build_report,
    deg_bounds,
    dual_certificate,
    gamma_interp,
    gamma_range_cor3,
    gamma_range_thm3,
    inc,
    mu_exact,
    uncertainty_audit,
    xi_bounds,
    xi_lower_estimate,
)
from .solver import (
    SolverConfig,
    SolverResult,
    default_gamma,
    objective,
    prox_sparse,
    rtpca,
    sparse_norm,
)
from .experiments import (
    InstanceSpec,
    SparsePattern,
    SweepCell,
    SweepResult,
    gen_certified_instance,
    gen_low_tubal_rank,
    gen_sparse,
    make_instance,
    per_slice_capped,
    random_entries,
    run_sweep,
)

__all__ = [name for name in dir() if not name.startswith("_")]
