"""Matrix-symbol calculus for invariant operators on partitioned Hilbert spaces."""

__version__ = "0.1.0"

from .anharmonic import (
    AnharmonicSpec,
    DecayCheck,
    SpectrumResult,
    anharmonic_decay_check,
    anharmonic_galerkin_spectrum,
    anharmonic_schatten_threshold,
    anharmonic_symbol,
)
from .core import (
    BlockUnitary,
    FourierCoefficients,
    MatrixSymbol,
    Partition,
    Structure,
    apply_symbol,
    check_compatible,
    conjugate_by_unitary,
    plancherel_norm,
    project_block,
    symbol_of_operator,
)
from .dixmier import (
    DixmierEstimate,
    HypothesisReport,
    SeparableSymbol,
    assemble_truncated_matrix,
    dixmier_estimate,
    geometric_grid,
    hypothesis_check,
    tensor_trace_power,
    trace_power,
)
from .errors import (
    BlockSpecError,
    DimensionMismatchError,
    InvalidParameterError,
    NonInvarianceError,
    NotUnitaryError,
    PositivityError,
)
from .generators import (
    beta_family,
    lattice_point,
    map_diagonal,
    so3_schrodinger_symbol,
    su2_laplacian_power_symbol,
    su2_tensor_norm,
    torus_multiplier_symbol,
)
from .series import TruncationPolicy
from .spectral import (
    DecayFit,
    SchattenEstimate,
    SingularSpectrum,
    TraceEstimate,
    block_singular_values,
    decay_exponent_fit,
    operator_norm,
    schatten_norm,
    singular_spectrum,
    trace,
)
from .tensor import (
    ProductPartition,
    TensorSymbol,
    direct_operator_norm,
    direct_schatten_norm,
    direct_trace,
    kron,
    tensor_operator_norm,
    tensor_schatten_norm,
    tensor_symbols,
    tensor_trace,
)
