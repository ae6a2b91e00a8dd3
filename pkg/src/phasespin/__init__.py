"""Phase-space quantum mechanics for systems with one binary internal degree
of freedom: discrete Stratonovich-Weyl quantizer, Wigner functions and star
products on R^2 x Gamma^2, phase-space currents, and closed-form free and
step-potential scattering solutions (nonrelativistic spin-1/2 and 1-D Dirac,
including the Klein paradox)."""

from .grids import (
    FULL_LINE,
    LEFT_HALF,
    RIGHT_HALF,
    InternalPoint,
    Matrix2,
    PhaseGrid,
    SymbolField,
    WignerField,
    Window,
)
from .distributions import (
    DeltaLine,
    DistributionalWigner,
    PVLine,
    Smooth,
    Term,
    sample_distributional,
)
from .states import PlaneWavePiece, SpinorWaveState
from .quantizer import (
    HamiltonSymbol,
    discrete_quantizer,
    discrete_quantizer_from_sum,
    displacement_d,
    hamilton_symbol,
    kernel_of_weyl_symbol,
    matrix_to_symbol,
    omega_array,
    schwinger_pair,
    symbol_to_matrix,
    weyl_symbol_of_kernel,
    wigner_distributional,
    wigner_of_pure_state,
    wigner_on_grid,
)
from .errors import (
    EvolutionError,
    ExtrapolationError,
    GridDomainError,
    PhaseSpaceError,
    UnsupportedModelError,
)

__version__ = "0.1.0"
