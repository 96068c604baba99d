"""Spherical harmonic analysis of isotropic random walks on affine buildings.

The package computes exact root-system combinatorics, Macdonald spherical
functions and their Plancherel quadrature, radial heat kernels by two
independent routes, volume-weighted lp norms with their concentration
regions, and the large-time asymptotics of caloric profiles.
"""

from .errors import (
    AffheatError,
    ConfigError,
    DegenerateDirection,
    EmptyRegion,
    ExceptionalCaseUnsupported,
    ExtractionFailed,
    NewtonDiverged,
    NonDominant,
    OutOfStrip,
    OutsideHull,
    OutsideRegime,
    PrecisionLoss,
    ResolutionCapExceeded,
    RoundingFailed,
    SingularPoint,
    TableIncomplete,
    TailBoundFailed,
)
from .rootsys import (
    FAMILIES,
    QParams,
    RootSystem,
    build_root_system,
    chi0,
    eta,
    n_lambda,
    poincare,
    saturation,
)
from .spectral import (
    ExpPoly,
    SpectralGrid,
    build_grid,
    c_function,
    ground_state,
    spherical_direct,
    spherical_expoly,
)
from .walk import KappaModel, WalkSpec, build_kappa, hessian, saddle, sp_delta_p
from .kernel import (
    RadialFunction,
    StructureTable,
    heat_recursive,
    heat_spectral,
    structure_constants,
)
from .norms import RegionSpec, critical_region, lp_norm, rate_fit, theoretical_rate
from .caloric import evolve, helgason_radial, herz_check, kunze_stein_check, mass

__version__ = "0.1.0"
