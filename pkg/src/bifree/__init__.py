"""Numerical bi-free probability: transforms, convolution and limit laws."""

__version__ = "0.1.0"

from .bifree_conv import (  # noqa: E402
    GaussianParams,
    GridSpec,
    LKQuintupleGeneral,
    LKTripleCompact,
    bifree_convolve,
    compound_poisson_quintuple,
    compound_poisson_r,
    gaussian_closed_form,
    gaussian_quintuple,
    lambda_combine,
    lk_convert,
    lk_convert_inverse,
    lk_decompose,
    lk_r_compact,
    lk_r_general,
    lk_validate,
    product_quintuple,
)
from .bifree_r import (  # noqa: E402
    CumulantTable,
    LawSum,
    OmegaDomain,
    extract_cumulants,
    marginal_r_limit,
    partial_r,
    reconstruct_g,
)
from .errors import (  # noqa: E402
    BifreeError,
    DomainError,
    InputError,
    NonConvergenceError,
    NumericalError,
)
from .limits import (  # noqa: E402
    check_limit_theorem,
    clt_sequence,
    d_functional,
    derivative_probe,
    poisson_sequence,
    verify_functional_eq,
)
from .measure import (  # noqa: E402
    GridDensity2D,
    Measure1D,
    Measure2D,
    SignedMeasure1D,
    SignedMeasure2D,
    make_discrete_2d,
    marginal,
    moment,
    product_measure,
    tail_mass,
    weight_transform,
)
from .rtransform1d import (  # noqa: E402
    FreeLKPair,
    StolzAngle,
    free_convolve_power,
    free_lk_r,
    r1_from_measure,
)
from .transform2d import GEvaluator2D, g1, g2, invert2d, marginal_g_limit  # noqa: E402
