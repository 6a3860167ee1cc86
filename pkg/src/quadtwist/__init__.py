"""Central L-values of quadratic twists of an elliptic curve: coefficient
tables from point counting, family enumeration, moment verification, linear
sieve bounds, and extreme-value search."""

from .arith import (
    BumpFunction,
    Factorization,
    PrimeTable,
    bump_eval,
    bump_mellin,
    factorize,
    is_fundamental_discriminant,
    kronecker,
    sieve_primes,
)
from .curve import (
    CoefficientTable,
    CurveConfig,
    ap_point_count,
    build_coefficients,
    load_curve,
    pnt_ratio,
    sym2_value,
)
from .lvalue import (
    CentralValue,
    central_value,
    central_value_map,
    central_values,
    completed_value,
    local_factor_La,
)
from .resonator import ResonatorParams, ResonatorValue, b_coeff, resonate
from .twists import (
    FamilyParams,
    TwistDiscriminant,
    discover_classes,
    enum_family,
    filter_almost_prime,
    filter_rough,
    root_number,
)

__version__ = "0.1.0"
