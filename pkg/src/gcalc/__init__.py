"""Generalized reals and generalized functions on a dyadic gauge lattice."""

__version__ = "0.1.0"

from .config import Config, using
from .errors import (
    EmpiricalFallbackWarning,
    GCalcError,
    NotInvertibleError,
    ParseError,
    UndecidableError,
)
from .gauge import Branch, GaugeExpansion, TrigTerm, Valuation
from .idempotent import Idempotent, is_partition
from .number import (
    GeneralizedNumber,
    Order,
    associated,
    compare,
    fractional_power,
    invert,
    is_infinite,
    is_infinitesimal,
    is_invertible,
    make_alpha,
    norm,
    shadow,
    valuation,
)
from .interleave import (
    SupportSet,
    interleave_sum,
    invert_on,
    invertible_part,
    restrict,
    support,
    transition_measure,
    zero_divisor_witness,
)
from .mollifier import MollifierSpec, mollifier_build
from .expr import diff, to_text
from .parser import parse, parse_region
from .functions import (
    DistributionTag,
    GeneralizedFunction,
    classical_pairing,
    embed_distribution,
    embed_smooth,
    evaluate,
    fn_compose,
    pairing,
)
from .calculus import (
    AffineIndex,
    ExpIndex,
    HyperNatural,
    difference_quotient,
    dsa_check,
    fixed_point_solve,
    grid_distance,
    hyperseq_limit,
    in_sharp_ball,
    inversion_map,
    quanta_eval,
    seminorm_profile,
    sharp_derivative,
)
from .internal import (
    IntersectionSet,
    Membrane,
    Region,
    SetNet,
    distance_to_complement,
    essential_support,
    intersect_strong,
    membrane_member,
    strong_member,
)
