"""Relative entropy of entanglement: two-qubit upper bound and closest-state conditions."""

__version__ = "0.1.0"

from .errors import (  # noqa: E402
    DimensionError,
    InputError,
    NotAStateError,
    NotPSDError,
    ParseError,
    ReeError,
    SingularityError,
    SupportError,
)
from .states import DensityMatrix, make_family  # noqa: E402
from .measures import EntropyValue, relative_entropy  # noqa: E402
from .boundopt import closest_ppt_oracle, upper_bound_ree  # noqa: E402

__all__ = [
    "DensityMatrix",
    "DimensionError",
    "EntropyValue",
    "InputError",
    "NotAStateError",
    "NotPSDError",
    "ParseError",
    "ReeError",
    "SingularityError",
    "SupportError",
    "closest_ppt_oracle",
    "make_family",
    "relative_entropy",
    "upper_bound_ree",
]
