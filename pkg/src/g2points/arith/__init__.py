from .factor import (
    FactorizationBudgetExceeded,
    factor_integer,
    is_probable_prime,
    is_square_mod_p,
    primes_up_to,
    sqrt_mod_p,
)
from .padic import FormalSeries, PadicNumber, PadicQuad, PrecisionError, series_integrate, series_sqrt
from .poly import is_squarefree
from .sturm import real_root_count


def squarefree_check(f) -> bool:
    return is_squarefree(tuple(f))


__all__ = [
    "FactorizationBudgetExceeded",
    "FormalSeries",
    "PadicNumber",
    "PadicQuad",
    "PrecisionError",
    "factor_integer",
    "is_probable_prime",
    "is_square_mod_p",
    "primes_up_to",
    "real_root_count",
    "series_integrate",
    "series_sqrt",
    "sqrt_mod_p",
    "squarefree_check",
]
