"""p-adic L-functions, p-adic heights and Perrin-Riou points of rank-one elliptic curves."""

from ._core import (
    BadReductionError,
    Curve,
    InvalidInput,
    NotOrdinaryError,
    Padic,
    Pipeline,
    Point,
    PrecisionError,
    PrpointError,
    WrongRankError,
    c_f,
    frobenius,
    hecke_roots,
    height_alpha,
    log_omega,
    padic_exp,
    padic_log,
    padic_sqrt,
    search_generator,
)

__all__ = [
    "BadReductionError",
    "Curve",
    "InvalidInput",
    "NotOrdinaryError",
    "Padic",
    "Pipeline",
    "Point",
    "PrecisionError",
    "PrpointError",
    "WrongRankError",
    "c_f",
    "frobenius",
    "hecke_roots",
    "height_alpha",
    "log_omega",
    "padic_exp",
    "padic_log",
    "padic_sqrt",
    "search_generator",
]
