"""Marty-type differential inequalities: counterexample families and diagnostics."""

from martylab.construct import (
    ConstructedFamily,
    CounterexampleSpec,
    FamilyMember,
    bound_M,
    construct_family,
    select_pq,
)
from martylab.expcalc import ExpProduct, bracket_direct, bracket_lemma, build_registry
from martylab.hermite import HermiteData, hermite_interpolate, hermite_oracle
from martylab.numerics import LogComplex, set_precision
from martylab.poly import MultiPoly, Poly
from martylab.verify import (
    Region,
    grid_sup,
    marty_quotient,
    nonnormality_witness,
    remark3_family,
    spherical_derivative,
)

__all__ = [
    "ConstructedFamily",
    "CounterexampleSpec",
    "ExpProduct",
    "FamilyMember",
    "HermiteData",
    "LogComplex",
    "MultiPoly",
    "Poly",
    "Region",
    "bound_M",
    "bracket_direct",
    "bracket_lemma",
    "build_registry",
    "construct_family",
    "grid_sup",
    "hermite_interpolate",
    "hermite_oracle",
    "marty_quotient",
    "nonnormality_witness",
    "remark3_family",
    "select_pq",
    "set_precision",
    "spherical_derivative",
]
