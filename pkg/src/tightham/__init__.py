"""Tight Hamilton cycles in random r-uniform hypergraphs, found with lazy edge exposure."""

from .errors import DisciplineViolation, Fail, InvalidArgument, ParseError, StructuralError
from .hamilton import HamiltonResult, find_tight_hamilton
from .hypergraph import DenseHypergraph
from .oracle import ExposureOracle
from .params import Params, budget_overrides, desk_params, make_params, paper_params
from .verify import verify_tight_hamilton

__all__ = [
    "DenseHypergraph", "DisciplineViolation", "ExposureOracle", "Fail", "HamiltonResult", "InvalidArgument",
    "Params", "ParseError", "StructuralError", "budget_overrides", "desk_params", "find_tight_hamilton",
    "make_params", "paper_params", "verify_tight_hamilton",
]
