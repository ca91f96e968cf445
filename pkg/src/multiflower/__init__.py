"""LP relaxations of binary polynomial optimization over multilinear sets."""

from multiflower.core import Hypergraph, PolynomialInstance, VarRef, parse_instance, to_hypergraph
from multiflower.cuts import LinearInequality
from multiflower.lpsolve import LPModel, LPSolution, relaxation_bound, solve
from multiflower.rmc import RecursiveMcCormick, build_rmc

__version__ = "0.1.0"
