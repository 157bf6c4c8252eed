"""Certified minimum bisection via a spectral lower bound."""

from .graph import (
    Graph,
    GraphFormatError,
    InfeasibleParameters,
    InvalidMoveError,
    MonotoneMove,
    MoveKind,
    PlantedInstance,
    apply_monotone_moves,
    as_bisection,
    canonical_sign,
    cut_width,
    gen_hypercube,
    gen_planted_bisection,
    gen_planted_regular,
    graph_from_edge_list,
    graph_to_edge_list,
    hypercube_dimension_cut,
    read_graph,
    sample_monotone_moves,
    write_graph,
)
from .solver import SolveOptions, SolveReport, Status, eval_g, maximize_g, solve

__version__ = "0.1.0"
