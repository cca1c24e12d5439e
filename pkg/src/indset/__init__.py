"""Independent-set problems: exact oracles, samplers, reductions and Rydberg simulation."""

__version__ = "0.1.0"

from .errors import IndsetError, InputError, InvariantError, RepairError, SizeCapError
from .graph import (
    Graph,
    SetFlags,
    VertexSet,
    build_unit_disk_graph,
    classify_set,
    complement,
    delete_vertices,
    load_graph,
    save_graph,
    set_weights,
)
from .oracle import (
    ExactSolution,
    PartitionFunctionResult,
    chromatic_number_exact,
    enumerate_independent_sets,
    expectation,
    mcds_exact,
    mds_exact,
    min_maximal_is_exact,
    mwis_exact,
    partition_function,
)

__all__ = [
    "Graph", "VertexSet", "SetFlags", "build_unit_disk_graph", "classify_set", "complement",
    "delete_vertices", "set_weights", "load_graph", "save_graph",
    "ExactSolution", "PartitionFunctionResult", "enumerate_independent_sets", "mwis_exact",
    "partition_function", "expectation", "mds_exact", "mcds_exact", "min_maximal_is_exact",
    "chromatic_number_exact",
    "IndsetError", "InputError", "InvariantError", "RepairError", "SizeCapError",
]
