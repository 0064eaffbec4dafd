"""Rule k connected dominating sets on random unit disk graphs."""
from rulek.errors import WorkCapExceeded
from rulek.graph import Instance, UnitDiskGraph, build_graph, is_cds, read_instance, write_instance
from rulek.rules import grid_cds, local_maxima, marking_process, rule_k, rule_k_restricted

__all__ = [
    "Instance",
    "UnitDiskGraph",
    "WorkCapExceeded",
    "build_graph",
    "grid_cds",
    "is_cds",
    "local_maxima",
    "marking_process",
    "read_instance",
    "rule_k",
    "rule_k_restricted",
    "write_instance",
]
