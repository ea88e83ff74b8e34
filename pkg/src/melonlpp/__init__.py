"""Semi-discrete last passage percolation, melons and Brownian experiments."""
from .errors import DomainError, InfeasibleError, UsageError, VerificationError
from .plcore import Ensemble, Grid, PLFunction, pl_eval, pl_running_max, pl_affine_reparam
from .paths import DisjointKTuple, EndpointPair, StaircasePath, essentially_disjoint, path_length, tuple_length
from .lpp import lpp_single, lpp_multi, lpp_multi_bruteforce, optimizer_extract, metric_composition_argmax
from .melon import MelonEnsemble, check_melon_identity, melon_direct, melon_sort

__all__ = [
    "DomainError", "InfeasibleError", "UsageError", "VerificationError",
    "Ensemble", "Grid", "PLFunction", "pl_eval", "pl_running_max", "pl_affine_reparam",
    "DisjointKTuple", "EndpointPair", "StaircasePath", "essentially_disjoint",
    "path_length", "tuple_length",
    "lpp_single", "lpp_multi", "lpp_multi_bruteforce", "optimizer_extract",
    "metric_composition_argmax",
    "MelonEnsemble", "check_melon_identity", "melon_direct", "melon_sort",
]
