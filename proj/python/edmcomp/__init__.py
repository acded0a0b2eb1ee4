"""Noisy low-rank EDM completion: facial reduction, Pareto search, refinement."""

from ._core import (
    EdmError,
    PartialEdm,
    evaluate,
    facial_reduction,
    generate_instance,
    k_adjoint,
    k_map,
    k_pinv,
    oracle,
    pareto,
    procrustes_rmsd,
    project_centered_psd_rank,
    read_instance,
    refine,
    refine_gradient,
    refine_objective,
    solve,
    write_instance,
)

__all__ = [
    "EdmError",
    "PartialEdm",
    "evaluate",
    "facial_reduction",
    "generate_instance",
    "k_adjoint",
    "k_map",
    "k_pinv",
    "oracle",
    "pareto",
    "procrustes_rmsd",
    "project_centered_psd_rank",
    "read_instance",
    "refine",
    "refine_gradient",
    "refine_objective",
    "solve",
    "write_instance",
]
