"""Analytic class-incremental learning for audio-visual fish feeding intensity."""

from ._core import (
    ContractError,
    FormatError,
    FusionParams,
    NumericalError,
    avg_accuracy,
    expand,
    forgetting,
    fuse,
    gamma_at,
    generate,
    inspect_checkpoint,
    kmeans,
    known_methods,
    read_dataset,
    ridge_solve,
    run_experiment,
    softmax,
)

__all__ = [
    "ContractError",
    "FormatError",
    "FusionParams",
    "NumericalError",
    "avg_accuracy",
    "expand",
    "forgetting",
    "fuse",
    "gamma_at",
    "generate",
    "inspect_checkpoint",
    "kmeans",
    "known_methods",
    "read_dataset",
    "ridge_solve",
    "run_experiment",
    "softmax",
]
