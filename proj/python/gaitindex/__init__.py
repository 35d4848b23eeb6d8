"""Walking-gait normality index from 3D point-cloud sequences.

The heavy lifting lives in the C++ extension module; this package
re-exports its public surface.
"""

from ._core import (
    GaitError,
    Model,
    aggregate,
    auc,
    eer,
    extract_histogram,
    fit_cylinder,
    generate_sequence,
    raw_histogram,
    roc,
)

__all__ = [
    "GaitError",
    "Model",
    "aggregate",
    "auc",
    "eer",
    "extract_histogram",
    "fit_cylinder",
    "generate_sequence",
    "raw_histogram",
    "roc",
]
