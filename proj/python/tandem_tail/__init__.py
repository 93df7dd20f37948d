# SPDX-License-Identifier: Apache-2.0
"""Kernel-method tail analytics for a three-node Brownian tandem queue."""

from ._core import (
    AsymptoticPrediction,
    ConfigError,
    DegenerateK1,
    EmptyWindow,
    Error,
    GridMismatch,
    InsufficientBlocks,
    InsufficientTail,
    InvalidParameter,
    KernelReport,
    ModelParams,
    OutsideBranchCut,
    Products,
    Regime,
    Row,
    RunManifest,
    TailFit,
    UnstableModel,
    UnsupportedModel,
    VerificationReport,
    __version__,
    analyze,
    evaluate,
    simulate,
    tauberian_exponent,
    validate,
)

__all__ = [name for name in dir() if not name.startswith("_")] + ["__version__"]
