# Copyright 2026 The vixml Authors
# SPDX-License-Identifier: Apache-2.0
"""Siamese multimodal extreme-classification retrieval."""

from ._vixml import (
    Model,
    VixmlError,
    generate_synthetic,
    golden_listing,
    gradcheck,
    precision_at_k,
    propensities,
    psp_at_k,
    rai,
    recall_at_k,
    run_cli,
    search,
    train,
    version,
)

__version__ = version()

__all__ = [
    "Model",
    "VixmlError",
    "generate_synthetic",
    "golden_listing",
    "gradcheck",
    "precision_at_k",
    "propensities",
    "psp_at_k",
    "rai",
    "recall_at_k",
    "run_cli",
    "search",
    "train",
    "version",
]
