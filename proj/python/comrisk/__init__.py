"""Bankruptcy risk prediction on enterprise knowledge graphs."""

from ._comrisk import (
    ComriskError,
    analyze,
    auc,
    evaluate,
    gen_synthetic,
    gradcheck,
    metrics,
    theta,
    train,
)

__all__ = [
    "ComriskError",
    "analyze",
    "auc",
    "evaluate",
    "gen_synthetic",
    "gradcheck",
    "metrics",
    "theta",
    "train",
]
