"""Neural truecaser: restores letter case in lowercased text."""

from ._core import (
    DataError,
    Model,
    ModelFormatError,
    case_fold,
    char_ngrams,
    distill,
    evaluate,
    hash_feature,
    train,
)

__all__ = [
    "DataError",
    "Model",
    "ModelFormatError",
    "case_fold",
    "char_ngrams",
    "distill",
    "evaluate",
    "hash_feature",
    "train",
]
