"""Finite-dimensional workbench for mixed q-Gaussian algebras built from an
almost periodic orthogonal representation: twisted Fock spaces, Wick words,
modular theory of the vacuum state and vacuum moments."""

from .model import Model, ModelSpec, RotationBlock, SpecError, build_model
from .fock import p_matrix, twist_kernel
from .ops import field_d, field_s, left_annihilate, left_create, wick_d, wick_s, WickWord
from .modular import conditional_expectation, modular_data
from .probability import MomentQuery, pair_partition_moment, vacuum_moment

__version__ = "0.1.0"

__all__ = [
    "Model",
    "ModelSpec",
    "MomentQuery",
    "RotationBlock",
    "SpecError",
    "WickWord",
    "build_model",
    "conditional_expectation",
    "field_d",
    "field_s",
    "left_annihilate",
    "left_create",
    "modular_data",
    "p_matrix",
    "pair_partition_moment",
    "twist_kernel",
    "vacuum_moment",
    "wick_d",
    "wick_s",
]
