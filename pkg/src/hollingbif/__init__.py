"""Numerical bifurcation toolkit for a quartic predator-prey field with a
generalized Holling type III response, and its rotated companion."""
from ._jit import NUMBA
from .vectorfield import InvalidParameter, SystemParams, eval_field, rotation_determinant

__version__ = "0.1.0"

__all__ = ["NUMBA", "InvalidParameter", "SystemParams", "eval_field", "rotation_determinant"]
