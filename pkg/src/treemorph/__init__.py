"""Reconfiguration of plane spanning trees on point sets."""

from .geom import PointSet, Position, generate
from .moves import Kind, Move, SimMove
from .tree import LabeledPlaneTree, PlaneTree, validate_tree

__all__ = ["Kind", "LabeledPlaneTree", "Move", "PlaneTree", "PointSet",
           "Position", "SimMove", "generate", "validate_tree"]
__version__ = "0.1.0"
