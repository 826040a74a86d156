"""Stencil-runtime toolkit: lattice region algebra, loop autotuning, lane-generic SIMD semantics."""

from .lattice import (
    BBox,
    GridGeometry,
    Point,
    ResourceError,
    Stride,
    UsageError,
    point,
    stride,
    to_physical,
)
from .bboxset import BBoxSet, SET_OPS
from .oracle import PointSet, oracle_from_bboxset, oracle_to_bboxset

__all__ = [
    "BBox",
    "BBoxSet",
    "GridGeometry",
    "Point",
    "PointSet",
    "ResourceError",
    "SET_OPS",
    "Stride",
    "UsageError",
    "oracle_from_bboxset",
    "oracle_to_bboxset",
    "point",
    "stride",
    "to_physical",
]
