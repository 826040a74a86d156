"""Deliberately naive list-of-boxes set, the benchmark baseline.

Keeps a normalized (pairwise disjoint) list and inserts one box at a time by
subtracting every existing box from it, so building a union of n boxes scans
O(n) list entries per insert: O(n^2) overall.  This is the representation the
derivative trees replace; it exists to make the scaling comparison honest.
"""
from __future__ import annotations

from .lattice import BBox, Point, UsageError


def box_minus(a: BBox, b: BBox) -> list[BBox]:
    """a \\ b as a list of disjoint boxes (axis-by-axis slicing)."""
    inter = a.intersect(b)
    if inter.is_empty:
        return [a]
    out = []
    lo = list(a.lower.coords)
    up = list(a.upper.coords)
    for i in range(a.dim):
        s = a.stride.steps[i]
        if lo[i] < inter.lower.coords[i]:
            part_lo, part_up = lo.copy(), up.copy()
            part_up[i] = inter.lower.coords[i] - s
            out.append(BBox(Point(tuple(part_lo)), Point(tuple(part_up)), a.stride))
            lo[i] = inter.lower.coords[i]
        if up[i] > inter.upper.coords[i]:
            part_lo, part_up = lo.copy(), up.copy()
            part_lo[i] = inter.upper.coords[i] + s
            out.append(BBox(Point(tuple(part_lo)), Point(tuple(part_up)), a.stride))
            up[i] = inter.upper.coords[i]
    return out


class NaiveBoxList:
    """Disjoint box list with insert-by-subtraction union."""

    def __init__(self, dim: int):
        self.dim = dim
        self.boxes: list[BBox] = []

    def add(self, box: BBox) -> None:
        if box.dim != self.dim:
            raise UsageError(f"dimension mismatch: {self.dim} vs {box.dim}")
        if box.is_empty:
            return
        pieces = [box]
        for existing in self.boxes:
            pieces = [q for piece in pieces for q in box_minus(piece, existing)]
            if not pieces:
                return
        self.boxes.extend(pieces)

    def union_all(self, boxes) -> "NaiveBoxList":
        for b in boxes:
            self.add(b)
        return self

    def point_count(self) -> int:
        return sum(b.point_count() for b in self.boxes)
