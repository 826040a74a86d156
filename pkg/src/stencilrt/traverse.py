"""Loop execution engine: split a d-dimensional index space and run a kernel.

An index space (exclusive upper bounds, innermost dimension first) is split
through four nested mechanisms, each level partitioning its parent exactly:

1. coarse-thread blocks, pulled dynamically by workers from a shared queue
   (handles kernels with non-uniform cost per iteration);
2. tiles, anchored on an absolute grid of the tile size so interior cut
   points stay cache/vector aligned;
3. fine-thread slices within a tile, statically assigned round-robin;
4. lane-aligned inner runs via vlanes.iterate_masked inside the kernel.

Interior cut points along the innermost dimension are multiples of the lane
width, so masked partial stores are only ever needed at the boundary of the
whole space.  Kernels receive one fine slice at a time and must write only
within it; the engine times each whole execution (including dispatch, since
that is what tuning can improve) and feeds the measurement to the tuner.
"""
from __future__ import annotations

import queue
import threading
import time
from dataclasses import dataclass
from typing import Callable

from .lattice import BBox, Point, Stride, UsageError
from .tuner import ExecParams, LoopSetup, Tuner


@dataclass(frozen=True)
class IndexSpace:
    """[lo, hi) per dimension, innermost first."""

    lo: tuple[int, ...]
    hi: tuple[int, ...]

    def __post_init__(self) -> None:
        if len(self.lo) != len(self.hi):
            raise UsageError("index space bounds disagree in dimension")
        if any(h < l for l, h in zip(self.lo, self.hi)):
            raise UsageError(f"index space with inverted bounds: {self.lo}..{self.hi}")

    @property
    def dim(self) -> int:
        return len(self.lo)

    @property
    def extents(self) -> tuple[int, ...]:
        return tuple(h - l for l, h in zip(self.lo, self.hi))

    def volume(self) -> int:
        n = 1
        for e in self.extents:
            n *= e
        return n


def index_space_from_bbox(b: BBox) -> IndexSpace:
    """Region convention (inclusive, possibly strided) to loop convention."""
    if b.is_empty:
        return IndexSpace((0,) * b.dim, (0,) * b.dim)
    if any(s != 1 for s in b.stride.steps):
        raise UsageError("only unit-stride boxes convert to index spaces")
    return IndexSpace(b.lower.coords, tuple(u + 1 for u in b.upper.coords))


def index_space_to_bbox(s: IndexSpace) -> BBox:
    if s.volume() == 0:
        return BBox.empty(s.dim)
    return BBox(Point(s.lo), Point(tuple(h - 1 for h in s.hi)), Stride.ones(s.dim))


@dataclass(frozen=True)
class Tile:
    space: IndexSpace
    slices: tuple[IndexSpace, ...]


@dataclass(frozen=True)
class Block:
    space: IndexSpace
    tiles: tuple[Tile, ...]


@dataclass(frozen=True)
class SplitPlan:
    space: IndexSpace
    params: ExecParams
    blocks: tuple[Block, ...]

    def pieces(self):
        for block in self.blocks:
            for tile in block.tiles:
                yield from tile.slices


def _even_cuts(a: int, b: int, n: int, unit: int) -> list[int]:
    """<= n chunks of [a, b), interior boundaries on absolute multiples of unit."""
    cuts = [a]
    for j in range(1, n):
        c = a + (b - a) * j // n
        c = (c // unit) * unit
        if cuts[-1] < c < b:
            cuts.append(c)
    cuts.append(b)
    return cuts


def _grid_cuts(a: int, b: int, t: int) -> list[int]:
    """Chunks of [a, b) cut at absolute multiples of t."""
    cuts = [a]
    first = (a // t + 1) * t
    cuts.extend(range(first, b, t))
    cuts.append(b)
    return cuts


def _split_space(space: IndexSpace, cuts_per_dim: list[list[int]]) -> list[IndexSpace]:
    pieces = [IndexSpace((), ())]
    for cuts in reversed(cuts_per_dim):  # outermost dimension varies slowest
        nxt = []
        for piece in pieces:
            for k in range(len(cuts) - 1):
                nxt.append(IndexSpace((cuts[k],) + piece.lo, (cuts[k + 1],) + piece.hi))
        pieces = nxt
    return pieces


def build_plan(space: IndexSpace, p: ExecParams) -> SplitPlan:
    """Deterministic nested decomposition; impossible splits degrade to fewer pieces."""
    d = space.dim
    if len(p.tile_size) != d:
        raise UsageError("params dimension disagrees with index space")
    w = p.vector_width
    units = [w] + [1] * (d - 1)

    block_cuts = [
        _even_cuts(space.lo[i], space.hi[i], p.coarse_split[i], units[i])
        for i in range(d)
    ]
    blocks = []
    for bspace in _split_space(space, block_cuts):
        tile_cuts = [
            _grid_cuts(bspace.lo[i], bspace.hi[i], max(1, p.tile_size[i]))
            for i in range(d)
        ]
        tiles = []
        for tspace in _split_space(bspace, tile_cuts):
            slice_cuts = [
                _even_cuts(tspace.lo[i], tspace.hi[i], p.fine_split[i], units[i])
                for i in range(d)
            ]
            tiles.append(Tile(tspace, tuple(_split_space(tspace, slice_cuts))))
        blocks.append(Block(bspace, tuple(tiles)))
    return SplitPlan(space, p, tuple(blocks))


Kernel = Callable[[IndexSpace], None]


def execute_plan(plan: SplitPlan, kernel: Kernel, n_coarse: int, n_fine: int) -> None:
    """Run the kernel over every piece: blocks pulled dynamically, fine slices
    within a tile statically assigned to the fine workers."""
    if n_coarse <= 1 and n_fine <= 1:
        for piece in plan.pieces():
            kernel(piece)
        return

    work: queue.SimpleQueue = queue.SimpleQueue()
    for block in plan.blocks:
        work.put(block)
    errors: list[BaseException] = []

    def run_tile(tile: Tile) -> None:
        if n_fine <= 1:
            for piece in tile.slices:
                kernel(piece)
            return
        threads = []
        for f in range(n_fine):
            assigned = tile.slices[f::n_fine]
            if not assigned:
                continue
            t = threading.Thread(target=_run_pieces, args=(assigned, kernel, errors))
            threads.append(t)
            t.start()
        for t in threads:
            t.join()

    def coarse_worker() -> None:
        while not errors:
            try:
                block = work.get_nowait()
            except queue.Empty:
                return
            try:
                for tile in block.tiles:
                    run_tile(tile)
            except BaseException as exc:  # propagate after the pool quiesces
                errors.append(exc)

    workers = [threading.Thread(target=coarse_worker) for _ in range(max(1, n_coarse))]
    for t in workers:
        t.start()
    for t in workers:
        t.join()
    if errors:
        raise errors[0]


def _run_pieces(pieces, kernel, errors) -> None:
    try:
        for piece in pieces:
            kernel(piece)
    except BaseException as exc:
        errors.append(exc)


def run_loop(setup: LoopSetup, space: IndexSpace, kernel: Kernel, tuner: Tuner) -> float:
    """One tuned execution: ask for params, split, run, time, record.

    Returns the elapsed wall-clock seconds.  A failing kernel propagates after
    the pool quiesces and its timing is discarded.
    """
    params = tuner.next_params(setup)
    plan = build_plan(space, params)
    start = time.perf_counter()
    execute_plan(plan, kernel, setup.n_coarse_threads, setup.n_fine_threads)
    elapsed = time.perf_counter() - start
    tuner.record_timing(setup, params, elapsed)
    return elapsed


def run_static(space: IndexSpace, kernel: Kernel, n_threads: int) -> float:
    """Naive baseline: one even chunk of the outermost dimension per thread,
    no tiling, no tuning.  Returns elapsed seconds."""
    d = space.dim
    cuts = _even_cuts(space.lo[d - 1], space.hi[d - 1], max(1, n_threads), 1)
    chunks = [
        IndexSpace(space.lo[:d - 1] + (cuts[k],), space.hi[:d - 1] + (cuts[k + 1],))
        for k in range(len(cuts) - 1)
    ]
    start = time.perf_counter()
    if n_threads <= 1:
        for c in chunks:
            kernel(c)
    else:
        errors: list[BaseException] = []
        threads = [
            threading.Thread(target=_run_pieces, args=([c], kernel, errors))
            for c in chunks
        ]
        for t in threads:
            t.start()
        for t in threads:
            t.join()
        if errors:
            raise errors[0]
    return time.perf_counter() - start
