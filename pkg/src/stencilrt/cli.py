"""Command-line harness: oracle fuzzing, scaling benchmarks, the tuned
stencil demo, and the synthetic tuner simulation.

Exit codes: 0 all checks pass, 1 a check failed, 2 usage error.
All subcommands are deterministic for a fixed seed, wall-clock columns aside.
"""
from __future__ import annotations

import argparse
import random
import sys
import time
from pathlib import Path

import numpy as np

from .baseline import NaiveBoxList
from .bboxset import BBoxSet, SET_OPS
from .lattice import BBox, Point, ResourceError, Stride, UsageError, format_bbox
from .oracle import DEFAULT_POINT_CAP, PointSet, oracle_from_bboxset
from .stencil import bit_identical, run_naive, run_serial, run_tuned
from .synthetic import run_simulation
from .tuner import TopologyConfig


def random_box(rng: random.Random, dim: int, hull: tuple[int, ...],
               steps: tuple[int, ...]) -> BBox:
    """Uniform corners within the hull, swapped if inverted (rejection-free)."""
    lo, up = [], []
    for e, s in zip(hull, steps):
        a = rng.randrange(0, max(1, e // s)) * s
        b = rng.randrange(0, max(1, e // s)) * s
        lo.append(min(a, b))
        up.append(max(a, b))
    return BBox(Point(tuple(lo)), Point(tuple(up)), Stride(steps))


def random_boxes(rng: random.Random, dim: int, hull: tuple[int, ...],
                 steps: tuple[int, ...], count: int) -> list[BBox]:
    return [random_box(rng, dim, hull, steps) for _ in range(count)]


def check_case(seed: int, dim: int, max_boxes: int, max_extent: int,
               point_cap: int = DEFAULT_POINT_CAP) -> str | None:
    """One randomized cross-check of every set operation against the oracle.

    Returns None on agreement, else a reproduction message.
    """
    rng = random.Random(seed)
    steps = tuple(rng.choice((1, 1, 2)) for _ in range(dim))
    hull = tuple(rng.randint(4, max_extent) for _ in range(dim))
    boxes_r = random_boxes(rng, dim, hull, steps, rng.randint(0, max_boxes))
    boxes_s = random_boxes(rng, dim, hull, steps, rng.randint(0, max_boxes))

    def fail(op: str) -> str:
        lines = [f"mismatch in {op} (seed={seed}, dim={dim})",
                 "R boxes:"] + [f"  {format_bbox(b)}" for b in boxes_r] + \
                ["S boxes:"] + [f"  {format_bbox(b)}" for b in boxes_s]
        return "\n".join(lines)

    r = BBoxSet.from_bboxes(boxes_r, dim=dim, stride=Stride(steps))
    s = BBoxSet.from_bboxes(boxes_s, dim=dim, stride=Stride(steps))
    a = PointSet.from_bboxes(boxes_r, dim=dim, stride=Stride(steps), cap=point_cap)
    b = PointSet.from_bboxes(boxes_s, dim=dim, stride=Stride(steps), cap=point_cap)
    if oracle_from_bboxset(r, cap=point_cap).points != a.points:
        return fail("from_bboxes")

    for op in SET_OPS:
        if oracle_from_bboxset(r.apply(op, s), cap=point_cap).points != a.op(op, b).points:
            return fail(op)
    if oracle_from_bboxset(r.symmetric_difference(s), cap=point_cap).points != a.symmetric_difference(b).points:
        return fail("symmetric_difference (fast path)")

    v = Point(tuple(rng.randint(-3, 3) * st for st in steps))
    if oracle_from_bboxset(r.shift(v), cap=point_cap).points != a.shift(v).points:
        return fail("shift")

    lo = Point(tuple(rng.randint(0, 1) for _ in range(dim)))
    hi = Point(tuple(rng.randint(0, 1) for _ in range(dim)))
    if oracle_from_bboxset(r.expand(lo, hi), cap=point_cap).points != a.expand(lo, hi, cap=point_cap).points:
        return fail("expand")

    f = Stride(tuple(rng.choice((1, 2, 3)) for _ in range(dim)))
    if oracle_from_bboxset(r.coarsen(f), cap=point_cap).points != a.coarsen(f).points:
        return fail("coarsen")

    fr = Stride(tuple(rng.choice((1, st)) for st in steps))
    if oracle_from_bboxset(r.refine(fr), cap=point_cap).points != a.refine(fr).points:
        return fail("refine")

    norm = r.to_bboxes()
    hulls = [(b.lower.coords, b.upper.coords) for b in norm]
    for i in range(len(hulls)):
        lo_i, up_i = hulls[i]
        for j in range(i + 1, len(hulls)):
            lo_j, up_j = hulls[j]
            if all(max(a1, a2) <= min(b1, b2)
                   for a1, b1, a2, b2 in zip(lo_i, up_i, lo_j, up_j)):
                return fail("to_bboxes (overlap)")
    if PointSet.from_bboxes(norm, dim=dim, stride=Stride(steps), cap=point_cap).points != a.points:
        return fail("to_bboxes (membership)")
    return None


def cmd_setops_check(args) -> int:
    total = 0
    for dim in (range(1, args.dims + 1) if args.all_dims else [args.dims]):
        for k in range(args.cases):
            seed = args.seed + k
            msg = check_case(seed, dim, args.boxes, args.extent, args.point_cap)
            if msg is not None:
                print(msg)
                print(f"reproduce with: stencilrt setops-check --dims {dim} "
                      f"--seed {seed} --cases 1 --boxes {args.boxes} --extent {args.extent}")
                return 1
            total += 1
    print(f"setops-check: {total} randomized cases agree with the oracle")
    return 0


def grid_of_boxes(n: int, dim: int) -> list[BBox]:
    """n disjoint unit-spaced boxes arranged on a d-dimensional grid."""
    side = max(1, round(n ** (1.0 / dim)))
    while side ** dim < n:
        side += 1
    boxes = []
    st = Stride.ones(dim)
    for idx in range(n):
        rest, coord = idx, []
        for _ in range(dim):
            coord.append(rest % side)
            rest //= side
        lo = tuple(4 * c for c in coord)          # 3-wide boxes, 1-point gaps
        up = tuple(4 * c + 2 for c in coord)
        boxes.append(BBox(Point(lo), Point(up), st))
    return boxes


def _fit_slope(ns, ts) -> float:
    return float(np.polyfit(np.log(ns), np.log(ts), 1)[0])


def _median_time(fn, reps: int, budget: float = 1.0) -> float:
    """Median of up to `reps` runs; points slower than the budget are run once
    (repetition damps noise on fast points, and is pure cost on slow ones)."""
    t0 = time.perf_counter()
    fn()
    first = time.perf_counter() - t0
    if first > budget or reps <= 1:
        return first
    times = [first]
    for _ in range(reps - 1):
        t0 = time.perf_counter()
        fn()
        times.append(time.perf_counter() - t0)
    times.sort()
    return times[len(times) // 2]


def cmd_setops_bench(args) -> int:
    ns = []
    n = 64
    while n <= args.boxes:
        ns.append(n)
        n *= 2
    rows = ["impl,n,seconds"]
    tree_ts, naive_ts = [], []
    for n in ns:
        boxes = grid_of_boxes(n, args.dims)
        t_tree = _median_time(lambda: BBoxSet.from_bboxes(boxes), args.reps)
        t_naive = _median_time(lambda: NaiveBoxList(args.dims).union_all(boxes), args.reps)
        tree_ts.append(t_tree)
        naive_ts.append(t_naive)
        rows.append(f"derivative_tree,{n},{t_tree:.6f}")
        rows.append(f"naive_list,{n},{t_naive:.6f}")
        print(f"n={n:5d}  tree {t_tree*1e3:9.2f} ms   naive {t_naive*1e3:9.2f} ms")
    slope_tree = _fit_slope(ns, tree_ts)
    slope_naive = _fit_slope(ns, naive_ts)
    print(f"fitted log-log slope: derivative_tree {slope_tree:.3f}, naive_list {slope_naive:.3f}")
    if args.out:
        Path(args.out).write_text("\n".join(rows) + "\n")
    return 0


def cmd_stencil_bench(args) -> int:
    topo = _topology(args)
    n, iters = args.extent, args.iters
    serial = run_serial(n, iters, args.seed)
    naive = run_naive(n, iters, args.seed, topo.n_coarse_threads)
    tuned, tuner = run_tuned(n, iters, args.seed, topo)

    ok = bit_identical(serial.final, naive.final) and bit_identical(serial.final, tuned.final)
    rows = ["impl,iter,elapsed_ns,phase,is_best"]
    for i, t in enumerate(serial.iter_seconds):
        rows.append(f"serial,{i},{int(t * 1e9)},,")
    for i, t in enumerate(naive.iter_seconds):
        rows.append(f"naive,{i},{int(t * 1e9)},,")
    for i, (t, log) in enumerate(zip(tuned.iter_seconds, tuner.log)):
        rows.append(f"tuned,{i},{int(t * 1e9)},{log['phase']},{log['is_best']}")
    if args.out:
        Path(args.out).write_text("\n".join(rows) + "\n")

    med = lambda xs: sorted(xs)[len(xs) // 2]
    tail = max(1, min(20, iters // 2))
    print(f"stencil-bench {n}^3 x{iters}: outputs bit-identical: {ok}")
    print(f"median seconds/iter: serial {med(serial.iter_seconds):.4f}  "
          f"naive {med(naive.iter_seconds):.4f}  "
          f"tuned(last {tail}) {med(tuned.iter_seconds[-tail:]):.4f}")
    return 0 if ok else 1


def cmd_tune_sim(args) -> int:
    topo = _topology(args)
    report = run_simulation(args.seeds, args.iters, topo)
    print(f"tune-sim: optimum {report.optimum:.4f}, "
          f"{report.converged}/{report.seeds} seeds within 10% in <= {report.evals} evals "
          f"(median {report.median_evals_to_target}), "
          f"max consecutive bad re-samples {report.max_violations}")
    if args.out:
        rows = ["seed,best_cost,evals_to_within_10pct,consecutive_bad_violations,total_cost"]
        rows += [
            f"{r.seed},{r.best_cost:.6f},{r.evals_to_within_10pct},{r.consecutive_bad_violations},{r.total_cost:.6f}"
            for r in report.results
        ]
        Path(args.out).write_text("\n".join(rows) + "\n")
    return 0


def _topology(args) -> TopologyConfig:
    topo = TopologyConfig.from_file(args.topology) if args.topology else TopologyConfig()
    overrides = {}
    if args.threads is not None:
        overrides["n_coarse_threads"] = args.threads
    if args.fine_threads is not None:
        overrides["n_fine_threads"] = args.fine_threads
    if args.lane_width is not None:
        overrides["lane_width"] = args.lane_width
    if args.seed is not None:
        overrides["rng_seed"] = args.seed
    if overrides:
        from dataclasses import replace
        topo = replace(topo, **overrides)
    return topo


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="stencilrt")
    sub = parser.add_subparsers(dest="command", required=True)

    def common(p, extent_default, iters_default):
        p.add_argument("--dims", type=int, default=3, choices=(1, 2, 3, 4))
        p.add_argument("--seed", type=int, default=20130715)
        p.add_argument("--boxes", type=int, default=20)
        p.add_argument("--extent", type=int, default=extent_default)
        p.add_argument("--iters", type=int, default=iters_default)
        p.add_argument("--threads", type=int, default=None)
        p.add_argument("--fine-threads", dest="fine_threads", type=int, default=None)
        p.add_argument("--lane-width", dest="lane_width", type=int, default=None)
        p.add_argument("--topology", type=str, default=None)
        p.add_argument("--out", type=str, default=None)

    p = sub.add_parser("setops-check", help="fuzz the set algebra against the point oracle")
    common(p, extent_default=16, iters_default=1)
    p.add_argument("--cases", type=int, default=200)
    p.add_argument("--point-cap", dest="point_cap", type=int, default=DEFAULT_POINT_CAP,
                   help="oracle point budget per operand")
    p.add_argument("--all-dims", action="store_true",
                   help="run every dimension from 1 up to --dims")
    p.set_defaults(fn=cmd_setops_check)

    p = sub.add_parser("setops-bench", help="union scaling: derivative tree vs naive list")
    common(p, extent_default=16, iters_default=1)
    p.add_argument("--reps", type=int, default=5)
    p.set_defaults(fn=cmd_setops_bench, boxes=4096, dims=2)

    p = sub.add_parser("stencil-bench", help="tuned 3D Laplacian vs serial and static split")
    common(p, extent_default=64, iters_default=100)
    p.set_defaults(fn=cmd_stencil_bench)

    p = sub.add_parser("tune-sim", help="tuner convergence on the synthetic cost surface")
    common(p, extent_default=64, iters_default=50)
    p.add_argument("--seeds", type=int, default=100)
    p.set_defaults(fn=cmd_tune_sim, threads=4)

    return parser


def main(argv=None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)  # exits 2 with usage text on bad flags
    try:
        return args.fn(args)
    except (UsageError, ResourceError) as exc:
        print(f"usage error: {exc}", file=sys.stderr)
        return 2


if __name__ == "__main__":
    sys.exit(main())
