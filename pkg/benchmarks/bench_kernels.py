"""Compare the compiled kernels with the pure-Python fallback.

    python3 benchmarks/bench_kernels.py [--size 128] [--repeat 3]

Each kernel runs on the same seeded inputs in both implementations; the
outputs are checked for equality before timings are reported.
"""

import argparse
import time

import numpy as np

from settlegen import _kernels_py
from settlegen.blocks import PASSABLE_LUT, TORCH
from settlegen.evaluation import standing_mask
from settlegen.terrain import TerrainParams, compute_heightmap, compute_slope, synth_terrain

try:
    from settlegen import _kernels as compiled
except ImportError:
    compiled = None


def best_of(fn, repeat):
    times = []
    out = None
    for _ in range(repeat):
        t0 = time.perf_counter()
        out = fn()
        times.append(time.perf_counter() - t0)
    return min(times), out


def cases(size, seed):
    world = synth_terrain(seed, size, size, TerrainParams(height=96, base_height=48, roughness=12,
                                                          water_level=44))
    hf = compute_heightmap(world)
    slope = compute_slope(hf)
    cost = 1.0 + 4.0 * np.where(slope > 100, 0, slope) + 25.0 * hf.water
    heights = hf.surface.astype(np.int64)
    ok = np.isfinite(cost)
    rng = np.random.default_rng(seed)
    ids = world.ids.copy()
    air = np.argwhere(ids == 0)
    for y, z, x in air[rng.choice(len(air), size=max(1, size // 4), replace=False)]:
        ids[y, z, x] = TORCH
    standing = standing_mask(world)
    sy, sz, sx = np.argwhere(standing)[0]
    return {
        "astar": lambda k: k.astar(cost, (0, 0), (size - 1, size - 1), heights, 3),
        "grid_reach": lambda k: k.grid_reach(ok, heights, 1, (size // 2, size // 2)),
        "walk_bfs": lambda k: k.walk_bfs(standing, (int(sx), int(sy), int(sz))),
        "light_bfs": lambda k: k.light_bfs(PASSABLE_LUT[ids], ids == TORCH, 14),
    }


def same(a, b):
    if isinstance(a, np.ndarray):
        return np.array_equal(a, b)
    return a == b


def main(argv=None):
    p = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    p.add_argument("--size", type=int, default=128, help="map side in blocks")
    p.add_argument("--repeat", type=int, default=3)
    p.add_argument("--seed", type=int, default=1)
    args = p.parse_args(argv)
    if compiled is None:
        print("compiled kernels are not built; run `pip install -e . --no-build-isolation`")
        return 1
    print(f"map {args.size}x96x{args.size}, best of {args.repeat}")
    print(f"{'kernel':<12}{'python s':>12}{'compiled s':>12}{'speedup':>10}")
    for name, run in cases(args.size, args.seed).items():
        tp, outp = best_of(lambda: run(_kernels_py), args.repeat)
        tc, outc = best_of(lambda: run(compiled), args.repeat)
        if not same(outp, outc):
            raise SystemExit(f"{name}: implementations disagree")
        print(f"{name:<12}{tp:>12.4f}{tc:>12.4f}{tp / max(tc, 1e-9):>9.1f}x")
    return 0


if __name__ == "__main__":
    raise SystemExit(main())
