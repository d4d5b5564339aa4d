"""Time the compiled and numpy kernel backends on the same inputs.

    python3 benchmarks/bench_kernels.py [--repeat 5]
"""
import argparse
import timeit

import numpy as np

from crisp._kernels import available_backends, get_backend


def cases(rng):
    shape = np.array([40, 40, 12, 12])
    coords = rng.uniform(0, 1, (256 * 256, 4)) * (shape - 1.001)
    values = rng.random((256 * 256, 2))
    grid = rng.random((int(np.prod(shape)), 2))
    feats = rng.normal(0, 3, (2000, 3))
    vals = rng.random((2000, 2))
    score = rng.random((512, 512))
    ys, xs = rng.integers(0, 512, 2000), rng.integers(0, 512, 2000)
    return {
        "splat": lambda k: k.splat(coords, values, shape),
        "slice_grid": lambda k: k.slice_grid(grid, coords, shape),
        "gauss_pairwise": lambda k: k.gauss_pairwise(feats, vals),
        "hill_climb": lambda k: k.hill_climb(score, ys, xs, 5),
    }


def main(argv=None):
    ap = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    ap.add_argument("--repeat", type=int, default=5)
    args = ap.parse_args(argv)
    backends = available_backends()
    bench = cases(np.random.default_rng(0))
    print(f"{'kernel':<16}" + "".join(f"{b:>12}" for b in backends) + "   speedup")
    for name, fn in bench.items():
        times = {}
        for b in backends:
            k = get_backend(b)
            fn(k)  # warm up
            times[b] = min(timeit.repeat(lambda: fn(k), number=1, repeat=args.repeat))
        row = f"{name:<16}" + "".join(f"{times[b] * 1e3:>10.2f}ms" for b in backends)
        if "cython" in times:
            row += f"   {times['python'] / times['cython']:6.1f}x"
        print(row)


if __name__ == "__main__":
    main()
