#!/usr/bin/env python3
"""Benchmark the compiled kernel lane against the pure-Python twin.

Runs the raw kernels on representative workloads (sparse polynomial products,
partials, and the exact elimination of a determining-system-sized matrix) and
one end-to-end solve through whichever lane is currently active.

    python3 benchmarks/bench_kernels.py
"""

import random
import time
from fractions import Fraction as F

from kdvsym._kernels import kernel_name, load_lane


def rand_poly(rng, nvars=8, nterms=30, deg=4):
    out = {}
    while len(out) < nterms:
        e = [0] * nvars
        for _ in range(deg):
            e[rng.randrange(nvars)] += 1
        c = F(rng.randint(-99, 99), rng.randint(1, 9))
        if c:
            out[tuple(e)] = c
    return out


def rand_rows(rng, nrows=400, ncols=120, fill=8):
    rows = []
    for _ in range(nrows):
        row = {}
        for _ in range(fill):
            row[rng.randrange(ncols)] = F(rng.randint(-9, 9), rng.randint(1, 4))
        rows.append({k: v for k, v in row.items() if v})
    return rows


def timeit(fn, repeat=3):
    best = None
    for _ in range(repeat):
        t0 = time.perf_counter()
        fn()
        dt = time.perf_counter() - t0
        best = dt if best is None else min(best, dt)
    return best


def bench_lane(lane):
    rng = random.Random(12345)
    polys = [rand_poly(rng) for _ in range(40)]
    rows = rand_rows(rng)

    def mul_chain():
        for a, b in zip(polys, polys[1:]):
            lane.poly_mul(a, b)

    def add_chain():
        acc = {}
        for p in polys:
            acc = lane.map_add(acc, p)

    def partial_sweep():
        for p in polys:
            for i in range(8):
                lane.poly_partial(p, i)

    def elimination():
        lane.rref([dict(r) for r in rows], 120)

    return {
        "poly_mul (39 products, 30-term)": timeit(mul_chain),
        "map_add (40-term accumulation)": timeit(add_chain),
        "poly_partial (40x8 sweeps)": timeit(partial_sweep),
        "rref (400x120 sparse exact)": timeit(elimination, repeat=2),
    }


def bench_end_to_end():
    from kdvsym.detsolve import assemble_harrison, build_ideal, solve_system
    from kdvsym.jetspace import JetSpec

    spec = JetSpec(("t", "x"), ("u",), 2)
    ideal = build_ideal(spec)

    def solve():
        conditions = tuple(range(1, 8))
        modes = {k: ("span" if k <= 3 else "span_theta") for k in conditions}
        system = assemble_harrison(ideal, 1, 1, conditions, modes)
        solve_system(system)

    return timeit(solve, repeat=2)


def main():
    lanes = {}
    for name in ("py", "c"):
        try:
            lanes[name] = load_lane(name)
        except ImportError:
            print(f"lane {name!r} unavailable (extension not built)")
    results = {name: bench_lane(lane) for name, lane in lanes.items()}
    keys = next(iter(results.values())).keys()
    print(f"{'workload':<36} " + " ".join(f"{n:>10}" for n in results) + "   speedup")
    for key in keys:
        times = [results[n][key] for n in results]
        cols = " ".join(f"{t * 1e3:9.2f}ms" for t in times)
        speed = times[0] / times[-1] if len(times) > 1 and times[-1] else float("nan")
        print(f"{key:<36} {cols}   {speed:7.2f}x")
    print()
    print(f"active lane for end-to-end solve: {kernel_name()}")
    print(f"determining-system solve (7 conditions): {bench_end_to_end() * 1e3:.1f}ms")


if __name__ == "__main__":
    main()
