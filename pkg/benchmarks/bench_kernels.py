"""Compare the compiled and pure-Python kernel backends.

Times triangle counting, BFS distance histograms and the HRG chain on the
builtin graphs, checks that both backends agree, and prints a table.

    python benchmarks/bench_kernels.py [--repeat 3] [--hrg-steps 20000]
"""

import argparse
import time

import numpy as np

from dpgraphgen import kernels
from dpgraphgen.datasets import load_builtin
from dpgraphgen.synth.privhrg import sample_dendrogram


def best_of(fn, repeat):
    times, out = [], None
    for _ in range(repeat):
        t0 = time.perf_counter()
        out = fn()
        times.append(time.perf_counter() - t0)
    return min(times), out


def cases(hrg_steps):
    ba = load_builtin("ba10k")
    tc = load_builtin("twoclique300")
    ba_csr = ba.csr
    sources = np.arange(0, ba.n, 100, dtype=np.int64)
    return [
        ("triangles ba10k", lambda k: k.triangles_per_node(*ba_csr)),
        ("triangles twoclique300", lambda k: k.triangles_per_node(*tc.csr)),
        (f"bfs ba10k ({sources.size} sources)", lambda k: k.bfs_distance_counts(*ba_csr, sources)),
        (f"hrg chain twoclique300 ({hrg_steps} steps)",
         lambda k: sample_dendrogram(tc, 1.0, np.random.default_rng(0), hrg_steps, backend=k)[2]["loglik"]),
    ]


def same(a, b):
    if isinstance(a, tuple):
        return all(same(x, y) for x, y in zip(a, b))
    return np.array_equal(np.asarray(a), np.asarray(b))


def main(argv=None):
    ap = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    ap.add_argument("--repeat", type=int, default=3)
    ap.add_argument("--hrg-steps", type=int, default=20_000)
    args = ap.parse_args(argv)
    found = kernels.backends()
    if "compiled" not in found:
        print("compiled backend not built; only the Python timings are shown")
    print(f"{'kernel':<42}{'compiled s':>12}{'python s':>12}{'speedup':>10}  agree")
    for name, fn in cases(args.hrg_steps):
        res = {b: best_of(lambda: fn(mod), args.repeat) for b, mod in found.items()}
        py_t, py_out = res["python"]
        if "compiled" in res:
            c_t, c_out = res["compiled"]
            print(f"{name:<42}{c_t:>12.4f}{py_t:>12.4f}{py_t / c_t:>9.1f}x  {same(c_out, py_out)}")
        else:
            print(f"{name:<42}{'-':>12}{py_t:>12.4f}{'-':>10}  -")


if __name__ == "__main__":
    main()
