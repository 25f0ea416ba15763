"""Time each hot kernel under the compiled and the interpreted backend.

    python benchmarks/bench_kernels.py [--n 2000] [--dim 256] [--k 50] [--repeat 3] [--json]

Inputs are unit vectors like the embedder produces. Each cell is the best of
``--repeat`` runs; ``speedup`` is interpreted time over compiled time.
"""
from __future__ import annotations

import argparse
import json
import random
import sys
import timeit

import numpy as np

from mmkgqa._backend import available_backends


def make_inputs(n: int, dim: int, k: int, seed: int) -> dict:
    rng = np.random.default_rng(seed)
    X = rng.normal(size=(n, dim))
    X /= np.linalg.norm(X, axis=1, keepdims=True)
    X = np.ascontiguousarray(X)
    labels = np.ascontiguousarray(np.arange(n) % k, dtype=np.intp)
    C = np.ascontiguousarray(X[:k].copy())
    # planted near-duplicates so the greedy sweep has real work to skip
    V = np.ascontiguousarray(np.vstack([X, X[: n // 4] + 0.01 * rng.normal(size=(n // 4, dim))]))
    V /= np.linalg.norm(V, axis=1, keepdims=True)
    r = random.Random(seed)
    a = [r.randrange(30) for _ in range(400)]
    b = [r.randrange(30) for _ in range(400)]
    return {"X": X, "labels": labels, "C": C, "V": V, "a": a, "b": b, "k": k}


CASES = {
    "lcs_length (400x400 tokens)": lambda m, d: m.lcs_length(d["a"], d["b"]),
    "cluster_distance_sums": lambda m, d: m.cluster_distance_sums(d["X"], d["labels"], d["k"]),
    "linkage_extremes": lambda m, d: m.linkage_extremes(d["X"], d["labels"], d["k"]),
    "assign_labels": lambda m, d: m.assign_labels(d["X"], d["C"]),
    "greedy_select (t=0.95)": lambda m, d: m.greedy_select(d["V"], 0.95),
}


def main(argv=None) -> int:
    ap = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    ap.add_argument("--n", type=int, default=2000, help="points")
    ap.add_argument("--dim", type=int, default=256, help="vector size")
    ap.add_argument("--k", type=int, default=50, help="clusters / centroids")
    ap.add_argument("--repeat", type=int, default=3, help="runs per cell; best is kept")
    ap.add_argument("--seed", type=int, default=0)
    ap.add_argument("--json", action="store_true", help="print JSON instead of a table")
    args = ap.parse_args(argv)

    backends = available_backends()
    if "cython" not in backends:
        print("compiled extension not importable; timing the fallback only", file=sys.stderr)
    data = make_inputs(args.n, args.dim, args.k, args.seed)
    rows = []
    for name, fn in CASES.items():
        row = {"kernel": name}
        for backend, mod in sorted(backends.items()):
            row[backend] = min(timeit.repeat(lambda: fn(mod, data), number=1, repeat=args.repeat))
        if "cython" in row:
            row["speedup"] = row["python"] / row["cython"]
        rows.append(row)

    if args.json:
        json.dump({"n": args.n, "dim": args.dim, "k": args.k, "rows": rows}, sys.stdout, indent=2)
        print()
        return 0
    cols = ["kernel", *sorted(backends), *(["speedup"] if "cython" in backends else [])]
    print(f"n={args.n} dim={args.dim} k={args.k}, best of {args.repeat}")
    print(f"{cols[0]:<30}" + "".join(f"{c:>12}" for c in cols[1:]))
    for row in rows:
        cells = [f"{row[c] * 1000:>10.1f}ms" if c in backends else f"{row[c]:>11.1f}x" for c in cols[1:]]
        print(f"{row['kernel']:<30}" + "".join(cells))
    return 0


if __name__ == "__main__":
    sys.exit(main())
