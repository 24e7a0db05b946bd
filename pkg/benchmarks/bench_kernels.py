"""Side-by-side timing of the jit and numpy kernel paths.

Each hot kernel ships in two equivalent implementations: a compiled one
(numba, used when available and ``BLOCKSKY_NO_NUMBA`` is unset) and a
vectorized numpy fallback. This script runs both on identical inputs,
checks they agree, and prints best-of-N wall times.

Run from the repository root:

    python benchmarks/bench_kernels.py
    python benchmarks/bench_kernels.py --groups 5000 --points 6000
"""

from __future__ import annotations

import argparse
import time

import numpy as np

from blocksky import _kernels


def grouped_members(rng: np.random.Generator, n_groups: int,
                    max_size: int) -> tuple[np.ndarray, np.ndarray]:
    """Block-like structure: many small groups, a long tail of large ones."""
    sizes = np.minimum(rng.geometric(0.25, size=n_groups), max_size)
    offsets = np.zeros(n_groups + 1, dtype=np.int64)
    np.cumsum(sizes, out=offsets[1:])
    members = rng.permutation(offsets[-1]).astype(np.int64)
    for g in range(n_groups):  # ascending within each group
        members[offsets[g]:offsets[g + 1]].sort()
    return members, offsets


def best_of(fn, repeats: int) -> float:
    best = float("inf")
    for _ in range(repeats):
        start = time.perf_counter()
        fn()
        best = min(best, time.perf_counter() - start)
    return best


def bench(name, np_fn, nb_fn, repeats: int) -> None:
    got_np = np_fn()
    if nb_fn is None:
        t_np = best_of(np_fn, repeats)
        print(f"{name:24s} numpy {t_np * 1e3:8.2f} ms   (no jit available)")
        return
    got_nb = nb_fn()  # first call also compiles
    if not np.array_equal(got_np, got_nb):
        raise SystemExit(f"{name}: paths disagree")
    t_np = best_of(np_fn, repeats)
    t_nb = best_of(nb_fn, repeats)
    ratio = t_np / t_nb if t_nb > 0 else float("inf")
    print(f"{name:24s} numpy {t_np * 1e3:8.2f} ms   jit {t_nb * 1e3:8.2f} ms"
          f"   x{ratio:.1f}")


def main() -> None:
    parser = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    parser.add_argument("--seed", type=int, default=3)
    parser.add_argument("--groups", type=int, default=3000,
                        help="group count for the pair kernels")
    parser.add_argument("--max-size", type=int, default=60,
                        help="largest group size")
    parser.add_argument("--points", type=int, default=4000,
                        help="point count for the skyline mask")
    parser.add_argument("--repeats", type=int, default=5)
    args = parser.parse_args()

    rng = np.random.default_rng(args.seed)
    members, offsets = grouped_members(rng, args.groups, args.max_size)
    other_members, other_offsets = grouped_members(rng, args.groups,
                                                   args.max_size)
    stride = int(members.max()) + 1 if len(members) else 1
    pc = rng.random(args.points)
    pq = rng.random(args.points)

    n_pairs = sum(int(s * (s - 1) // 2)
                  for s in np.diff(offsets))
    print(f"groups={args.groups} records={len(members)} "
          f"within-pairs={n_pairs} points={args.points} "
          f"jit={'available' if _kernels.HAS_NUMBA else 'unavailable'}")

    has_nb = _kernels.HAS_NUMBA
    bench("within_group_pairs",
          lambda: _kernels._within_group_pairs_np(members, offsets, stride),
          (lambda: _kernels._within_group_pairs_nb(members, offsets, stride))
          if has_nb else None,
          args.repeats)
    bench("cross_group_pairs",
          lambda: _kernels._cross_group_pairs_np(
              members, offsets, other_members, other_offsets, stride),
          (lambda: _kernels._cross_group_pairs_nb(
              members, offsets, other_members, other_offsets, stride))
          if has_nb else None,
          args.repeats)
    bench("naive_skyline_mask",
          lambda: _kernels._naive_skyline_mask_np(pc, pq),
          (lambda: _kernels._naive_skyline_mask_nb(pc, pq))
          if has_nb else None,
          args.repeats)


if __name__ == "__main__":
    main()
