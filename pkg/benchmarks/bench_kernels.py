"""Compare the compiled kernels with the pure-Python reference.

Usage::

    python benchmarks/bench_kernels.py [--repeat N]

Each case runs both backends on the same inputs, checks that the results
agree and prints the best wall time of ``N`` runs.
"""

import argparse
import random
import time

from chowcalc import _kernels_py as py
from chowcalc.kernels import pack
from chowcalc.polyops import weyl_operators
from chowcalc.rootdata import DynkinSpec, build_root_system
from chowcalc.weyl import CosetTree, ParabolicSubset, WeylGroup

try:
    from chowcalc import _ckernels as ck
except ImportError:
    ck = None


def random_packed(rng, n, deg, terms):
    out = {}
    for _ in range(terms):
        e = [0] * n
        for _ in range(deg):
            e[rng.randrange(n)] += 1
        out[pack(e)] = rng.randint(-9, 9) or 1
    return out


def best_of(fn, args, repeat):
    best = float("inf")
    result = None
    for _ in range(repeat):
        t0 = time.perf_counter()
        result = fn(*args)
        best = min(best, time.perf_counter() - t0)
    return best, result


def cases():
    rng = random.Random(0)
    p, q = random_packed(rng, 8, 6, 300), random_packed(rng, 8, 5, 300)
    yield "multiply 300x300 terms (E8 vars)", "multiply", (p, q)

    spec = DynkinSpec.parse("E7")
    tree = CosetTree(WeylGroup(spec), ParabolicSubset.omitting(7, [7]))
    ops = weyl_operators(build_root_system(spec))
    ops.ensure(9)
    f = random_packed(rng, 7, 9, 40)
    yield ("delta_tree E7/P7 degree 9", "delta_tree",
           (f, tree.parent_list(), tree.letter_list(), ops.htab, 9, tree.length_list()))
    g = random_packed(rng, 7, 5, 20)
    yield ("leibniz_rows E7/P7 degree 5", "leibniz_rows",
           (g, 5, tree.parent_list(), [max(a, 0) for a in tree.letter_list()],
            tree.up_table(), ops.ytab, ops.htab))


def main():
    ap = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    ap.add_argument("--repeat", type=int, default=3)
    args = ap.parse_args()
    if ck is None:
        print("compiled kernels not built; only the Python backend is timed")
    print(f"{'case':<36} {'python [s]':>11} {'cython [s]':>11} {'speedup':>8}")
    for name, fn, fargs in cases():
        tp, rp = best_of(getattr(py, fn), fargs, args.repeat)
        if ck is None:
            print(f"{name:<36} {tp:11.4f} {'-':>11} {'-':>8}")
            continue
        tc, rc = best_of(getattr(ck, fn), fargs, args.repeat)
        if rc != rp:
            raise SystemExit(f"{name}: backends disagree")
        print(f"{name:<36} {tp:11.4f} {tc:11.4f} {tp / tc:7.1f}x")


if __name__ == "__main__":
    main()
