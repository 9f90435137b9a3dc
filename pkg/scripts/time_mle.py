"""Time the exact tree MLE on balanced binary trees of growing size."""
import argparse
import math
import statistics
import time

import numpy as np

from bmtm.mle import mle
from bmtm.tree_model import RootedTree


def balanced_tree(d):
    active = list(range(1, d + 1))
    parent = {}
    node = d + 1
    while len(active) > 1:
        nxt = []
        for i in range(0, len(active) - 1, 2):
            parent[active[i]] = parent[active[i + 1]] = node
            nxt.append(node)
            node += 1
        if len(active) % 2:
            nxt.append(active[-1])
        active = nxt
    parent[active[0]] = 0
    par = [-1] * node
    for c, p in parent.items():
        par[c] = p
    return RootedTree(tuple(par))


def main():
    ap = argparse.ArgumentParser(description=__doc__)
    ap.add_argument("--d", default="50,100,200,400,800")
    ap.add_argument("--repeats", type=int, default=5)
    args = ap.parse_args()
    rng = np.random.default_rng(0)
    prev = None
    print("d,seconds,slope")
    for d in map(int, args.d.split(",")):
        tree, x = balanced_tree(d), rng.standard_normal(d)
        runs = []
        for _ in range(args.repeats):
            t = time.perf_counter()
            mle(tree, x)
            runs.append(time.perf_counter() - t)
        sec = statistics.median(runs)
        slope = "" if prev is None else f"{math.log(sec / prev[1]) / math.log(d / prev[0]):.2f}"
        print(f"{d},{sec:.5f},{slope}")
        prev = (d, sec)


if __name__ == "__main__":
    main()
