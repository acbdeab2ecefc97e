"""Exhaustive path-enumeration references for short series.

Nothing here touches the package's recursions; every quantity is a direct sum
or minimum over the explicit list of alignment paths.
"""

import math
from functools import lru_cache

import numpy as np


@lru_cache(maxsize=None)
def paths(p, q):
    """All alignment paths from (1, 1) to (p, q), as tuples of 1-based pairs."""
    if p == 1 and q == 1:
        return (((1, 1),),)
    out = []
    for di, dj in ((1, 0), (0, 1), (1, 1)):
        i, j = p - di, q - dj
        if i >= 1 and j >= 1:
            out.extend(pr + ((p, q),) for pr in paths(i, j))
    return tuple(out)


def sqd(x, y, i, j):
    return float(np.sum((np.asarray(x[i - 1]) - np.asarray(y[j - 1])) ** 2))


def dtw_min(x, y):
    return min(sum(sqd(x, y, i, j) for i, j in pi) for pi in paths(len(x), len(y)))


def path_weight(x, y, pi, nu):
    return math.prod(math.exp(-nu * sqd(x, y, i, j)) / 3.0 for i, j in pi)


def forward_sum(x, y, nu):
    """(p, q) array: summed weight of partial paths (1, 1) -> (i, j)."""
    p, q = len(x), len(y)
    out = np.zeros((p, q))
    for i in range(1, p + 1):
        for j in range(1, q + 1):
            out[i - 1, j - 1] = sum(path_weight(x, y, pi, nu) for pi in paths(i, j))
    return out


def through_mass(x, y, nu):
    """(p, q) array: summed weight of complete paths visiting (i, j)."""
    p, q = len(x), len(y)
    out = np.zeros((p, q))
    for pi in paths(p, q):
        w = path_weight(x, y, pi, nu)
        for i, j in pi:
            out[i - 1, j - 1] += w
    return out


def same_time_kernel(x, y, t, nu):
    # the shorter series holds its last sample
    a = min(t, len(x))
    b = min(t, len(y))
    return math.exp(-nu * sqd(x, y, a, b))


def kxx_sum(x, y, nu):
    """Sum over paths whose diagonal moves land on i == j. Entering a row by a
    vertical move is weighted by the same-time kernel at that row, a column by
    the one at that column, a diagonal landing by the local kernel; all / 3."""
    p, q = len(x), len(y)
    total = 0.0
    for pi in paths(p, q):
        w = math.exp(-nu * sqd(x, y, 1, 1)) / 3.0
        ok = True
        for (i0, j0), (i1, j1) in zip(pi, pi[1:]):
            if i1 > i0 and j1 > j0:
                if i1 != j1:
                    ok = False
                    break
                w *= math.exp(-nu * sqd(x, y, i1, j1)) / 3.0
            elif i1 > i0:
                w *= same_time_kernel(x, y, i1, nu) / 3.0
            else:
                w *= same_time_kernel(x, y, j1, nu) / 3.0
        if ok:
            total += w
    return total


def kdtw_sum(x, y, nu):
    return path_weight_total(x, y, nu) + kxx_sum(x, y, nu)


def path_weight_total(x, y, nu):
    return sum(path_weight(x, y, pi, nu) for pi in paths(len(x), len(y)))
