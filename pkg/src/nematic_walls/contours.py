"""Marching-squares level curves on structured grids.

Cells are classified by corner signs of f - level; crossing points are
linearly interpolated along edges.  Saddle cells (cases 5 and 10) are
disambiguated with the cell-centre average.  Segments are returned in
physical coordinates via the supplied node coordinate arrays, chained
into polylines.
"""

from __future__ import annotations

from collections import defaultdict
from typing import List

import numpy as np

# segment endpoints per case, as edge ids: 0 bottom, 1 right, 2 top, 3 left
_CASES = {
    1: [(3, 0)], 2: [(0, 1)], 3: [(3, 1)], 4: [(1, 2)],
    6: [(0, 2)], 7: [(3, 2)], 8: [(2, 3)], 9: [(2, 0)],
    11: [(2, 1)], 12: [(1, 3)], 13: [(1, 0)], 14: [(0, 3)],
}


def _edge_point(edge, i, j, F, X, Y, level):
    if edge == 0:
        a, b = (i, j), (i + 1, j)
    elif edge == 1:
        a, b = (i + 1, j), (i + 1, j + 1)
    elif edge == 2:
        a, b = (i + 1, j + 1), (i, j + 1)
    else:
        a, b = (i, j + 1), (i, j)
    fa, fb = F[a], F[b]
    t = 0.5 if fb == fa else (level - fa) / (fb - fa)
    t = min(max(t, 0.0), 1.0)
    return (X[a] + t * (X[b] - X[a]), Y[a] + t * (Y[b] - Y[a]))


def marching_squares(F: np.ndarray, X: np.ndarray, Y: np.ndarray,
                     level: float) -> List[np.ndarray]:
    """Polylines of the level set {F = level}; F, X, Y share a (n1, n2)
    node layout."""
    F = np.asarray(F, dtype=float)
    n1, n2 = F.shape
    segments = []
    above = F > level
    for i in range(n1 - 1):
        for j in range(n2 - 1):
            idx = (int(above[i, j]) | int(above[i + 1, j]) << 1
                   | int(above[i + 1, j + 1]) << 2 | int(above[i, j + 1]) << 3)
            if idx in (0, 15):
                continue
            if idx in (5, 10):
                center = 0.25 * (F[i, j] + F[i + 1, j]
                                 + F[i + 1, j + 1] + F[i, j + 1])
                if idx == 5:
                    pairs = [(3, 0), (1, 2)] if center > level else [(3, 2), (1, 0)]
                else:
                    pairs = [(0, 1), (2, 3)] if center > level else [(0, 3), (2, 1)]
            else:
                pairs = _CASES[idx]
            for e1, e2 in pairs:
                p = _edge_point(e1, i, j, F, X, Y, level)
                q = _edge_point(e2, i, j, F, X, Y, level)
                segments.append((p, q))
    return _chain(segments)


def _chain(segments, tol=1e-12):
    """Join segments sharing endpoints into polylines."""
    if not segments:
        return []

    def key(p):
        return (round(p[0] / max(tol, 1e-300)), round(p[1] / max(tol, 1e-300)))

    by_end = defaultdict(list)
    for k, (p, q) in enumerate(segments):
        by_end[key(p)].append((k, 0))
        by_end[key(q)].append((k, 1))
    used = [False] * len(segments)
    polys = []
    for start in range(len(segments)):
        if used[start]:
            continue
        used[start] = True
        p, q = segments[start]
        chain = [p, q]
        # extend forward
        while True:
            candidates = [c for c in by_end[key(chain[-1])] if not used[c[0]]]
            if not candidates:
                break
            k, end = candidates[0]
            used[k] = True
            seg = segments[k]
            chain.append(seg[1 - end])
        # extend backward
        while True:
            candidates = [c for c in by_end[key(chain[0])] if not used[c[0]]]
            if not candidates:
                break
            k, end = candidates[0]
            used[k] = True
            seg = segments[k]
            chain.insert(0, seg[1 - end])
        polys.append(np.asarray(chain))
    return polys


def contours_to_csv(levels_polys: dict, path) -> None:
    """CSV rows level,poly_id,x,y for every polyline vertex."""
    with open(path, "w") as fh:
        fh.write("level,poly_id,x,y\n")
        for level, polys in levels_polys.items():
            for pid, poly in enumerate(polys):
                for x, y in poly:
                    fh.write(f"{level:.17g},{pid},{x:.17g},{y:.17g}\n")
