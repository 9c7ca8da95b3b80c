"""Zero-contour extraction on a regular grid, and the grid-scan oracle.

Marching squares over sign(z) with linear interpolation along cell edges.
A sample that is exactly zero is binned with the positive side so every
cell has a well-defined case; the ambiguous diagonal cases are resolved by
the sign at the cell center.

The rest point oracle intersects the two nullcline contours cell-wise: a
cell crossed by both the s-component and the i-component contour is a
candidate, adjacent candidates merge into clusters, and each cluster votes
one intersection at its best member point.  This is deliberately
independent of the resultant-based solver so the two can cross-check each
other to within a couple of grid cells.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .model import ModelParams, planar_rhs

__all__ = [
    "marching_segments",
    "nullcline_segments",
    "GridScan",
    "grid_intersections",
]

# Cell corner order: 0=(x0,y0) 1=(x1,y0) 2=(x1,y1) 3=(x0,y1); bit k set when
# corner k is nonnegative.  Each case lists crossed edge pairs; edges are
# 0:bottom 1:right 2:top 3:left.
_CASES: dict[int, tuple[tuple[int, int], ...]] = {
    0: (), 15: (),
    1: ((3, 0),), 14: ((3, 0),),
    2: ((0, 1),), 13: ((0, 1),),
    4: ((1, 2),), 11: ((1, 2),),
    8: ((2, 3),), 7: ((2, 3),),
    3: ((3, 1),), 12: ((3, 1),),
    6: ((0, 2),), 9: ((0, 2),),
    5: None,  # resolved by center sign
    10: None,
}


def _edge_point(edge: int, x0, x1, y0, y1, z) -> tuple[float, float]:
    """Linear zero crossing on one cell edge; z is the 4-corner value array."""
    if edge == 0:
        t = z[0] / (z[0] - z[1])
        return x0 + t * (x1 - x0), y0
    if edge == 1:
        t = z[1] / (z[1] - z[2])
        return x1, y0 + t * (y1 - y0)
    if edge == 2:
        t = z[3] / (z[3] - z[2])
        return x0 + t * (x1 - x0), y1
    t = z[0] / (z[0] - z[3])
    return x0, y0 + t * (y1 - y0)


def marching_segments(
    xs: np.ndarray, ys: np.ndarray, z: np.ndarray
) -> list[tuple[tuple[float, float], tuple[float, float]]]:
    """Zero-level segments of samples z[j, k] = f(xs[j], ys[k]).

    Returns line segments in (x, y) coordinates.  The sampling must be fine
    enough for the contour; no refinement is attempted here.
    """
    xs = np.asarray(xs, dtype=float)
    ys = np.asarray(ys, dtype=float)
    z = np.asarray(z, dtype=float)
    if z.shape != (len(xs), len(ys)):
        raise ValueError(f"grid shape {z.shape} does not match axes "
                         f"({len(xs)}, {len(ys)})")
    pos = z >= 0.0
    # cells with at least one sign change among the four corners
    c00 = pos[:-1, :-1]
    c10 = pos[1:, :-1]
    c11 = pos[1:, 1:]
    c01 = pos[:-1, 1:]
    mixed = ~((c00 & c10 & c11 & c01) | ~(c00 | c10 | c11 | c01))
    segments = []
    for j, k in zip(*np.nonzero(mixed)):
        corners = np.array([z[j, k], z[j + 1, k], z[j + 1, k + 1], z[j, k + 1]])
        case = (
            (1 if corners[0] >= 0 else 0)
            | (2 if corners[1] >= 0 else 0)
            | (4 if corners[2] >= 0 else 0)
            | (8 if corners[3] >= 0 else 0)
        )
        pairs = _CASES[case]
        if pairs is None:
            # ambiguous saddle cell: center sign picks the pairing
            center_pos = 0.25 * float(np.sum(corners)) >= 0.0
            if case == 5:
                pairs = ((3, 0), (1, 2)) if center_pos else ((3, 2), (1, 0))
            else:
                pairs = ((0, 1), (2, 3)) if center_pos else ((0, 3), (2, 1))
        x0, x1 = xs[j], xs[j + 1]
        y0, y1 = ys[k], ys[k + 1]
        for e0, e1 in pairs:
            segments.append(
                (_edge_point(e0, x0, x1, y0, y1, corners),
                 _edge_point(e1, x0, x1, y0, y1, corners))
            )
    return segments


def nullcline_segments(
    p: ModelParams, component: int, n: int = 400
) -> list[tuple[tuple[float, float], tuple[float, float]]]:
    """Zero contour of one planar field component over [0,1]^2.

    Args:
        p: model parameters.
        component: 0 for the s-equation, 1 for the i-equation.
        n: cells per axis (n+1 samples).
    """
    if component not in (0, 1):
        raise ValueError("component must be 0 or 1")
    axis = np.linspace(0.0, 1.0, n + 1)
    ss, ii = np.meshgrid(axis, axis, indexing="ij")
    grid = np.stack([ss, ii], axis=-1)
    z = planar_rhs(p, grid)[..., component]
    return marching_segments(axis, axis, z)


@dataclass(frozen=True)
class GridScan:
    """Oracle result: candidate rest points from nullcline cell overlap.

    ``points`` are one representative per cluster; ``cell_size`` is the grid
    spacing, the natural unit for match tolerances.
    """

    points: tuple[tuple[float, float], ...]
    cell_size: float
    n_candidate_cells: int


def grid_intersections(p: ModelParams, n: int = 400) -> GridScan:
    """Locate rest point candidates in D1 by nullcline overlap on a grid.

    Cells (restricted to cell centers with s + i <= 1) whose four corners
    show a sign change in BOTH field components are candidates; adjacent
    candidates (8-neighborhood) merge, and each cluster reports the
    centroid of a sign-refined pass at 8x resolution over its expanded
    bounding box (elongated near-tangent clusters would otherwise bias a
    residual-based pick several cells along the contour).  When refinement
    finds no doubly-mixed fine cell the member center with the smallest
    field residual is reported instead.

    Where the two contours run nearly parallel they can share cells without
    crossing, so each cluster is confirmed by the topological degree of the
    field around its expanded bounding box: a walked angle sum of zero means
    the contours pass by without meeting and the cluster is dropped.  The
    degree walk uses only grid samples, keeping the scan independent of the
    algebraic solver.

    Two caveats, both irrelevant for strictly positive parameters: a pair
    of rest points closer than a few cells can annihilate in the degree
    check (+1 and -1 cancel), and in the axis-invariant special case a
    whole contour branch lies on the region edge where the zero-sign
    binning hides it, so boundary rest points can be dropped.
    """
    axis = np.linspace(0.0, 1.0, n + 1)
    ss, ii = np.meshgrid(axis, axis, indexing="ij")
    grid = np.stack([ss, ii], axis=-1)
    f = planar_rhs(p, grid)
    pos0 = f[..., 0] >= 0.0
    pos1 = f[..., 1] >= 0.0

    def mixed(pos):
        c00 = pos[:-1, :-1]
        c10 = pos[1:, :-1]
        c11 = pos[1:, 1:]
        c01 = pos[:-1, 1:]
        return ~((c00 & c10 & c11 & c01) | ~(c00 | c10 | c11 | c01))

    h = 1.0 / n
    centers_s = 0.5 * (axis[:-1] + axis[1:])
    cs, ci = np.meshgrid(centers_s, centers_s, indexing="ij")
    in_region = cs + ci <= 1.0 + h
    cand = mixed(pos0) & mixed(pos1) & in_region
    js, ks = np.nonzero(cand)
    n_cells = len(js)
    if n_cells == 0:
        return GridScan(points=(), cell_size=h, n_candidate_cells=0)

    # union-find over 8-adjacent candidate cells
    index = {(int(j), int(k)): idx for idx, (j, k) in enumerate(zip(js, ks))}
    parent = list(range(n_cells))

    def find(a):
        while parent[a] != a:
            parent[a] = parent[parent[a]]
            a = parent[a]
        return a

    for idx, (j, k) in enumerate(zip(js, ks)):
        for dj in (-1, 0, 1):
            for dk in (-1, 0, 1):
                other = index.get((int(j) + dj, int(k) + dk))
                if other is not None:
                    ra, rb = find(idx), find(other)
                    if ra != rb:
                        parent[rb] = ra

    clusters: dict[int, list[int]] = {}
    for idx in range(n_cells):
        clusters.setdefault(find(idx), []).append(idx)

    def box_degree(j_lo: int, j_hi: int, k_lo: int, k_hi: int) -> int | None:
        """Winding count of the field along a grid-aligned node rectangle.

        Returns None when a boundary node's field is too small to give a
        direction (degenerate walk; caller keeps the cluster)."""
        j_lo, k_lo = max(j_lo, 0), max(k_lo, 0)
        j_hi, k_hi = min(j_hi, n), min(k_hi, n)
        if j_hi - j_lo < 2 or k_hi - k_lo < 2:
            return None
        path = (
            [(jj, k_lo) for jj in range(j_lo, j_hi)]
            + [(j_hi, kk) for kk in range(k_lo, k_hi)]
            + [(jj, k_hi) for jj in range(j_hi, j_lo, -1)]
            + [(j_lo, kk) for kk in range(k_hi, k_lo, -1)]
        )
        vals = np.array([f[jj, kk] for jj, kk in path])
        norms = np.hypot(vals[:, 0], vals[:, 1])
        if np.any(norms < 1e-13):
            return None
        nxt = np.roll(vals, -1, axis=0)
        cross = vals[:, 0] * nxt[:, 1] - vals[:, 1] * nxt[:, 0]
        dot = vals[:, 0] * nxt[:, 0] + vals[:, 1] * nxt[:, 1]
        total = float(np.sum(np.arctan2(cross, dot)))
        return int(round(total / (2.0 * np.pi)))

    refine = 8

    def refined_point(jm, km):
        j_lo, j_hi = max(min(jm) - 1, 0), min(max(jm) + 2, n)
        k_lo, k_hi = max(min(km) - 1, 0), min(max(km) + 2, n)
        nj = min(240, refine * (j_hi - j_lo))
        nk = min(240, refine * (k_hi - k_lo))
        fs = np.linspace(axis[j_lo], axis[j_hi], nj + 1)
        fi = np.linspace(axis[k_lo], axis[k_hi], nk + 1)
        gs, gi = np.meshgrid(fs, fi, indexing="ij")
        ff = planar_rhs(p, np.stack([gs, gi], axis=-1))
        both = mixed(ff[..., 0] >= 0.0) & mixed(ff[..., 1] >= 0.0)
        if not np.any(both):
            return None
        fine_cs = 0.5 * (fs[:-1] + fs[1:])
        fine_ci = 0.5 * (fi[:-1] + fi[1:])
        jj, kk = np.nonzero(both)
        return float(np.mean(fine_cs[jj])), float(np.mean(fine_ci[kk]))

    pts = []
    for members in clusters.values():
        jm = [int(js[idx]) for idx in members]
        km = [int(ks[idx]) for idx in members]
        deg = box_degree(min(jm) - 1, max(jm) + 2, min(km) - 1, max(km) + 2)
        if deg == 0:
            continue
        rep = refined_point(jm, km)
        if rep is None:
            best = None
            best_res = np.inf
            for idx in members:
                j, k = int(js[idx]), int(ks[idx])
                c = (centers_s[j], centers_s[k])
                res = float(np.max(np.abs(planar_rhs(p, c))))
                if res < best_res:
                    best, best_res = c, res
            rep = best
        pts.append((float(rep[0]), float(rep[1])))
    pts.sort()
    return GridScan(points=tuple(pts), cell_size=h, n_candidate_cells=n_cells)
