"""2-D convex collision primitives: separating-axis tests with minimal
translation vectors, for circles and convex polygons.

Polygons are tuples of (x, y) vertices in counter-clockwise order.  All
overlap functions return None when separated, otherwise (depth, nx, ny) where
moving the second argument by depth along (nx, ny) just removes the overlap.
"""

from __future__ import annotations

import math


def transform(points, x, y, cos_t, sin_t):
    """Body-frame points -> world frame for a pose (x, y, theta)."""
    return tuple(
        (x + px * cos_t - py * sin_t, y + px * sin_t + py * cos_t) for px, py in points
    )


def polygon_centroid(pts):
    n = len(pts)
    return (sum(p[0] for p in pts) / n, sum(p[1] for p in pts) / n)


def polygon_aabb(pts):
    xs = [p[0] for p in pts]
    ys = [p[1] for p in pts]
    return (min(xs), min(ys), max(xs), max(ys))


def aabb_overlap(a, b, margin=0.0):
    return (
        a[0] - margin <= b[2]
        and b[0] - margin <= a[2]
        and a[1] - margin <= b[3]
        and b[1] - margin <= a[3]
    )


def _project(pts, nx, ny):
    lo = hi = pts[0][0] * nx + pts[0][1] * ny
    for px, py in pts[1:]:
        d = px * nx + py * ny
        if d < lo:
            lo = d
        elif d > hi:
            hi = d
    return lo, hi


def _axes(pts):
    n = len(pts)
    for i in range(n):
        x0, y0 = pts[i]
        x1, y1 = pts[(i + 1) % n]
        ex, ey = x1 - x0, y1 - y0
        length = math.hypot(ex, ey)
        if length > 1e-12:
            yield (ey / length, -ex / length)


def poly_poly_mtv(a, b):
    """Minimal translation pushing polygon b out of polygon a, or None."""
    best_depth = math.inf
    best_axis = None
    for axis in _axes(a):
        lo_a, hi_a = _project(a, *axis)
        lo_b, hi_b = _project(b, *axis)
        overlap = min(hi_a, hi_b) - max(lo_a, lo_b)
        if overlap <= 0.0:
            return None
        if overlap < best_depth:
            best_depth, best_axis = overlap, axis
    for axis in _axes(b):
        lo_a, hi_a = _project(a, *axis)
        lo_b, hi_b = _project(b, *axis)
        overlap = min(hi_a, hi_b) - max(lo_a, lo_b)
        if overlap <= 0.0:
            return None
        if overlap < best_depth:
            best_depth, best_axis = overlap, axis
    ca = polygon_centroid(a)
    cb = polygon_centroid(b)
    nx, ny = best_axis
    if (cb[0] - ca[0]) * nx + (cb[1] - ca[1]) * ny < 0.0:
        nx, ny = -nx, -ny
    return (best_depth, nx, ny)


def point_in_polygon(px, py, pts):
    n = len(pts)
    for i in range(n):
        x0, y0 = pts[i]
        x1, y1 = pts[(i + 1) % n]
        if (x1 - x0) * (py - y0) - (y1 - y0) * (px - x0) < 0.0:
            return False
    return True


def closest_point_on_segment(px, py, x0, y0, x1, y1):
    ex, ey = x1 - x0, y1 - y0
    seg2 = ex * ex + ey * ey
    if seg2 <= 1e-24:
        return x0, y0
    t = ((px - x0) * ex + (py - y0) * ey) / seg2
    t = min(max(t, 0.0), 1.0)
    return (x0 + t * ex, y0 + t * ey)


def poly_circle_mtv(pts, cx, cy, r):
    """Minimal translation pushing a circle out of a convex polygon, or None."""
    if point_in_polygon(cx, cy, pts):
        # push out through the nearest face
        best_d = math.inf
        best_n = (1.0, 0.0)
        n = len(pts)
        for i in range(n):
            x0, y0 = pts[i]
            x1, y1 = pts[(i + 1) % n]
            qx, qy = closest_point_on_segment(cx, cy, x0, y0, x1, y1)
            d = math.hypot(cx - qx, cy - qy)
            if d < best_d:
                ex, ey = x1 - x0, y1 - y0
                length = math.hypot(ex, ey)
                best_d = d
                best_n = (ey / length, -ex / length)  # outward for CCW
        return (r + best_d, best_n[0], best_n[1])
    best_d = math.inf
    best_q = None
    n = len(pts)
    for i in range(n):
        x0, y0 = pts[i]
        x1, y1 = pts[(i + 1) % n]
        qx, qy = closest_point_on_segment(cx, cy, x0, y0, x1, y1)
        d = math.hypot(cx - qx, cy - qy)
        if d < best_d:
            best_d = d
            best_q = (qx, qy)
    if best_d >= r:
        return None
    if best_d <= 1e-12:
        return (r, 1.0, 0.0)
    nx = (cx - best_q[0]) / best_d
    ny = (cy - best_q[1]) / best_d
    return (r - best_d, nx, ny)


def circle_circle_mtv(ax, ay, ar, bx, by, br):
    """Minimal translation pushing circle b out of circle a, or None."""
    dx, dy = bx - ax, by - ay
    d = math.hypot(dx, dy)
    depth = ar + br - d
    if depth <= 0.0:
        return None
    if d <= 1e-12:
        return (depth, 1.0, 0.0)
    return (depth, dx / d, dy / d)


def piece_mtv(piece_a, piece_b):
    """MTV between two pieces; a piece is ("poly", pts) or ("circle", (cx, cy, r)).

    Returned normal pushes piece_b away from piece_a.
    """
    ka, da = piece_a
    kb, db = piece_b
    if ka == "poly" and kb == "poly":
        return poly_poly_mtv(da, db)
    if ka == "poly" and kb == "circle":
        return poly_circle_mtv(da, *db)
    if ka == "circle" and kb == "poly":
        mtv = poly_circle_mtv(db, *da)
        if mtv is None:
            return None
        depth, nx, ny = mtv
        return (depth, -nx, -ny)
    return circle_circle_mtv(*da, *db)


def piece_aabb(piece):
    kind, data = piece
    if kind == "poly":
        return polygon_aabb(data)
    cx, cy, r = data
    return (cx - r, cy - r, cx + r, cy + r)


def separation_distance(piece_a, piece_b):
    """Coarse gap estimate between two pieces (0 when overlapping).

    Exact for circle pairs; for polygons it is the smallest vertex-to-edge
    distance, which is exact for the shallow clearances the mating checks use.
    """
    if piece_mtv(piece_a, piece_b) is not None:
        return 0.0
    ka, da = piece_a
    kb, db = piece_b
    if ka == "circle" and kb == "circle":
        (ax, ay, ar), (bx, by, br) = da, db
        return max(0.0, math.hypot(bx - ax, by - ay) - ar - br)
    if ka == "circle":
        ka, da, kb, db = kb, db, ka, da
    if kb == "circle":
        cx, cy, r = db
        best = math.inf
        n = len(da)
        for i in range(n):
            qx, qy = closest_point_on_segment(cx, cy, *da[i], *da[(i + 1) % n])
            best = min(best, math.hypot(cx - qx, cy - qy) - r)
        return max(0.0, best)
    best = math.inf
    for pts_a, pts_b in ((da, db), (db, da)):
        n = len(pts_b)
        for px, py in pts_a:
            for i in range(n):
                qx, qy = closest_point_on_segment(px, py, *pts_b[i], *pts_b[(i + 1) % n])
                best = min(best, math.hypot(px - qx, py - qy))
    return best
