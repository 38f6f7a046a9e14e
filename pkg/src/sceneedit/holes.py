"""Cavity inpainting after deletions.

Removing an object from a fused scan tears open the surface it was attached
to. The rim of each tear is recovered as a closed loop of edges shared
between removed and kept faces, triangulated by ear clipping in its best-fit
plane, and the fresh faces are subdivided until no interior edge exceeds the
target length so shading stays local. Loops whose projection self-intersects
are left open with a warning; an honest hole beats broken geometry.
"""

from __future__ import annotations

import logging

import numpy as np

logger = logging.getLogger(__name__)

_MAX_SPLITS = 20000


def boundary_loops(edges: set[tuple[int, int]]) -> tuple[list[list[int]], int]:
    """Group undirected edges into closed vertex loops.

    Returns (loops, skipped); chains that do not close or vertices with more
    than two incident edges mark a non-manifold rim, and those edge groups
    are skipped.
    """
    adjacency: dict[int, list[int]] = {}
    for u, v in edges:
        adjacency.setdefault(u, []).append(v)
        adjacency.setdefault(v, []).append(u)
    bad = {v for v, nbrs in adjacency.items() if len(nbrs) != 2}
    loops: list[list[int]] = []
    skipped = 0
    visited: set[int] = set()
    for start in sorted(adjacency):
        if start in visited or start in bad:
            continue
        loop = [start]
        visited.add(start)
        prev, current = start, min(adjacency[start])
        closed = False
        while True:
            if current in bad:
                break
            if current == start:
                closed = True
                break
            loop.append(current)
            visited.add(current)
            a, b = adjacency[current]
            prev, current = current, (b if a == prev else a)
        if closed and len(loop) >= 3:
            loops.append(loop)
        else:
            skipped += 1
            visited.update(loop)
    if skipped or bad:
        logger.warning("skipped %d rim chains (non-manifold or unclosed)", max(skipped, 1))
    return loops, skipped


def _best_fit_frame(points: np.ndarray) -> tuple[np.ndarray, np.ndarray, np.ndarray]:
    """Orthonormal (u, v, normal) of the least-squares plane through points."""
    center = points.mean(axis=0)
    _, _, vt = np.linalg.svd(points - center, full_matrices=False)
    u, v, n = vt[0], vt[1], vt[2] if len(vt) > 2 else np.cross(vt[0], vt[1])
    return u, v, n


def _segments_intersect(p1, p2, p3, p4) -> bool:
    """Proper crossing test; near-zero orientations (collinear within float
    noise, e.g. after a PCA rotation) count as non-crossing."""
    span = max(
        abs(p2[0] - p1[0]), abs(p2[1] - p1[1]),
        abs(p4[0] - p3[0]), abs(p4[1] - p3[1]), 1e-30,
    )
    tol = 1e-9 * span * span

    def orient(a, b, c):
        return (b[0] - a[0]) * (c[1] - a[1]) - (b[1] - a[1]) * (c[0] - a[0])

    d1, d2 = orient(p3, p4, p1), orient(p3, p4, p2)
    d3, d4 = orient(p1, p2, p3), orient(p1, p2, p4)
    return ((d1 > tol) and (d2 < -tol) or (d1 < -tol) and (d2 > tol)) and (
        (d3 > tol) and (d4 < -tol) or (d3 < -tol) and (d4 > tol)
    )


def _projection_is_simple(coords: np.ndarray) -> bool:
    k = len(coords)
    for i in range(k):
        a1, a2 = coords[i], coords[(i + 1) % k]
        for j in range(i + 1, k):
            if j == i or (j + 1) % k == i or (i + 1) % k == j:
                continue
            if _segments_intersect(a1, a2, coords[j], coords[(j + 1) % k]):
                return False
    return True


def _cross2(o, q, r) -> float:
    return (q[0] - o[0]) * (r[1] - o[1]) - (q[1] - o[1]) * (r[0] - o[0])


def _blocks_ear(p, a, b, c) -> bool:
    """A vertex blocks the ear (a, b, c) when it lies strictly inside the
    triangle or on the open chord a-c (clipping would pinch the ring
    through it)."""
    span = max(abs(b[0] - a[0]), abs(b[1] - a[1]),
               abs(c[0] - a[0]), abs(c[1] - a[1]), 1e-30)
    tol = 1e-9 * span * span
    d1, d2, d3 = _cross2(a, b, p), _cross2(b, c, p), _cross2(c, a, p)
    if (d1 > tol and d2 > tol and d3 > tol) or (d1 < -tol and d2 < -tol and d3 < -tol):
        return True
    if abs(d3) <= tol:  # collinear with the chord: inside the open segment?
        t = (p[0] - c[0]) * (a[0] - c[0]) + (p[1] - c[1]) * (a[1] - c[1])
        length2 = (a[0] - c[0]) ** 2 + (a[1] - c[1]) ** 2
        return 0 < t < length2
    return False


def ear_clip(coords: np.ndarray) -> list[tuple[int, int, int]] | None:
    """Triangulate a simple polygon given CCW 2D coords; indices are
    positions in the input ring. None when clipping gets stuck."""
    k = len(coords)
    if k < 3:
        return None
    ring = list(range(k))
    faces: list[tuple[int, int, int]] = []
    guard = 0
    while len(ring) > 3 and guard < 4 * k * k:
        guard += 1
        clipped = False
        for idx in range(len(ring)):
            i_prev = ring[idx - 1]
            i_cur = ring[idx]
            i_next = ring[(idx + 1) % len(ring)]
            a, b, c = coords[i_prev], coords[i_cur], coords[i_next]
            if _cross2(a, b, c) <= 0:
                continue  # reflex or collinear corner
            if any(
                _blocks_ear(coords[other], a, b, c)
                for other in ring
                if other not in (i_prev, i_cur, i_next)
            ):
                continue
            faces.append((i_prev, i_cur, i_next))
            ring.pop(idx)
            clipped = True
            break
        if not clipped:
            return None
    if len(ring) == 3:
        faces.append((ring[0], ring[1], ring[2]))
    return faces


def fan_fill(coords: np.ndarray) -> list[tuple[int, int, int]]:
    """Centroid fan: always closes a loop; geometry may fold for strongly
    non-star-shaped rims. The centroid index is len(coords)."""
    k = len(coords)
    return [(i, (i + 1) % k, k) for i in range(k)]


def triangulate_loop(
    vertices: np.ndarray, loop: list[int], next_index: int
) -> tuple[list[tuple[int, int, int]], np.ndarray] | None:
    """Fill one rim loop.

    Returns (faces in scene vertex ids, new vertex positions) where new
    vertices are numbered from ``next_index``; None when the best-fit-plane
    projection self-intersects (the hole stays open). Ear clipping is tried
    first; rims that pinch through collinear lattice vertices fall back to a
    centroid fan, which always closes the loop.
    """
    points = vertices[loop]
    u, v, _ = _best_fit_frame(points)
    center = points.mean(axis=0)
    coords = np.stack([(points - center) @ u, (points - center) @ v], axis=1)
    area2 = float(
        np.sum(coords[:, 0] * np.roll(coords[:, 1], -1) - np.roll(coords[:, 0], -1) * coords[:, 1])
    )
    ordered = list(loop)
    if area2 < 0:
        coords = coords[::-1]
        ordered = ordered[::-1]
    if not _projection_is_simple(coords):
        return None
    ears = ear_clip(coords)
    if ears is not None:
        return [(ordered[a], ordered[b], ordered[c]) for a, b, c in ears], np.zeros((0, 3))
    logger.info("ear clipping pinched on a %d-vertex rim; using a centroid fan", len(loop))
    fan = fan_fill(coords)
    lookup = ordered + [next_index]
    return [(lookup[a], lookup[b], lookup[c]) for a, b, c in fan], center.reshape(1, 3)


def orient_fill(
    fill_faces: list[tuple[int, int, int]],
    rim_directed: set[tuple[int, int]],
) -> list[tuple[int, int, int]]:
    """Flip the patch if its rim traversal matches the kept faces' direction
    (a consistently oriented surface traverses a shared edge both ways)."""
    same = opposite = 0
    for a, b, c in fill_faces:
        for u, w in ((a, b), (b, c), (c, a)):
            if (u, w) in rim_directed:
                same += 1
            elif (w, u) in rim_directed:
                opposite += 1
    if same > opposite:
        return [(a, c, b) for a, b, c in fill_faces]
    return fill_faces


def subdivide_patch(
    vertices: np.ndarray,
    faces: list[tuple[int, int, int]],
    locked: set[tuple[int, int]],
    max_edge: float,
) -> tuple[np.ndarray, list[tuple[int, int, int]]]:
    """Longest-edge bisection of the patch until no splittable edge exceeds
    ``max_edge``. Locked (rim) edges are never split, so the patch stays
    conforming with the surrounding mesh; an edge only splits while it is
    the longest edge of one of its faces, which keeps bisection cascades
    finite even next to over-long locked rim edges. Returns (new_vertices,
    faces) with new vertices appended after the input array."""
    verts = [tuple(p) for p in vertices]
    work = [tuple(f) for f in faces]
    added: list[tuple[float, float, float]] = []

    def length2(u: int, w: int) -> float:
        pu, pw = verts[u], verts[w]
        return (pu[0] - pw[0]) ** 2 + (pu[1] - pw[1]) ** 2 + (pu[2] - pw[2]) ** 2

    max2 = max_edge * max_edge
    for _ in range(_MAX_SPLITS):
        longest = None
        longest_len = max2
        for f in work:
            sides = ((f[0], f[1]), (f[1], f[2]), (f[2], f[0]))
            lens = [length2(u, w) for u, w in sides]
            top = max(lens)
            for (u, w), l2 in zip(sides, lens):
                if l2 < top:
                    continue  # only a face's longest edge may split
                key = (min(u, w), max(u, w))
                if key in locked:
                    continue
                if l2 > longest_len or (l2 == longest_len and longest is not None and key < longest):
                    longest = key
                    longest_len = l2
        if longest is None:
            break
        u, w = longest
        mid = tuple((np.asarray(verts[u]) + np.asarray(verts[w])) / 2.0)
        m = len(verts)
        verts.append(mid)
        added.append(mid)
        next_work = []
        for f in work:
            es = {(min(f[0], f[1]), max(f[0], f[1])),
                  (min(f[1], f[2]), max(f[1], f[2])),
                  (min(f[2], f[0]), max(f[2], f[0]))}
            if longest not in es:
                next_work.append(f)
                continue
            a, b, c = f
            # rotate so the split edge is (a, b)
            for _ in range(3):
                if {a, b} == {u, w}:
                    break
                a, b, c = b, c, a
            next_work.append((a, m, c))
            next_work.append((m, b, c))
        work = next_work
    else:
        logger.warning("subdivision split cap reached; some edges stay long")
    new_vertices = np.asarray(added, dtype=np.float64).reshape(-1, 3)
    return new_vertices, work
