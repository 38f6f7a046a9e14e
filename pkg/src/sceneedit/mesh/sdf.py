"""Signed distance queries against a triangle mesh.

Distances come from a BVH nearest-triangle search; the sign comes from the
angle-weighted pseudo-normal of the closest surface feature (face, edge or
vertex), which stays well-defined on the open, non-watertight meshes that
room scans produce. Queries are pure and safe to issue from many threads.
"""

from __future__ import annotations

import numpy as np
from numba import njit, prange

from sceneedit.errors import DegenerateGeometry
from sceneedit.mesh.core import TriangleMesh, face_normals_and_areas

_LEAF_SIZE = 8
_MAX_STACK = 128


def _build_bvh(tri_min: np.ndarray, tri_max: np.ndarray) -> tuple[np.ndarray, ...]:
    """Median-split BVH over triangle AABBs, flattened to arrays."""
    n = len(tri_min)
    centroids = 0.5 * (tri_min + tri_max)
    order = np.arange(n, dtype=np.int64)

    bounds_min, bounds_max = [], []
    left, right, start, count = [], [], [], []

    def new_node() -> int:
        bounds_min.append(None)
        bounds_max.append(None)
        left.append(-1)
        right.append(-1)
        start.append(0)
        count.append(0)
        return len(left) - 1

    root = new_node()
    stack = [(root, 0, n)]
    while stack:
        node, lo, hi = stack.pop()
        idx = order[lo:hi]
        bounds_min[node] = tri_min[idx].min(axis=0)
        bounds_max[node] = tri_max[idx].max(axis=0)
        if hi - lo <= _LEAF_SIZE:
            start[node], count[node] = lo, hi - lo
            continue
        cent = centroids[idx]
        axis = int(np.argmax(cent.max(axis=0) - cent.min(axis=0)))
        if cent[:, axis].max() == cent[:, axis].min():
            start[node], count[node] = lo, hi - lo
            continue
        local = np.argsort(cent[:, axis], kind="stable")
        order[lo:hi] = idx[local]
        mid = lo + (hi - lo) // 2
        lchild, rchild = new_node(), new_node()
        left[node], right[node] = lchild, rchild
        stack.append((lchild, lo, mid))
        stack.append((rchild, mid, hi))

    return (
        np.asarray(bounds_min, dtype=np.float64),
        np.asarray(bounds_max, dtype=np.float64),
        np.asarray(left, dtype=np.int64),
        np.asarray(right, dtype=np.int64),
        np.asarray(start, dtype=np.int64),
        np.asarray(count, dtype=np.int64),
        order,
    )


@njit(cache=True)
def _closest_on_triangle(ax, ay, az, bx, by, bz, cx, cy, cz, px, py, pz):
    """Closest point on triangle abc to p; returns (qx, qy, qz, feature).

    feature: 0 face, 1/2/3 vertex a/b/c, 4 edge ab, 5 edge bc, 6 edge ca.
    """
    abx, aby, abz = bx - ax, by - ay, bz - az
    acx, acy, acz = cx - ax, cy - ay, cz - az
    apx, apy, apz = px - ax, py - ay, pz - az
    d1 = abx * apx + aby * apy + abz * apz
    d2 = acx * apx + acy * apy + acz * apz
    if d1 <= 0.0 and d2 <= 0.0:
        return ax, ay, az, 1
    bpx, bpy, bpz = px - bx, py - by, pz - bz
    d3 = abx * bpx + aby * bpy + abz * bpz
    d4 = acx * bpx + acy * bpy + acz * bpz
    if d3 >= 0.0 and d4 <= d3:
        return bx, by, bz, 2
    vc = d1 * d4 - d3 * d2
    if vc <= 0.0 and d1 >= 0.0 and d3 <= 0.0:
        denom = d1 - d3
        v = 0.5 if denom == 0.0 else d1 / denom
        return ax + v * abx, ay + v * aby, az + v * abz, 4
    cpx, cpy, cpz = px - cx, py - cy, pz - cz
    d5 = abx * cpx + aby * cpy + abz * cpz
    d6 = acx * cpx + acy * cpy + acz * cpz
    if d6 >= 0.0 and d5 <= d6:
        return cx, cy, cz, 3
    vb = d5 * d2 - d1 * d6
    if vb <= 0.0 and d2 >= 0.0 and d6 <= 0.0:
        denom = d2 - d6
        w = 0.5 if denom == 0.0 else d2 / denom
        return ax + w * acx, ay + w * acy, az + w * acz, 6
    va = d3 * d6 - d5 * d4
    if va <= 0.0 and (d4 - d3) >= 0.0 and (d5 - d6) >= 0.0:
        denom = (d4 - d3) + (d5 - d6)
        w = 0.5 if denom == 0.0 else (d4 - d3) / denom
        return bx + w * (cx - bx), by + w * (cy - by), bz + w * (cz - bz), 5
    denom = va + vb + vc
    if denom == 0.0:
        return ax, ay, az, 1
    v = vb / denom
    w = vc / denom
    return (
        ax + abx * v + acx * w,
        ay + aby * v + acy * w,
        az + abz * v + acz * w,
        0,
    )


@njit(cache=True)
def _box_dist2(px, py, pz, lox, loy, loz, hix, hiy, hiz):
    dx = max(lox - px, 0.0, px - hix)
    dy = max(loy - py, 0.0, py - hiy)
    dz = max(loz - pz, 0.0, pz - hiz)
    return dx * dx + dy * dy + dz * dz


@njit(cache=True)
def _query_one(p, tri, bmin, bmax, left, right, start, count, order):
    """Nearest triangle via BVH; returns (tri_index, qx, qy, qz, feature)."""
    best_d2 = np.inf
    best_tri = -1
    best_q = (0.0, 0.0, 0.0)
    best_feat = 0
    stack = np.empty(_MAX_STACK, dtype=np.int64)
    top = 0
    stack[top] = 0
    top += 1
    while top > 0:
        top -= 1
        node = stack[top]
        if _box_dist2(p[0], p[1], p[2],
                      bmin[node, 0], bmin[node, 1], bmin[node, 2],
                      bmax[node, 0], bmax[node, 1], bmax[node, 2]) >= best_d2:
            continue
        l = left[node]
        if l < 0:
            for k in range(start[node], start[node] + count[node]):
                t = order[k]
                qx, qy, qz, feat = _closest_on_triangle(
                    tri[t, 0, 0], tri[t, 0, 1], tri[t, 0, 2],
                    tri[t, 1, 0], tri[t, 1, 1], tri[t, 1, 2],
                    tri[t, 2, 0], tri[t, 2, 1], tri[t, 2, 2],
                    p[0], p[1], p[2],
                )
                dx, dy, dz = p[0] - qx, p[1] - qy, p[2] - qz
                d2 = dx * dx + dy * dy + dz * dz
                if d2 < best_d2:
                    best_d2 = d2
                    best_tri = t
                    best_q = (qx, qy, qz)
                    best_feat = feat
        else:
            r = right[node]
            dl = _box_dist2(p[0], p[1], p[2],
                            bmin[l, 0], bmin[l, 1], bmin[l, 2],
                            bmax[l, 0], bmax[l, 1], bmax[l, 2])
            dr = _box_dist2(p[0], p[1], p[2],
                            bmin[r, 0], bmin[r, 1], bmin[r, 2],
                            bmax[r, 0], bmax[r, 1], bmax[r, 2])
            if dl <= dr:  # push farther first so nearer is popped first
                stack[top] = r
                top += 1
                stack[top] = l
                top += 1
            else:
                stack[top] = l
                top += 1
                stack[top] = r
                top += 1
    return best_tri, best_q[0], best_q[1], best_q[2], best_feat


@njit(cache=True, parallel=True)
def _signed_batch(points, tri, faces, face_n, vert_pn, edge_pn,
                  bmin, bmax, left, right, start, count, order, out, out_tri):
    for i in prange(points.shape[0]):
        t, qx, qy, qz, feat = _query_one(
            points[i], tri, bmin, bmax, left, right, start, count, order
        )
        dx, dy, dz = points[i, 0] - qx, points[i, 1] - qy, points[i, 2] - qz
        dist = np.sqrt(dx * dx + dy * dy + dz * dz)
        if feat == 0:
            nx, ny, nz = face_n[t, 0], face_n[t, 1], face_n[t, 2]
        elif feat <= 3:
            v = faces[t, feat - 1]
            nx, ny, nz = vert_pn[v, 0], vert_pn[v, 1], vert_pn[v, 2]
        else:
            e = feat - 4  # 0: ab, 1: bc, 2: ca
            nx, ny, nz = edge_pn[t, e, 0], edge_pn[t, e, 1], edge_pn[t, e, 2]
        if dx * nx + dy * ny + dz * nz < 0.0:
            dist = -dist
        out[i] = dist
        out_tri[i] = t


def _vertex_pseudo_normals(mesh: TriangleMesh, face_n: np.ndarray) -> np.ndarray:
    tri = mesh.vertices[mesh.faces]
    acc = np.zeros((len(mesh.vertices), 3))
    for corner in range(3):
        e1 = tri[:, (corner + 1) % 3] - tri[:, corner]
        e2 = tri[:, (corner + 2) % 3] - tri[:, corner]
        n1 = np.linalg.norm(e1, axis=1)
        n2 = np.linalg.norm(e2, axis=1)
        denom = np.where((n1 > 0) & (n2 > 0), n1 * n2, 1.0)
        angle = np.arccos(np.clip(np.einsum("ij,ij->i", e1, e2) / denom, -1.0, 1.0))
        np.add.at(acc, mesh.faces[:, corner], face_n * angle[:, None])
    return acc


def _edge_pseudo_normals(mesh: TriangleMesh, face_n: np.ndarray) -> np.ndarray:
    """Per-face, per-edge sum of the normals of the faces sharing that edge.

    Edge e of face f is (v_e, v_{e+1}); index 0 = ab, 1 = bc, 2 = ca.
    """
    f = mesh.faces
    edges = np.stack([
        np.stack([f[:, 0], f[:, 1]], axis=1),
        np.stack([f[:, 1], f[:, 2]], axis=1),
        np.stack([f[:, 2], f[:, 0]], axis=1),
    ], axis=1).reshape(-1, 2)
    key = np.sort(edges, axis=1)
    uniq, inverse = np.unique(key, axis=0, return_inverse=True)
    sums = np.zeros((len(uniq), 3))
    np.add.at(sums, inverse, np.repeat(face_n, 3, axis=0))
    return sums[inverse].reshape(len(f), 3, 3)


class SignedDistanceField:
    """Closest-point acceleration structure over one mesh.

    ``query(p)`` is 0 on the surface, negative inside, positive outside;
    |query(p)| is the Euclidean distance to the nearest surface point.
    """

    def __init__(self, mesh: TriangleMesh):
        if len(mesh.faces) == 0:
            raise DegenerateGeometry("signed distance field needs >= 1 face")
        self.mesh = mesh
        self._tri = np.ascontiguousarray(mesh.vertices[mesh.faces])
        face_n, _ = face_normals_and_areas(mesh)
        self._face_n = np.ascontiguousarray(face_n)
        self._vert_pn = np.ascontiguousarray(_vertex_pseudo_normals(mesh, face_n))
        self._edge_pn = np.ascontiguousarray(_edge_pseudo_normals(mesh, face_n))
        tri_min = self._tri.min(axis=1)
        tri_max = self._tri.max(axis=1)
        (self._bmin, self._bmax, self._left, self._right,
         self._start, self._count, self._order) = _build_bvh(tri_min, tri_max)
        self._faces = np.ascontiguousarray(mesh.faces)

    def query(self, points: np.ndarray) -> np.ndarray:
        """Signed distances for an (N, 3) array (or a single 3-point)."""
        points = np.asarray(points, dtype=np.float64)
        single = points.ndim == 1
        points = np.ascontiguousarray(points.reshape(-1, 3))
        out = np.empty(len(points))
        out_tri = np.empty(len(points), dtype=np.int64)
        _signed_batch(points, self._tri, self._faces, self._face_n,
                      self._vert_pn, self._edge_pn,
                      self._bmin, self._bmax, self._left, self._right,
                      self._start, self._count, self._order, out, out_tri)
        return out[0] if single else out

    def query_nearest(self, points: np.ndarray) -> tuple[np.ndarray, np.ndarray]:
        """Signed distances plus the index of the nearest triangle."""
        points = np.ascontiguousarray(np.asarray(points, dtype=np.float64).reshape(-1, 3))
        out = np.empty(len(points))
        out_tri = np.empty(len(points), dtype=np.int64)
        _signed_batch(points, self._tri, self._faces, self._face_n,
                      self._vert_pn, self._edge_pn,
                      self._bmin, self._bmax, self._left, self._right,
                      self._start, self._count, self._order, out, out_tri)
        return out, out_tri


def signed_distance(field: SignedDistanceField, p) -> float:
    """Signed distance of one point; negative means inside."""
    return float(field.query(np.asarray(p, dtype=np.float64)))
