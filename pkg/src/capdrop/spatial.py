"""Spatial queries: winding numbers, point-to-surface distance, ray counting.

These kernels are shared by containment tests, the moving-planes engine, and
symmetry residuals.  They are vectorized over chunks; the chunk loop can fan
out over a thread pool sized by :func:`set_threads` (numpy releases the GIL
on the large einsum/reduction calls that dominate).
"""

from __future__ import annotations

import os
from concurrent.futures import ThreadPoolExecutor

import numpy as np
from scipy.spatial import cKDTree

from .mesh import TriMesh

__all__ = [
    "set_threads", "get_threads", "winding_numbers", "point_mesh_distance",
    "ray_hit_counts", "MeshDistanceQuery",
]

_THREADS = max(1, int(os.environ.get("CAPDROP_THREADS", "1") or 1))


def set_threads(n: int) -> None:
    """Set the worker count for chunked spatial kernels (>= 1)."""
    global _THREADS
    _THREADS = max(1, int(n))


def get_threads() -> int:
    return _THREADS


def _run_chunks(func, n_items: int, chunk: int):
    starts = list(range(0, n_items, chunk))
    if len(starts) <= 1 or _THREADS == 1:
        return [func(s, min(s + chunk, n_items)) for s in starts]
    with ThreadPoolExecutor(max_workers=_THREADS) as pool:
        return list(pool.map(lambda s: func(s, min(s + chunk, n_items)), starts))


def winding_numbers(points: np.ndarray, mesh: TriMesh, chunk: int = 512) -> np.ndarray:
    """Generalized winding number of each point w.r.t. the oriented surface.

    For a closed outward-oriented mesh the value is ~1 inside, ~0 outside.
    Computed as the sum of signed solid angles of the faces (van Oosterom &
    Strackee), so it is exact up to rounding and needs no ray casting.
    """
    points = np.atleast_2d(np.asarray(points, dtype=float))
    v = mesh.vertices
    f = mesh.faces
    ta, tb, tc = v[f[:, 0]], v[f[:, 1]], v[f[:, 2]]

    def work(s, e):
        p = points[s:e]
        a = ta[None, :, :] - p[:, None, :]
        b = tb[None, :, :] - p[:, None, :]
        c = tc[None, :, :] - p[:, None, :]
        la = np.linalg.norm(a, axis=2)
        lb = np.linalg.norm(b, axis=2)
        lc = np.linalg.norm(c, axis=2)
        num = np.einsum("pij,pij->pi", a, np.cross(b, c))
        den = (la * lb * lc + np.einsum("pij,pij->pi", a, b) * lc
               + np.einsum("pij,pij->pi", b, c) * la
               + np.einsum("pij,pij->pi", a, c) * lb)
        return np.arctan2(num, den).sum(axis=1) / (2.0 * np.pi)

    parts = _run_chunks(work, len(points), chunk)
    return np.concatenate(parts)


def _point_triangle_distance_sq(p: np.ndarray, a, b, c) -> np.ndarray:
    """Squared distances from points p[i] to triangles (a[i], b[i], c[i]) (paired)."""
    ab = b - a
    ac = c - a
    ap = p - a
    d1 = np.einsum("ij,ij->i", ab, ap)
    d2 = np.einsum("ij,ij->i", ac, ap)
    bp = p - b
    d3 = np.einsum("ij,ij->i", ab, bp)
    d4 = np.einsum("ij,ij->i", ac, bp)
    cp = p - c
    d5 = np.einsum("ij,ij->i", ab, cp)
    d6 = np.einsum("ij,ij->i", ac, cp)

    closest = np.empty_like(p)
    done = np.zeros(len(p), dtype=bool)

    m = (d1 <= 0) & (d2 <= 0)
    closest[m] = a[m]
    done |= m
    m = (~done) & (d3 >= 0) & (d4 <= d3)
    closest[m] = b[m]
    done |= m
    m = (~done) & (d6 >= 0) & (d5 <= d6)
    closest[m] = c[m]
    done |= m

    vc = d1 * d4 - d3 * d2
    m = (~done) & (vc <= 0) & (d1 >= 0) & (d3 <= 0)
    t = np.where(np.abs(d1 - d3) > 1e-300, d1 / np.where(np.abs(d1 - d3) > 1e-300, d1 - d3, 1.0), 0.0)
    closest[m] = a[m] + t[m, None] * ab[m]
    done |= m

    vb = d5 * d2 - d1 * d6
    m = (~done) & (vb <= 0) & (d2 >= 0) & (d6 <= 0)
    t = np.where(np.abs(d2 - d6) > 1e-300, d2 / np.where(np.abs(d2 - d6) > 1e-300, d2 - d6, 1.0), 0.0)
    closest[m] = a[m] + t[m, None] * ac[m]
    done |= m

    va = d3 * d6 - d5 * d4
    m = (~done) & (va <= 0) & (d4 - d3 >= 0) & (d5 - d6 >= 0)
    denom = (d4 - d3) + (d5 - d6)
    t = np.where(np.abs(denom) > 1e-300, (d4 - d3) / np.where(np.abs(denom) > 1e-300, denom, 1.0), 0.0)
    closest[m] = b[m] + t[m, None] * (c[m] - b[m])
    done |= m

    m = ~done
    if np.any(m):
        denom = va + vb + vc
        denom = np.where(np.abs(denom) > 1e-300, denom, 1.0)
        v_ = vb / denom
        w_ = vc / denom
        closest[m] = a[m] + v_[m, None] * ab[m] + w_[m, None] * ac[m]
    d = p - closest
    return np.einsum("ij,ij->i", d, d)


class MeshDistanceQuery:
    """Reusable point-to-mesh distance structure (KD-tree culled, exact result).

    Candidate faces are found through a KD-tree over face centroids; the exact
    point-triangle distance is then evaluated for every face whose centroid
    lies within the proven search radius, so results are exact, not nearest-
    centroid approximations.
    """

    def __init__(self, mesh: TriMesh):
        self.mesh = mesh
        v = mesh.vertices
        f = mesh.faces
        self._corners = (v[f[:, 0]], v[f[:, 1]], v[f[:, 2]])
        self._centroids = v[f].mean(axis=1)
        # max distance from a centroid to its triangle's far corner
        r = np.linalg.norm(v[f] - self._centroids[:, None, :], axis=2).max(axis=1)
        self._face_radius = float(r.max()) if len(r) else 0.0
        self._tree = cKDTree(self._centroids)

    def distance(self, points: np.ndarray, k_seed: int = 8) -> np.ndarray:
        points = np.atleast_2d(np.asarray(points, dtype=float))
        d_seed, idx_seed = self._tree.query(points, k=min(k_seed, len(self._centroids)))
        if d_seed.ndim == 1:
            d_seed = d_seed[:, None]
            idx_seed = idx_seed[:, None]
        a, b, c = self._corners
        # upper bound from seed faces
        best = np.full(len(points), np.inf)
        for k in range(d_seed.shape[1]):
            fi = idx_seed[:, k]
            dsq = _point_triangle_distance_sq(points, a[fi], b[fi], c[fi])
            best = np.minimum(best, dsq)
        upper = np.sqrt(best)
        # gather every face whose centroid might beat the bound
        radii = upper + self._face_radius + 1e-12
        neighborhoods = self._tree.query_ball_point(points, radii)
        out = np.empty(len(points))
        for i, cand in enumerate(neighborhoods):
            if not cand:
                out[i] = upper[i]
                continue
            fi = np.asarray(cand, dtype=np.int64)
            p_rep = np.repeat(points[i][None, :], len(fi), axis=0)
            dsq = _point_triangle_distance_sq(p_rep, a[fi], b[fi], c[fi])
            out[i] = min(np.sqrt(dsq.min()), upper[i])
        return out


def point_mesh_distance(points: np.ndarray, mesh: TriMesh) -> np.ndarray:
    """Exact unsigned distance from each point to the triangulated surface."""
    return MeshDistanceQuery(mesh).distance(points)


def ray_hit_counts(origins: np.ndarray, direction: np.ndarray, mesh: TriMesh,
                   t_min: float = 0.0, chunk: int = 256,
                   eps: float = 1e-12) -> tuple[np.ndarray, np.ndarray]:
    """Count ray/triangle crossings for a bundle of parallel rays.

    Moller-Trumbore with inclusive edge tolerance.  Returns ``(counts,
    grazing)`` where ``grazing`` flags rays that passed within ``eps`` of a
    triangle edge (their parity is unreliable; re-cast with a jitter).
    """
    origins = np.atleast_2d(np.asarray(origins, dtype=float))
    d = np.asarray(direction, dtype=float)
    v = mesh.vertices
    f = mesh.faces
    e1 = v[f[:, 1]] - v[f[:, 0]]
    e2 = v[f[:, 2]] - v[f[:, 0]]
    pvec = np.cross(d, e2)
    det = np.einsum("ij,ij->i", e1, pvec)
    scale = float(np.abs(det).max(initial=0.0))
    parallel = np.abs(det) < 1e-14 * max(scale, 1.0)
    inv_det = np.where(parallel, 0.0, 1.0 / np.where(parallel, 1.0, det))
    a0 = v[f[:, 0]]

    counts = np.zeros(len(origins), dtype=np.int64)
    grazing = np.zeros(len(origins), dtype=bool)

    for s in range(0, len(origins), chunk):
        e = min(s + chunk, len(origins))
        o = origins[s:e]
        tvec = o[:, None, :] - a0[None, :, :]
        u = np.einsum("pij,ij->pi", tvec, pvec) * inv_det[None, :]
        qvec = np.cross(tvec, np.broadcast_to(e1[None, :, :], tvec.shape))
        w = np.einsum("pij,j->pi", qvec, d) * inv_det[None, :]
        t = np.einsum("pij,ij->pi", qvec, e2) * inv_det[None, :]
        ok = (~parallel[None, :]) & (u >= -eps) & (w >= -eps) & (u + w <= 1.0 + eps) & (t > t_min)
        counts[s:e] = ok.sum(axis=1)
        near_edge = ok & ((u < eps) | (w < eps) | (u + w > 1.0 - eps))
        grazing[s:e] = near_edge.any(axis=1)
    return counts, grazing
