"""Facet enumeration for convex hulls of points in general position.

``hull_facets`` is an incremental beneath-beyond construction compiled with
numba; ``facet_oracle`` tests every d-subset directly and exists to check it.
Both use floating-point orientation with a tolerance band; a point that lands
inside the band marks the result degenerate instead of being resolved
symbolically, since continuous inputs are in general position almost surely.
"""

from __future__ import annotations

from dataclasses import dataclass
from itertools import combinations

import numpy as np
from numba import njit

DEFAULT_TOL = 1e-9


@dataclass(frozen=True)
class HullSummary:
    d: int
    n: int
    facet_count: int
    facets: tuple[tuple[int, ...], ...]
    degenerate: bool = False

    def facet_set(self) -> frozenset[tuple[int, ...]]:
        return frozenset(self.facets)

    def vertices(self) -> tuple[int, ...]:
        return tuple(sorted({i for f in self.facets for i in f}))


def _summary(d, n, facets, degenerate) -> HullSummary:
    rows = tuple(sorted(tuple(int(i) for i in sorted(f)) for f in facets))
    if degenerate:
        rows = ()
    return HullSummary(d, n, len(rows), rows, bool(degenerate))


@njit(cache=True)
def _det(a):
    # LU with partial pivoting on a copy
    m = a.shape[0]
    if m == 0:
        return 1.0
    a = a.copy()
    det = 1.0
    for k in range(m):
        p = k
        big = abs(a[k, k])
        for r in range(k + 1, m):
            if abs(a[r, k]) > big:
                big = abs(a[r, k])
                p = r
        if big == 0.0:
            return 0.0
        if p != k:
            for c in range(m):
                tmp = a[k, c]
                a[k, c] = a[p, c]
                a[p, c] = tmp
            det = -det
        det *= a[k, k]
        for r in range(k + 1, m):
            fac = a[r, k] / a[k, k]
            for c in range(k, m):
                a[r, c] -= fac * a[k, c]
    return det


@njit(cache=True)
def _unit_normal(P, idx, out):
    """Unit normal of the hyperplane through P[idx]; returns its raw norm."""
    d = P.shape[1]
    base = P[idx[0]]
    if d == 2:
        ax = P[idx[1], 0] - base[0]
        ay = P[idx[1], 1] - base[1]
        out[0] = ay
        out[1] = -ax
    elif d == 3:
        ax = P[idx[1], 0] - base[0]
        ay = P[idx[1], 1] - base[1]
        az = P[idx[1], 2] - base[2]
        bx = P[idx[2], 0] - base[0]
        by = P[idx[2], 1] - base[1]
        bz = P[idx[2], 2] - base[2]
        out[0] = ay * bz - az * by
        out[1] = az * bx - ax * bz
        out[2] = ax * by - ay * bx
    else:
        # generalized cross product: signed (d-1)-minors of the edge matrix
        edges = np.empty((d - 1, d))
        for k in range(1, d):
            for c in range(d):
                edges[k - 1, c] = P[idx[k], c] - base[c]
        minor = np.empty((d - 1, d - 1))
        sign = 1.0
        for j in range(d):
            for r in range(d - 1):
                cc = 0
                for c in range(d):
                    if c != j:
                        minor[r, cc] = edges[r, c]
                        cc += 1
            out[j] = sign * _det(minor)
            sign = -sign
    norm = 0.0
    for c in range(d):
        norm += out[c] * out[c]
    norm = np.sqrt(norm)
    if norm > 0.0:
        for c in range(d):
            out[c] /= norm
    return norm


@njit(cache=True)
def _signed(P, normal, anchor, q):
    s = 0.0
    for c in range(P.shape[1]):
        s += normal[c] * (q[c] - P[anchor, c])
    return s


@njit(cache=True, nogil=True)
def _beneath_beyond(P, tol):
    """Insert points in order; returns (facet vertex rows, prefix counts, degenerate).

    ``counts[k]`` is the facet number of the hull of ``P[:k + 1]`` for
    ``k >= d``; the first ``d + 1`` points seed the construction.
    """
    n, d = P.shape
    counts = np.zeros(n, np.int64)
    cap = 64
    verts = np.empty((cap, d), np.int64)
    normals = np.empty((cap, d))
    alive = np.zeros(cap, np.bool_)
    used = 0
    free = np.empty(cap, np.int64)
    nfree = 0
    nalive = 0

    centre = np.zeros(d)
    for k in range(d + 1):
        for c in range(d):
            centre[c] += P[k, c] / (d + 1)

    idx = np.empty(d, np.int64)
    nrm = np.empty(d)
    for j in range(d + 1):
        m = 0
        for k in range(d + 1):
            if k != j:
                idx[m] = k
                m += 1
        if _unit_normal(P, idx, nrm) == 0.0:
            return verts[:0], counts, True
        side = _signed(P, nrm, idx[0], centre)
        if abs(side) <= tol:
            return verts[:0], counts, True
        if side > 0.0:
            for c in range(d):
                nrm[c] = -nrm[c]
        if _signed(P, nrm, idx[0], P[j]) >= -tol:
            return verts[:0], counts, True
        verts[used] = idx
        normals[used] = nrm
        alive[used] = True
        used += 1
    nalive = d + 1
    counts[d] = nalive

    vis = np.empty(cap, np.int64)
    for i in range(d + 1, n):
        q = P[i]
        if vis.shape[0] < used:
            vis = np.empty(2 * used, np.int64)
        nvis = 0
        for f in range(used):
            if not alive[f]:
                continue
            s = _signed(P, normals[f], verts[f, 0], q)
            if s > tol:
                vis[nvis] = f
                nvis += 1
            elif s >= -tol:
                return verts[:0], counts, True
        if nvis == 0:
            counts[i] = nalive
            continue

        # ridges of visible facets; those seen exactly once form the horizon
        nr = nvis * d
        ridges = np.empty((nr, d - 1), np.int64)
        r = 0
        for a in range(nvis):
            f = vis[a]
            for j in range(d):
                m = 0
                for k in range(d):
                    if k != j:
                        ridges[r, m] = verts[f, k]
                        m += 1
                r += 1
        horizon = np.ones(nr, np.bool_)
        for a in range(nr):
            if not horizon[a]:
                continue
            for b in range(a + 1, nr):
                same = True
                for k in range(d - 1):
                    if ridges[a, k] != ridges[b, k]:
                        same = False
                        break
                if same:
                    horizon[a] = False
                    horizon[b] = False
                    break

        for a in range(nvis):
            alive[vis[a]] = False
            free[nfree] = vis[a]
            nfree += 1
        nalive -= nvis

        for a in range(nr):
            if not horizon[a]:
                continue
            for k in range(d - 1):
                idx[k] = ridges[a, k]
            idx[d - 1] = i
            if _unit_normal(P, idx, nrm) == 0.0:
                return verts[:0], counts, True
            side = _signed(P, nrm, idx[0], centre)
            if abs(side) <= tol:
                return verts[:0], counts, True
            if side > 0.0:
                for c in range(d):
                    nrm[c] = -nrm[c]
            if nfree > 0:
                nfree -= 1
                slot = free[nfree]
            else:
                if used == verts.shape[0]:
                    grow = 2 * verts.shape[0]
                    v2 = np.empty((grow, d), np.int64)
                    n2 = np.empty((grow, d))
                    a2 = np.zeros(grow, np.bool_)
                    f2 = np.empty(grow, np.int64)
                    v2[:used] = verts[:used]
                    n2[:used] = normals[:used]
                    a2[:used] = alive[:used]
                    f2[:nfree] = free[:nfree]
                    verts, normals, alive, free = v2, n2, a2, f2
                slot = used
                used += 1
            verts[slot] = idx
            normals[slot] = nrm
            alive[slot] = True
            nalive += 1
        counts[i] = nalive

    out = np.empty((nalive, d), np.int64)
    m = 0
    for f in range(used):
        if alive[f]:
            out[m] = verts[f]
            m += 1
    return out, counts, False


@njit(cache=True, nogil=True)
def block_prefix_counts(clouds, rel_tol):
    """Prefix facet counts for a stack of clouds of shape ``(reps, n, d)``."""
    reps, n, d = clouds.shape
    counts = np.zeros((reps, n), np.int64)
    degenerate = np.zeros(reps, np.bool_)
    for r in range(reps):
        P = clouds[r]
        scale = 0.0
        for i in range(n):
            for c in range(d):
                if abs(P[i, c]) > scale:
                    scale = abs(P[i, c])
        _, cnt, bad = _beneath_beyond(P, rel_tol * scale)
        counts[r] = cnt
        degenerate[r] = bad
    return counts, degenerate


def _as_points(points) -> np.ndarray:
    pts = np.ascontiguousarray(np.asarray(points, dtype=float))
    if pts.ndim != 2:
        raise ValueError("points must be a 2-D array of shape (n, d)")
    n, d = pts.shape
    if d < 2:
        raise ValueError("hull computations need d >= 2")
    if n < d + 1:
        raise ValueError(f"need at least d + 1 = {d + 1} points, got {n}")
    return pts


def _abs_tol(pts, tolerance):
    return tolerance * float(np.max(np.abs(pts)))


def _independent_order(pts, tol):
    """Permutation placing d + 1 affinely independent points first, or None."""
    n, d = pts.shape
    chosen = [0]
    basis = np.zeros((0, d))
    for i in range(1, n):
        v = pts[i] - pts[chosen[0]]
        if basis.shape[0]:
            v = v - basis.T @ (basis @ v)
        norm = np.linalg.norm(v)
        if norm > tol:
            basis = np.vstack([basis, v / norm])
            chosen.append(i)
            if len(chosen) == d + 1:
                # skipped points go last, by then they are usually strictly inside
                skipped = [k for k in range(i) if k not in set(chosen)]
                return np.array(chosen + list(range(i + 1, n)) + skipped)
    return None


def hull_facets(points, tolerance: float = DEFAULT_TOL) -> HullSummary:
    """Facets of the convex hull of ``points`` (shape ``(n, d)``).

    ``tolerance`` is relative to the largest absolute coordinate. Facets are
    sorted tuples of row indices into ``points``.
    """
    pts = _as_points(points)
    n, d = pts.shape
    tol = _abs_tol(pts, tolerance)
    facets, _, bad = _beneath_beyond(pts, tol)
    if not bad:
        return _summary(d, n, facets, False)
    order = _independent_order(pts, tol)
    if order is None or np.array_equal(order[: d + 1], np.arange(d + 1)):
        return _summary(d, n, (), True)
    facets, _, bad = _beneath_beyond(np.ascontiguousarray(pts[order]), tol)
    return _summary(d, n, [order[f] for f in facets], bad)


def prefix_facet_counts(points, tolerance: float = DEFAULT_TOL):
    """Facet numbers of the hulls of the first k points, k = d+1, ..., n.

    Returns ``(counts, degenerate)`` with ``counts[k - 1]`` the facet number
    for the first ``k`` points (zero for ``k <= d``).
    """
    pts = _as_points(points)
    _, counts, bad = _beneath_beyond(pts, _abs_tol(pts, tolerance))
    return counts, bool(bad)


def facet_oracle(points, tolerance: float = DEFAULT_TOL, chunk: int = 4096) -> HullSummary:
    """Brute-force facet test over every d-subset of ``points``.

    A subset spans a facet exactly when all remaining points lie strictly in
    one open half-space of its affine hull. Cost grows like C(n, d) * n.
    """
    pts = _as_points(points)
    n, d = pts.shape
    tol = _abs_tol(pts, tolerance)
    found: list[tuple[int, ...]] = []
    combos = combinations(range(n), d)
    while True:
        block = np.array([c for _, c in zip(range(chunk), combos)], dtype=np.int64)
        if block.size == 0:
            break
        block = block.reshape(-1, d)
        base = pts[block[:, 0]]
        edges = pts[block[:, 1:]] - base[:, None, :]
        _, sing, vh = np.linalg.svd(edges, full_matrices=True)
        if np.any(sing[:, -1] <= tol):
            return _summary(d, n, (), True)
        normal = vh[:, -1, :]
        dist = np.einsum("mc,jc->mj", normal, pts) - np.einsum("mc,mc->m", normal, base)[:, None]
        member = np.zeros(dist.shape, dtype=bool)
        np.put_along_axis(member, block, True, axis=1)
        others = np.where(member, np.nan, dist)
        if np.any(np.abs(dist[~member]) <= tol):
            return _summary(d, n, (), True)
        with np.errstate(invalid="ignore"):
            above = np.all((others > tol) | member, axis=1)
            below = np.all((others < -tol) | member, axis=1)
        for row in block[above | below]:
            found.append(tuple(int(i) for i in row))
    return _summary(d, n, found, False)


def facet_count_drops(points, tolerance: float = DEFAULT_TOL) -> list[int]:
    """Sizes k at which adding the k-th point lowers the facet number.

    Monotonicity of the mean facet number does not carry over to single
    realizations: a new point far outside can swallow several facets and
    create fewer.
    """
    counts, bad = prefix_facet_counts(points, tolerance)
    if bad:
        return []
    d = np.asarray(points).shape[1]
    return [k + 1 for k in range(d + 1, counts.size) if counts[k] < counts[k - 1]]
