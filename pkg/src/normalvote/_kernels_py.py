"""Pure-Python kernel backend (vectorized NumPy/SciPy).

Same interface as the compiled ``normalvote._kernels`` extension; used as
the fallback when the extension is not built, and as the reference side of
the backend-agreement tests. Per-face work is batched: neighborhood growth
runs as sparse frontier expansion, tensor eigendecomposition as a batched
cyclic Jacobi, and distances as chunked broadcasting.
"""

import heapq

import numpy as np
from scipy import sparse
from scipy.spatial import cKDTree

JACOBI_MAX_SWEEPS = 32
JACOBI_TOL = 1e-13

SIMILAR_WEIGHT = 1.0
DISSIMILAR_WEIGHT = 0.1


def build_neighborhoods(scheme, radius, rho, faces, centroids, areas, normals,
                        adjacency, degenerate, star_offsets, star_faces):
    """Neighborhood membership and weights for every face, CSR layout.

    Returns ``(offsets, members, weights)``: face ``f``'s members are
    ``members[offsets[f]:offsets[f+1]]`` in ascending order. Degenerate
    faces get empty rows and never appear as members.
    """
    nf = len(faces)
    live = degenerate == 0
    if scheme == 0:
        m = _combinatorial_membership(faces, star_offsets, live)
    elif scheme == 1:
        m = _geometric_membership(centroids, adjacency, live, radius)
    elif scheme == 2:
        m = _geodesic_membership(centroids, adjacency, live, radius)
    else:
        raise ValueError(f"unknown scheme id {scheme}")
    m = m.tocsr()
    m.sort_indices()

    offsets = m.indptr.astype(np.int64)
    members = m.indices.astype(np.int64)
    center = np.repeat(np.arange(nf, dtype=np.int64), np.diff(offsets))
    dots = np.einsum("ij,ij->i", normals[center], normals[members])
    angles = np.arccos(np.clip(dots, -1.0, 1.0))
    weights = np.where(angles <= rho, SIMILAR_WEIGHT, DISSIMILAR_WEIGHT)
    return offsets, members, weights


def _combinatorial_membership(faces, star_offsets, live):
    nf = len(faces)
    nv = len(star_offsets) - 1
    rows = np.repeat(np.arange(nf, dtype=np.int64)[live], 3)
    cols = faces[live].ravel()
    fv = sparse.csr_matrix((np.ones(len(rows), dtype=np.int8), (rows, cols)),
                           shape=(nf, nv))
    return (fv @ fv.T) > 0


def _adjacency_matrix(adjacency, live, nf):
    src = np.repeat(np.arange(nf, dtype=np.int64), adjacency.shape[1])
    dst = adjacency.ravel()
    ok = (dst >= 0) & live[src] & live[np.maximum(dst, 0)]
    src, dst = src[ok], dst[ok]
    return sparse.csr_matrix((np.ones(len(src), dtype=np.int8), (src, dst)),
                             shape=(nf, nf))


def _geometric_membership(centroids, adjacency, live, radius):
    nf = len(centroids)
    li = np.flatnonzero(live)
    tree = cKDTree(centroids[li])
    pairs = tree.query_pairs(radius * (1.0 + 1e-12), output_type="ndarray")
    if len(pairs):
        gi, gj = li[pairs[:, 0]], li[pairs[:, 1]]
        d = centroids[gi] - centroids[gj]
        ok = np.einsum("ij,ij->i", d, d) <= radius * radius
        gi, gj = gi[ok], gj[ok]
    else:
        gi = gj = np.zeros(0, dtype=np.int64)
    rows = np.concatenate([gi, gj, li])
    cols = np.concatenate([gj, gi, li])
    ball = sparse.csr_matrix((np.ones(len(rows), dtype=np.int8), (rows, cols)),
                             shape=(nf, nf)) > 0
    adj = _adjacency_matrix(adjacency, live, nf)

    member = sparse.csr_matrix(
        (np.ones(len(li), dtype=np.int8), (li, li)), shape=(nf, nf))
    frontier = member
    while frontier.nnz:
        cand = ((frontier @ adj) > 0).multiply(ball)
        grown = member.maximum(cand.astype(np.int8))
        grown.eliminate_zeros()
        if grown.nnz == member.nnz:
            break
        frontier = grown - member
        frontier.eliminate_zeros()
        member = grown
    return member > 0


def _geodesic_membership(centroids, adjacency, live, radius):
    nf = len(centroids)
    src = np.repeat(np.arange(nf, dtype=np.int64), adjacency.shape[1])
    dst = adjacency.ravel()
    ok = (dst >= 0) & live[src] & live[np.maximum(dst, 0)]
    lengths = np.linalg.norm(centroids[np.maximum(dst, 0)] - centroids[src], axis=1)
    nbrs = [[] for _ in range(nf)]
    for s, d, w in zip(src[ok], dst[ok], lengths[ok]):
        nbrs[s].append((int(d), float(w)))

    rows, cols = [], []
    for f in np.flatnonzero(live):
        dist = {int(f): 0.0}
        heap = [(0.0, int(f))]
        while heap:
            d, g = heapq.heappop(heap)
            if d > dist[g]:
                continue
            for h, w in nbrs[g]:
                nd = d + w
                if nd <= radius and nd < dist.get(h, np.inf):
                    dist[h] = nd
                    heapq.heappush(heap, (nd, h))
        rows.extend([int(f)] * len(dist))
        cols.extend(dist.keys())
    return sparse.csr_matrix(
        (np.ones(len(rows), dtype=np.int8), (rows, cols)), shape=(nf, nf)) > 0


def jacobi_eigh_batch(mats):
    """Batched cyclic Jacobi for symmetric 3x3 matrices.

    Returns eigenvalues sorted descending and eigenvector columns, with the
    same stopping rule and sign convention as the scalar solver: sweeps
    until the off-diagonal norm is below 1e-13 of the matrix scale (max
    32), largest-magnitude eigenvector component non-negative.
    """
    a = np.array(mats, dtype=np.float64)
    n = len(a)
    vecs = np.broadcast_to(np.eye(3), (n, 3, 3)).copy()
    scale = np.sqrt((a * a).sum(axis=(1, 2)))
    tol = JACOBI_TOL * np.maximum(scale, np.finfo(float).tiny)

    for _ in range(JACOBI_MAX_SWEEPS):
        off = np.sqrt(2.0 * (a[:, 0, 1] ** 2 + a[:, 0, 2] ** 2 + a[:, 1, 2] ** 2))
        active = off > tol
        if not active.any():
            break
        for p, q in ((0, 1), (0, 2), (1, 2)):
            apq = a[:, p, q]
            rot = active & (apq != 0.0)
            if not rot.any():
                continue
            theta = np.zeros(n)
            np.divide(a[:, q, q] - a[:, p, p], 2.0 * apq, out=theta, where=rot)
            t = np.where(
                rot,
                np.copysign(1.0, theta) / (np.abs(theta) + np.sqrt(theta * theta + 1.0)),
                0.0)
            c = 1.0 / np.sqrt(t * t + 1.0)
            s = t * c

            app, aqq = a[:, p, p].copy(), a[:, q, q].copy()
            a[:, p, p] = app - t * apq
            a[:, q, q] = aqq + t * apq
            zeroed = np.where(rot, 0.0, apq)
            a[:, p, q] = zeroed
            a[:, q, p] = zeroed
            r = 3 - p - q
            arp, arq = a[:, r, p].copy(), a[:, r, q].copy()
            a[:, r, p] = a[:, p, r] = c * arp - s * arq
            a[:, r, q] = a[:, q, r] = s * arp + c * arq
            vp, vq = vecs[:, :, p].copy(), vecs[:, :, q].copy()
            vecs[:, :, p] = c[:, None] * vp - s[:, None] * vq
            vecs[:, :, q] = s[:, None] * vp + c[:, None] * vq

    lams = np.stack([a[:, 0, 0], a[:, 1, 1], a[:, 2, 2]], axis=1)
    order = np.argsort(-lams, axis=1, kind="stable")
    lams = np.take_along_axis(lams, order, axis=1)
    vecs = np.take_along_axis(vecs, order[:, None, :], axis=2)

    imax = np.argmax(np.abs(vecs), axis=1)
    at_max = np.take_along_axis(vecs, imax[:, None, :], axis=1)[:, 0, :]
    vecs = np.where((at_max < 0.0)[:, None, :], -vecs, vecs)
    return lams, vecs


def filter_from_neighborhoods(offsets, members, weights, areas, normals,
                              degenerate, tau, damping):
    """Voting-tensor filtering of all face normals from CSR neighborhoods.

    Faces with empty neighborhoods, degenerate faces, and faces whose
    filtered normal vanishes keep their previous normals.
    """
    nf = len(normals)
    out = normals.copy()
    counts = np.diff(offsets)
    valid = (counts > 0) & (degenerate == 0)
    if not valid.any():
        return out

    nn9 = (normals[:, :, None] * normals[:, None, :]).reshape(nf, 9)
    wa = weights * areas[members]
    wmat = sparse.csr_matrix((wa, members, offsets), shape=(nf, nf))
    swmat = sparse.csr_matrix((weights, members, offsets), shape=(nf, nf))
    sumw = swmat @ np.ones(nf)
    rows = np.flatnonzero(valid & (sumw > 0))

    tensors = (wmat @ nn9)[rows].reshape(-1, 3, 3) / sumw[rows, None, None]
    lams, vecs = jacobi_eigh_batch(tensors)
    lams = np.maximum(lams, 0.0)
    s = np.linalg.norm(lams, axis=1)
    good = s > 0
    lams = lams / np.maximum(s, np.finfo(float).tiny)[:, None]

    keep3 = lams[:, 2] >= tau
    keep2 = keep3 | (lams[:, 1] >= tau)
    lam_bin = np.column_stack(
        [np.ones(len(rows)), keep2.astype(float), keep3.astype(float)])

    n_c = normals[rows]
    proj = np.einsum("fik,fi->fk", vecs, n_c)
    filt = damping * n_c + np.einsum("fik,fk->fi", vecs, lam_bin * proj)
    norms = np.linalg.norm(filt, axis=1)
    ok = good & (norms > 0)
    out[rows[ok]] = filt[ok] / norms[ok, None]
    return out


def vertex_update_sums(vertices, faces, normals, degenerate):
    """Edge-orthogonality descent directions and live face counts per vertex.

    For vertex ``i``, sums ``n_k (n_k . (v_j - v_i))`` over both star edges
    ``(i, j)`` of every non-degenerate incident face ``k``.
    """
    nv = len(vertices)
    sums = np.zeros((nv, 3))
    ok = degenerate == 0
    f = faces[ok]
    n = normals[ok]
    for corner in range(3):
        i = f[:, corner]
        a = f[:, (corner + 1) % 3]
        b = f[:, (corner + 2) % 3]
        d = (vertices[a] - vertices[i]) + (vertices[b] - vertices[i])
        coef = np.einsum("ij,ij->i", n, d)
        np.add.at(sums, i, n * coef[:, None])
    counts = np.bincount(f.ravel(), minlength=nv).astype(np.int64)
    return sums, counts


def point_triangle_distances(points, tri_a, tri_b, tri_c):
    """Distance from each point to the nearest of the given triangles.

    Exact region-based closest-point classification (vertex, edge, and
    interior cases), brute force over all triangles in broadcast chunks.
    Degenerate triangles resolve to their edge and vertex cases.
    """
    points = np.asarray(points, dtype=np.float64).reshape(-1, 3)
    nt = len(tri_a)
    if nt == 0:
        raise ValueError("no reference triangles")
    out = np.empty(len(points))
    chunk = max(1, 400_000 // nt)
    a = tri_a[None, :, :]
    b = tri_b[None, :, :]
    c = tri_c[None, :, :]
    for s in range(0, len(points), chunk):
        p = points[s:s + chunk][:, None, :]
        d2 = point_triangle_sqdist(p, a, b, c)
        out[s:s + chunk] = np.sqrt(d2.min(axis=1))
    return out


def point_triangle_sqdist(p, a, b, c):
    """Squared point-to-triangle distance over broadcast arrays of shape (..., 3)."""

    def dot(u, v):
        return np.einsum("...i,...i->...", u, v)

    def safe(x):
        return np.where(x != 0.0, x, 1.0)

    ab, ac = b - a, c - a
    ap = p - a
    d1, d2 = dot(ab, ap), dot(ac, ap)
    bp = p - b
    d3, d4 = dot(ab, bp), dot(ac, bp)
    cp = p - c
    d5, d6 = dot(ab, cp), dot(ac, cp)
    vc = d1 * d4 - d3 * d2
    vb = d5 * d2 - d1 * d6
    va = d3 * d6 - d5 * d4

    v = vb / safe(va + vb + vc)
    w = vc / safe(va + vb + vc)
    q = a + ab * v[..., None] + ac * w[..., None]

    t_bc = (d4 - d3) / safe((d4 - d3) + (d5 - d6))
    on_bc = (va <= 0) & (d4 - d3 >= 0) & (d5 - d6 >= 0)
    q = np.where(on_bc[..., None], b + (c - b) * t_bc[..., None], q)

    t_ac = d2 / safe(d2 - d6)
    on_ac = (vb <= 0) & (d2 >= 0) & (d6 <= 0)
    q = np.where(on_ac[..., None], a + ac * t_ac[..., None], q)

    at_c = (d6 >= 0) & (d5 <= d6)
    q = np.where(at_c[..., None], c, q)

    t_ab = d1 / safe(d1 - d3)
    on_ab = (vc <= 0) & (d1 >= 0) & (d3 <= 0)
    q = np.where(on_ab[..., None], a + ab * t_ab[..., None], q)

    at_b = (d3 >= 0) & (d4 <= d3)
    q = np.where(at_b[..., None], b, q)

    at_a = (d1 <= 0) & (d2 <= 0)
    q = np.where(at_a[..., None], a, q)

    diff = p - q
    return dot(diff, diff)
