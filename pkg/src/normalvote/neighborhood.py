"""Per-face neighbor selection and similarity weighting.

Three neighbor schemes are supported:

- combinatorial: every face sharing a vertex with the center
- geometric: growing-disk expansion, faces whose centroid lies within a
  Euclidean radius of the center's centroid AND that are reachable through
  edge-adjacent faces which themselves satisfy the radius bound
- geodesic: faces within a dual-graph shortest-path radius, edge weight
  being the centroid distance of adjacent faces (a fixed approximation of
  surface geodesics)

Each scheme includes the center face itself. Degenerate faces neither
contribute members nor serve as expansion hops.
"""

import heapq
from dataclasses import dataclass

import numpy as np

SIMILAR_WEIGHT = 1.0
DISSIMILAR_WEIGHT = 0.1

SCHEME_KINDS = ("combinatorial", "geometric", "geodesic")


@dataclass(frozen=True)
class NeighborhoodScheme:
    """Neighbor selection rule; ``radius`` is in model units."""

    kind: str = "geometric"
    radius: float | None = None

    def __post_init__(self):
        if self.kind not in SCHEME_KINDS:
            raise ValueError(f"unknown neighborhood kind {self.kind!r}")
        if self.kind != "combinatorial":
            if self.radius is None or self.radius <= 0:
                raise ValueError(f"{self.kind} neighborhoods require radius > 0")


@dataclass
class Neighborhood:
    """Members of one face's neighborhood with their similarity weights."""

    center: int
    members: np.ndarray  # face indices, ascending
    weights: np.ndarray  # values in {0.1, 1.0}


def combinatorial_neighbors(mesh, f):
    """Union of the vertex stars of the face's three vertices (includes ``f``)."""
    if mesh.face_degenerate[f]:
        return np.zeros(0, dtype=np.int64)
    out = {int(f)}
    for vi in mesh.faces[f]:
        out.update(int(g) for g in mesh.vertex_star(vi) if not mesh.face_degenerate[g])
    return np.array(sorted(out), dtype=np.int64)


def geometric_neighbors(mesh, f, radius):
    """Growing-disk members around ``f``.

    Breadth-first expansion over edge adjacency, accepting faces whose
    centroid is within ``radius`` of the center centroid; only accepted
    faces are expanded, so nearby but unreachable sheets are excluded.
    """
    if radius <= 0:
        raise ValueError("radius must be > 0")
    if mesh.face_degenerate[f]:
        return np.zeros(0, dtype=np.int64)
    c0 = mesh.face_centroids[f]
    r2 = radius * radius
    accepted = {f}
    frontier = [f]
    while frontier:
        nxt = []
        for g in frontier:
            for h in mesh.face_adjacency[g]:
                if h < 0 or h in accepted or mesh.face_degenerate[h]:
                    continue
                d = mesh.face_centroids[h] - c0
                if d @ d <= r2:
                    accepted.add(int(h))
                    nxt.append(int(h))
        frontier = nxt
    return np.array(sorted(accepted), dtype=np.int64)


def geodesic_neighbors(mesh, f, radius):
    """Faces within dual-graph distance ``radius`` of ``f`` (Dijkstra)."""
    if radius < 0:
        raise ValueError("radius must be >= 0")
    if mesh.face_degenerate[f]:
        return np.zeros(0, dtype=np.int64)
    dist = {f: 0.0}
    heap = [(0.0, f)]
    while heap:
        d, g = heapq.heappop(heap)
        if d > dist[g]:
            continue
        for h in mesh.face_adjacency[g]:
            if h < 0 or mesh.face_degenerate[h]:
                continue
            h = int(h)
            nd = d + float(np.linalg.norm(mesh.face_centroids[h] - mesh.face_centroids[g]))
            if nd <= radius and nd < dist.get(h, np.inf):
                dist[h] = nd
                heapq.heappush(heap, (nd, h))
    return np.array(sorted(dist), dtype=np.int64)


def neighbors(mesh, f, scheme):
    """Dispatch to the scheme's neighbor operation."""
    if scheme.kind == "combinatorial":
        return combinatorial_neighbors(mesh, f)
    if scheme.kind == "geometric":
        return geometric_neighbors(mesh, f, scheme.radius)
    return geodesic_neighbors(mesh, f, scheme.radius)


def binary_weights(mesh, f, members, rho, normals=None):
    """Weight members by normal similarity to the center face.

    A member gets weight 1 when the angle between its normal and the
    center's normal is at most ``rho`` (radians), 0.1 otherwise, so faces
    across a feature still vote weakly. Degenerate members are dropped.
    """
    if not (0.0 < rho <= np.pi):
        raise ValueError("rho must lie in (0, pi]")
    normals = mesh.face_normals if normals is None else normals
    members = np.asarray(members, dtype=np.int64)
    members = members[~mesh.face_degenerate[members]]
    dots = np.clip(normals[members] @ normals[f], -1.0, 1.0)
    angles = np.arccos(dots)
    weights = np.where(angles <= rho, SIMILAR_WEIGHT, DISSIMILAR_WEIGHT)
    return Neighborhood(center=int(f), members=members, weights=weights)
