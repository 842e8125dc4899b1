"""Indexed triangle meshes: derived quantities, adjacency, and OBJ/OFF I/O."""

import logging
import os
from dataclasses import dataclass, field

import numpy as np

logger = logging.getLogger(__name__)

# Faces whose area falls below this fraction of the mean area are flagged
# degenerate and excluded from filtering and vertex updates.
DEGENERATE_AREA_RATIO = 1e-12


class MeshParseError(ValueError):
    """Raised when a mesh file cannot be parsed into a valid triangle mesh."""


class TriMesh:
    """Triangle mesh with cached per-face quantities and adjacency.

    Vertices are float64 ``(n_v, 3)``, faces are int64 ``(n_f, 3)`` vertex
    index triples in counter-clockwise orientation (taken as given, never
    repaired; see :func:`check_orientation`).

    Derived attributes, refreshed by :meth:`recompute_derived`:

    - ``face_normals``: unit normals, zero vector for degenerate faces
    - ``face_areas``, ``face_centroids``
    - ``face_degenerate``: bool mask, area below ``DEGENERATE_AREA_RATIO``
      times the mean face area
    - ``face_adjacency``: ``(n_f, 3)`` edge-adjacent face indices, -1 padded
    - ``boundary_vertex``: bool mask of vertices on an edge with a single
      incident face

    The mesh is treated as immutable during a filtering pass; mutate
    ``vertices`` and call :meth:`recompute_derived` only between passes.
    """

    def __init__(self, vertices, faces):
        self.vertices = np.ascontiguousarray(vertices, dtype=np.float64).reshape(-1, 3)
        self.faces = np.ascontiguousarray(faces, dtype=np.int64).reshape(-1, 3)
        if self.faces.size:
            if self.faces.min() < 0 or self.faces.max() >= len(self.vertices):
                raise ValueError("face index out of range")
            f = self.faces
            if np.any((f[:, 0] == f[:, 1]) | (f[:, 1] == f[:, 2]) | (f[:, 0] == f[:, 2])):
                raise ValueError("face with repeated vertex indices")
        self.recompute_derived()

    @property
    def n_vertices(self):
        return len(self.vertices)

    @property
    def n_faces(self):
        return len(self.faces)

    def copy(self):
        m = TriMesh.__new__(TriMesh)
        m.vertices = self.vertices.copy()
        m.faces = self.faces.copy()
        m.face_normals = self.face_normals.copy()
        m.face_areas = self.face_areas.copy()
        m.face_centroids = self.face_centroids.copy()
        m.face_degenerate = self.face_degenerate.copy()
        m.face_adjacency = self.face_adjacency.copy()
        m.boundary_vertex = self.boundary_vertex.copy()
        m.star_offsets = self.star_offsets.copy()
        m.star_faces = self.star_faces.copy()
        return m

    def recompute_derived(self, connectivity=True):
        """Refresh normals, areas, centroids, stars, and adjacency in place.

        Idempotent: a second call without geometry changes is a no-op.
        Degenerate faces are flagged, not fatal. Pass ``connectivity=False``
        to skip rebuilding stars and adjacency when only positions moved.
        """
        v, f = self.vertices, self.faces
        if len(f) == 0:
            self.face_normals = np.zeros((0, 3))
            self.face_areas = np.zeros(0)
            self.face_centroids = np.zeros((0, 3))
            self.face_degenerate = np.zeros(0, dtype=bool)
            self.face_adjacency = np.full((0, 3), -1, dtype=np.int64)
            self.boundary_vertex = np.zeros(len(v), dtype=bool)
            self.star_offsets = np.zeros(len(v) + 1, dtype=np.int64)
            self.star_faces = np.zeros(0, dtype=np.int64)
            return

        p0, p1, p2 = v[f[:, 0]], v[f[:, 1]], v[f[:, 2]]
        cross = np.cross(p1 - p0, p2 - p0)
        norms = np.linalg.norm(cross, axis=1)
        self.face_areas = 0.5 * norms
        self.face_centroids = (p0 + p1 + p2) / 3.0
        mean_area = self.face_areas.mean()
        if mean_area > 0.0:
            self.face_degenerate = self.face_areas < DEGENERATE_AREA_RATIO * mean_area
        else:
            self.face_degenerate = np.ones(len(f), dtype=bool)
        self.face_normals = np.zeros_like(cross)
        ok = ~self.face_degenerate
        self.face_normals[ok] = cross[ok] / norms[ok, None]

        if connectivity:
            self._build_stars()
            self._build_adjacency()

    def _build_stars(self):
        # CSR layout: star_faces[star_offsets[i]:star_offsets[i+1]] are the
        # faces incident to vertex i, in ascending face order.
        nv = len(self.vertices)
        flat = self.faces.ravel()
        owner = np.repeat(np.arange(len(self.faces), dtype=np.int64), 3)
        order = np.argsort(flat, kind="stable")
        counts = np.bincount(flat, minlength=nv)
        self.star_offsets = np.concatenate([[0], np.cumsum(counts)]).astype(np.int64)
        self.star_faces = owner[order]

    def _build_adjacency(self):
        nf = len(self.faces)
        edges = self.faces[:, [0, 1, 1, 2, 2, 0]].reshape(-1, 2)
        und = np.sort(edges, axis=1)
        _, inverse, counts = np.unique(und, axis=0, return_inverse=True, return_counts=True)
        owner = np.repeat(np.arange(nf, dtype=np.int64), 3)
        slot = np.tile(np.arange(3, dtype=np.int64), nf)

        if np.any(counts > 2):
            # adjacency across a non-manifold edge is ill-defined; leave it open
            logger.warning("%d non-manifold edges; treated as boundary for adjacency",
                           int(np.sum(counts > 2)))

        adjacency = np.full((nf, 3), -1, dtype=np.int64)
        order = np.argsort(inverse, kind="stable")
        start = np.searchsorted(inverse[order], np.arange(len(counts)))
        s2 = start[counts == 2]
        first, second = order[s2], order[s2 + 1]
        adjacency[owner[first], slot[first]] = owner[second]
        adjacency[owner[second], slot[second]] = owner[first]
        self.face_adjacency = adjacency

        boundary = np.zeros(len(self.vertices), dtype=bool)
        bnd_edges = und[order[start[counts == 1]]] if np.any(counts == 1) else np.zeros((0, 2), int)
        boundary[bnd_edges.ravel()] = True
        self.boundary_vertex = boundary

    def vertex_star(self, i):
        """Faces incident to vertex ``i``, ascending face index."""
        return self.star_faces[self.star_offsets[i]:self.star_offsets[i + 1]]

    def unique_edges(self):
        """Undirected edges as an ``(E, 2)`` array of sorted vertex pairs."""
        edges = self.faces[:, [0, 1, 1, 2, 2, 0]].reshape(-1, 2)
        return np.unique(np.sort(edges, axis=1), axis=0)


@dataclass
class ScalarField:
    """One scalar per vertex, e.g. curvature magnitudes."""

    values: np.ndarray
    name: str = "value"

    def __post_init__(self):
        self.values = np.asarray(self.values, dtype=np.float64).ravel()
        if not np.all(np.isfinite(self.values)):
            raise ValueError("scalar field contains non-finite values")


@dataclass
class OrientationReport:
    """Result of the winding-consistency diagnostic."""

    interior_edges: int
    inconsistent_edges: int
    boundary_edges: int
    nonmanifold_edges: int
    consistent: bool = field(init=False)

    def __post_init__(self):
        self.consistent = self.inconsistent_edges == 0 and self.nonmanifold_edges == 0


def load_mesh(path, fmt=None):
    """Load a triangle mesh from an OBJ or OFF file.

    ``fmt`` is ``"obj"`` or ``"off"``; inferred from the extension when None.
    Non-triangle faces, out-of-range indices, and vertex-free files are
    rejected with :class:`MeshParseError`.
    """
    fmt = fmt or os.path.splitext(str(path))[1].lstrip(".").lower()
    if fmt == "obj":
        vertices, faces = _parse_obj(path)
    elif fmt == "off":
        vertices, faces = _parse_off(path)
    else:
        raise MeshParseError(f"unsupported mesh format: {fmt!r}")
    if len(vertices) == 0:
        raise MeshParseError(f"{path}: empty mesh (no vertices)")
    try:
        return TriMesh(vertices, faces)
    except ValueError as exc:
        raise MeshParseError(f"{path}: {exc}") from exc


def save_mesh(mesh, path, fmt=None):
    """Write a mesh as OBJ or OFF; positions round-trip exactly (shortest repr)."""
    fmt = fmt or os.path.splitext(str(path))[1].lstrip(".").lower()
    if fmt == "obj":
        lines = [f"v {x!r} {y!r} {z!r}" for x, y, z in mesh.vertices]
        lines += [f"f {a + 1} {b + 1} {c + 1}" for a, b, c in mesh.faces]
    elif fmt == "off":
        lines = ["OFF", f"{mesh.n_vertices} {mesh.n_faces} 0"]
        lines += [f"{x!r} {y!r} {z!r}" for x, y, z in mesh.vertices]
        lines += [f"3 {a} {b} {c}" for a, b, c in mesh.faces]
    else:
        raise MeshParseError(f"unsupported mesh format: {fmt!r}")
    with open(path, "w") as fh:
        fh.write("\n".join(lines) + "\n")


def _parse_obj(path):
    vertices, faces = [], []
    skipped = set()
    with open(path) as fh:
        for ln, raw in enumerate(fh, start=1):
            parts = raw.split()
            if not parts or parts[0].startswith("#"):
                continue
            tag = parts[0]
            if tag == "v":
                if len(parts) < 4:
                    raise MeshParseError(f"{path}:{ln}: malformed vertex line")
                try:
                    vertices.append([float(x) for x in parts[1:4]])
                except ValueError as exc:
                    raise MeshParseError(f"{path}:{ln}: {exc}") from exc
            elif tag == "f":
                idx = parts[1:]
                if len(idx) != 3:
                    raise MeshParseError(
                        f"{path}:{ln}: face with {len(idx)} vertices (triangles only)")
                tri = []
                for tok in idx:
                    try:
                        i = int(tok.split("/")[0])
                    except ValueError as exc:
                        raise MeshParseError(f"{path}:{ln}: {exc}") from exc
                    if i <= 0:
                        raise MeshParseError(f"{path}:{ln}: face index {i} out of range")
                    tri.append(i - 1)
                faces.append(tri)
            elif tag not in skipped:
                skipped.add(tag)
                logger.warning("%s: skipping unsupported OBJ directive %r", path, tag)
    _check_indices(path, faces, len(vertices))
    return vertices, faces


def _parse_off(path):
    with open(path) as fh:
        tokens = []
        for raw in fh:
            line = raw.split("#", 1)[0].strip()
            if line:
                tokens.extend(line.split())
    if not tokens or tokens[0] != "OFF":
        raise MeshParseError(f"{path}: missing OFF header")
    tokens = tokens[1:]
    try:
        nv, nf = int(tokens[0]), int(tokens[1])
        pos = 3  # vertex count, face count, edge count
        vertices = []
        for _ in range(nv):
            vertices.append([float(t) for t in tokens[pos:pos + 3]])
            pos += 3
        faces = []
        for _ in range(nf):
            k = int(tokens[pos])
            if k != 3:
                raise MeshParseError(f"{path}: face with {k} vertices (triangles only)")
            faces.append([int(t) for t in tokens[pos + 1:pos + 4]])
            pos += 1 + k
    except (ValueError, IndexError) as exc:
        raise MeshParseError(f"{path}: truncated or malformed OFF data ({exc})") from exc
    _check_indices(path, faces, nv)
    return vertices, faces


def _check_indices(path, faces, n_vertices):
    for tri in faces:
        if any(i >= n_vertices for i in tri):
            raise MeshParseError(f"{path}: face index {max(tri)} out of range")


def average_edge_length(mesh):
    """Arithmetic mean of unique undirected edge lengths."""
    edges = mesh.unique_edges()
    if len(edges) == 0:
        raise ValueError("mesh has no edges")
    d = mesh.vertices[edges[:, 0]] - mesh.vertices[edges[:, 1]]
    return float(np.linalg.norm(d, axis=1).mean())


def check_orientation(mesh):
    """Diagnose winding consistency.

    Adjacent faces are consistently oriented when they traverse their shared
    edge in opposite directions. No repair is attempted.
    """
    directed = mesh.faces[:, [0, 1, 1, 2, 2, 0]].reshape(-1, 2)
    und = np.sort(directed, axis=1)
    forward = directed[:, 0] < directed[:, 1]
    _, inverse, counts = np.unique(und, axis=0, return_inverse=True, return_counts=True)

    interior = 0
    inconsistent = 0
    order = np.argsort(inverse, kind="stable")
    start = np.searchsorted(inverse[order], np.arange(len(counts)))
    for e, (s, c) in enumerate(zip(start, counts)):
        if c == 2:
            interior += 1
            # same traversal direction on both sides means a flipped pair
            if forward[order[s]] == forward[order[s + 1]]:
                inconsistent += 1
    return OrientationReport(
        interior_edges=interior,
        inconsistent_edges=inconsistent,
        boundary_edges=int(np.sum(counts == 1)),
        nonmanifold_edges=int(np.sum(counts > 2)),
    )


def cotangent_mean_curvature(mesh):
    """Absolute mean curvature per vertex from the cotangent Laplacian.

    The Laplacian of position is normalized by one third of the vertex-star
    area (barycentric mass); |H| is half the norm of the result. Boundary
    vertices get 0 (see ``mesh.boundary_vertex`` for the flag), as do
    vertices with only degenerate incident faces.
    """
    v, f = mesh.vertices, mesh.faces
    nv = len(v)
    lap = np.zeros((nv, 3))
    area3 = np.zeros(nv)

    ok = ~mesh.face_degenerate
    tris = f[ok]
    p = v[tris]  # (F, 3, 3)
    areas = mesh.face_areas[ok]

    for corner in range(3):
        a = p[:, corner]
        b = p[:, (corner + 1) % 3]
        c = p[:, (corner + 2) % 3]
        # cot of the angle at `a`, which faces edge (b, c)
        u, w = b - a, c - a
        cross = np.linalg.norm(np.cross(u, w), axis=1)
        cot = np.einsum("ij,ij->i", u, w) / np.maximum(cross, 1e-300)
        i, j = tris[:, (corner + 1) % 3], tris[:, (corner + 2) % 3]
        contrib = 0.5 * cot[:, None] * (v[j] - v[i])
        np.add.at(lap, i, contrib)
        np.add.at(lap, j, -contrib)
        np.add.at(area3, tris[:, corner], areas / 3.0)

    values = np.zeros(nv)
    interior = (~mesh.boundary_vertex) & (area3 > 0)
    values[interior] = 0.5 * np.linalg.norm(lap[interior], axis=1) / area3[interior]
    return ScalarField(values, name="abs_mean_curvature")


def save_scalar_csv(fieldvals, path):
    """Write a per-vertex scalar field as ``vertex_index,value`` CSV."""
    with open(path, "w") as fh:
        fh.write("vertex_index,value\n")
        for i, x in enumerate(fieldvals.values):
            fh.write(f"{i},{x!r}\n")


def save_scalar_ply(mesh, fieldvals, path):
    """Write a PLY with per-vertex grayscale color.

    Values are mapped linearly from [0, 99th percentile] to [0, 255];
    values above the percentile saturate at white.
    """
    if len(fieldvals.values) != mesh.n_vertices:
        raise ValueError("scalar field length does not match vertex count")
    hi = float(np.percentile(fieldvals.values, 99)) if len(fieldvals.values) else 1.0
    if hi <= 0:
        hi = 1.0
    gray = np.clip(fieldvals.values / hi, 0.0, 1.0)
    gray = np.rint(gray * 255).astype(int)
    lines = [
        "ply",
        "format ascii 1.0",
        f"element vertex {mesh.n_vertices}",
        "property float x",
        "property float y",
        "property float z",
        "property uchar red",
        "property uchar green",
        "property uchar blue",
        f"element face {mesh.n_faces}",
        "property list uchar int vertex_indices",
        "end_header",
    ]
    for (x, y, z), g in zip(mesh.vertices, gray):
        lines.append(f"{x!r} {y!r} {z!r} {g} {g} {g}")
    for a, b, c in mesh.faces:
        lines.append(f"3 {a} {b} {c}")
    with open(path, "w") as fh:
        fh.write("\n".join(lines) + "\n")
