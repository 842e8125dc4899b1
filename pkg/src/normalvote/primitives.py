"""Synthetic test meshes: grids, cubes, icospheres, cylinders."""

import numpy as np

from .mesh import TriMesh


def flat_grid(nx, ny, spacing=1.0, z=0.0):
    """Planar grid of ``nx * ny`` squares, each split along one diagonal.

    All diagonals run the same way, so interior vertices have valence 6.
    Normals point in +z.
    """
    xs = np.arange(nx + 1) * spacing
    ys = np.arange(ny + 1) * spacing
    gx, gy = np.meshgrid(xs, ys, indexing="ij")
    vertices = np.column_stack([gx.ravel(), gy.ravel(), np.full(gx.size, float(z))])

    def vid(i, j):
        return i * (ny + 1) + j

    faces = []
    for i in range(nx):
        for j in range(ny):
            a, b = vid(i, j), vid(i + 1, j)
            c, d = vid(i + 1, j + 1), vid(i, j + 1)
            faces.append([a, b, c])
            faces.append([a, c, d])
    return TriMesh(vertices, faces)


def unit_cube():
    """Axis-aligned unit cube in its standard 12-triangle tessellation."""
    v = np.array([[x, y, z] for x in (0, 1) for y in (0, 1) for z in (0, 1)], dtype=float)
    faces = [
        [0, 1, 3], [0, 3, 2],  # x = 0
        [4, 6, 7], [4, 7, 5],  # x = 1
        [0, 4, 5], [0, 5, 1],  # y = 0
        [2, 3, 7], [2, 7, 6],  # y = 1
        [0, 2, 6], [0, 6, 4],  # z = 0
        [1, 5, 7], [1, 7, 3],  # z = 1
    ]
    return TriMesh(v, faces)


def cube_grid(n, size=1.0):
    """Closed cube with each side meshed as an ``n x n`` grid (``12 n^2`` faces).

    Shared side borders are welded, so the result is a closed genus-0
    surface with outward-facing normals.
    """
    s = float(size)
    sides = [
        # (origin, u axis, v axis) per side, oriented outward
        ((0, 0, 0), (0, 1, 0), (0, 0, 1)),  # x = 0, normal -x
        ((s, 0, 0), (0, 0, 1), (0, 1, 0)),  # x = s, normal +x
        ((0, 0, 0), (0, 0, 1), (1, 0, 0)),  # y = 0, normal -y
        ((0, s, 0), (1, 0, 0), (0, 0, 1)),  # y = s, normal +y
        ((0, 0, 0), (1, 0, 0), (0, 1, 0)),  # z = 0, normal -z
        ((0, 0, s), (0, 1, 0), (1, 0, 0)),  # z = s, normal +z
    ]
    key_to_id = {}
    vertices = []
    faces = []

    def vid(point):
        key = tuple(np.round(point / s * n).astype(int))
        if key not in key_to_id:
            key_to_id[key] = len(vertices)
            vertices.append(point)
        return key_to_id[key]

    for origin, u, v in sides:
        origin, u, v = np.array(origin, float), np.array(u, float), np.array(v, float)
        ids = np.empty((n + 1, n + 1), dtype=int)
        for i in range(n + 1):
            for j in range(n + 1):
                ids[i, j] = vid(origin + u * (s * i / n) + v * (s * j / n))
        for i in range(n):
            for j in range(n):
                a, b, c, d = ids[i, j], ids[i + 1, j], ids[i + 1, j + 1], ids[i, j + 1]
                faces.append([a, b, c])
                faces.append([a, c, d])
    return TriMesh(np.array(vertices), faces)


def icosphere(subdivisions, radius=1.0):
    """Icosahedron subdivided ``subdivisions`` times, projected onto a sphere."""
    phi = (1.0 + np.sqrt(5.0)) / 2.0
    verts = np.array([
        [-1, phi, 0], [1, phi, 0], [-1, -phi, 0], [1, -phi, 0],
        [0, -1, phi], [0, 1, phi], [0, -1, -phi], [0, 1, -phi],
        [phi, 0, -1], [phi, 0, 1], [-phi, 0, -1], [-phi, 0, 1],
    ], dtype=float)
    verts /= np.linalg.norm(verts, axis=1)[:, None]
    faces = [
        [0, 11, 5], [0, 5, 1], [0, 1, 7], [0, 7, 10], [0, 10, 11],
        [1, 5, 9], [5, 11, 4], [11, 10, 2], [10, 7, 6], [7, 1, 8],
        [3, 9, 4], [3, 4, 2], [3, 2, 6], [3, 6, 8], [3, 8, 9],
        [4, 9, 5], [2, 4, 11], [6, 2, 10], [8, 6, 7], [9, 8, 1],
    ]
    verts = [tuple(p) for p in verts]

    for _ in range(subdivisions):
        cache = {}
        new_faces = []

        def midpoint(i, j):
            key = (min(i, j), max(i, j))
            if key not in cache:
                p = np.array(verts[i]) + np.array(verts[j])
                p /= np.linalg.norm(p)
                cache[key] = len(verts)
                verts.append(tuple(p))
            return cache[key]

        for a, b, c in faces:
            ab, bc, ca = midpoint(a, b), midpoint(b, c), midpoint(c, a)
            new_faces += [[a, ab, ca], [b, bc, ab], [c, ca, bc], [ab, bc, ca]]
        faces = new_faces

    return TriMesh(np.array(verts) * radius, faces)


def cylinder(radius=1.0, height=2.0, n_circ=64, n_len=16):
    """Open cylinder around the z axis, outward normals, no caps."""
    thetas = np.arange(n_circ) * (2 * np.pi / n_circ)
    zs = np.linspace(0.0, height, n_len + 1)
    vertices = []
    for z in zs:
        for t in thetas:
            vertices.append([radius * np.cos(t), radius * np.sin(t), z])

    def vid(ring, k):
        return ring * n_circ + (k % n_circ)

    faces = []
    for ring in range(n_len):
        for k in range(n_circ):
            a, b = vid(ring, k), vid(ring, k + 1)
            c, d = vid(ring + 1, k + 1), vid(ring + 1, k)
            faces.append([a, b, c])
            faces.append([a, c, d])
    return TriMesh(np.array(vertices), faces)


def tetrahedron():
    """Regular tetrahedron, outward normals."""
    v = np.array([
        [1, 1, 1],
        [1, -1, -1],
        [-1, 1, -1],
        [-1, -1, 1],
    ], dtype=float)
    faces = [[0, 2, 1], [0, 1, 3], [0, 3, 2], [1, 2, 3]]
    return TriMesh(v, faces)
