"""Vertex repositioning against filtered face normals.

A filtered normal field generally disagrees with the geometry it was
computed on; vertices are relaxed so that star edges become orthogonal to
their faces' target normals. The relaxation is gradient descent on the
edge-orthogonality energy, with every vertex stepping simultaneously from
a position snapshot so results do not depend on evaluation order.
"""

from dataclasses import dataclass

import numpy as np

from . import backend


@dataclass
class VertexUpdateParams:
    """Inner relaxation steps per outer pipeline iteration."""

    inner_iterations: int = 10

    def __post_init__(self):
        if self.inner_iterations < 1:
            raise ValueError("inner_iterations must be >= 1")


def orthogonality_energy(mesh, normals):
    """Total misalignment of star edges with their faces' normals.

    Sums ``(n_k . (v_i - v_j))^2`` over every (vertex, star-edge, face)
    incidence: each non-degenerate face contributes its two edges at each
    of its three corners, so an interior edge is counted once per corner
    per adjacent face.
    """
    normals = np.asarray(normals, dtype=np.float64)
    ok = ~mesh.face_degenerate
    f = mesh.faces[ok]
    n = normals[ok]
    v = mesh.vertices
    total = 0.0
    for corner in range(3):
        i = f[:, corner]
        for other in ((corner + 1) % 3, (corner + 2) % 3):
            j = f[:, other]
            d = np.einsum("ij,ij->i", n, v[i] - v[j])
            total += float(d @ d)
    return total


def vertex_energy(mesh, normals, i, position=None):
    """Vertex ``i``'s own share of the energy as a function of its position.

    Only the terms owned by vertex ``i`` (its star edges, per incident
    face) are summed; neighbor-owned terms are held fixed. This is the
    objective whose negative half-gradient is the update direction.
    """
    normals = np.asarray(normals, dtype=np.float64)
    x = mesh.vertices[i] if position is None else np.asarray(position, dtype=np.float64)
    total = 0.0
    for k in mesh.vertex_star(i):
        if mesh.face_degenerate[k]:
            continue
        tri = mesh.faces[k]
        n = normals[k]
        for j in tri:
            if j == i:
                continue
            d = float(n @ (x - mesh.vertices[j]))
            total += d * d
    return total


def update_directions(mesh, normals):
    """Per-vertex descent directions and live incident-face counts.

    Returns ``(sums, counts)`` where ``sums[i]`` is
    ``sum n_k (n_k . (v_j - v_i))`` over both star edges of every
    non-degenerate incident face, equal to minus half the gradient of
    :func:`vertex_energy` at the current position.
    """
    normals = np.ascontiguousarray(normals, dtype=np.float64)
    k = backend.kernels()
    return k.vertex_update_sums(
        mesh.vertices, mesh.faces, normals, mesh.face_degenerate.astype(np.uint8))


def vertex_update_step(mesh, normals):
    """One simultaneous relaxation step; returns the new position array.

    Each vertex moves by its descent direction divided by twice its live
    incident-face count, the per-vertex minimizer of its own quadratic
    energy term (a Jacobi relaxation step). Vertices with no usable
    incident faces stay put.
    """
    sums, counts = update_directions(mesh, normals)
    new = mesh.vertices.copy()
    active = counts > 0
    new[active] += sums[active] / (2.0 * counts[active, None])
    return new


def synchronize_vertices(mesh, normals, params):
    """Relax vertices ``params.inner_iterations`` times, then refresh caches.

    Mutates the mesh in place; each step reads a snapshot of the previous
    positions. Derived quantities are refreshed once after the last step
    (connectivity is untouched, so only geometry caches are rebuilt).
    """
    for _ in range(params.inner_iterations):
        mesh.vertices = vertex_update_step(mesh, normals)
    mesh.recompute_derived(connectivity=False)
