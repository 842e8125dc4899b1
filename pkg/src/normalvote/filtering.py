"""Normal voting tensors, eigenvalue quantization, and face-normal filtering.

Per face, filtering runs four steps against a snapshot of the current
normals: select neighbors, weight them by normal similarity, build the
area-weighted voting tensor of the neighbor normals, then quantize its
eigenvalues to {0, 1} and push the face normal toward the retained
eigendirections. All faces read the same snapshot, so a pass is
deterministic and order-independent.
"""

import logging
import math
from dataclasses import dataclass

import numpy as np

from . import backend
from .neighborhood import NeighborhoodScheme

logger = logging.getLogger(__name__)

JACOBI_MAX_SWEEPS = 32
# Off-diagonal Frobenius norm target, relative to the matrix scale.
JACOBI_TOL = 1e-13


class NumericalError(ArithmeticError):
    """Raised when a numeric operation cannot produce a usable result."""


@dataclass
class Envt:
    """Voting tensor with its sorted eigensystem.

    ``tensor`` is normalized so that the eigenvalue vector has unit
    Euclidean norm; ``eigenvalues`` are sorted descending and non-negative,
    ``eigenvectors`` are orthonormal columns matching that order.
    """

    tensor: np.ndarray
    eigenvalues: np.ndarray
    eigenvectors: np.ndarray


@dataclass
class FilterParams:
    """Knobs of one normal-filtering pass."""

    tau: float
    damping: float = 3.0
    rho: float = 0.8
    scheme: NeighborhoodScheme = NeighborhoodScheme("combinatorial")

    def __post_init__(self):
        if not (0.0 < self.tau < 1.0):
            raise ValueError("tau must lie in (0, 1)")
        if self.damping < 0:
            raise ValueError("damping must be >= 0")
        if not (0.0 < self.rho <= np.pi):
            raise ValueError("rho must lie in (0, pi]")


def eigen_sym3(tensor):
    """Eigendecompose a symmetric 3x3 matrix by cyclic Jacobi sweeps.

    Returns eigenvalues sorted descending and the matching orthonormal
    eigenvector columns. Sweeps run until the off-diagonal Frobenius norm
    falls below 1e-13 relative to the matrix scale (at most 32 sweeps).
    Sign convention: each eigenvector's largest-magnitude component is
    non-negative. Non-symmetric input is rejected.
    """
    a = np.array(tensor, dtype=np.float64)
    if a.shape != (3, 3):
        raise ValueError("expected a 3x3 matrix")
    scale = float(np.sqrt((a * a).sum()))
    if not np.allclose(a, a.T, atol=1e-12 * max(scale, 1.0), rtol=0.0):
        raise ValueError("matrix is not symmetric")
    a = 0.5 * (a + a.T)

    vecs = np.eye(3)
    tol = JACOBI_TOL * max(scale, np.finfo(float).tiny)
    for _ in range(JACOBI_MAX_SWEEPS):
        off = math.sqrt(2.0 * (a[0, 1] ** 2 + a[0, 2] ** 2 + a[1, 2] ** 2))
        if off <= tol:
            break
        for p, q in ((0, 1), (0, 2), (1, 2)):
            apq = a[p, q]
            if apq == 0.0:
                continue
            theta = (a[q, q] - a[p, p]) / (2.0 * apq)
            t = math.copysign(1.0, theta) / (abs(theta) + math.sqrt(theta * theta + 1.0))
            c = 1.0 / math.sqrt(t * t + 1.0)
            s = t * c
            _apply_rotation(a, vecs, p, q, c, s, t)

    lams = np.diag(a).copy()
    order = np.argsort(-lams, kind="stable")
    lams = lams[order]
    vecs = vecs[:, order]
    for k in range(3):
        imax = int(np.argmax(np.abs(vecs[:, k])))
        if vecs[imax, k] < 0.0:
            vecs[:, k] = -vecs[:, k]
    return lams, vecs


def _apply_rotation(a, vecs, p, q, c, s, t):
    apq = a[p, q]
    app, aqq = a[p, p], a[q, q]
    a[p, p] = app - t * apq
    a[q, q] = aqq + t * apq
    a[p, q] = a[q, p] = 0.0
    r = 3 - p - q
    arp, arq = a[r, p], a[r, q]
    a[r, p] = a[p, r] = c * arp - s * arq
    a[r, q] = a[q, r] = s * arp + c * arq
    vp = vecs[:, p].copy()
    vq = vecs[:, q].copy()
    vecs[:, p] = c * vp - s * vq
    vecs[:, q] = s * vp + c * vq


def cardano_eigenvalues(tensor):
    """Closed-form eigenvalues of a symmetric 3x3 matrix, sorted descending.

    Trigonometric solution of the characteristic cubic; serves as the
    independent cross-check for the iterative solver.
    """
    a = np.asarray(tensor, dtype=np.float64)
    p1 = a[0, 1] ** 2 + a[0, 2] ** 2 + a[1, 2] ** 2
    q = np.trace(a) / 3.0
    p2 = (a[0, 0] - q) ** 2 + (a[1, 1] - q) ** 2 + (a[2, 2] - q) ** 2 + 2.0 * p1
    p = math.sqrt(p2 / 6.0)
    if p == 0.0:
        return np.array([q, q, q])
    b = (a - q * np.eye(3)) / p
    r = np.linalg.det(b) / 2.0
    r = min(1.0, max(-1.0, r))
    phi = math.acos(r) / 3.0
    e1 = q + 2.0 * p * math.cos(phi)
    e3 = q + 2.0 * p * math.cos(phi + 2.0 * np.pi / 3.0)
    e2 = 3.0 * q - e1 - e3
    return np.array([e1, e2, e3])


def build_envt(mesh, nb, normals=None):
    """Area- and similarity-weighted voting tensor of a face neighborhood.

    ``C = sum_j w_j A_j n_j n_j^T / sum_j w_j`` over the neighborhood
    members, eigendecomposed with eigenvalues sorted descending and scaled
    so the eigenvalue vector has unit Euclidean norm (the stored tensor is
    scaled identically, keeping the eigensystem consistent).
    """
    normals = mesh.face_normals if normals is None else np.asarray(normals, dtype=np.float64)
    keep = ~mesh.face_degenerate[nb.members]
    members = nb.members[keep]
    weights = nb.weights[keep]
    if len(members) == 0:
        raise NumericalError(f"face {nb.center}: no usable neighborhood members")

    n = normals[members]
    wa = weights * mesh.face_areas[members]
    tensor = (n.T * wa) @ n / weights.sum()

    lams, vecs = eigen_sym3(tensor)
    if lams[2] < -1e-9 * max(lams[0], 1.0):
        raise NumericalError(f"face {nb.center}: voting tensor not positive semi-definite")
    lams = np.maximum(lams, 0.0)
    s = float(np.linalg.norm(lams))
    if s == 0.0:
        raise NumericalError(f"face {nb.center}: zero voting tensor")
    return Envt(tensor=tensor / s, eigenvalues=lams / s, eigenvectors=vecs)


def binary_optimize(lams, tau):
    """Quantize sorted normalized eigenvalues to one of three {0,1} patterns.

    ``lams[2] >= tau`` keeps all three (corner), ``lams[1] >= tau`` keeps
    two (edge), anything else keeps only the dominant one (planar).
    """
    l1, l2, l3 = lams
    if l3 >= tau:
        return np.array([1.0, 1.0, 1.0])
    if l2 >= tau:
        return np.array([1.0, 1.0, 0.0])
    if tau > l1:
        logger.warning("tau=%.3g exceeds the dominant eigenvalue %.3g; "
                       "treating the face as planar", tau, l1)
    return np.array([1.0, 0.0, 0.0])


def filter_normal(mesh, f, envt, lams_binary, damping):
    """Push one face normal toward the retained eigendirections.

    Returns ``normalize(d n + sum_k lam_k <e_k, n> e_k)``. If the result is
    the zero vector (possible only with ``d = 0`` and a normal orthogonal
    to every kept eigendirection), the previous normal is kept.
    """
    n = mesh.face_normals[f]
    coeff = lams_binary * (envt.eigenvectors.T @ n)
    out = damping * n + envt.eigenvectors @ coeff
    norm = np.linalg.norm(out)
    if norm == 0.0:
        logger.debug("face %d: filtered normal vanished; keeping previous normal", f)
        return n.copy()
    return out / norm


def normal_filter_pass(mesh, params, normals=None, timings=None):
    """One filtering pass over every face; returns the new normal array.

    Faces are processed against a snapshot of the input normals
    (``mesh.face_normals`` unless ``normals`` is given). Degenerate faces
    and faces with unusable neighborhoods keep their previous normals; a
    pass never aborts on per-face failures.
    """
    normals = mesh.face_normals if normals is None else np.asarray(normals, dtype=np.float64)
    k = backend.kernels()
    scheme = params.scheme
    radius = 0.0 if scheme.kind == "combinatorial" else float(scheme.radius)

    with backend.phase_timer(timings, "neighborhood"):
        offsets, members, weights = k.build_neighborhoods(
            backend.scheme_id(scheme.kind), radius, params.rho,
            mesh.faces, mesh.face_centroids, mesh.face_areas,
            np.ascontiguousarray(normals), mesh.face_adjacency,
            mesh.face_degenerate.astype(np.uint8),
            mesh.star_offsets, mesh.star_faces,
        )
    with backend.phase_timer(timings, "envt"):
        out = k.filter_from_neighborhoods(
            offsets, members, weights, mesh.face_areas,
            np.ascontiguousarray(normals),
            mesh.face_degenerate.astype(np.uint8),
            float(params.tau), float(params.damping),
        )
    return out
