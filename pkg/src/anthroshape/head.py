"""Head shape descriptors.

Facial PCA route: crop the face with two landmark-defined planes, rigidly
align it to a canonical four-landmark template, resample depth on a 128x128
grid scaled by the inter-infraorbitale distance, then project onto a PCA
subspace trained over the population.

Spherical-harmonic route: crop the head above the clavicale plane, express
vertices as radius-vs-direction about the centroid, least-squares fit a
real spherical-harmonic basis (optionally Tikhonov-regularized), and keep
the rotation-invariant per-degree energy spectrum.
"""

from __future__ import annotations

import json
import os
from dataclasses import dataclass

import numpy as np
from scipy.interpolate import griddata
from scipy.special import sph_harm_y

from .errors import (
    DegenerateConfigurationError,
    DimensionMismatchError,
    EmptyCropError,
    EmptyMeshError,
    InsufficientSupportError,
    MissingLandmarkError,
    NotConvergedError,
    RankDeficientError,
    SingularSystemError,
    ValidationError,
)
from .mesh import LandmarkSet, Mesh, Pose

GRID_SIZE = 128
GRID_ALPHA = 1.25  # grid half-width = alpha * |L3 - L2|
DEFAULT_LMAX = 10
DEFAULT_LAMBDA = 1e-6
NECK_MARGIN_MM = 60.0
CONDITION_LIMIT = 1e12
RESIDUAL_LIMIT_MM = 25.0

# Canonical positions of landmarks 1-4 (sellion, rt/lt infraorbitale,
# supramenton), head-centered, mm. Alignment targets these.
CANONICAL_FACE_TEMPLATE = {
    1: np.array([0.0, 38.5, 89.0]),
    2: np.array([-23.4, 19.8, 89.0]),
    3: np.array([23.4, 19.8, 89.0]),
    4: np.array([0.0, -82.5, 62.8]),
}


@dataclass
class DepthGrid:
    z: np.ndarray         # (128, 128) mm depth
    mask: np.ndarray      # (128, 128) bool, True where nearest-neighbor filled
    scale_d: float        # |L3 - L2| in mm
    subject_id: str = ""
    pose: Pose = Pose.STANDING

    def __post_init__(self):
        self.z = np.asarray(self.z, dtype=float)
        self.mask = np.asarray(self.mask, dtype=bool)
        if self.z.shape != (GRID_SIZE, GRID_SIZE) or self.mask.shape != (GRID_SIZE, GRID_SIZE):
            raise ValidationError(f"depth grid must be {GRID_SIZE}x{GRID_SIZE}")
        if not np.all(np.isfinite(self.z)):
            raise ValidationError("depth grid contains non-finite values")
        if self.scale_d <= 0:
            raise ValidationError("scale d must be > 0")


@dataclass
class PcaModel:
    mean: np.ndarray          # (16384,)
    components: np.ndarray    # (k, 16384) orthonormal rows
    eigenvalues: np.ndarray   # (k,) non-increasing, > 0
    training_id: str = ""
    truncated: bool = False   # k was reduced by 1 to the numerical rank

    def __post_init__(self):
        self.mean = np.asarray(self.mean, dtype=float).reshape(-1)
        self.components = np.asarray(self.components, dtype=float)
        self.eigenvalues = np.asarray(self.eigenvalues, dtype=float).reshape(-1)
        if self.components.ndim != 2 or self.components.shape[1] != self.mean.shape[0]:
            raise ValidationError("component/mean dimension mismatch")
        if len(self.eigenvalues) != len(self.components):
            raise ValidationError("eigenvalue count != component count")
        if np.any(np.diff(self.eigenvalues) > 0) or np.any(self.eigenvalues <= 0):
            raise ValidationError("eigenvalues must be positive and non-increasing")

    @property
    def k(self) -> int:
        return len(self.eigenvalues)


@dataclass
class FacePcaDescriptor:
    coeffs: np.ndarray
    subject_id: str
    pose: Pose
    model_id: str = ""

    def __post_init__(self):
        self.coeffs = np.asarray(self.coeffs, dtype=float).reshape(-1)
        if not np.all(np.isfinite(self.coeffs)):
            raise ValidationError("non-finite PCA coefficients")


@dataclass
class ShCoefficients:
    c: np.ndarray          # ((lmax+1)^2,) real-basis coefficients, mm
    lmax: int
    residual_rms: float    # mm
    converged: bool

    def __post_init__(self):
        self.c = np.asarray(self.c, dtype=float).reshape(-1)
        if len(self.c) != (self.lmax + 1) ** 2:
            raise ValidationError("coefficient count must be (lmax+1)^2")
        if self.residual_rms < 0:
            raise ValidationError("residual_rms must be >= 0")


@dataclass
class ShDescriptor:
    e: np.ndarray  # (lmax+1,) per-degree energy, mm
    subject_id: str
    pose: Pose

    def __post_init__(self):
        self.e = np.asarray(self.e, dtype=float).reshape(-1)
        if np.any(self.e < 0):
            raise ValidationError("energies must be >= 0")


def _require(lms: LandmarkSet, *ids):
    for lid in ids:
        if lid not in lms:
            raise MissingLandmarkError(lid)


def _crop(mesh: Mesh, keep: np.ndarray) -> Mesh:
    if not keep.any():
        raise EmptyCropError("no vertices survive the crop")
    new_index = -np.ones(mesh.n_vertices, dtype=np.int64)
    new_index[keep] = np.arange(int(keep.sum()))
    tri_keep = keep[mesh.triangles].all(axis=1)
    tris = new_index[mesh.triangles[tri_keep]]
    return Mesh(mesh.vertices[keep], tris, mesh.subject_id, mesh.pose)


def crop_face(mesh: Mesh, lms: LandmarkSet) -> Mesh:
    """Keep vertices in front of the rt-tragion coronal plane and above the
    rt-clavicale transverse plane."""
    _require(lms, 5, 10)
    z_cut = lms.position(5)[2]
    y_cut = lms.position(10)[1]
    keep = (mesh.vertices[:, 2] > z_cut) & (mesh.vertices[:, 1] > y_cut)
    return _crop(mesh, keep)


def crop_head(mesh: Mesh, lms: LandmarkSet, neck_margin_mm: float = NECK_MARGIN_MM) -> Mesh:
    """Keep vertices above the clavicale plane plus a neck margin."""
    _require(lms, 10)
    y_cut = lms.position(10)[1] + neck_margin_mm
    return _crop(mesh, mesh.vertices[:, 1] > y_cut)


def rigid_align(source: np.ndarray, target: np.ndarray):
    """Least-squares rotation+translation mapping source points onto target.

    Returns (R, t) with R @ p + t; standard SVD solution, det-corrected.
    """
    source = np.asarray(source, dtype=float)
    target = np.asarray(target, dtype=float)
    sc = source.mean(axis=0)
    tc = target.mean(axis=0)
    s0 = source - sc
    t0 = target - tc
    sing = np.linalg.svd(s0, compute_uv=False)
    if len(sing) < 2 or sing[1] < 1e-6 * max(sing[0], 1e-30):
        raise DegenerateConfigurationError("alignment landmarks are collinear")
    h = s0.T @ t0
    u, _, vt = np.linalg.svd(h)
    d = np.sign(np.linalg.det(vt.T @ u.T))
    r = vt.T @ np.diag([1.0, 1.0, d]) @ u.T
    t = tc - r @ sc
    return r, t


def align_face(face: Mesh, lms: LandmarkSet):
    """Rigidly register the face to the canonical four-landmark template.

    Returns the transformed mesh and the RMS landmark residual in mm.
    """
    _require(lms, 1, 2, 3, 4)
    src = np.array([lms.position(i) for i in (1, 2, 3, 4)])
    dst = np.array([CANONICAL_FACE_TEMPLATE[i] for i in (1, 2, 3, 4)])
    r, t = rigid_align(src, dst)
    moved = src @ r.T + t
    residual = float(np.sqrt(np.mean(np.sum((moved - dst) ** 2, axis=1))))
    aligned = Mesh(face.vertices @ r.T + t, face.triangles.copy(),
                   face.subject_id, face.pose)
    return aligned, residual


def resample_grid(face: Mesh, lms: LandmarkSet, alpha: float = GRID_ALPHA) -> DepthGrid:
    """Sample aligned-face depth on a 128x128 grid spanning +-alpha*|L3-L2|.

    Cubic scattered-data interpolation; cells outside the data's convex hull
    fall back to the nearest supported value and are flagged in the mask.
    """
    _require(lms, 2, 3)
    d = float(np.linalg.norm(lms.position(3) - lms.position(2)))
    if d <= 0:
        raise ValidationError("|L3 - L2| must be > 0")
    half = alpha * d
    axis = np.linspace(-half, half, GRID_SIZE)
    gx, gy = np.meshgrid(axis, axis)
    pts = face.vertices[:, :2]
    vals = face.vertices[:, 2]
    z = griddata(pts, vals, (gx, gy), method="cubic")
    mask = ~np.isfinite(z)
    unsupported = float(mask.mean())
    if unsupported > 0.5:
        raise InsufficientSupportError(
            f"{unsupported:.0%} of grid cells lack surface support")
    if mask.any():
        z[mask] = griddata(pts, vals, (gx[mask], gy[mask]), method="nearest")
    return DepthGrid(z=z, mask=mask, scale_d=d,
                     subject_id=face.subject_id, pose=face.pose)


def train_pca(grids, k: int) -> PcaModel:
    """PCA over flattened depth grids via the n x n Gram-matrix route.

    Covariance uses the 1/n (population) convention. If k exceeds the
    numerical rank by exactly one, the model is truncated to the rank and
    flagged; a larger excess (or rank zero) raises.
    """
    if len(grids) < 2:
        raise ValidationError("need at least 2 grids")
    return pca_fit(np.stack([g.z.reshape(-1) for g in grids]), k)


def pca_fit(x: np.ndarray, k: int) -> PcaModel:
    """Gram-route PCA over an (n, dim) data matrix; see train_pca."""
    x = np.asarray(x, dtype=float)
    n, dim = x.shape
    if n < 2:
        raise ValidationError("need at least 2 samples")
    if k < 1 or k > min(n - 1, dim):
        raise ValidationError(f"k must be in [1, min(n-1, {dim})]")
    mean = x.mean(axis=0)
    xc = x - mean
    gram = (xc @ xc.T) / n
    evals, evecs = np.linalg.eigh(gram)
    order = np.argsort(evals)[::-1]
    evals = evals[order]
    evecs = evecs[:, order]
    tol = max(evals[0], 0.0) * n * 1e-12 + 1e-30
    rank = int(np.sum(evals > tol))
    truncated = False
    if k > rank:
        if rank >= 1 and k == rank + 1:
            k = rank
            truncated = True
        else:
            raise RankDeficientError(f"requested k={k} but numerical rank is {rank}")
    comps = xc.T @ evecs[:, :k]
    comps /= np.sqrt(n * evals[:k])
    return PcaModel(mean=mean, components=comps.T, eigenvalues=evals[:k].copy(),
                    truncated=truncated)


def project_pca(model: PcaModel, grid: DepthGrid) -> FacePcaDescriptor:
    flat = grid.z.reshape(-1)
    if flat.shape[0] != model.mean.shape[0]:
        raise DimensionMismatchError(
            f"grid size {flat.shape[0]} != model dimension {model.mean.shape[0]}")
    coeffs = model.components @ (flat - model.mean)
    return FacePcaDescriptor(coeffs, grid.subject_id, grid.pose, model.training_id)


def reconstruct_pca(model: PcaModel, coeffs: np.ndarray) -> np.ndarray:
    return model.mean + np.asarray(coeffs, dtype=float) @ model.components


def save_pca_model(model: PcaModel, path) -> None:
    """JSON header plus a little-endian float64 sidecar for mean/components."""
    bin_path = os.fspath(path) + ".bin"
    header = {
        "k": model.k,
        "dimension": int(model.mean.shape[0]),
        "eigenvalues": [float(v) for v in model.eigenvalues],
        "training_id": model.training_id,
        "truncated": model.truncated,
        "alpha": GRID_ALPHA,
        "version": 1,
        "binary": os.path.basename(bin_path),
    }
    with open(path, "w", encoding="utf-8") as fh:
        json.dump(header, fh, indent=1)
    with open(bin_path, "wb") as fh:
        fh.write(model.mean.astype("<f8").tobytes())
        fh.write(model.components.astype("<f8").tobytes())


def load_pca_model(path) -> PcaModel:
    with open(path, "r", encoding="utf-8") as fh:
        header = json.load(fh)
    bin_path = os.path.join(os.path.dirname(os.fspath(path)), header["binary"])
    raw = np.fromfile(bin_path, dtype="<f8")
    dim = header["dimension"]
    k = header["k"]
    mean = raw[:dim]
    comps = raw[dim:dim + k * dim].reshape(k, dim)
    return PcaModel(mean=mean, components=comps,
                    eigenvalues=np.array(header["eigenvalues"]),
                    training_id=header.get("training_id", ""),
                    truncated=header.get("truncated", False))


def real_sh_basis(lmax: int, theta: np.ndarray, phi: np.ndarray) -> np.ndarray:
    """Real orthonormal spherical harmonics, shape (n, (lmax+1)^2).

    Column order: (l, m) with l ascending, m from -l to +l.
    """
    theta = np.asarray(theta, dtype=float)
    phi = np.asarray(phi, dtype=float)
    cols = []
    for l in range(lmax + 1):
        for m in range(-l, l + 1):
            y = sph_harm_y(l, abs(m), theta, phi)
            if m == 0:
                cols.append(y.real)
            elif m > 0:
                cols.append(np.sqrt(2.0) * (-1.0) ** m * y.real)
            else:
                cols.append(np.sqrt(2.0) * (-1.0) ** m * y.imag)
    return np.stack(cols, axis=1)


def degree_index(lmax: int) -> np.ndarray:
    """Degree l of each basis column."""
    return np.concatenate([np.full(2 * l + 1, l) for l in range(lmax + 1)])


def _vertex_weights(mesh: Mesh) -> np.ndarray:
    """Per-vertex quadrature weights: one third of incident triangle areas."""
    w = np.zeros(mesh.n_vertices)
    if mesh.n_triangles == 0:
        return np.ones(mesh.n_vertices)
    v = mesh.vertices
    t = mesh.triangles
    areas = 0.5 * np.linalg.norm(
        np.cross(v[t[:, 1]] - v[t[:, 0]], v[t[:, 2]] - v[t[:, 0]]), axis=1)
    for col in range(3):
        np.add.at(w, t[:, col], areas / 3.0)
    if not w.any():
        return np.ones(mesh.n_vertices)
    w[w == 0] = w[w > 0].min()
    return w


def spherical_fit(head: Mesh, lmax: int = DEFAULT_LMAX,
                  lam: float = DEFAULT_LAMBDA,
                  residual_limit_mm: float = RESIDUAL_LIMIT_MM) -> ShCoefficients:
    """Weighted least-squares expansion of centroid radius in real harmonics.

    Regularization penalizes lam * l^2 (l+1)^2 per coefficient (Laplacian
    squared), which stabilizes fits on partial angular coverage.
    """
    if head.n_vertices == 0:
        raise EmptyMeshError("empty head mesh")
    if lmax < 0 or lam < 0:
        raise ValidationError("lmax must be >= 0 and lambda >= 0")
    rel = head.vertices - head.vertices.mean(axis=0)
    r = np.linalg.norm(rel, axis=1)
    r_safe = np.where(r > 0, r, 1.0)
    theta = np.arccos(np.clip(rel[:, 1] / r_safe, -1.0, 1.0))
    phi = np.arctan2(rel[:, 2], rel[:, 0])
    a = real_sh_basis(lmax, theta, phi)
    w = _vertex_weights(head)
    w = w / w.sum()
    aw = a * w[:, None]
    m = a.T @ aw
    rhs = aw.T @ r
    ls = degree_index(lmax).astype(float)
    penalty = ls ** 2 * (ls + 1.0) ** 2
    if lam == 0.0:
        if np.linalg.matrix_rank(m) < m.shape[0]:
            raise SingularSystemError("unregularized normal equations are rank-deficient")
        system = m
    else:
        system = m + lam * np.diag(penalty)
    cond = float(np.linalg.cond(system))
    c = np.linalg.solve(system, rhs)
    resid = a @ c - r
    residual_rms = float(np.sqrt(np.sum(w * resid ** 2)))
    converged = cond <= CONDITION_LIMIT and residual_rms <= residual_limit_mm
    return ShCoefficients(c=c, lmax=lmax, residual_rms=residual_rms, converged=converged)


def sh_descriptor(coeffs: ShCoefficients, subject_id: str = "",
                  pose: Pose = Pose.STANDING) -> ShDescriptor:
    """Per-degree coefficient energy; rotation invariant."""
    if not coeffs.converged:
        raise NotConvergedError("spherical fit did not converge")
    ls = degree_index(coeffs.lmax)
    e = np.array([np.sqrt(np.sum(coeffs.c[ls == l] ** 2))
                  for l in range(coeffs.lmax + 1)])
    return ShDescriptor(e=e, subject_id=subject_id, pose=pose)
