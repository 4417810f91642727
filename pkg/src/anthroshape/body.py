"""Body shape descriptors.

Two descriptors: a 15-entry vector of inter-landmark distances spanning
rigid bony segments (nearly pose invariant), and a 48-entry vector of real
Fourier modes of the radial silhouette contour in three orthographic views
(front, side, top; pose dependent).
"""

from __future__ import annotations

import csv
import enum
from dataclasses import dataclass, field

import numpy as np

from .errors import (
    EmptyImageError,
    EmptyMeshError,
    InvalidModeCountError,
    MissingLandmarkError,
    ParseError,
    ValidationError,
)
from .mesh import LandmarkSet, Mesh, Pose


class View(enum.Enum):
    FRONT = "front"  # project along -Z onto (x, y)
    SIDE = "side"    # project along -X onto (z, y)
    TOP = "top"      # project along -Y onto (x, z)


VIEW_ORDER = (View.FRONT, View.SIDE, View.TOP)

_VIEW_AXES = {
    View.FRONT: (0, 1),
    View.SIDE: (2, 1),
    View.TOP: (0, 2),
}

N_DISTANCE_PAIRS = 15
MODES_PER_VIEW = 16
SILHOUETTE_LENGTH = MODES_PER_VIEW * len(VIEW_ORDER)

# Each pair spans a single large bone or a rigid bony span.
DEFAULT_PAIRS_V1 = (
    (26, 24),  # rt wrist - rt elbow
    (27, 25),  # lt wrist - lt elbow
    (24, 22),  # rt elbow - rt acromion
    (25, 23),  # lt elbow - lt acromion
    (28, 30),  # rt trochanterion - rt knee
    (29, 31),  # lt trochanterion - lt knee
    (30, 32),  # rt knee - rt ankle
    (31, 33),  # lt knee - lt ankle
    (22, 23),  # biacromial breadth
    (28, 29),  # bitrochanteric breadth
    (20, 21),  # cervicale - suprasternale
    (5, 6),    # rt tragion - rt gonion
    (7, 8),    # lt tragion - lt gonion
    (1, 4),    # sellion - supramenton
    (5, 7),    # tragion - tragion
)


@dataclass(frozen=True)
class PairSpec:
    """Ordered list of exactly 15 landmark-id pairs, with a version tag."""

    pairs: tuple = DEFAULT_PAIRS_V1
    version: str = "v1"

    def __post_init__(self):
        pairs = tuple((int(a), int(b)) for a, b in self.pairs)
        object.__setattr__(self, "pairs", pairs)
        if len(pairs) != N_DISTANCE_PAIRS:
            raise ValidationError(f"PairSpec needs exactly {N_DISTANCE_PAIRS} pairs, got {len(pairs)}")
        seen = set()
        for a, b in pairs:
            if a == b:
                raise ValidationError(f"pair ({a},{b}) repeats a landmark")
            key = frozenset((a, b))
            if key in seen:
                raise ValidationError(f"pair ({a},{b}) duplicated")
            seen.add(key)

    @classmethod
    def load(cls, path, version=None):
        with open(path, "r", encoding="utf-8", newline="") as fh:
            reader = csv.reader(fh)
            header = next(reader, None)
            if header is None or [h.strip() for h in header] != ["index", "landmark_id_a", "landmark_id_b"]:
                raise ParseError("bad PairSpec header, expected index,landmark_id_a,landmark_id_b")
            rows = [r for r in reader if r]
        try:
            rows = sorted(((int(i), int(a), int(b)) for i, a, b in rows))
        except ValueError:
            raise ParseError("non-integer field in PairSpec file")
        pairs = tuple((a, b) for _, a, b in rows)
        return cls(pairs=pairs, version=version or "file")

    def save(self, path):
        with open(path, "w", encoding="utf-8", newline="") as fh:
            writer = csv.writer(fh)
            writer.writerow(["index", "landmark_id_a", "landmark_id_b"])
            for i, (a, b) in enumerate(self.pairs):
                writer.writerow([i, a, b])


@dataclass
class BodyDistanceDescriptor:
    d: np.ndarray  # (15,) mm
    subject_id: str
    pose: Pose
    pairspec_version: str

    def __post_init__(self):
        self.d = np.asarray(self.d, dtype=float).reshape(-1)
        if len(self.d) != N_DISTANCE_PAIRS:
            raise ValidationError("distance descriptor must have 15 entries")
        if not np.all(np.isfinite(self.d)) or np.any(self.d <= 0):
            raise ValidationError("distance entries must be finite and > 0")


@dataclass
class BinaryImage:
    bits: np.ndarray  # (height, width) bool, row 0 = top
    view: View
    mm_per_pixel: float
    origin_mm: tuple = (0.0, 0.0)  # mm coordinates of pixel-center (col=0, row=bottom)

    def __post_init__(self):
        self.bits = np.asarray(self.bits, dtype=bool)
        if self.mm_per_pixel <= 0:
            raise ValidationError("mm_per_pixel must be > 0")

    @property
    def width(self):
        return self.bits.shape[1]

    @property
    def height(self):
        return self.bits.shape[0]


@dataclass
class RadialContour:
    r: np.ndarray  # (n_samples,) radii in mm at angles 2*pi*i/n
    mm_per_pixel: float

    def __post_init__(self):
        self.r = np.asarray(self.r, dtype=float).reshape(-1)
        n = len(self.r)
        if n < 32 or (n & (n - 1)) != 0:
            raise ValidationError("n_samples must be a power of two >= 32")
        if np.any(self.r < 0):
            raise ValidationError("radii must be >= 0")


@dataclass
class SilhouetteFourierDescriptor:
    f: np.ndarray  # (48,) front|side|top blocks of 16 real modes
    subject_id: str
    pose: Pose

    def __post_init__(self):
        self.f = np.asarray(self.f, dtype=float).reshape(-1)
        if len(self.f) != SILHOUETTE_LENGTH:
            raise ValidationError("silhouette descriptor must have 48 entries")
        if not np.all(np.isfinite(self.f)):
            raise ValidationError("silhouette entries must be finite")


def distance_descriptor(lms: LandmarkSet, pairs: PairSpec = PairSpec()) -> BodyDistanceDescriptor:
    d = np.empty(N_DISTANCE_PAIRS)
    for k, (a, b) in enumerate(pairs.pairs):
        if a not in lms:
            raise MissingLandmarkError(a, pair_index=k)
        if b not in lms:
            raise MissingLandmarkError(b, pair_index=k)
        d[k] = np.linalg.norm(lms.position(a) - lms.position(b))
    return BodyDistanceDescriptor(d, lms.subject_id, lms.pose, pairs.version)


def render_silhouette(mesh: Mesh, view: View, resolution: int = 256) -> BinaryImage:
    """Orthographic occupancy render of the mesh in the given view.

    The square image frames the projected bounding box with a 5% margin on
    each side; a pixel is occupied when its center falls inside any
    projected triangle.
    """
    if mesh.n_triangles == 0:
        raise EmptyMeshError("mesh has no triangles")
    if resolution < 64:
        raise ValidationError("resolution must be >= 64")
    ax, ay = _VIEW_AXES[view]
    pts = mesh.vertices[:, [ax, ay]]
    lo = pts.min(axis=0)
    hi = pts.max(axis=0)
    extent = float(max(hi - lo))
    extent = max(extent, 1e-9)
    mm_per_pixel = extent * 1.1 / resolution
    center = (lo + hi) / 2
    half = resolution * mm_per_pixel / 2
    origin = center - half  # mm coords of the image's lower-left corner

    # pixel-center coordinates in mm
    cols = origin[0] + (np.arange(resolution) + 0.5) * mm_per_pixel
    rows = origin[1] + (np.arange(resolution) + 0.5) * mm_per_pixel
    occ = np.zeros((resolution, resolution), dtype=bool)  # [row_from_bottom, col]

    tri_pts = pts[mesh.triangles]  # (m, 3, 2)
    for p0, p1, p2 in tri_pts:
        xmin, ymin = np.minimum(np.minimum(p0, p1), p2)
        xmax, ymax = np.maximum(np.maximum(p0, p1), p2)
        c0 = np.searchsorted(cols, xmin) - 1
        c1 = np.searchsorted(cols, xmax) + 1
        r0 = np.searchsorted(rows, ymin) - 1
        r1 = np.searchsorted(rows, ymax) + 1
        c0, r0 = max(c0, 0), max(r0, 0)
        c1, r1 = min(c1, resolution), min(r1, resolution)
        if c0 >= c1 or r0 >= r1:
            continue
        gx, gy = np.meshgrid(cols[c0:c1], rows[r0:r1])
        # sign of the cross product against each edge; inside = all same sign
        def edge(a, b):
            return (b[0] - a[0]) * (gy - a[1]) - (b[1] - a[1]) * (gx - a[0])
        e0, e1, e2 = edge(p0, p1), edge(p1, p2), edge(p2, p0)
        inside = ((e0 >= 0) & (e1 >= 0) & (e2 >= 0)) | ((e0 <= 0) & (e1 <= 0) & (e2 <= 0))
        occ[r0:r1, c0:c1] |= inside

    bits = occ[::-1, :]  # row 0 at top
    px_origin = (float(origin[0] + 0.5 * mm_per_pixel), float(origin[1] + 0.5 * mm_per_pixel))
    return BinaryImage(bits=bits, view=view, mm_per_pixel=mm_per_pixel, origin_mm=px_origin)


def radial_contour(img: BinaryImage, n_samples: int = 256) -> RadialContour:
    """Radius-vs-angle contour about the occupied-area centroid.

    Radii are taken as the farthest occupied pixel along each ray, which
    keeps the contour single-valued even for non-star-shaped silhouettes.
    """
    if n_samples < 32 or (n_samples & (n_samples - 1)) != 0:
        raise ValidationError("n_samples must be a power of two >= 32")
    occ = img.bits[::-1, :]  # back to [row_from_bottom, col]
    rows, cols = np.nonzero(occ)
    if len(rows) == 0:
        raise EmptyImageError("no occupied pixels")
    cx = cols.mean()
    cy = rows.mean()
    h, w = occ.shape
    max_r = float(np.hypot(w, h))
    step = 0.25
    n_steps = int(max_r / step) + 1
    ts = np.arange(n_steps) * step
    angles = 2 * np.pi * np.arange(n_samples) / n_samples
    cos_t = np.cos(angles)
    sin_t = np.sin(angles)
    xs = cx + np.outer(cos_t, ts)  # (n_samples, n_steps)
    ys = cy + np.outer(sin_t, ts)
    ci = np.rint(xs).astype(int)
    ri = np.rint(ys).astype(int)
    ok = (ci >= 0) & (ci < w) & (ri >= 0) & (ri < h)
    hit = np.zeros_like(ok)
    hit[ok] = occ[ri[ok], ci[ok]]
    # radius = projection of the farthest hit pixel's center onto the ray,
    # so a single occupied pixel at the centroid reads as radius 0
    proj = (ci - cx) * cos_t[:, None] + (ri - cy) * sin_t[:, None]
    proj = np.where(hit, proj, -np.inf).max(axis=1)
    r = np.maximum(proj, 0.0)
    r[~hit.any(axis=1)] = 0.0
    return RadialContour(r=r * img.mm_per_pixel, mm_per_pixel=img.mm_per_pixel)


def fourier_descriptor(contour: RadialContour, n_modes: int = MODES_PER_VIEW) -> np.ndarray:
    """Real parts of the first n_modes DFT coefficients of the radial contour.

    Normalized by the sample count so mode 0 equals the mean radius in mm.
    """
    n = len(contour.r)
    if n_modes > n // 2:
        raise InvalidModeCountError(f"n_modes {n_modes} exceeds n_samples/2 = {n // 2}")
    spectrum = np.fft.fft(contour.r) / n
    return spectrum.real[:n_modes].copy()


def silhouette_descriptor(mesh: Mesh, resolution: int = 256,
                          n_samples: int = 256) -> SilhouetteFourierDescriptor:
    blocks = []
    for view in VIEW_ORDER:
        img = render_silhouette(mesh, view, resolution)
        contour = radial_contour(img, n_samples)
        blocks.append(fourier_descriptor(contour, MODES_PER_VIEW))
    return SilhouetteFourierDescriptor(np.concatenate(blocks), mesh.subject_id, mesh.pose)
