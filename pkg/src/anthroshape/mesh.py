"""Core data model: triangle meshes, anthropometric landmark sets, and their file formats.

Coordinate convention used everywhere: +Y up, +Z toward the subject's front,
+X to the subject's left, origin at the mid-point between the hip joints.
Units are millimeters.
"""

from __future__ import annotations

import csv
import enum
import io
from dataclasses import dataclass, field

import numpy as np

from .errors import DuplicateLandmarkError, ParseError, ValidationError


class Pose(enum.Enum):
    STANDING = "standing"
    SITTING = "sitting"

    @classmethod
    def parse(cls, text: str) -> "Pose":
        try:
            return cls(text.strip().lower())
        except ValueError:
            raise ParseError(f"unknown pose {text!r} (expected standing/sitting)")


# Landmark id registry. Ids 1-8, 10, 12 are the classical face/neck points;
# ids >= 20 are body points added for the distance descriptor.
LANDMARK_NAMES = {
    1: "Sellion",
    2: "Rt Infraorbitale",
    3: "Lt Infraorbitale",
    4: "Supramenton",
    5: "Rt Tragion",
    6: "Rt Gonion",
    7: "Lt Tragion",
    8: "Lt Gonion",
    10: "Rt Clavicale",
    12: "Lt Clavicale",
    20: "Cervicale",
    21: "Suprasternale",
    22: "Rt Acromion",
    23: "Lt Acromion",
    24: "Rt Olecranon",
    25: "Lt Olecranon",
    26: "Rt Ulnar Styloid",
    27: "Lt Ulnar Styloid",
    28: "Rt Trochanterion",
    29: "Lt Trochanterion",
    30: "Rt Lateral Femoral Epicondyle",
    31: "Lt Lateral Femoral Epicondyle",
    32: "Rt Lateral Malleolus",
    33: "Lt Lateral Malleolus",
}

LANDMARK_CSV_HEADER = ["subject_id", "pose", "landmark_id", "name", "x_mm", "y_mm", "z_mm"]


@dataclass
class Mesh:
    """Triangulated 3D surface of one subject (body, face patch, or head)."""

    vertices: np.ndarray  # (n, 3) float64, mm
    triangles: np.ndarray  # (m, 3) int, indices into vertices
    subject_id: str = ""
    pose: Pose = Pose.STANDING

    def __post_init__(self):
        self.vertices = np.asarray(self.vertices, dtype=np.float64).reshape(-1, 3)
        self.triangles = np.asarray(self.triangles, dtype=np.int64).reshape(-1, 3)
        self.validate()

    def validate(self):
        if self.vertices.size and not np.all(np.isfinite(self.vertices)):
            raise ValidationError("non-finite vertex coordinates")
        if self.triangles.size:
            bad = (self.triangles < 0) | (self.triangles >= len(self.vertices))
            if bad.any():
                idx = int(self.triangles[bad][0])
                raise ValidationError(
                    f"triangle index {idx} out of range (vertex count {len(self.vertices)})"
                )
            a, b, c = self.triangles.T
            if np.any((a == b) | (b == c) | (a == c)):
                raise ValidationError("degenerate triangle with repeated vertex index")

    @property
    def n_vertices(self) -> int:
        return len(self.vertices)

    @property
    def n_triangles(self) -> int:
        return len(self.triangles)

    def translated(self, offset) -> "Mesh":
        return Mesh(self.vertices + np.asarray(offset, dtype=float),
                    self.triangles.copy(), self.subject_id, self.pose)

    def scaled(self, s: float) -> "Mesh":
        return Mesh(self.vertices * float(s), self.triangles.copy(),
                    self.subject_id, self.pose)


@dataclass
class LandmarkSet:
    """Named anthropometric 3D points for one subject in one pose."""

    subject_id: str
    pose: Pose
    points: dict = field(default_factory=dict)  # id -> (name, np.ndarray(3,))

    def __post_init__(self):
        clean = {}
        for lid, (name, pos) in self.points.items():
            pos = np.asarray(pos, dtype=np.float64).reshape(3)
            if not np.all(np.isfinite(pos)):
                raise ValidationError(f"landmark {lid} has non-finite position")
            clean[int(lid)] = (name, pos)
        self.points = clean

    def __contains__(self, lid: int) -> bool:
        return int(lid) in self.points

    def position(self, lid: int) -> np.ndarray:
        return self.points[int(lid)][1]

    def name(self, lid: int) -> str:
        return self.points[int(lid)][0]

    def ids(self):
        return sorted(self.points)


def load_mesh(path, subject_id: str = "", pose: Pose = Pose.STANDING) -> Mesh:
    """Parse a Wavefront OBJ subset: only `v x y z` and `f i j k [l]` lines.

    Quads are fan-split into two triangles. Other line types are skipped
    (counted, but not an error). Indices are 1-based per the OBJ convention.
    """
    with open(path, "r", encoding="utf-8") as fh:
        text = fh.read()
    return parse_obj(text, subject_id=subject_id, pose=pose)


def parse_obj(text: str, subject_id: str = "", pose: Pose = Pose.STANDING) -> Mesh:
    vertices = []
    faces = []
    for lineno, raw in enumerate(text.splitlines(), start=1):
        line = raw.strip()
        if not line or line.startswith("#"):
            continue
        parts = line.split()
        tag = parts[0]
        if tag == "v":
            if len(parts) < 4:
                raise ParseError("vertex line needs 3 coordinates", line=lineno)
            try:
                vertices.append([float(p) for p in parts[1:4]])
            except ValueError:
                raise ParseError(f"bad vertex coordinate in {line!r}", line=lineno)
        elif tag == "f":
            if len(parts) < 4:
                raise ParseError("face line needs at least 3 indices", line=lineno)
            try:
                # tolerate v/vt/vn references, keep the vertex index only
                idx = [int(p.split("/")[0]) for p in parts[1:]]
            except ValueError:
                raise ParseError(f"bad face index in {line!r}", line=lineno)
            if any(i < 1 for i in idx):
                raise ParseError("face indices must be positive (1-based)", line=lineno)
            idx = [i - 1 for i in idx]
            # fan split for quads and larger polygons
            for k in range(1, len(idx) - 1):
                faces.append([idx[0], idx[k], idx[k + 1]])
        # anything else is ignored
    faces_arr = np.array(faces, dtype=np.int64).reshape(-1, 3)
    if faces_arr.size and faces_arr.max() >= len(vertices):
        raise ValidationError(
            f"face index {int(faces_arr.max()) + 1} out of range "
            f"(vertex count {len(vertices)})")
    return Mesh(np.array(vertices, dtype=float).reshape(-1, 3),
                faces_arr, subject_id=subject_id, pose=pose)


def write_mesh(mesh: Mesh, path) -> None:
    with open(path, "w", encoding="utf-8") as fh:
        fh.write(dump_obj(mesh))


def dump_obj(mesh: Mesh) -> str:
    buf = io.StringIO()
    for v in mesh.vertices:
        buf.write(f"v {float(v[0])!r} {float(v[1])!r} {float(v[2])!r}\n")
    for t in mesh.triangles:
        buf.write(f"f {t[0] + 1} {t[1] + 1} {t[2] + 1}\n")
    return buf.getvalue()


def load_landmarks(path):
    """Read the landmark CSV; returns (list of LandmarkSet, list of warning strings).

    One LandmarkSet per (subject_id, pose) group, in file order of first
    appearance. Unknown landmark ids are accepted but flagged in the warnings.
    """
    with open(path, "r", encoding="utf-8", newline="") as fh:
        return parse_landmarks(fh)


def parse_landmarks(fh):
    reader = csv.reader(fh)
    try:
        header = next(reader)
    except StopIteration:
        raise ParseError("empty landmark file")
    if [h.strip() for h in header] != LANDMARK_CSV_HEADER:
        raise ParseError(
            f"bad header {header!r}, expected {','.join(LANDMARK_CSV_HEADER)}", line=1
        )
    groups: dict = {}
    warnings: list = []
    for lineno, row in enumerate(reader, start=2):
        if not row:
            continue
        if len(row) != 7:
            raise ParseError(f"expected 7 fields, got {len(row)}", line=lineno)
        subject_id, pose_s, lid_s, name, xs, ys, zs = row
        pose = Pose.parse(pose_s)
        try:
            lid = int(lid_s)
            pos = np.array([float(xs), float(ys), float(zs)])
        except ValueError:
            raise ParseError(f"bad numeric field in row {row!r}", line=lineno)
        key = (subject_id, pose)
        pts = groups.setdefault(key, {})
        if lid in pts:
            raise DuplicateLandmarkError(
                f"landmark id {lid} repeated for subject {subject_id!r} pose {pose.value}"
            )
        if lid not in LANDMARK_NAMES:
            warnings.append(f"unknown landmark id {lid} ({name!r}) for subject {subject_id!r}")
        pts[lid] = (name, pos)
    sets = [LandmarkSet(subject_id=s, pose=p, points=pts) for (s, p), pts in groups.items()]
    return sets, warnings


def write_landmarks(sets, path) -> None:
    with open(path, "w", encoding="utf-8", newline="") as fh:
        writer = csv.writer(fh)
        writer.writerow(LANDMARK_CSV_HEADER)
        for lms in sets:
            for lid in sorted(lms.points):
                name, pos = lms.points[lid]
                writer.writerow([lms.subject_id, lms.pose.value, lid, name,
                                 repr(float(pos[0])), repr(float(pos[1])), repr(float(pos[2]))])
