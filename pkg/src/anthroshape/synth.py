"""Parametric synthetic population generator.

Stands in for a real anthropometric scan archive: each subject is an
articulated skeleton dressed with ellipsoid/capsule segments plus an
ellipsoidal head with subject-specific low-order radial bumps. The sitting
pose is produced by pure joint rotations about the lateral (+X) axis, so all
within-segment landmark distances are preserved exactly across poses.
"""

from __future__ import annotations

import os
from dataclasses import dataclass, field

import numpy as np

from .mesh import LANDMARK_NAMES, LandmarkSet, Mesh, Pose, write_landmarks, write_mesh

# (mean, std) in mm for the sampled skeleton parameters
DEFAULT_BODY_PARAMS = {
    "upper_arm": (330.0, 25.0),
    "forearm": (260.0, 20.0),
    "thigh": (430.0, 35.0),
    "shank": (410.0, 30.0),
    "torso_len": (500.0, 35.0),
    "neck_len": (90.0, 10.0),
    "shoulder_halfwidth": (190.0, 15.0),
    "hip_halfwidth": (95.0, 10.0),
    "torso_rx": (170.0, 15.0),
    "torso_rz": (110.0, 12.0),
    "arm_radius": (45.0, 6.0),
    "leg_radius": (70.0, 8.0),
    "head_rx": (78.0, 6.0),
    "head_ry": (110.0, 8.0),
    "head_rz": (95.0, 7.0),
}

# fractional offsets of the face landmarks on the head ellipsoid
_FACE_LAYOUT = {
    1: (0.00, 0.35),    # Sellion
    2: (-0.30, 0.18),   # Rt Infraorbitale
    3: (0.30, 0.18),    # Lt Infraorbitale
    4: (0.00, -0.75),   # Supramenton
}


@dataclass
class SynthParams:
    n_subjects: int
    seed: int = 0
    landmark_noise_mm: float = 15.0
    poses: tuple = (Pose.STANDING, Pose.SITTING)
    body_params: dict = field(default_factory=lambda: dict(DEFAULT_BODY_PARAMS))
    segment_resolution: int = 10   # lat rings per body segment
    head_resolution: int = 26      # lat rings for the head

    def __post_init__(self):
        if self.n_subjects < 1:
            raise ValueError("n_subjects must be >= 1")
        if self.landmark_noise_mm < 0:
            raise ValueError("landmark_noise_mm must be >= 0")
        self.poses = tuple(self.poses)
        if not self.poses or any(not isinstance(p, Pose) for p in self.poses):
            raise ValueError("poses must be a non-empty subset of {Standing, Sitting}")


@dataclass
class SubjectData:
    subject_id: str
    meshes: dict            # Pose -> Mesh
    landmarks: dict         # Pose -> LandmarkSet
    vertex_labels: dict     # Pose -> list[str], segment name per vertex


def _uv_sphere(n_lat: int, n_lon: int):
    """Unit-sphere point grid (poles included) and its triangulation."""
    dirs = [np.array([0.0, 1.0, 0.0])]
    for i in range(1, n_lat):
        theta = np.pi * i / n_lat
        for j in range(n_lon):
            phi = 2 * np.pi * j / n_lon
            dirs.append(np.array([
                np.sin(theta) * np.cos(phi),
                np.cos(theta),
                np.sin(theta) * np.sin(phi),
            ]))
    dirs.append(np.array([0.0, -1.0, 0.0]))
    dirs = np.array(dirs)

    tris = []
    def ring(i, j):
        return 1 + (i - 1) * n_lon + (j % n_lon)
    for j in range(n_lon):  # top cap
        tris.append([0, ring(1, j + 1), ring(1, j)])
    for i in range(1, n_lat - 1):
        for j in range(n_lon):
            a, b = ring(i, j), ring(i, j + 1)
            c, d = ring(i + 1, j), ring(i + 1, j + 1)
            tris.append([a, b, c])
            tris.append([b, d, c])
    bottom = len(dirs) - 1
    for j in range(n_lon):  # bottom cap
        tris.append([bottom, ring(n_lat - 1, j), ring(n_lat - 1, j + 1)])
    return dirs, np.array(tris, dtype=np.int64)


def _frame_from_axis(axis: np.ndarray):
    e1 = axis / np.linalg.norm(axis)
    helper = np.array([1.0, 0.0, 0.0]) if abs(e1[0]) < 0.9 else np.array([0.0, 0.0, 1.0])
    e2 = np.cross(e1, helper)
    e2 /= np.linalg.norm(e2)
    e3 = np.cross(e1, e2)
    return e1, e2, e3


def _capsule(p0, p1, radius, n_lat, n_lon):
    """Prolate spheroid spanning p0..p1 with the given cross radius."""
    p0 = np.asarray(p0, dtype=float)
    p1 = np.asarray(p1, dtype=float)
    mid = (p0 + p1) / 2
    half = np.linalg.norm(p1 - p0) / 2 + radius
    e1, e2, e3 = _frame_from_axis(p1 - p0)
    dirs, tris = _uv_sphere(n_lat, n_lon)
    pts = (mid[None, :]
           + np.outer(dirs[:, 1] * half, e1)
           + np.outer(dirs[:, 0] * radius, e2)
           + np.outer(dirs[:, 2] * radius, e3))
    return pts, tris


def _ellipsoid(center, radii, n_lat, n_lon):
    dirs, tris = _uv_sphere(n_lat, n_lon)
    pts = np.asarray(center, dtype=float)[None, :] + dirs * np.asarray(radii, dtype=float)
    return pts, tris


# low-order direction polynomials (real-harmonic flavored) for head bumps
_BUMP_TERMS = [
    lambda d: d[:, 0] * d[:, 1],
    lambda d: d[:, 1] * d[:, 2],
    lambda d: d[:, 0] * d[:, 2],
    lambda d: d[:, 0] ** 2 - d[:, 1] ** 2,
    lambda d: 3 * d[:, 2] ** 2 - 1,
    lambda d: d[:, 0] * d[:, 1] * d[:, 2],
    lambda d: d[:, 2] * (5 * d[:, 2] ** 2 - 3),
    lambda d: d[:, 0] * (d[:, 0] ** 2 - 3 * d[:, 1] ** 2),
]


def _head_mesh(center, radii, bump_coeffs, n_lat, n_lon):
    """Star-shaped head surface: ellipsoid radius modulated by smooth bumps."""
    dirs, tris = _uv_sphere(n_lat, n_lon)
    rx, ry, rz = radii
    base_r = 1.0 / np.sqrt((dirs[:, 0] / rx) ** 2
                           + (dirs[:, 1] / ry) ** 2
                           + (dirs[:, 2] / rz) ** 2)
    bump = np.zeros(len(dirs))
    for b, term in zip(bump_coeffs, _BUMP_TERMS):
        bump += b * term(dirs)
    pts = np.asarray(center, dtype=float)[None, :] + dirs * (base_r * (1.0 + bump))[:, None]
    return pts, tris


def _ellipsoid_surface_point(radii, fx, fy):
    """Point on an ellipsoid at fractional lateral/vertical offsets (front half)."""
    rx, ry, rz = radii
    x = fx * rx
    y = fy * ry
    z = rz * np.sqrt(max(0.0, 1.0 - fx ** 2 - fy ** 2))
    return np.array([x, y, z])


def _sample_body(rng, body_params):
    return {name: float(rng.normal(mean, std)) for name, (mean, std) in body_params.items()}


def _pose_directions(pose: Pose):
    """Unit direction of each limb segment, per pose. Rotations are about +X."""
    if pose == Pose.STANDING:
        down = np.array([0.0, -1.0, 0.0])
        return {"upper_arm": down, "forearm": down, "thigh": down, "shank": down}
    # sitting: thighs forward, shanks down, arms slightly forward with bent elbows
    c30, s30 = np.cos(np.pi / 6), np.sin(np.pi / 6)
    return {
        "upper_arm": np.array([0.0, -c30, s30]),
        "forearm": np.array([0.0, -s30, c30]),
        "thigh": np.array([0.0, 0.0, 1.0]),
        "shank": np.array([0.0, -1.0, 0.0]),
    }


def _subject_geometry(p: dict, pose: Pose):
    """Joint positions and landmark positions for one subject in one pose."""
    d = _pose_directions(pose)
    tl = p["torso_len"]
    joints = {}
    for side, sx in (("rt", -1.0), ("lt", 1.0)):
        shoulder = np.array([sx * p["shoulder_halfwidth"], tl, 0.0])
        elbow = shoulder + p["upper_arm"] * d["upper_arm"]
        wrist = elbow + p["forearm"] * d["forearm"]
        hip = np.array([sx * p["hip_halfwidth"], 0.0, 0.0])
        knee = hip + p["thigh"] * d["thigh"]
        ankle = knee + p["shank"] * d["shank"]
        joints[side] = {"shoulder": shoulder, "elbow": elbow, "wrist": wrist,
                        "hip": hip, "knee": knee, "ankle": ankle}
    head_center = np.array([0.0, tl + p["neck_len"] + p["head_ry"], 0.0])
    head_radii = (p["head_rx"], p["head_ry"], p["head_rz"])

    lms = {}
    for lid, (fx, fy) in _FACE_LAYOUT.items():
        lms[lid] = head_center + _ellipsoid_surface_point(head_radii, fx, fy)
    for lid, sx in ((5, -1.0), (7, 1.0)):  # tragions: lateral, z = 0
        fy = 0.05
        x = sx * p["head_rx"] * np.sqrt(1 - fy ** 2)
        lms[lid] = head_center + np.array([x, fy * p["head_ry"], 0.0])
    for lid, sx in ((6, -1.0), (8, 1.0)):  # gonions
        lms[lid] = head_center + np.array([sx * 0.70 * p["head_rx"],
                                           -0.60 * p["head_ry"],
                                           0.25 * p["head_rz"]])
    for lid, sx in ((10, -1.0), (12, 1.0)):  # clavicales, front of torso top
        lms[lid] = np.array([sx * 35.0, tl - 10.0, 0.80 * p["torso_rz"]])
    lms[20] = np.array([0.0, tl, -0.60 * p["torso_rz"]])        # cervicale
    lms[21] = np.array([0.0, tl - 35.0, 0.90 * p["torso_rz"]])  # suprasternale
    # joint landmarks carry a lateral (+X) offset only, which keeps them rigid
    # with respect to both adjacent segments under rotations about +X
    for side, sx in (("rt", -1.0), ("lt", 1.0)):
        j = joints[side]
        lms[22 if side == "rt" else 23] = j["shoulder"].copy()
        lms[24 if side == "rt" else 25] = j["elbow"] + np.array([sx * 25.0, 0, 0])
        lms[26 if side == "rt" else 27] = j["wrist"] + np.array([sx * 20.0, 0, 0])
        lms[28 if side == "rt" else 29] = j["hip"] + np.array([sx * 45.0, 0, 0])
        lms[30 if side == "rt" else 31] = j["knee"] + np.array([sx * 30.0, 0, 0])
        lms[32 if side == "rt" else 33] = j["ankle"] + np.array([sx * 28.0, 0, 0])
    return joints, head_center, head_radii, lms


def _subject_mesh_parts(p: dict, pose: Pose, bump_coeffs,
                        seg_res: int, head_res: int):
    joints, head_center, head_radii, _ = _subject_geometry(p, pose)
    tl = p["torso_len"]
    parts = []
    parts.append(("torso", *_ellipsoid((0.0, tl / 2, 0.0),
                                       (p["torso_rx"], tl / 2 + 40.0, p["torso_rz"]),
                                       seg_res + 4, 2 * seg_res + 4)))
    parts.append(("neck", *_capsule((0.0, tl, 0.0), (0.0, tl + p["neck_len"], 0.0),
                                    45.0, seg_res, 2 * seg_res)))
    parts.append(("head", *_head_mesh(head_center, head_radii, bump_coeffs,
                                      head_res, 2 * head_res)))
    for side in ("rt", "lt"):
        j = joints[side]
        parts.append((f"{side}_upper_arm",
                      *_capsule(j["shoulder"], j["elbow"], p["arm_radius"], seg_res, 2 * seg_res)))
        parts.append((f"{side}_forearm",
                      *_capsule(j["elbow"], j["wrist"], p["arm_radius"] * 0.85, seg_res, 2 * seg_res)))
        parts.append((f"{side}_thigh",
                      *_capsule(j["hip"], j["knee"], p["leg_radius"], seg_res, 2 * seg_res)))
        parts.append((f"{side}_shank",
                      *_capsule(j["knee"], j["ankle"], p["leg_radius"] * 0.70, seg_res, 2 * seg_res)))
    return parts


def _assemble(parts, subject_id, pose):
    verts, tris, labels = [], [], []
    offset = 0
    for label, pts, faces in parts:
        verts.append(pts)
        tris.append(faces + offset)
        labels.extend([label] * len(pts))
        offset += len(pts)
    mesh = Mesh(np.vstack(verts), np.vstack(tris), subject_id=subject_id, pose=pose)
    return mesh, labels


def synth_population(params: SynthParams):
    """Generate a deterministic synthetic dataset: list of SubjectData."""
    seeds = np.random.SeedSequence(params.seed).spawn(params.n_subjects)
    subjects = []
    for i in range(params.n_subjects):
        rng = np.random.default_rng(seeds[i])  # per-subject stream
        subject_id = f"subj{i:04d}"
        body = _sample_body(rng, params.body_params)
        bumps = rng.normal(0.0, 0.02, size=len(_BUMP_TERMS))
        # one noise draw per landmark, shared across poses would hide pose
        # sensitivity; draw per pose instead (noise-free case stays exact)
        meshes, lms_by_pose, labels_by_pose = {}, {}, {}
        for pose in params.poses:
            parts = _subject_mesh_parts(body, pose, bumps,
                                        params.segment_resolution, params.head_resolution)
            mesh, labels = _assemble(parts, subject_id, pose)
            _, _, _, lm_pos = _subject_geometry(body, pose)
            points = {}
            for lid in sorted(lm_pos):
                pos = lm_pos[lid]
                if params.landmark_noise_mm > 0:
                    pos = pos + rng.normal(0.0, params.landmark_noise_mm, 3)
                points[lid] = (LANDMARK_NAMES[lid], pos)
            meshes[pose] = mesh
            lms_by_pose[pose] = LandmarkSet(subject_id=subject_id, pose=pose, points=points)
            labels_by_pose[pose] = labels
        subjects.append(SubjectData(subject_id, meshes, lms_by_pose, labels_by_pose))
    return subjects


def write_dataset(subjects, out_dir) -> None:
    """Emit `<subject>/<pose>.obj` per mesh plus a single landmarks.csv."""
    os.makedirs(out_dir, exist_ok=True)
    all_lms = []
    for sub in subjects:
        sub_dir = os.path.join(out_dir, sub.subject_id)
        os.makedirs(sub_dir, exist_ok=True)
        for pose, mesh in sub.meshes.items():
            write_mesh(mesh, os.path.join(sub_dir, f"{pose.value}.obj"))
        all_lms.extend(sub.landmarks[p] for p in sub.landmarks)
    write_landmarks(all_lms, os.path.join(out_dir, "landmarks.csv"))
