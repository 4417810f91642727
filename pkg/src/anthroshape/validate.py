"""Per-subject fitness checks: which descriptors can be extracted and why not."""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

from . import head
from .body import PairSpec
from .errors import EmptyCropError, MissingLandmarkError
from .mesh import LANDMARK_NAMES, LandmarkSet, Mesh

FACE_PCA_LANDMARKS = (1, 2, 3, 4, 5, 10)
SH_LANDMARKS = (10,)
MIN_FACE_VERTICES = 200
SH_COVERAGE_AT_RISK = 0.70


@dataclass
class DescriptorCheck:
    passed: bool
    reasons: list = field(default_factory=list)
    at_risk: bool = False


@dataclass
class ValidationReport:
    subject_id: str
    checks: dict                      # descriptor name -> DescriptorCheck
    face_vertex_count: int = 0
    head_coverage: float = 0.0

    def all_pass(self) -> bool:
        return all(c.passed for c in self.checks.values())


def _missing(lms: LandmarkSet, ids):
    return [lid for lid in ids if lid not in lms]


def _reason(lid: int) -> str:
    name = LANDMARK_NAMES.get(lid, f"id {lid}")
    return f"missing {name}"


def head_coverage_fraction(head_mesh: Mesh, n_bands: int = 8, n_sectors: int = 16) -> float:
    """Fraction of equal-solid-angle direction bins hit by at least one vertex."""
    rel = head_mesh.vertices - head_mesh.vertices.mean(axis=0)
    r = np.linalg.norm(rel, axis=1)
    r = np.where(r > 0, r, 1.0)
    cos_t = np.clip(rel[:, 1] / r, -1.0, 1.0)
    phi = np.arctan2(rel[:, 2], rel[:, 0])
    band = np.clip(((cos_t + 1) / 2 * n_bands).astype(int), 0, n_bands - 1)
    sector = np.clip(((phi + np.pi) / (2 * np.pi) * n_sectors).astype(int), 0, n_sectors - 1)
    occupied = set(zip(band.tolist(), sector.tolist()))
    return len(occupied) / (n_bands * n_sectors)


def validate_subject(mesh: Mesh, lms: LandmarkSet,
                     pairs: PairSpec = PairSpec()) -> ValidationReport:
    checks = {}

    needed = sorted({lid for pair in pairs.pairs for lid in pair})
    missing = _missing(lms, needed)
    checks["distance15"] = DescriptorCheck(
        passed=not missing, reasons=[_reason(l) for l in missing])

    checks["silhouette48"] = DescriptorCheck(
        passed=mesh.n_triangles > 0,
        reasons=[] if mesh.n_triangles > 0 else ["mesh has no triangles"])

    face_count = 0
    missing = _missing(lms, FACE_PCA_LANDMARKS)
    reasons = [_reason(l) for l in missing]
    if not missing:
        try:
            face = head.crop_face(mesh, lms)
            face_count = face.n_vertices
            if face_count < MIN_FACE_VERTICES:
                reasons.append(f"facial patch too sparse ({face_count} vertices)")
        except EmptyCropError:
            reasons.append("facial crop is empty")
    checks["face-pca"] = DescriptorCheck(passed=not reasons, reasons=reasons)

    coverage = 0.0
    at_risk = False
    missing = _missing(lms, SH_LANDMARKS)
    reasons = [_reason(l) for l in missing]
    if not missing:
        try:
            cropped = head.crop_head(mesh, lms)
            coverage = head_coverage_fraction(cropped)
            if coverage < SH_COVERAGE_AT_RISK:
                at_risk = True
                reasons.append(f"at-risk: low coverage ({coverage:.2f})")
        except EmptyCropError:
            reasons.append("head crop is empty")
    checks["sh-energy"] = DescriptorCheck(
        passed=not missing and coverage > 0, reasons=reasons, at_risk=at_risk)

    return ValidationReport(subject_id=lms.subject_id, checks=checks,
                            face_vertex_count=face_count, head_coverage=coverage)
