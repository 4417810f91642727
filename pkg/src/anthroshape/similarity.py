"""Distance metrics, descriptor persistence, and pairwise similarity matrices."""

from __future__ import annotations

import enum
import json
import warnings
from dataclasses import dataclass, field

import numpy as np

from .errors import (
    DimensionMismatchError,
    IncompatibleMetricError,
    NonPositiveEigenvalueError,
    ParseError,
    ValidationError,
    VersionMismatchWarning,
)
from .mesh import Pose


class MetricKind(enum.Enum):
    L1 = "l1"
    L2 = "l2"
    MAHALANOBIS = "mahalanobis"

    @classmethod
    def parse(cls, text: str) -> "MetricKind":
        try:
            return cls(text.strip().lower())
        except ValueError:
            raise ValidationError(f"unknown metric {text!r}")


class DescriptorType(enum.Enum):
    DISTANCE15 = "distance15"
    SILHOUETTE48 = "silhouette48"
    FACE_PCA = "face-pca"
    SH_ENERGY = "sh-energy"

    @classmethod
    def parse(cls, text: str) -> "DescriptorType":
        try:
            return cls(text.strip().lower())
        except ValueError:
            raise ValidationError(f"unknown descriptor type {text!r}")


@dataclass
class Metric:
    kind: MetricKind
    eigenvalues: np.ndarray | None = None  # Mahalanobis whitening weights

    def __post_init__(self):
        if isinstance(self.kind, str):
            self.kind = MetricKind.parse(self.kind)
        if self.kind == MetricKind.MAHALANOBIS:
            if self.eigenvalues is None:
                raise ValidationError("Mahalanobis metric needs eigenvalues")
            self.eigenvalues = np.asarray(self.eigenvalues, dtype=float).reshape(-1)
            if np.any(self.eigenvalues <= 0):
                raise NonPositiveEigenvalueError("eigenvalues must be > 0")


@dataclass
class DescriptorSet:
    descriptor_type: DescriptorType
    dimension: int
    entries: dict = field(default_factory=dict)  # (subject_id, Pose) -> np.ndarray
    provenance: str = ""

    def add(self, subject_id: str, pose: Pose, vector) -> None:
        vector = np.asarray(vector, dtype=float).reshape(-1)
        if len(vector) != self.dimension:
            raise DimensionMismatchError(
                f"vector for {subject_id!r} has length {len(vector)}, expected {self.dimension}")
        key = (subject_id, pose)
        if key in self.entries:
            raise ValidationError(f"duplicate entry for {key}")
        self.entries[key] = vector

    def filter_pose(self, pose: Pose) -> "DescriptorSet":
        sub = DescriptorSet(self.descriptor_type, self.dimension, provenance=self.provenance)
        for (sid, p), vec in self.entries.items():
            if p == pose:
                sub.entries[(sid, p)] = vec
        return sub

    def keys(self):
        return sorted(self.entries, key=lambda k: (k[0], k[1].value))

    def __len__(self):
        return len(self.entries)


@dataclass
class SimilarityMatrix:
    ids: list  # ordered (subject_id, Pose) keys
    values: np.ndarray  # (n, n) pairwise distances

    def __post_init__(self):
        self.values = np.asarray(self.values, dtype=float)
        n = len(self.ids)
        if self.values.shape != (n, n):
            raise ValidationError("matrix shape does not match id count")
        if np.any(self.values < 0):
            raise ValidationError("distances must be non-negative")
        if np.max(np.abs(np.diagonal(self.values))) > 1e-12:
            raise ValidationError("diagonal must be zero")
        if np.max(np.abs(self.values - self.values.T)) > 1e-12:
            raise ValidationError("matrix must be symmetric")


def vec_distance(a, b, metric: Metric) -> float:
    a = np.asarray(a, dtype=float).reshape(-1)
    b = np.asarray(b, dtype=float).reshape(-1)
    if a.shape != b.shape:
        raise DimensionMismatchError(f"lengths {len(a)} vs {len(b)}")
    diff = a - b
    if metric.kind == MetricKind.L1:
        return float(np.sum(np.abs(diff)))
    if metric.kind == MetricKind.L2:
        return float(np.sqrt(np.sum(diff ** 2)))
    if len(metric.eigenvalues) != len(a):
        raise DimensionMismatchError(
            f"eigenvalue count {len(metric.eigenvalues)} != vector length {len(a)}")
    return float(np.sqrt(np.sum(diff ** 2 / metric.eigenvalues)))


def check_metric_compat(descriptor_type: DescriptorType, metric: Metric) -> None:
    if metric.kind == MetricKind.MAHALANOBIS and descriptor_type != DescriptorType.FACE_PCA:
        raise IncompatibleMetricError(
            f"Mahalanobis is only defined for {DescriptorType.FACE_PCA.value}")


def build_similarity_matrix(dset: DescriptorSet, metric: Metric) -> SimilarityMatrix:
    if len(dset) == 0:
        raise ValidationError("empty descriptor set")
    check_metric_compat(dset.descriptor_type, metric)
    ids = dset.keys()
    n = len(ids)
    vals = np.zeros((n, n))
    for i in range(n):
        for j in range(i + 1, n):
            d = vec_distance(dset.entries[ids[i]], dset.entries[ids[j]], metric)
            vals[i, j] = vals[j, i] = d
    return SimilarityMatrix(ids=ids, values=vals)


def save_descriptors(dset: DescriptorSet, path) -> None:
    """JSON Lines: one object per subject-pose, full float round-trip precision."""
    with open(path, "w", encoding="utf-8") as fh:
        for (sid, pose) in dset.keys():
            vec = dset.entries[(sid, pose)]
            record = {
                "subject_id": sid,
                "pose": pose.value,
                "type": dset.descriptor_type.value,
                "dim": dset.dimension,
                "provenance": dset.provenance,
                "vector": [float(v) for v in vec],
            }
            fh.write(json.dumps(record) + "\n")


def load_descriptors(path, expected_provenance: str | None = None) -> DescriptorSet:
    dset = None
    with open(path, "r", encoding="utf-8") as fh:
        for lineno, line in enumerate(fh, start=1):
            line = line.strip()
            if not line:
                continue
            try:
                rec = json.loads(line)
            except json.JSONDecodeError as exc:
                raise ParseError(f"bad JSON: {exc}", line=lineno)
            try:
                dtype = DescriptorType.parse(rec["type"])
                pose = Pose.parse(rec["pose"])
                sid = rec["subject_id"]
                dim = int(rec["dim"])
                vec = np.array(rec["vector"], dtype=float)
            except (KeyError, ValidationError, ParseError, ValueError) as exc:
                raise ParseError(f"bad record: {exc}", line=lineno)
            if dset is None:
                dset = DescriptorSet(dtype, dim, provenance=rec.get("provenance", ""))
            if len(vec) != dset.dimension or dim != dset.dimension:
                raise ParseError(
                    f"subject {sid!r} has dimension {len(vec)}, expected {dset.dimension}",
                    line=lineno)
            dset.add(sid, pose, vec)
    if dset is None:
        raise ParseError("descriptor file is empty")
    if expected_provenance is not None and dset.provenance != expected_provenance:
        warnings.warn(
            f"descriptor provenance {dset.provenance!r} differs from current "
            f"configuration {expected_provenance!r}", VersionMismatchWarning)
    return dset
