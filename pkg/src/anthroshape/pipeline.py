"""Dataset-directory conventions and offline descriptor extraction.

A dataset directory holds `<subject>/<pose>.obj` meshes plus one
`landmarks.csv`; extraction writes JSON-Lines descriptor files (and the
face-PCA model) under `<dataset>/descriptors/`.
"""

from __future__ import annotations

import os
from dataclasses import dataclass, field

import numpy as np

from . import body, head
from .errors import AnthroShapeError, ParseError
from .mesh import LandmarkSet, Mesh, Pose, load_landmarks, load_mesh
from .similarity import (
    DescriptorSet,
    DescriptorType,
    Metric,
    MetricKind,
    load_descriptors,
    save_descriptors,
)

DESCRIPTOR_DIRNAME = "descriptors"
PCA_MODEL_FILENAME = "face-pca-model.json"


@dataclass
class DatasetHandle:
    root: str
    landmark_sets: dict = field(default_factory=dict)  # (subject_id, Pose) -> LandmarkSet

    @property
    def dataset_id(self) -> str:
        return os.path.basename(os.path.normpath(self.root))

    def subjects(self):
        return sorted({sid for sid, _pose in self.landmark_sets})

    def poses(self):
        return sorted({pose for _sid, pose in self.landmark_sets}, key=lambda p: p.value)

    def mesh_path(self, subject_id: str, pose: Pose) -> str:
        return os.path.join(self.root, subject_id, f"{pose.value}.obj")

    def load_mesh(self, subject_id: str, pose: Pose) -> Mesh:
        path = self.mesh_path(subject_id, pose)
        if not os.path.exists(path):
            raise ParseError(f"no mesh for subject {subject_id!r} pose {pose.value}")
        return load_mesh(path, subject_id=subject_id, pose=pose)

    def descriptor_path(self, dtype: DescriptorType) -> str:
        return os.path.join(self.root, DESCRIPTOR_DIRNAME, f"{dtype.value}.jsonl")

    def pca_model_path(self) -> str:
        return os.path.join(self.root, DESCRIPTOR_DIRNAME, PCA_MODEL_FILENAME)

    def extracted_types(self):
        return [t for t in DescriptorType if os.path.exists(self.descriptor_path(t))]

    def load_descriptors(self, dtype: DescriptorType) -> DescriptorSet:
        path = self.descriptor_path(dtype)
        if not os.path.exists(path):
            raise ParseError(
                f"descriptors {dtype.value!r} not extracted for dataset {self.dataset_id!r}")
        return load_descriptors(path)


def open_dataset(root) -> DatasetHandle:
    root = os.fspath(root)
    lm_path = os.path.join(root, "landmarks.csv")
    if not os.path.exists(lm_path):
        raise ParseError(f"{root!r} is not a dataset directory (no landmarks.csv)")
    sets, _warnings = load_landmarks(lm_path)
    handle = DatasetHandle(root=root)
    for lms in sets:
        handle.landmark_sets[(lms.subject_id, lms.pose)] = lms
    return handle


def _iter_subject_meshes(ds: DatasetHandle):
    for (sid, pose) in sorted(ds.landmark_sets, key=lambda k: (k[0], k[1].value)):
        yield sid, pose, ds.landmark_sets[(sid, pose)]


def extract_distance15(ds: DatasetHandle, pairs: body.PairSpec = body.PairSpec()) -> DescriptorSet:
    dset = DescriptorSet(DescriptorType.DISTANCE15, body.N_DISTANCE_PAIRS,
                         provenance=f"pairspec:{pairs.version}")
    for sid, pose, lms in _iter_subject_meshes(ds):
        dset.add(sid, pose, body.distance_descriptor(lms, pairs).d)
    return dset


def extract_silhouette48(ds: DatasetHandle) -> DescriptorSet:
    dset = DescriptorSet(DescriptorType.SILHOUETTE48, body.SILHOUETTE_LENGTH,
                         provenance="silhouette:256/256/v1")
    for sid, pose, _lms in _iter_subject_meshes(ds):
        mesh = ds.load_mesh(sid, pose)
        dset.add(sid, pose, body.silhouette_descriptor(mesh).f)
    return dset


def extract_face_pca(ds: DatasetHandle, k: int | None = None,
                     training_pose: Pose = Pose.STANDING,
                     variance_target: float = 0.95, k_cap: int = 40):
    """Train the PCA model on the training pose, project every pose.

    Returns (DescriptorSet, PcaModel).
    """
    grids = {}
    for sid, pose, lms in _iter_subject_meshes(ds):
        mesh = ds.load_mesh(sid, pose)
        face = head.crop_face(mesh, lms)
        aligned, _res = head.align_face(face, lms)
        grids[(sid, pose)] = head.resample_grid(aligned, lms)
    train_keys = [key for key in grids if key[1] == training_pose]
    if len(train_keys) < 2:
        raise AnthroShapeError("face PCA needs at least 2 training subjects")
    train_grids = [grids[key] for key in sorted(train_keys)]
    if k is None:
        probe = head.train_pca(train_grids, min(len(train_grids) - 1, k_cap))
        frac = np.cumsum(probe.eigenvalues) / probe.eigenvalues.sum()
        k = min(int(np.searchsorted(frac, variance_target) + 1),
                k_cap, len(probe.eigenvalues))
    model = head.train_pca(train_grids, k)
    model.training_id = f"{ds.dataset_id}:{training_pose.value}:k{model.k}"
    dset = DescriptorSet(DescriptorType.FACE_PCA, model.k,
                         provenance=f"pca:{model.training_id}")
    for (sid, pose), grid in grids.items():
        dset.add(sid, pose, head.project_pca(model, grid).coeffs)
    return dset, model


def extract_sh_energy(ds: DatasetHandle, lmax: int = head.DEFAULT_LMAX,
                      lam: float = head.DEFAULT_LAMBDA):
    """Per-degree harmonic energies; non-converged subjects are skipped.

    Returns (DescriptorSet, list of skipped (subject_id, pose)).
    """
    dset = DescriptorSet(DescriptorType.SH_ENERGY, lmax + 1,
                         provenance=f"sh:lmax{lmax}:lam{lam:g}")
    skipped = []
    for sid, pose, lms in _iter_subject_meshes(ds):
        mesh = ds.load_mesh(sid, pose)
        cropped = head.crop_head(mesh, lms)
        coeffs = head.spherical_fit(cropped, lmax, lam)
        if not coeffs.converged:
            skipped.append((sid, pose))
            continue
        dset.add(sid, pose, head.sh_descriptor(coeffs, sid, pose).e)
    return dset, skipped


def extract(ds: DatasetHandle, dtype: DescriptorType, pairs=None, k=None,
            lmax=head.DEFAULT_LMAX, lam=head.DEFAULT_LAMBDA) -> DescriptorSet:
    """Run one extractor and persist the result under descriptors/."""
    os.makedirs(os.path.join(ds.root, DESCRIPTOR_DIRNAME), exist_ok=True)
    if dtype == DescriptorType.DISTANCE15:
        dset = extract_distance15(ds, pairs or body.PairSpec())
    elif dtype == DescriptorType.SILHOUETTE48:
        dset = extract_silhouette48(ds)
    elif dtype == DescriptorType.FACE_PCA:
        dset, model = extract_face_pca(ds, k=k)
        head.save_pca_model(model, ds.pca_model_path())
    else:
        dset, _skipped = extract_sh_energy(ds, lmax=lmax, lam=lam)
    save_descriptors(dset, ds.descriptor_path(dtype))
    return dset


def resolve_metric(ds: DatasetHandle, dtype: DescriptorType, kind: MetricKind) -> Metric:
    """Build a Metric; Mahalanobis pulls eigenvalues from the stored PCA model."""
    if kind != MetricKind.MAHALANOBIS:
        return Metric(kind)
    model = head.load_pca_model(ds.pca_model_path())
    return Metric(kind, eigenvalues=model.eigenvalues)


class UnknownSubjectError(AnthroShapeError):
    """Query names a subject/pose with no descriptor entry."""


def run_query(ds: DatasetHandle, dtype: DescriptorType, kind: MetricKind,
              subject_id: str | None, pose: Pose, k: int,
              vector=None) -> dict:
    """Rank the same-pose gallery against a subject's descriptor (or raw vector).

    The returned payload is the single wire shape used by both the CLI and
    the HTTP API, which keeps the two surfaces identical by construction.
    """
    from .retrieval import rank_gallery

    dset = ds.load_descriptors(dtype)
    gallery = dset.filter_pose(pose)
    if vector is not None:
        query_vec = np.asarray(vector, dtype=float)
        query_desc = {"vector": [float(v) for v in query_vec]}
    else:
        key = (subject_id, pose)
        if key not in gallery.entries:
            raise UnknownSubjectError(
                f"no {dtype.value} descriptor for subject {subject_id!r} pose {pose.value}")
        query_vec = gallery.entries[key]
        query_desc = {"subject_id": subject_id, "pose": pose.value}
    metric = resolve_metric(ds, dtype, kind)
    k = min(k, len(gallery))
    ranked = rank_gallery(query_vec, gallery, metric, k)
    return {
        "dataset": ds.dataset_id,
        "type": dtype.value,
        "metric": kind.value,
        "k": k,
        "query": query_desc,
        "matches": [{"subject_id": sid, "distance": d} for sid, d in ranked.matches],
    }


def run_cmc(ds: DatasetHandle, dtype: DescriptorType, kind: MetricKind,
            gallery_pose: Pose = Pose.STANDING, probe_pose: Pose = Pose.SITTING):
    """Identification experiment; returns (CmcCurve, JSON summary dict)."""
    from .retrieval import cmc as run

    dset = ds.load_descriptors(dtype)
    gallery = dset.filter_pose(gallery_pose)
    probe = dset.filter_pose(probe_pose)
    metric = resolve_metric(ds, dtype, kind)
    curve = run(gallery, probe, metric)
    summary = {
        "rank1": curve.rate_at(1),
        "rank5": curve.rate_at(min(5, curve.gallery_size)),
        "gallery_size": curve.gallery_size,
        "probe_count": curve.probe_count,
        "metric": kind.value,
        "descriptor_type": dtype.value,
        "gallery_pose": gallery_pose.value,
        "probe_pose": probe_pose.value,
    }
    return curve, summary


def build_dendrogram(ds: DatasetHandle, dtype: DescriptorType, kind: MetricKind,
                     linkage, pose: Pose = Pose.STANDING):
    from .cluster import agglomerate
    from .similarity import build_similarity_matrix

    dset = ds.load_descriptors(dtype).filter_pose(pose)
    metric = resolve_metric(ds, dtype, kind)
    matrix = build_similarity_matrix(dset, metric)
    return agglomerate(matrix, linkage)


def run_clusters(ds: DatasetHandle, dtype: DescriptorType, kind: MetricKind,
                 linkage, k: int, pose: Pose = Pose.STANDING) -> dict:
    from .cluster import cut

    tree = build_dendrogram(ds, dtype, kind, linkage, pose)
    assignment = cut(tree, k)
    return {
        "dataset": ds.dataset_id,
        "type": dtype.value,
        "metric": kind.value,
        "linkage": linkage.value,
        "k": k,
        "pose": pose.value,
        "labels": {sid: idx for sid, idx in sorted(assignment.labels.items())},
    }
