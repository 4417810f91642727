"""Scikit-learn style estimator wrappers around the descriptor extractors.

Each extractor is a transformer: `transform` maps a list of subjects to an
(n, dim) feature matrix, so the pipelines compose with the wider sklearn
ecosystem (pipelines, grid search over get_params/set_params).
"""

from __future__ import annotations

import numpy as np
from sklearn.base import BaseEstimator, TransformerMixin

from . import body, head
from .errors import ValidationError
from .similarity import DescriptorSet, DescriptorType, Metric, MetricKind
from .retrieval import rank_gallery


class DistanceDescriptorExtractor(BaseEstimator, TransformerMixin):
    """LandmarkSet list -> (n, 15) matrix of inter-landmark distances (mm)."""

    def __init__(self, pairs: body.PairSpec = body.PairSpec()):
        self.pairs = pairs

    def fit(self, X, y=None):
        return self

    def transform(self, X):
        return np.stack([body.distance_descriptor(lms, self.pairs).d for lms in X])


class SilhouetteFourierExtractor(BaseEstimator, TransformerMixin):
    """Mesh list -> (n, 48) matrix of radial-contour Fourier modes."""

    def __init__(self, resolution: int = 256, n_samples: int = 256):
        self.resolution = resolution
        self.n_samples = n_samples

    def fit(self, X, y=None):
        return self

    def transform(self, X):
        return np.stack([
            body.silhouette_descriptor(m, self.resolution, self.n_samples).f for m in X
        ])


class FacePcaExtractor(BaseEstimator, TransformerMixin):
    """(Mesh, LandmarkSet) pairs -> PCA subspace coefficients of face depth grids.

    fit() runs crop/align/resample on the training subjects and learns the
    subspace; k defaults to the smallest dimension explaining 95% of the
    training variance, capped at 40.
    """

    def __init__(self, k: int | None = None, variance_target: float = 0.95,
                 k_cap: int = 40, alpha: float = head.GRID_ALPHA):
        self.k = k
        self.variance_target = variance_target
        self.k_cap = k_cap
        self.alpha = alpha

    def _grid(self, mesh, lms):
        face = head.crop_face(mesh, lms)
        aligned, _residual = head.align_face(face, lms)
        return head.resample_grid(aligned, lms, alpha=self.alpha)

    def fit(self, X, y=None):
        grids = [self._grid(mesh, lms) for mesh, lms in X]
        if self.k is not None:
            k = self.k
        else:
            # probe the full spectrum once, then truncate by explained variance
            probe = head.train_pca(grids, min(len(grids) - 1, self.k_cap))
            total = probe.eigenvalues.sum()
            frac = np.cumsum(probe.eigenvalues) / total
            k = int(np.searchsorted(frac, self.variance_target) + 1)
            k = min(k, self.k_cap, len(probe.eigenvalues))
        self.model_ = head.train_pca(grids, k)
        return self

    def transform(self, X):
        if not hasattr(self, "model_"):
            raise ValidationError("FacePcaExtractor must be fit before transform")
        return np.stack([
            head.project_pca(self.model_, self._grid(mesh, lms)).coeffs for mesh, lms in X
        ])

    def mahalanobis_metric(self) -> Metric:
        return Metric(MetricKind.MAHALANOBIS, eigenvalues=self.model_.eigenvalues)


class ShEnergyExtractor(BaseEstimator, TransformerMixin):
    """(Mesh, LandmarkSet) pairs -> (n, lmax+1) per-degree harmonic energies."""

    def __init__(self, lmax: int = head.DEFAULT_LMAX, lam: float = head.DEFAULT_LAMBDA,
                 neck_margin_mm: float = head.NECK_MARGIN_MM):
        self.lmax = lmax
        self.lam = lam
        self.neck_margin_mm = neck_margin_mm

    def fit(self, X, y=None):
        return self

    def transform(self, X):
        rows = []
        for mesh, lms in X:
            cropped = head.crop_head(mesh, lms, self.neck_margin_mm)
            coeffs = head.spherical_fit(cropped, self.lmax, self.lam)
            rows.append(head.sh_descriptor(coeffs, mesh.subject_id, mesh.pose).e)
        return np.stack(rows)


class NearestNeighborIdentifier(BaseEstimator):
    """Identification by nearest gallery descriptor under a chosen metric."""

    def __init__(self, metric: Metric = Metric(MetricKind.L2),
                 descriptor_type: DescriptorType = DescriptorType.DISTANCE15):
        self.metric = metric
        self.descriptor_type = descriptor_type

    def fit(self, X, y):
        X = np.asarray(X, dtype=float)
        gallery = DescriptorSet(self.descriptor_type, X.shape[1])
        from .mesh import Pose
        for vec, sid in zip(X, y):
            gallery.add(str(sid), Pose.STANDING, vec)
        self.gallery_ = gallery
        return self

    def predict(self, X):
        return np.array([
            rank_gallery(vec, self.gallery_, self.metric, k=1).matches[0][0]
            for vec in np.asarray(X, dtype=float)
        ])
