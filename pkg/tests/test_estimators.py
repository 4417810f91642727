import numpy as np
import pytest
from sklearn.pipeline import Pipeline

from anthroshape.errors import ValidationError
from anthroshape.estimators import (
    DistanceDescriptorExtractor,
    FacePcaExtractor,
    NearestNeighborIdentifier,
    ShEnergyExtractor,
    SilhouetteFourierExtractor,
)
from anthroshape.body import distance_descriptor
from anthroshape.mesh import Pose
from anthroshape.similarity import MetricKind


def _pairs(population, pose=Pose.STANDING):
    return [(s.meshes[pose], s.landmarks[pose]) for s in population]


class TestDistanceExtractor:
    def test_shape_and_values(self, clean_population):
        lms = [s.landmarks[Pose.STANDING] for s in clean_population]
        x = DistanceDescriptorExtractor().fit_transform(lms)
        assert x.shape == (len(lms), 15)
        np.testing.assert_array_equal(x[0], distance_descriptor(lms[0]).d)

    def test_get_params_roundtrip(self):
        est = DistanceDescriptorExtractor()
        params = est.get_params()
        assert "pairs" in params
        est.set_params(**params)


class TestSilhouetteExtractor:
    def test_shape(self, clean_population):
        meshes = [s.meshes[Pose.STANDING] for s in clean_population[:2]]
        x = SilhouetteFourierExtractor().fit_transform(meshes)
        assert x.shape == (2, 48)
        assert np.all(np.isfinite(x))

    def test_params(self):
        est = SilhouetteFourierExtractor(resolution=128, n_samples=64)
        assert est.get_params() == {"resolution": 128, "n_samples": 64}


class TestFacePcaExtractor:
    def test_fit_transform_and_metric(self, clean_population):
        data = _pairs(clean_population)
        est = FacePcaExtractor(k=3)
        x = est.fit_transform(data)
        assert x.shape == (len(data), 3)
        assert est.model_.k == 3
        metric = est.mahalanobis_metric()
        assert metric.kind == MetricKind.MAHALANOBIS
        np.testing.assert_array_equal(metric.eigenvalues, est.model_.eigenvalues)

    def test_auto_k_hits_variance_target(self, clean_population):
        data = _pairs(clean_population)
        est = FacePcaExtractor(variance_target=0.95).fit(data)
        evs = est.model_.eigenvalues
        # auto-k probes the full spectrum; the kept eigenvalues must already
        # cover the target relative to that full spectrum
        probe = FacePcaExtractor(k=len(data) - 1).fit(data)
        frac = evs.sum() / probe.model_.eigenvalues.sum()
        assert frac >= 0.95 or est.model_.k == len(data) - 1

    def test_transform_before_fit_raises(self, clean_population):
        with pytest.raises(ValidationError):
            FacePcaExtractor(k=2).transform(_pairs(clean_population[:2]))


class TestShEnergyExtractor:
    def test_shape_and_rotation_invariance_columns(self, clean_population):
        data = _pairs(clean_population[:3])
        x = ShEnergyExtractor().fit_transform(data)
        assert x.shape == (3, 11)
        assert np.all(x >= 0)
        # distinct subjects should be distinguishable
        assert np.linalg.norm(x[0] - x[1]) > 0


class TestNearestNeighborIdentifier:
    def test_predict_recovers_training_labels(self):
        rng = np.random.default_rng(21)
        x = rng.normal(0, 10, (20, 5))
        y = [f"s{i}" for i in range(20)]
        est = NearestNeighborIdentifier().fit(x, y)
        np.testing.assert_array_equal(est.predict(x + rng.normal(0, 0.01, x.shape)), y)

    def test_pipeline_composition(self, clean_population):
        lms_standing = [s.landmarks[Pose.STANDING] for s in clean_population]
        lms_sitting = [s.landmarks[Pose.SITTING] for s in clean_population]
        ids = [s.subject_id for s in clean_population]
        pipe = Pipeline([
            ("features", DistanceDescriptorExtractor()),
            ("identify", NearestNeighborIdentifier()),
        ])
        pipe.fit(lms_standing, ids)
        # noise-free landmarks: cross-pose identification is exact
        np.testing.assert_array_equal(pipe.predict(lms_sitting), ids)
