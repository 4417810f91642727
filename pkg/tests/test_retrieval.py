import numpy as np
import pytest

from anthroshape.errors import (
    DimensionMismatchError,
    EmptyGalleryError,
    UnmatchedProbeError,
    ValidationError,
)
from anthroshape.mesh import Pose
from anthroshape.retrieval import CmcCurve, RankedList, cmc, rank_gallery
from anthroshape.similarity import DescriptorSet, DescriptorType, Metric, MetricKind

L2 = Metric(MetricKind.L2)


def _set(vectors, dim, pose=Pose.STANDING, dtype=DescriptorType.SH_ENERGY):
    dset = DescriptorSet(dtype, dim)
    for sid, vec in vectors.items():
        dset.add(sid, pose, vec)
    return dset


class TestRankGallery:
    def test_hand_ranking(self):
        gallery = _set({"a": [0.0], "b": [3.0], "c": [1.0]}, dim=1)
        ranked = rank_gallery([0.0], gallery, L2, k=3)
        assert ranked.matches == [("a", 0.0), ("c", 1.0), ("b", 3.0)]

    def test_tie_breaks_on_subject_id(self):
        gallery = _set({"zeta": [1.0], "alpha": [1.0], "mid": [1.0]}, dim=1)
        ranked = rank_gallery([0.0], gallery, L2, k=3)
        assert [sid for sid, _ in ranked.matches] == ["alpha", "mid", "zeta"]

    def test_top_k_is_prefix_of_full_ranking(self):
        rng = np.random.default_rng(5)
        gallery = _set({f"s{i:02d}": rng.normal(0, 1, 4) for i in range(20)}, dim=4)
        q = rng.normal(0, 1, 4)
        full = rank_gallery(q, gallery, L2, k=20).matches
        for k in (1, 5, 13):
            assert rank_gallery(q, gallery, L2, k=k).matches == full[:k]

    def test_brute_force_oracle(self):
        rng = np.random.default_rng(6)
        n = 100
        gallery = _set({f"g{i:03d}": rng.uniform(-10, 10, 6) for i in range(n)}, dim=6)
        for trial in range(5):
            q = rng.uniform(-10, 10, 6)
            expected = sorted(
                ((float(np.linalg.norm(q - vec)), sid)
                 for (sid, _p), vec in gallery.entries.items()))
            got = rank_gallery(q, gallery, L2, k=n).matches
            assert [sid for _d, sid in expected] == [sid for sid, _d in got]
            np.testing.assert_allclose([d for sid, d in got],
                                       [d for d, sid in expected], rtol=1e-12)

    def test_empty_gallery(self):
        with pytest.raises(EmptyGalleryError):
            rank_gallery([0.0], DescriptorSet(DescriptorType.SH_ENERGY, 1), L2, k=1)

    def test_k_bounds(self):
        gallery = _set({"a": [0.0]}, dim=1)
        for bad_k in (0, 2):
            with pytest.raises(ValidationError):
                rank_gallery([0.0], gallery, L2, k=bad_k)

    def test_dimension_mismatch(self):
        gallery = _set({"a": [0.0, 1.0]}, dim=2)
        with pytest.raises(DimensionMismatchError):
            rank_gallery([0.0], gallery, L2, k=1)

    def test_scaling_preserves_order(self):
        rng = np.random.default_rng(8)
        gallery = _set({f"s{i}": rng.normal(0, 1, 3) for i in range(12)}, dim=3)
        scaled = _set({sid: vec * 7.5 for (sid, _p), vec in gallery.entries.items()}, dim=3)
        q = rng.normal(0, 1, 3)
        order_a = [sid for sid, _ in rank_gallery(q, gallery, L2, 12).matches]
        order_b = [sid for sid, _ in rank_gallery(q * 7.5, scaled, L2, 12).matches]
        assert order_a == order_b


class TestRankedListInvariants:
    def test_rejects_decreasing_distances(self):
        with pytest.raises(ValidationError):
            RankedList("q", [("a", 2.0), ("b", 1.0)], "l2")

    def test_rejects_duplicate_ids(self):
        with pytest.raises(ValidationError):
            RankedList("q", [("a", 1.0), ("a", 2.0)], "l2")


class TestCmc:
    def test_three_subject_example(self):
        # probes: a matches at rank 1, b at rank 2, c at rank 1
        gallery = _set({"a": [0.0], "b": [10.0], "c": [30.0]}, dim=1)
        probes = _set({"a": [1.0], "b": [21.0], "c": [29.0]}, dim=1,
                      pose=Pose.SITTING)
        curve = cmc(gallery, probes, L2)
        np.testing.assert_allclose(curve.rates, [2 / 3, 1.0, 1.0])
        assert curve.rate_at(1) == pytest.approx(2 / 3)
        assert curve.probe_count == 3
        assert curve.gallery_size == 3

    def test_perfect_identification(self):
        rng = np.random.default_rng(9)
        vecs = {f"s{i}": rng.normal(0, 100, 5) for i in range(10)}
        gallery = _set(vecs, dim=5)
        probes = _set({sid: v + rng.normal(0, 1e-6, 5) for sid, v in vecs.items()},
                      dim=5, pose=Pose.SITTING)
        curve = cmc(gallery, probes, L2)
        assert curve.rate_at(1) == 1.0
        np.testing.assert_array_equal(curve.rates, 1.0)

    def test_mate_tie_is_pessimistic(self):
        # probe equidistant from its mate and one impostor: rank 2, not 1
        gallery = _set({"mate": [0.0], "imp": [2.0]}, dim=1)
        probes = _set({"mate": [1.0]}, dim=1, pose=Pose.SITTING)
        curve = cmc(gallery, probes, L2)
        assert curve.rate_at(1) == 0.0
        assert curve.rate_at(2) == 1.0

    def test_brute_force_oracle(self):
        rng = np.random.default_rng(10)
        n = 40
        gal_vecs = {f"s{i:02d}": rng.normal(0, 1, 3) for i in range(n)}
        gallery = _set(gal_vecs, dim=3)
        probes = _set({sid: v + rng.normal(0, 0.8, 3) for sid, v in gal_vecs.items()},
                      dim=3, pose=Pose.SITTING)
        curve = cmc(gallery, probes, L2)
        hits = np.zeros(n)
        for (sid, _p), pv in probes.entries.items():
            dists = {g: float(np.linalg.norm(pv - gv)) for g, gv in gal_vecs.items()}
            rank = sum(1 for d in dists.values() if d <= dists[sid])
            hits[rank - 1] += 1
        np.testing.assert_allclose(curve.rates, np.cumsum(hits) / n)

    def test_rates_monotone_and_end_at_one(self):
        rng = np.random.default_rng(11)
        gal_vecs = {f"s{i}": rng.normal(0, 1, 4) for i in range(15)}
        gallery = _set(gal_vecs, dim=4)
        probes = _set({sid: v + rng.normal(0, 2.0, 4) for sid, v in gal_vecs.items()},
                      dim=4, pose=Pose.SITTING)
        curve = cmc(gallery, probes, L2)
        assert np.all(np.diff(curve.rates) >= 0)
        assert curve.rates[-1] == 1.0

    def test_unmatched_probe(self):
        gallery = _set({"a": [0.0]}, dim=1)
        probes = _set({"ghost": [0.0]}, dim=1, pose=Pose.SITTING)
        with pytest.raises(UnmatchedProbeError):
            cmc(gallery, probes, L2)

    def test_empty_probe_set(self):
        gallery = _set({"a": [0.0]}, dim=1)
        with pytest.raises(ValidationError):
            cmc(gallery, DescriptorSet(DescriptorType.SH_ENERGY, 1), L2)


class TestCmcCurveInvariants:
    def test_rejects_decreasing_rates(self):
        with pytest.raises(ValidationError):
            CmcCurve(rates=[0.5, 0.4], gallery_size=2, probe_count=10)

    def test_rejects_out_of_range_rates(self):
        with pytest.raises(ValidationError):
            CmcCurve(rates=[0.5, 1.2], gallery_size=2, probe_count=10)
