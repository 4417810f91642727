"""Query-by-example ranking and CMC identification evaluation."""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .errors import (
    DimensionMismatchError,
    EmptyGalleryError,
    UnmatchedProbeError,
    ValidationError,
)
from .similarity import DescriptorSet, Metric, check_metric_compat, vec_distance


@dataclass
class RankedList:
    query_id: str
    matches: list  # [(subject_id, distance)], ascending distance
    metric_kind: str

    def __post_init__(self):
        dists = [d for _, d in self.matches]
        if any(b < a for a, b in zip(dists, dists[1:])):
            raise ValidationError("distances must be non-decreasing")
        ids = [s for s, _ in self.matches]
        if len(set(ids)) != len(ids):
            raise ValidationError("duplicate gallery ids in ranked list")


@dataclass
class CmcCurve:
    rates: np.ndarray  # (gallery_size,), rates[r-1] = identification rate at rank r
    gallery_size: int
    probe_count: int

    def __post_init__(self):
        self.rates = np.asarray(self.rates, dtype=float).reshape(-1)
        if len(self.rates) != self.gallery_size:
            raise ValidationError("need one rate per rank")
        if np.any(np.diff(self.rates) < 0):
            raise ValidationError("CMC rates must be non-decreasing")
        if np.any((self.rates < 0) | (self.rates > 1)):
            raise ValidationError("rates must lie in [0, 1]")

    def rate_at(self, rank: int) -> float:
        return float(self.rates[rank - 1])


def _gallery_items(gallery: DescriptorSet):
    # one entry per subject id, sorted for the deterministic tie rule
    items = [(sid, gallery.entries[key]) for key in gallery.keys() for sid in [key[0]]]
    return sorted(items, key=lambda it: it[0])


def rank_gallery(query, gallery: DescriptorSet, metric: Metric, k: int) -> RankedList:
    """Top-k gallery subjects by ascending distance; ties break on subject id."""
    if len(gallery) == 0:
        raise EmptyGalleryError("gallery is empty")
    query = np.asarray(query, dtype=float).reshape(-1)
    if len(query) != gallery.dimension:
        raise DimensionMismatchError(
            f"query length {len(query)} != gallery dimension {gallery.dimension}")
    check_metric_compat(gallery.descriptor_type, metric)
    if not 1 <= k <= len(gallery):
        raise ValidationError(f"k must be in [1, {len(gallery)}]")
    items = _gallery_items(gallery)
    scored = [(vec_distance(query, vec, metric), sid) for sid, vec in items]
    scored.sort(key=lambda t: (t[0], t[1]))
    return RankedList(query_id="", matches=[(sid, d) for d, sid in scored[:k]],
                      metric_kind=metric.kind.value)


def cmc(gallery: DescriptorSet, probe: DescriptorSet, metric: Metric) -> CmcCurve:
    """Cumulative Match Characteristic over a gallery/probe split.

    The mate's rank is pessimistic under ties: it counts at the worst
    position within its tied block.
    """
    check_metric_compat(gallery.descriptor_type, metric)
    gallery_items = _gallery_items(gallery)
    gallery_by_id = {sid: vec for sid, vec in gallery_items}
    if len(gallery_by_id) != len(gallery_items):
        raise ValidationError("gallery must hold exactly one entry per subject")
    g = len(gallery_items)
    hits = np.zeros(g, dtype=int)
    n_probes = 0
    for (sid, _pose), pvec in probe.entries.items():
        if sid not in gallery_by_id:
            raise UnmatchedProbeError(f"probe subject {sid!r} has no gallery mate")
        dists = {gid: vec_distance(pvec, gvec, metric) for gid, gvec in gallery_items}
        mate_d = dists[sid]
        rank = sum(1 for d in dists.values() if d <= mate_d)  # worst-in-block
        hits[rank - 1] += 1
        n_probes += 1
    if n_probes == 0:
        raise ValidationError("probe set is empty")
    rates = np.cumsum(hits) / n_probes
    return CmcCurve(rates=rates, gallery_size=g, probe_count=n_probes)
