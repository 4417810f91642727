"""HTTP query service over pre-extracted descriptor files.

Read-only: extraction happens offline via the CLI; the service only loads
descriptor files and answers queries over the immutable catalog, so
concurrent requests need no locking.
"""

from __future__ import annotations

import json
import os
import threading

from fastapi import FastAPI, HTTPException, Query
from fastapi.responses import HTMLResponse, PlainTextResponse
from pydantic import BaseModel, model_validator

from . import pipeline
from .cluster import DendrogramFormat, Linkage, cut, export_dendrogram
from .errors import AnthroShapeError, ParseError, ValidationError
from .mesh import Pose, dump_obj
from .similarity import DescriptorType, MetricKind


class QueryRequest(BaseModel):
    dataset: str
    type: str
    metric: str = "l2"
    subject_id: str | None = None
    pose: str = "standing"
    vector: list[float] | None = None
    k: int = 10

    @model_validator(mode="after")
    def _one_query_source(self):
        if (self.subject_id is None) == (self.vector is None):
            raise ValueError("set exactly one of subject_id or vector")
        if self.k < 1:
            raise ValueError("k must be >= 1")
        return self


class Catalog:
    """Immutable view over the dataset root, with memoized derived artifacts."""

    def __init__(self, root):
        self.root = os.fspath(root)
        self.datasets = {}
        for name in sorted(os.listdir(self.root)):
            path = os.path.join(self.root, name)
            if os.path.isdir(path) and os.path.exists(os.path.join(path, "landmarks.csv")):
                self.datasets[name] = pipeline.open_dataset(path)
        self._cache = {}
        self._lock = threading.Lock()

    def dataset(self, dataset_id: str) -> pipeline.DatasetHandle:
        if dataset_id not in self.datasets:
            raise HTTPException(404, f"unknown dataset {dataset_id!r}")
        return self.datasets[dataset_id]

    def memo(self, key, build):
        with self._lock:
            if key not in self._cache:
                self._cache[key] = build()
            return self._cache[key]


def _parse(parser, text, what):
    try:
        return parser(text)
    except (ValidationError, ParseError) as exc:
        raise HTTPException(400, f"bad {what}: {exc}")


def create_app(dataset_root) -> FastAPI:
    catalog = Catalog(dataset_root)
    app = FastAPI(title="anthroshape", version="0.1.0")

    @app.exception_handler(AnthroShapeError)
    async def _domain_error(_request, exc):
        from fastapi.responses import JSONResponse
        return JSONResponse(status_code=422, content={"error": str(exc)})

    @app.get("/api/datasets")
    def list_datasets():
        out = []
        for name, ds in catalog.datasets.items():
            out.append({
                "id": name,
                "subject_count": len(ds.subjects()),
                "poses": [p.value for p in ds.poses()],
                "descriptor_types": [t.value for t in ds.extracted_types()],
            })
        return out

    @app.get("/api/datasets/{dataset_id}/subjects")
    def list_subjects(dataset_id: str):
        return catalog.dataset(dataset_id).subjects()

    @app.get("/api/subjects/{subject_id}")
    def subject_info(subject_id: str, dataset: str, pose: str = "standing"):
        ds = catalog.dataset(dataset)
        p = _parse(Pose.parse, pose, "pose")
        key = (subject_id, p)
        if key not in ds.landmark_sets:
            raise HTTPException(404, f"unknown subject {subject_id!r} (pose {p.value})")
        lms = ds.landmark_sets[key]
        return {
            "subject_id": subject_id,
            "pose": p.value,
            "landmarks": {
                str(lid): {"name": name, "position_mm": [float(v) for v in pos]}
                for lid, (name, pos) in sorted(lms.points.items())
            },
            "has_mesh": os.path.exists(ds.mesh_path(subject_id, p)),
        }

    @app.post("/api/query")
    def query(req: QueryRequest):
        ds = catalog.dataset(req.dataset)
        dtype = _parse(DescriptorType.parse, req.type, "descriptor type")
        kind = _parse(MetricKind.parse, req.metric, "metric")
        pose = _parse(Pose.parse, req.pose, "pose")
        try:
            return pipeline.run_query(ds, dtype, kind, req.subject_id, pose,
                                      req.k, vector=req.vector)
        except pipeline.UnknownSubjectError as exc:
            raise HTTPException(404, str(exc))

    @app.get("/api/cmc")
    def cmc_endpoint(dataset: str, type: str, metric: str = "l2",
                     gallery: str = "standing", probe: str = "sitting"):
        ds = catalog.dataset(dataset)
        dtype = _parse(DescriptorType.parse, type, "descriptor type")
        kind = _parse(MetricKind.parse, metric, "metric")
        gp = _parse(Pose.parse, gallery, "gallery pose")
        pp = _parse(Pose.parse, probe, "probe pose")
        curve, summary = catalog.memo(
            ("cmc", dataset, dtype, kind, gp, pp),
            lambda: pipeline.run_cmc(ds, dtype, kind, gp, pp))
        return {"summary": summary,
                "curve": [{"rank": i + 1, "rate": float(r)}
                          for i, r in enumerate(curve.rates)]}

    def _tree(dataset, type_, metric, linkage, pose):
        ds = catalog.dataset(dataset)
        dtype = _parse(DescriptorType.parse, type_, "descriptor type")
        kind = _parse(MetricKind.parse, metric, "metric")
        link = _parse(Linkage.parse, linkage, "linkage")
        p = _parse(Pose.parse, pose, "pose")
        return catalog.memo(
            ("tree", dataset, dtype, kind, link, p),
            lambda: pipeline.build_dendrogram(ds, dtype, kind, link, p))

    @app.get("/api/dendrogram")
    def dendrogram(dataset: str, type: str, metric: str = "l2",
                   linkage: str = "average", pose: str = "standing"):
        tree = _tree(dataset, type, metric, linkage, pose)
        return json.loads(export_dendrogram(tree, DendrogramFormat.JSON))

    @app.get("/api/clusters")
    def clusters(dataset: str, type: str, k: int = Query(..., ge=1),
                 metric: str = "l2", linkage: str = "average", pose: str = "standing"):
        tree = _tree(dataset, type, metric, linkage, pose)
        if k > tree.n_leaves:
            raise HTTPException(400, f"k must be <= {tree.n_leaves}")
        assignment = cut(tree, k)
        return {"k": k, "labels": dict(sorted(assignment.labels.items()))}

    @app.get("/api/mesh/{subject_id}/{pose}", response_class=PlainTextResponse)
    def mesh_obj(subject_id: str, pose: str, dataset: str):
        ds = catalog.dataset(dataset)
        p = _parse(Pose.parse, pose, "pose")
        path = ds.mesh_path(subject_id, p)
        if not os.path.exists(path):
            raise HTTPException(404, f"no mesh for subject {subject_id!r} pose {p.value}")
        mesh = ds.load_mesh(subject_id, p)
        return dump_obj(mesh)

    ui_dir = os.environ.get("ANTHROSHAPE_UI_DIR",
                            os.path.join(os.path.dirname(__file__), "..", "..",
                                         "frontend", "dist"))

    @app.get("/", response_class=HTMLResponse)
    def index():
        page = os.path.join(ui_dir, "index.html")
        if os.path.exists(page):
            with open(page, "r", encoding="utf-8") as fh:
                return fh.read()
        return "<html><body><h1>anthroshape</h1><p>UI not built.</p></body></html>"

    @app.get("/app.js")
    def app_js():
        bundle = os.path.join(ui_dir, "app.js")
        if not os.path.exists(bundle):
            raise HTTPException(404, "UI bundle not built")
        with open(bundle, "r", encoding="utf-8") as fh:
            return PlainTextResponse(fh.read(), media_type="text/javascript")

    return app
