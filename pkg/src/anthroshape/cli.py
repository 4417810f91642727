"""Command-line interface: synth, extract, query, cmc, cluster, validate, serve.

Exit codes: 0 success, 1 usage error, 2 data error.
"""

from __future__ import annotations

import json
import logging
import sys

import click

from . import pipeline
from .body import PairSpec
from .cluster import Linkage
from .errors import AnthroShapeError
from .head import DEFAULT_LAMBDA, DEFAULT_LMAX
from .mesh import Pose
from .similarity import DescriptorType, MetricKind
from .synth import SynthParams, synth_population, write_dataset
from .validate import validate_subject

log = logging.getLogger("anthroshape")

TYPE_CHOICES = [t.value for t in DescriptorType]
METRIC_CHOICES = [m.value for m in MetricKind]
POSE_CHOICES = [p.value for p in Pose]
LINKAGE_CHOICES = [l.value for l in Linkage]


@click.group()
def cli():
    """Shape-similarity retrieval over synthetic 3D human populations."""
    logging.basicConfig(stream=sys.stderr, level=logging.INFO,
                        format="%(levelname)s %(name)s: %(message)s")


@cli.command()
@click.option("--n", "n_subjects", type=int, required=True, help="Number of subjects.")
@click.option("--seed", type=int, default=0, show_default=True)
@click.option("--noise-mm", type=float, default=15.0, show_default=True,
              help="Isotropic landmark noise std (mm).")
@click.option("--out", "out_dir", type=click.Path(), required=True)
def synth(n_subjects, seed, noise_mm, out_dir):
    """Generate a synthetic dataset directory."""
    params = SynthParams(n_subjects=n_subjects, seed=seed, landmark_noise_mm=noise_mm)
    subjects = synth_population(params)
    write_dataset(subjects, out_dir)
    log.info("wrote %d subjects x %d poses to %s",
             n_subjects, len(params.poses), out_dir)


@cli.command()
@click.option("--dataset", type=click.Path(exists=True), required=True)
@click.option("--type", "dtype", type=click.Choice(TYPE_CHOICES), required=True)
@click.option("--pairs", "pairs_file", type=click.Path(exists=True), default=None,
              help="PairSpec CSV for the distance descriptor.")
@click.option("--k", type=int, default=None, help="PCA dimensionality.")
@click.option("--lmax", type=int, default=DEFAULT_LMAX, show_default=True)
@click.option("--lambda", "lam", type=float, default=DEFAULT_LAMBDA, show_default=True)
def extract(dataset, dtype, pairs_file, k, lmax, lam):
    """Extract one descriptor type for every subject/pose in a dataset."""
    ds = pipeline.open_dataset(dataset)
    pairs = PairSpec.load(pairs_file) if pairs_file else None
    dset = pipeline.extract(ds, DescriptorType.parse(dtype),
                            pairs=pairs, k=k, lmax=lmax, lam=lam)
    log.info("extracted %s for %d subject-poses", dtype, len(dset))


@cli.command()
@click.option("--dataset", type=click.Path(exists=True), required=True)
@click.option("--type", "dtype", type=click.Choice(TYPE_CHOICES), required=True)
@click.option("--metric", type=click.Choice(METRIC_CHOICES), default="l2", show_default=True)
@click.option("--subject", required=True)
@click.option("--pose", type=click.Choice(POSE_CHOICES), default="standing", show_default=True)
@click.option("--k", type=int, default=10, show_default=True)
def query(dataset, dtype, metric, subject, pose, k):
    """Query-by-example: rank the gallery against one subject."""
    ds = pipeline.open_dataset(dataset)
    payload = pipeline.run_query(ds, DescriptorType.parse(dtype), MetricKind.parse(metric),
                                 subject, Pose.parse(pose), k)
    click.echo(json.dumps(payload, indent=1))


@cli.command()
@click.option("--dataset", type=click.Path(exists=True), required=True)
@click.option("--type", "dtype", type=click.Choice(TYPE_CHOICES), required=True)
@click.option("--metric", type=click.Choice(METRIC_CHOICES), default="l2", show_default=True)
@click.option("--gallery-pose", type=click.Choice(POSE_CHOICES), default="standing",
              show_default=True)
@click.option("--probe-pose", type=click.Choice(POSE_CHOICES), default="sitting",
              show_default=True)
@click.option("--curve-out", type=click.Path(), default=None,
              help="Write the full rank,rate CSV here.")
def cmc(dataset, dtype, metric, gallery_pose, probe_pose, curve_out):
    """Identification experiment: CMC curve plus a JSON summary on stdout."""
    ds = pipeline.open_dataset(dataset)
    curve, summary = pipeline.run_cmc(ds, DescriptorType.parse(dtype), MetricKind.parse(metric),
                                      Pose.parse(gallery_pose), Pose.parse(probe_pose))
    if curve_out:
        with open(curve_out, "w", encoding="utf-8") as fh:
            fh.write("rank,rate\n")
            for rank, rate in enumerate(curve.rates, start=1):
                fh.write(f"{rank},{float(rate)!r}\n")
    click.echo(json.dumps(summary, indent=1))


@cli.command()
@click.option("--dataset", type=click.Path(exists=True), required=True)
@click.option("--type", "dtype", type=click.Choice(TYPE_CHOICES), required=True)
@click.option("--metric", type=click.Choice(METRIC_CHOICES), default="l2", show_default=True)
@click.option("--linkage", type=click.Choice(LINKAGE_CHOICES), default="average",
              show_default=True)
@click.option("--k", type=int, required=True)
@click.option("--pose", type=click.Choice(POSE_CHOICES), default="standing", show_default=True)
def cluster(dataset, dtype, metric, linkage, k, pose):
    """Agglomerative clustering; CSV `subject_id,cluster` on stdout."""
    ds = pipeline.open_dataset(dataset)
    payload = pipeline.run_clusters(ds, DescriptorType.parse(dtype), MetricKind.parse(metric),
                                    Linkage.parse(linkage), k, Pose.parse(pose))
    click.echo("subject_id,cluster")
    for sid, idx in payload["labels"].items():
        click.echo(f"{sid},{idx}")


@cli.command()
@click.option("--dataset", type=click.Path(exists=True), required=True)
def validate(dataset):
    """Report per-subject descriptor readiness."""
    ds = pipeline.open_dataset(dataset)
    any_fail = False
    for (sid, pose), lms in sorted(ds.landmark_sets.items(),
                                   key=lambda kv: (kv[0][0], kv[0][1].value)):
        mesh = ds.load_mesh(sid, pose)
        report = validate_subject(mesh, lms)
        status = "ok" if report.all_pass() else "FAIL"
        any_fail |= not report.all_pass()
        details = "; ".join(
            f"{name}:{'pass' if c.passed else 'fail'}"
            + (f" ({', '.join(c.reasons)})" if c.reasons else "")
            for name, c in report.checks.items())
        click.echo(f"{sid} {pose.value} [{status}] {details}")
    if any_fail:
        raise AnthroShapeError("one or more subjects failed validation")


@cli.command()
@click.option("--dataset-root", type=click.Path(exists=True), required=True,
              help="Directory whose subdirectories are datasets.")
@click.option("--bind", default="127.0.0.1:8000", show_default=True)
def serve(dataset_root, bind):
    """Run the HTTP query service."""
    import uvicorn

    from .service import create_app

    host, _, port = bind.partition(":")
    app = create_app(dataset_root)
    uvicorn.run(app, host=host or "127.0.0.1", port=int(port or 8000))


def main(argv=None) -> int:
    try:
        cli.main(args=argv, standalone_mode=False)
        return 0
    except click.exceptions.Abort:
        return 1
    except click.ClickException as exc:
        exc.show(file=sys.stderr)
        return 1
    except AnthroShapeError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 2
    except OSError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 2


if __name__ == "__main__":
    sys.exit(main())
