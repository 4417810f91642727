import numpy as np
import pytest

from anthroshape.mesh import Mesh, Pose
from anthroshape.synth import SynthParams, synth_population, write_dataset


@pytest.fixture(scope="session")
def clean_population():
    """Six noise-free subjects, both poses."""
    return synth_population(SynthParams(n_subjects=6, seed=11, landmark_noise_mm=0.0))


@pytest.fixture(scope="session")
def clean_subject(clean_population):
    return clean_population[0]


@pytest.fixture(scope="session")
def dataset_dir(tmp_path_factory, clean_population):
    out = tmp_path_factory.mktemp("ds") / "popA"
    write_dataset(clean_population, out)
    return out


@pytest.fixture(scope="session")
def extracted_root(tmp_path_factory):
    """Dataset root holding one small extracted dataset (all four descriptor types)."""
    from anthroshape import pipeline
    from anthroshape.similarity import DescriptorType

    root = tmp_path_factory.mktemp("served")
    out = root / "popA"
    subjects = synth_population(SynthParams(n_subjects=5, seed=3, landmark_noise_mm=4.0))
    write_dataset(subjects, out)
    ds = pipeline.open_dataset(out)
    for dtype in DescriptorType:
        pipeline.extract(ds, dtype)
    return root


def pytest_terminal_summary(terminalreporter):
    """Replay the acceptance verdict lines after the test summary."""
    try:
        from test_acceptance import RESULTS
    except ImportError:
        return
    if not RESULTS:
        return
    terminalreporter.write_sep("-", "acceptance criteria")
    for name, verdict in RESULTS:
        terminalreporter.write_line(f"[ACCEPTANCE] {name}: {verdict}")


def sphere_mesh(radius=100.0, n_lat=24, n_lon=48, center=(0.0, 0.0, 0.0)):
    from anthroshape.synth import _uv_sphere

    dirs, tris = _uv_sphere(n_lat, n_lon)
    return Mesh(np.asarray(center) + dirs * radius, tris)


def cube_mesh(side=100.0, center=(0.0, 0.0, 0.0)):
    c = np.asarray(center, dtype=float)
    h = side / 2
    verts = np.array([[sx, sy, sz] for sx in (-h, h) for sy in (-h, h) for sz in (-h, h)]) + c
    quads = [
        (0, 1, 3, 2), (4, 6, 7, 5),  # x faces
        (0, 4, 5, 1), (2, 3, 7, 6),  # y faces
        (0, 2, 6, 4), (1, 5, 7, 3),  # z faces
    ]
    tris = []
    for a, b, c_, d in quads:
        tris.append([a, b, c_])
        tris.append([a, c_, d])
    return Mesh(verts, np.array(tris))
