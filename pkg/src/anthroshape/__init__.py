"""Shape-similarity retrieval over populations of 3D human body and head meshes.

Four compact descriptors (landmark distances, silhouette Fourier modes,
facial PCA coefficients, spherical-harmonic energies), L1/L2/Mahalanobis
similarity, CMC identification evaluation, and hierarchical clustering,
exposed as a library, CLI, and HTTP service.
"""

from .body import (
    BodyDistanceDescriptor,
    PairSpec,
    SilhouetteFourierDescriptor,
    View,
    distance_descriptor,
    fourier_descriptor,
    radial_contour,
    render_silhouette,
    silhouette_descriptor,
)
from .cluster import (
    ClusterAssignment,
    Dendrogram,
    DendrogramFormat,
    Linkage,
    agglomerate,
    cut,
    export_dendrogram,
)
from .head import (
    DepthGrid,
    FacePcaDescriptor,
    PcaModel,
    ShCoefficients,
    ShDescriptor,
    align_face,
    crop_face,
    crop_head,
    project_pca,
    resample_grid,
    sh_descriptor,
    spherical_fit,
    train_pca,
)
from .mesh import LandmarkSet, Mesh, Pose, load_landmarks, load_mesh, write_mesh
from .retrieval import CmcCurve, RankedList, cmc, rank_gallery
from .similarity import (
    DescriptorSet,
    DescriptorType,
    Metric,
    MetricKind,
    SimilarityMatrix,
    build_similarity_matrix,
    load_descriptors,
    save_descriptors,
    vec_distance,
)
from .synth import SynthParams, synth_population, write_dataset
from .validate import ValidationReport, validate_subject

__version__ = "0.1.0"
