"""Exception hierarchy shared across the package."""


class AnthroShapeError(Exception):
    """Base class for all package errors."""


class ParseError(AnthroShapeError):
    """A file could not be parsed; carries the offending line number when known."""

    def __init__(self, message, line=None):
        if line is not None:
            message = f"line {line}: {message}"
        super().__init__(message)
        self.line = line


class ValidationError(AnthroShapeError):
    """Structural invariant violated (e.g. face index out of range)."""


class DuplicateLandmarkError(AnthroShapeError):
    """Same landmark id appears twice within one (subject, pose) group."""


class MissingLandmarkError(AnthroShapeError):
    """A required landmark id is absent from a LandmarkSet."""

    def __init__(self, landmark_id, pair_index=None):
        self.landmark_id = landmark_id
        self.pair_index = pair_index
        msg = f"missing landmark id {landmark_id}"
        if pair_index is not None:
            msg += f" (pair {pair_index})"
        super().__init__(msg)


class EmptyMeshError(AnthroShapeError):
    """Mesh has no triangles."""


class EmptyImageError(AnthroShapeError):
    """Binary image has no occupied pixels."""


class InvalidModeCountError(AnthroShapeError):
    """Requested Fourier mode count exceeds what the contour sampling supports."""


class EmptyCropError(AnthroShapeError):
    """Cropping planes removed every vertex."""


class DegenerateConfigurationError(AnthroShapeError):
    """Alignment landmarks are collinear; rigid registration is underdetermined."""


class InsufficientSupportError(AnthroShapeError):
    """Too few depth-grid cells are supported by actual surface data."""


class RankDeficientError(AnthroShapeError):
    """Requested PCA dimensionality exceeds the numerical rank of the data."""


class DimensionMismatchError(AnthroShapeError):
    """Vector/grid dimensions do not agree."""


class NonPositiveEigenvalueError(AnthroShapeError):
    """Mahalanobis whitening requires strictly positive eigenvalues."""


class SingularSystemError(AnthroShapeError):
    """Unregularized least-squares system is rank-deficient."""


class NotConvergedError(AnthroShapeError):
    """Spherical fit did not converge; descriptor undefined."""


class IncompatibleMetricError(AnthroShapeError):
    """Metric not applicable to the descriptor type (Mahalanobis needs eigenvalues)."""


class EmptyGalleryError(AnthroShapeError):
    """Gallery has no entries to rank."""


class UnmatchedProbeError(AnthroShapeError):
    """A probe subject has no enrolled mate in the gallery."""


class TooFewSubjectsError(AnthroShapeError):
    """Clustering needs at least two subjects."""


class InvalidKError(AnthroShapeError):
    """Requested cluster count outside [1, n]."""


class VersionMismatchWarning(UserWarning):
    """Loaded descriptor provenance differs from the current configuration."""
