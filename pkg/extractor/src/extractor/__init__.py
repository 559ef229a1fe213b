"""Per-image feature extraction producing sidecar files for classification."""

__version__ = "0.1.0"
