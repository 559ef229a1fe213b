"""Face counting behind a pluggable detector interface.

The reference HOG face detector is not available offline, so the default
backend is the bundled multi-block LBP frontal-face cascade from
scikit-image; any callable returning detection boxes can be swapped in.
"""

from __future__ import annotations

from functools import lru_cache
from pathlib import Path

import numpy as np

from .preprocess import UndecodableImageError, load_rgb


@lru_cache(maxsize=1)
def _default_detector():
    from skimage import data as skdata
    from skimage.feature import Cascade

    return Cascade(skdata.lbp_frontal_face_cascade_filename())


# Detections below this size are overwhelmingly spurious on photo-sized
# inputs, so it doubles as the smallest countable face.
MIN_FACE_SIZE = 60


def detect_faces(image_array: np.ndarray) -> int:
    """Number of frontal-face detections in an RGB uint8 array."""
    detector = _default_detector()
    h, w = image_array.shape[:2]
    min_side = min(h, w)
    if min_side < MIN_FACE_SIZE:
        return 0
    found = detector.detect_multi_scale(
        img=image_array,
        scale_factor=1.2,
        step_ratio=1,
        min_size=(MIN_FACE_SIZE, MIN_FACE_SIZE),
        max_size=(min_side, min_side),
    )
    return len(found)


def count_faces(image_path, detector=None) -> int:
    """Face count for one image file; raises on undecodable input."""
    image = load_rgb(image_path)
    array = np.asarray(image, dtype=np.uint8)
    if detector is not None:
        return int(detector(array))
    return detect_faces(array)
