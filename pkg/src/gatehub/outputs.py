"""Output artifact size classification.

Each output port declares a size class; after a job runs, the produced file
is checked against the declared class's byte range. Desk-scale mode shrinks
every range by the same factor it shrinks the files, so classification
stays meaningful on toy-sized runs.
"""

from __future__ import annotations

import os
from dataclasses import dataclass

from .errors import MissingArtifact
from .graphs import SizeClass

MB = 1_000_000
GB = 1_000_000_000

# Inclusive-upper byte ranges per class at full scale.
CLASS_RANGES: dict[SizeClass, tuple[int, int]] = {
    SizeClass.TEXT_HUGE: (1 * GB, 10 * GB),
    SizeClass.TEXT_MEDIUM: (10 * MB, 1 * GB),
    SizeClass.IMAGE_SMALL: (0, 1 * MB),
    SizeClass.VIDEO_SMALL: (0, 10 * MB),
    SizeClass.SCALAR: (0, 1_000),
}

#: Everything (sizes and thresholds alike) shrinks by this in desk-scale mode.
DESK_SCALE = 1e-3


def class_midpoint(data_class: SizeClass, size_scale: float = 1.0) -> int:
    """Midpoint of the class's byte range, e.g. 5.5 GB for huge text."""
    lo, hi = CLASS_RANGES[data_class]
    return int(round((lo + hi) / 2 * size_scale))


@dataclass(frozen=True)
class SizeReport:
    data_class: SizeClass
    bytes: int
    within_expected: bool


def classify_size(size: int, declared: SizeClass, size_scale: float = 1.0) -> SizeReport:
    """Check a byte count against the declared class's (scaled) range.

    Lower bounds are exclusive when nonzero: a 1 GB file is not yet "huge".
    """
    lo, hi = CLASS_RANGES[declared]
    lo_s = lo * size_scale
    hi_s = hi * size_scale
    within = size <= hi_s and (size > lo_s if lo > 0 else size >= 0)
    return SizeReport(data_class=declared, bytes=size, within_expected=within)


def classify_output(path: str, declared: SizeClass, size_scale: float = 1.0,
                    size: int | None = None) -> SizeReport:
    """Classify an artifact file; `size` overrides stat() for virtual artifacts."""
    if size is None:
        if not os.path.isfile(path):
            raise MissingArtifact(f"no artifact at '{path}'")
        size = os.path.getsize(path)
    return classify_size(size, declared, size_scale)
