"""Point cloud data model: labels, clouds, cuboids, cropping."""

from __future__ import annotations

from dataclasses import dataclass, field
from enum import IntEnum

import numpy as np


class SemanticLabel(IntEnum):
    """Per-point class codes. File formats store the integer value."""

    FOLIAGE = 0
    LOWER_STEM = 1
    UPPER_STEM = 2
    CLUTTER = 3
    UNLABELED = 255


STEM_LABELS = (SemanticLabel.LOWER_STEM, SemanticLabel.UPPER_STEM)


@dataclass(frozen=True)
class Cuboid:
    """Axis-aligned box in world metres, closed on all faces."""

    min_corner: tuple[float, float, float]
    max_corner: tuple[float, float, float]

    def __post_init__(self):
        lo, hi = np.asarray(self.min_corner, float), np.asarray(self.max_corner, float)
        if lo.shape != (3,) or hi.shape != (3,):
            raise ValueError("cuboid corners must be 3-vectors")
        if not (np.all(np.isfinite(lo)) and np.all(np.isfinite(hi))):
            raise ValueError("cuboid corners must be finite")
        if np.any(lo > hi):
            raise ValueError(f"cuboid min {tuple(lo)} exceeds max {tuple(hi)}")

    @property
    def size(self) -> tuple[float, float, float]:
        return tuple(np.subtract(self.max_corner, self.min_corner))

    @property
    def center_xy(self) -> tuple[float, float]:
        return (
            0.5 * (self.min_corner[0] + self.max_corner[0]),
            0.5 * (self.min_corner[1] + self.max_corner[1]),
        )

    def to_dict(self) -> dict:
        return {"min": list(self.min_corner), "max": list(self.max_corner)}

    @classmethod
    def from_dict(cls, d: dict) -> "Cuboid":
        return cls(tuple(float(v) for v in d["min"]), tuple(float(v) for v in d["max"]))


@dataclass
class PointCloud:
    """Columnar 3D points with optional per-point semantic labels.

    Coordinates are float64 throughout; subtracting large UTM-like offsets
    from heights must not lose millimetres.
    """

    xyz: np.ndarray
    labels: np.ndarray | None = field(default=None)

    def __post_init__(self):
        self.xyz = np.ascontiguousarray(self.xyz, dtype=np.float64)
        if self.xyz.ndim != 2 or self.xyz.shape[1] != 3:
            raise ValueError(f"xyz must be (N, 3), got {self.xyz.shape}")
        if not np.all(np.isfinite(self.xyz)):
            raise ValueError("point coordinates must be finite")
        if self.labels is not None:
            self.labels = np.ascontiguousarray(self.labels, dtype=np.uint8)
            if self.labels.shape != (len(self.xyz),):
                raise ValueError(
                    f"labels length {self.labels.shape} does not match "
                    f"{len(self.xyz)} points"
                )

    def __len__(self) -> int:
        return len(self.xyz)

    @property
    def has_labels(self) -> bool:
        return self.labels is not None

    def select(self, index: np.ndarray) -> "PointCloud":
        """Sub-cloud at the given indices or boolean mask, labels carried."""
        labels = self.labels[index] if self.labels is not None else None
        return PointCloud(self.xyz[index], labels)

    def with_labels(self, labels: np.ndarray) -> "PointCloud":
        return PointCloud(self.xyz.copy(), np.asarray(labels, dtype=np.uint8))

    @classmethod
    def empty(cls, labeled: bool = False) -> "PointCloud":
        labels = np.zeros(0, dtype=np.uint8) if labeled else None
        return cls(np.zeros((0, 3)), labels)


def crop(cloud: PointCloud, region: Cuboid) -> PointCloud:
    """Points inside the region, boundary included. Labels carried through."""
    lo = np.asarray(region.min_corner)
    hi = np.asarray(region.max_corner)
    mask = np.all((cloud.xyz >= lo) & (cloud.xyz <= hi), axis=1)
    return cloud.select(mask)


def crop_indices(cloud: PointCloud, region: Cuboid) -> np.ndarray:
    """Indices of the points crop() would keep."""
    lo = np.asarray(region.min_corner)
    hi = np.asarray(region.max_corner)
    mask = np.all((cloud.xyz >= lo) & (cloud.xyz <= hi), axis=1)
    return np.flatnonzero(mask)


def bounds(cloud: PointCloud) -> Cuboid:
    """Tight axis-aligned bounding cuboid."""
    if len(cloud) == 0:
        raise ValueError("bounds of an empty cloud is undefined")
    return Cuboid(tuple(cloud.xyz.min(axis=0)), tuple(cloud.xyz.max(axis=0)))
