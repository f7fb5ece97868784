"""Synthetic 2-D classification data plus OOD / auxiliary samplers.

The in-domain task is a K-armed spiral with angular noise that grows with
radius, so class overlap (data uncertainty) increases toward the rim while
the far field stays empty (knowledge uncertainty). All generators are pure
functions of their parameters and seed.
"""

from __future__ import annotations

import csv
import pathlib
from dataclasses import dataclass

import numpy as np

__all__ = [
    "Dataset2D",
    "make_spiral",
    "make_ood",
    "save_csv",
    "load_csv",
]


@dataclass
class Dataset2D:
    points: np.ndarray  # (N, 2)
    labels: np.ndarray  # (N,) ints in [0, num_classes)
    num_classes: int
    split: str = "train"

    def __post_init__(self):
        self.points = np.asarray(self.points, dtype=np.float64)
        self.labels = np.asarray(self.labels, dtype=np.int64)
        if self.points.ndim != 2 or self.points.shape[1] != 2:
            raise ValueError("points must have shape (N, 2)")
        if self.labels.shape != (self.points.shape[0],):
            raise ValueError("labels must be one per point")
        if not np.all(np.isfinite(self.points)):
            raise ValueError("points must be finite")
        if self.labels.size and (self.labels.min() < 0 or self.labels.max() >= self.num_classes):
            raise ValueError("labels out of range")

    def __len__(self) -> int:
        return self.points.shape[0]


def make_spiral(
    n_per_class: int,
    num_classes: int = 3,
    noise_base: float = 0.1,
    noise_growth: float = 0.6,
    seed: int = 0,
    split: str = "train",
) -> Dataset2D:
    """K interleaved spiral arms inside the unit disk.

    Radius is uniform on (0, 1]; the angle winds twice around per arm and
    carries Gaussian noise with std noise_base + noise_growth * r.
    """
    if num_classes < 2:
        raise ValueError("need at least two classes")
    if n_per_class < 1:
        raise ValueError("need at least one point per class")
    rng = np.random.default_rng(seed)
    pts, labels = [], []
    for k in range(num_classes):
        r = 1.0 - rng.random(n_per_class)  # (0, 1]
        std = noise_base + noise_growth * r
        theta = 2.0 * np.pi * k / num_classes + r * 4.0 * np.pi + rng.normal(size=n_per_class) * std
        pts.append(np.column_stack([r * np.cos(theta), r * np.sin(theta)]))
        labels.append(np.full(n_per_class, k, dtype=np.int64))
    return Dataset2D(np.concatenate(pts), np.concatenate(labels), num_classes, split)


def make_ood(
    kind: str,
    n: int,
    seed: int = 0,
    *,
    inner: float = 2.0,
    outer: float = 3.0,
    half: float = 3.5,
    margin: float = 1.25,
) -> np.ndarray:
    """Uniform samples outside the training support.

    kind="ring": area-uniform in the annulus inner <= r <= outer.
    kind="box": uniform in [-half, half]^2 minus the sup-norm ball of
    radius `margin` (also used as the auxiliary distillation sampler).
    """
    rng = np.random.default_rng(seed)
    if kind == "ring":
        if not 0.0 < inner < outer:
            raise ValueError(f"degenerate ring geometry: inner={inner}, outer={outer}")
        r = np.sqrt(inner**2 + rng.random(n) * (outer**2 - inner**2))
        phi = 2.0 * np.pi * rng.random(n)
        return np.column_stack([r * np.cos(phi), r * np.sin(phi)])
    if kind == "box":
        if not 0.0 <= margin < half:
            raise ValueError(f"degenerate box geometry: half={half}, margin={margin}")
        out = np.empty((0, 2))
        while out.shape[0] < n:
            cand = rng.uniform(-half, half, size=(2 * n, 2))
            keep = np.abs(cand).max(axis=1) >= margin
            out = np.concatenate([out, cand[keep]])
        return out[:n]
    raise ValueError(f"unknown OOD kind {kind!r}")


def save_csv(ds: Dataset2D, path) -> None:
    with pathlib.Path(path).open("w", newline="") as fh:
        w = csv.writer(fh)
        w.writerow(["x1", "x2", "label"])
        for (x1, x2), label in zip(ds.points, ds.labels):
            w.writerow([repr(float(x1)), repr(float(x2)), int(label)])


def load_csv(path, num_classes: int | None = None, split: str = "train") -> Dataset2D:
    path = pathlib.Path(path)
    pts, labels = [], []
    with path.open(newline="") as fh:
        reader = csv.reader(fh)
        header = next(reader, None)
        if header != ["x1", "x2", "label"]:
            raise ValueError(f"{path}: expected header x1,x2,label, got {header}")
        for lineno, row in enumerate(reader, start=2):
            try:
                x1, x2 = float(row[0]), float(row[1])
                label = int(row[2])
            except (ValueError, IndexError) as exc:
                raise ValueError(f"{path}:{lineno}: malformed row {row!r}") from exc
            pts.append((x1, x2))
            labels.append(label)
    if not pts:
        raise ValueError(f"{path}: empty dataset")
    k = num_classes if num_classes is not None else max(labels) + 1
    bad = [i for i, label in enumerate(labels) if not 0 <= label < k]
    if bad:
        raise ValueError(f"{path}:{bad[0] + 2}: label {labels[bad[0]]} outside [0, {k})")
    return Dataset2D(np.array(pts), np.array(labels), k, split)
