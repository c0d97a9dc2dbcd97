"""CSV ingestion: plain point files and labeled datasets (features + class).

Files are comma-separated, no quoting, one row per point, UTF-8 labels.
Duplicate feature rows are kept as-is; downstream neighbor queries resolve
the resulting distance ties deterministically.
"""

from __future__ import annotations

from collections import Counter
from dataclasses import dataclass
from pathlib import Path

import numpy as np

from .core import EmptyCloud, HPDivError, PointCloud


class ParseError(HPDivError):
    """Malformed cell; carries 1-based row and column positions."""

    def __init__(self, message: str, row: int, col: int | None = None):
        super().__init__(message)
        self.row = row
        self.col = col


class RaggedRows(HPDivError):
    """Rows with inconsistent widths."""

    def __init__(self, message: str, row: int):
        super().__init__(message)
        self.row = row


class LabelMissing(HPDivError):
    """A row has no label column."""


class UnknownClass(HPDivError):
    """Requested class absent from the dataset."""


class InvalidPair(HPDivError):
    """The two requested classes must differ."""


@dataclass(frozen=True)
class LabeledDataset:
    """Feature rows with one class label per row."""

    features: PointCloud
    labels: tuple[str, ...]
    class_counts: dict[str, int]

    def __len__(self) -> int:
        return len(self.features)


def _data_lines(path) -> list[tuple[int, str]]:
    text = Path(path).read_text(encoding="utf-8")
    return [
        (i + 1, line.strip())
        for i, line in enumerate(text.splitlines())
        if line.strip()
    ]


def load_points(path, dim: int | None = None) -> PointCloud:
    """Read a point cloud from CSV; every row must have the same width."""
    rows = []
    width = None
    for lineno, line in _data_lines(path):
        cells = line.split(",")
        if width is None:
            width = len(cells)
        elif len(cells) != width:
            raise RaggedRows(
                f"row {lineno} has {len(cells)} columns, expected {width}",
                row=lineno,
            )
        try:
            rows.append([float(c) for c in cells])
        except ValueError:
            bad = next(
                i for i, c in enumerate(cells) if not _parses_float(c)
            )
            raise ParseError(
                f"row {lineno}, column {bad + 1}: {cells[bad]!r} is not a number",
                row=lineno,
                col=bad + 1,
            ) from None
    if not rows:
        raise EmptyCloud(f"no data rows in {path}")
    cloud = PointCloud(np.asarray(rows, dtype=np.float64))
    if dim is not None and cloud.dim != dim:
        raise HPDivError(f"expected dimension {dim}, file has {cloud.dim}")
    return cloud


def _parses_float(cell: str) -> bool:
    try:
        float(cell)
        return True
    except ValueError:
        return False


def save_points(path, cloud: PointCloud) -> None:
    """Write a point cloud as CSV with round-trip-exact decimal text."""
    with open(path, "w", encoding="utf-8") as fh:
        for row in cloud.points:
            fh.write(",".join(repr(float(v)) for v in row) + "\n")


def load_labeled(path, label_column: int = -1) -> LabeledDataset:
    """Read a labeled dataset: numeric feature columns plus a class token.

    The label column defaults to the last one. Rows must agree in width.
    """
    feats = []
    labels = []
    width = None
    for lineno, line in _data_lines(path):
        cells = line.split(",")
        if width is None:
            width = len(cells)
            if width < 2:
                raise LabelMissing(
                    f"row {lineno}: need at least one feature and a label"
                )
        elif len(cells) != width:
            raise RaggedRows(
                f"row {lineno} has {len(cells)} columns, expected {width}",
                row=lineno,
            )
        li = label_column if label_column >= 0 else width + label_column
        if not (0 <= li < width):
            raise LabelMissing(f"label column {label_column} out of range")
        label = cells[li].strip()
        if not label:
            raise LabelMissing(f"row {lineno}: empty label")
        feat_cells = [c for i, c in enumerate(cells) if i != li]
        row = []
        for i, c in enumerate(feat_cells):
            if not _parses_float(c):
                raise ParseError(
                    f"row {lineno}, column {i + 1}: {c!r} is not a number",
                    row=lineno,
                    col=i + 1,
                )
            row.append(float(c))
        feats.append(row)
        labels.append(label)
    if not feats:
        raise EmptyCloud(f"no data rows in {path}")
    return LabeledDataset(
        features=PointCloud(np.asarray(feats, dtype=np.float64)),
        labels=tuple(labels),
        class_counts=dict(Counter(labels)),
    )


def class_pair(
    ds: LabeledDataset, class_a: str, class_b: str
) -> tuple[PointCloud, PointCloud]:
    """Extract (X, Y) clouds for two distinct classes, preserving row order."""
    if class_a == class_b:
        raise InvalidPair(f"classes must differ, both are {class_a!r}")
    for cls in (class_a, class_b):
        if cls not in ds.class_counts:
            raise UnknownClass(f"class {cls!r} not present in the dataset")
    lab = np.asarray(ds.labels)
    x = ds.features.points[lab == class_a]
    y = ds.features.points[lab == class_b]
    return PointCloud(x), PointCloud(y)
