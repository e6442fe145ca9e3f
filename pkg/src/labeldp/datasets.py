"""Reading and writing labeled datasets.

Every column of a CSV file other than the label column is kept as an opaque
string, so writing a dataset back reproduces those cells byte for byte.
"""
from __future__ import annotations

import csv
import logging
import math
from dataclasses import dataclass
from pathlib import Path

import numpy as np
from numpy.typing import NDArray

from .errors import DataError, EmptyDataset, LabelColumnNotFound, NonFiniteLabel
from .pipeline import LabeledDataset
from .results import NOTHING, Option, Some
from .streams import RandomStream

logger = logging.getLogger(__name__)

SYNTHETIC_BOUNDS = (0.0, 1.0)


@dataclass(frozen=True)
class CsvLayout:
    """Header of a CSV file, the position of its label column and its line ending."""

    header: tuple[str, ...]
    label_index: int
    line_terminator: str = "\n"

    @property
    def label_name(self) -> str:
        return self.header[self.label_index]

    @property
    def feature_names(self) -> tuple[str, ...]:
        return self.header[: self.label_index] + self.header[self.label_index + 1 :]


def read_labeled_csv(
    path: str | Path,
    label_col: str,
    label_bounds: Option[tuple[float, float]] = NOTHING,
) -> tuple[LabeledDataset, CsvLayout]:
    """Load a CSV file with a header row.

    Raises:
        EmptyDataset: the file has no header or no data row.
        LabelColumnNotFound: `label_col` is not in the header.
        DataError: a row has the wrong number of cells or a label is not a number.
    """
    with open(path, newline="", encoding="utf-8") as stream:
        terminator = "\r\n" if stream.readline().endswith("\r\n") else "\n"
        stream.seek(0)
        reader = csv.reader(stream)
        header = next(reader, None)
        if header is None:
            raise EmptyDataset(f"{path} is empty")
        if label_col not in header:
            raise LabelColumnNotFound(f"column {label_col!r} not found in {path}: {header}")
        index = header.index(label_col)
        features: list[tuple[str, ...]] = []
        labels: list[float] = []
        for line, row in enumerate(reader, start=2):
            if not row:
                continue
            if len(row) != len(header):
                raise DataError(
                    f"{path}:{line}: expected {len(header)} cells, got {len(row)}"
                )
            try:
                label = float(row[index])
            except ValueError as exc:
                raise DataError(f"{path}:{line}: label {row[index]!r} is not a number") from exc
            if not math.isfinite(label):
                raise NonFiniteLabel(f"{path}:{line}: label {row[index]!r} is not finite")
            labels.append(label)
            features.append(tuple(row[:index] + row[index + 1 :]))
    if not labels:
        raise EmptyDataset(f"{path} has no data row")
    logger.info("read %d rows from %s", len(labels), path)
    layout = CsvLayout(tuple(header), index, terminator)
    return LabeledDataset(tuple(features), np.asarray(labels), label_bounds), layout


def write_labeled_csv(
    path: str | Path,
    dataset: LabeledDataset,
    layout: CsvLayout,
    *,
    original: LabeledDataset | None = None,
) -> None:
    """Write `dataset` with the column order and line ending of `layout`.

    With `original`, its labels are appended as `<label>_original`. That column
    is the raw private label and only meant for testing.
    """
    header = list(layout.header)
    if original is not None:
        header.append(f"{layout.label_name}_original")
    with open(path, "w", newline="", encoding="utf-8") as stream:
        writer = csv.writer(stream, lineterminator=layout.line_terminator)
        writer.writerow(header)
        for row, (payload, label) in enumerate(zip(dataset.features, dataset.labels)):
            cells = list(payload)
            cells.insert(layout.label_index, repr(float(label)))
            if original is not None:
                cells.append(repr(float(original.labels[row])))
            writer.writerow(cells)
    logger.info("wrote %d rows to %s", len(dataset), path)


def feature_matrix(dataset: LabeledDataset) -> NDArray[np.float64]:
    """Parse every feature payload as a row of floats."""
    try:
        return np.asarray(
            [[float(cell) for cell in payload] for payload in dataset.features],
            dtype=float,
        ).reshape(len(dataset), -1)
    except (TypeError, ValueError) as exc:
        raise DataError(f"features are not numeric: {exc}") from exc


def synthetic_task(
    n: int, d: int, stream: RandomStream, *, noise: float = 0.1
) -> tuple[NDArray[np.float64], LabeledDataset]:
    """Linear regression task with Gaussian features and labels scaled to [0, 1].

    Returns the feature matrix and a dataset whose feature payloads are the
    rows of that matrix.
    """
    if n < 2 or d < 1:
        raise DataError(f"synthetic task needs n >= 2 and d >= 1, got n={n}, d={d}")
    features = stream.normal(1.0, size=(n, d))
    weights = stream.normal(1.0, size=d) / math.sqrt(d)
    raw = features @ weights + stream.normal(noise, size=n)
    lo, hi = float(raw.min()), float(raw.max())
    labels = (raw - lo) / (hi - lo)
    dataset = LabeledDataset(
        tuple(tuple(row) for row in features.tolist()),
        labels,
        Some(SYNTHETIC_BOUNDS),
    )
    return features, dataset
