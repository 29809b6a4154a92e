"""Labeled two-class CSV datasets and leave-one-out evaluation.

File format: UTF-8 CSV whose header starts with ``label`` followed by the
feature ids; each subsequent row is a class label and p numeric cells
(scientific notation accepted).  Exactly two distinct labels must appear.
The lexicographically smaller label plays the X role in every classifier
so that tie rules and confusion counts are deterministic.
"""

from __future__ import annotations

import csv
from dataclasses import dataclass

import numpy as np

from .classifier import MethodSpec, evaluate_method
from .errors import DatasetError, ProtocolError

__all__ = [
    "Dataset",
    "LooResult",
    "load_dataset",
    "save_dataset",
    "loo_cross_validate",
    "dataset_from_generated",
]

LABEL_COLUMN = "label"


@dataclass(frozen=True)
class Dataset:
    """Feature matrix with one class label per row."""

    feature_ids: tuple[str, ...]
    samples: np.ndarray
    labels: tuple[str, ...]

    def __post_init__(self):
        samples = np.asarray(self.samples, dtype=float)
        object.__setattr__(self, "samples", samples)
        if samples.ndim != 2:
            raise DatasetError(f"samples must be 2-dimensional, got shape {samples.shape}")
        if samples.shape[1] != len(self.feature_ids):
            raise DatasetError(
                f"{len(self.feature_ids)} feature ids but rows have "
                f"{samples.shape[1]} cells"
            )
        if samples.shape[0] != len(self.labels):
            raise DatasetError(
                f"{samples.shape[0]} rows but {len(self.labels)} labels"
            )
        if len(set(self.feature_ids)) != len(self.feature_ids):
            raise DatasetError("duplicate feature ids")
        if len(self.class_labels) != 2:
            raise DatasetError(
                f"need exactly two distinct labels, got {sorted(set(self.labels))}"
            )

    @property
    def p(self) -> int:
        return self.samples.shape[1]

    @property
    def class_labels(self) -> tuple[str, str]:
        """The two labels in sorted order; the first plays the X role."""
        distinct = sorted(set(self.labels))
        return tuple(distinct)

    def rows_of(self, label: str) -> np.ndarray:
        mask = np.array([lab == label for lab in self.labels])
        return self.samples[mask]


def load_dataset(path) -> Dataset:
    """Read and validate a labeled CSV file; errors carry the line number."""
    try:
        fh = open(path, "r", encoding="utf-8", newline="")
    except OSError as exc:
        raise DatasetError(f"{path}: {exc.strerror or exc}") from None
    with fh:
        reader = csv.reader(fh)
        try:
            header = next(reader)
        except StopIteration:
            raise DatasetError(f"{path}: empty file") from None
        if not header:
            raise DatasetError(f"{path}, line 1: empty header")
        if header[0] != LABEL_COLUMN:
            raise DatasetError(
                f"{path}, line 1: first header column must be {LABEL_COLUMN!r}, "
                f"got {header[0]!r}"
            )
        feature_ids = tuple(header[1:])
        if not feature_ids:
            raise DatasetError(f"{path}, line 1: no feature columns")
        rows: list[list[float]] = []
        labels: list[str] = []
        for row in reader:
            line = reader.line_num
            if not row:
                continue
            if len(row) != len(header):
                raise DatasetError(
                    f"{path}, line {line}: expected {len(header)} cells, got {len(row)}"
                )
            labels.append(row[0])
            try:
                rows.append([float(cell) for cell in row[1:]])
            except ValueError as exc:
                raise DatasetError(f"{path}, line {line}: {exc}") from None
    if not rows:
        raise DatasetError(f"{path}: no data rows")
    if len(set(labels)) != 2:
        raise DatasetError(
            f"{path}: need exactly two distinct labels, got {sorted(set(labels))}"
        )
    return Dataset(feature_ids=feature_ids, samples=np.array(rows), labels=tuple(labels))


def save_dataset(dataset: Dataset, path) -> None:
    """Write a Dataset so that load_dataset recovers it exactly.

    Values are serialized with repr, which round-trips doubles.
    """
    with open(path, "w", encoding="utf-8", newline="") as fh:
        writer = csv.writer(fh)
        writer.writerow([LABEL_COLUMN, *dataset.feature_ids])
        for label, row in zip(dataset.labels, dataset.samples):
            writer.writerow([label, *[repr(float(v)) for v in row]])


@dataclass(frozen=True)
class LooResult:
    """Leave-one-out tally: per-class hit counts and overall accuracy."""

    accuracy: float
    correct: int
    total: int
    confusion: dict[tuple[str, str], int]
    class_labels: tuple[str, str]

    def __str__(self) -> str:
        first, second = self.class_labels
        lines = [f"accuracy {self.correct}/{self.total} = {self.accuracy:.4f}"]
        for true in self.class_labels:
            for predicted in self.class_labels:
                lines.append(
                    f"  true {true} -> predicted {predicted}: "
                    f"{self.confusion[(true, predicted)]}"
                )
        return "\n".join(lines)


def loo_cross_validate(dataset: Dataset, method: MethodSpec) -> LooResult:
    """Hold out each row in turn, train on the rest, and tally the verdicts.

    The robust method re-selects its threshold inside every fold.  Requires
    at least two rows per class so every fold keeps a trainer on each side.
    """
    first, second = dataset.class_labels
    counts = {lab: sum(x == lab for x in dataset.labels) for lab in (first, second)}
    for lab, count in counts.items():
        if count < 2:
            raise ProtocolError(
                f"class {lab!r} has {count} sample(s); leave-one-out needs at least 2"
            )
    labels = np.array(dataset.labels)
    confusion = {(a, b): 0 for a in (first, second) for b in (first, second)}
    correct = 0
    for i in range(len(labels)):
        keep = np.ones(len(labels), dtype=bool)
        keep[i] = False
        train = dataset.samples[keep]
        train_labels = labels[keep]
        outcome = evaluate_method(
            train[train_labels == first],
            train[train_labels == second],
            dataset.samples[i],
            method,
        )
        predicted = first if outcome.label == "X" else second
        confusion[(str(labels[i]), predicted)] += 1
        correct += predicted == labels[i]
    total = len(labels)
    return LooResult(
        accuracy=correct / total,
        correct=correct,
        total=total,
        confusion=confusion,
        class_labels=(first, second),
    )


def dataset_from_generated(data, x_label: str = "X", y_label: str = "Y") -> Dataset:
    """Bundle a generated draw's training rows and test vector as a Dataset.

    The test vector is appended last under its true label, so the file
    records the whole trial.
    """
    samples = np.vstack([data.x_samples, data.y_samples, data.z])
    labels = (
        [x_label] * data.x_samples.shape[0]
        + [y_label] * data.y_samples.shape[0]
        + [x_label if data.z_label == "X" else y_label]
    )
    p = samples.shape[1]
    width = len(str(p - 1))
    feature_ids = tuple(f"f{index:0{width}d}" for index in range(p))
    return Dataset(feature_ids=feature_ids, samples=samples, labels=tuple(labels))
