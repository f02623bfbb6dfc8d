"""Labeled embedding sets: data model, validation, EMB1 and CSV I/O.

EMB1 is the package's binary interchange format (little-endian):

    magic "EMB1" | u32 N | u32 D | u32 C | u32 reserved(=0)
    | N*D float32 row-major features | N u32 labels
"""
from __future__ import annotations

import csv
import struct
from dataclasses import dataclass
from pathlib import Path

import numpy as np

from .errors import (
    BadMagicError,
    LabelRangeError,
    MissingLabelColumnError,
    NonFiniteValueError,
    NonNumericCellError,
    SingleClassError,
    TruncatedPayloadError,
    ValidationError,
)

MAGIC = b"EMB1"
_HEADER = struct.Struct("<4I")  # N, D, C, reserved


@dataclass(frozen=True)
class EmbeddingSet:
    """N feature rows with integer class labels in [0, class_count).

    Immutable after construction; the arrays are marked read-only so a
    set can be shared across worker threads.
    """

    features: np.ndarray
    labels: np.ndarray
    class_count: int
    model_id: str = "unknown"
    dataset_id: str = "unknown"
    label_map: dict[int, int] | None = None  # original -> dense, CSV only

    def __post_init__(self):
        feats = np.asarray(self.features)
        if feats.dtype not in (np.float32, np.float64):
            feats = feats.astype(np.float32)
        if feats.ndim != 2:
            raise ValidationError(f"features must be 2-D, got shape {feats.shape}")
        labels = np.asarray(self.labels, dtype=np.int64)
        if labels.ndim != 1 or labels.shape[0] != feats.shape[0]:
            raise ValidationError(
                f"labels shape {labels.shape} does not match {feats.shape[0]} rows"
            )
        n, d = feats.shape
        if n < 2:
            raise ValidationError(f"need at least 2 samples, got {n}")
        if d < 1:
            raise ValidationError("need at least 1 feature dimension")
        if self.class_count < 2:
            raise ValidationError(f"need at least 2 classes, got {self.class_count}")
        if not np.isfinite(feats).all():
            bad = int(np.flatnonzero(~np.isfinite(feats).ravel())[0])
            raise NonFiniteValueError(
                f"non-finite feature value at flat index {bad}"
            )
        if labels.min() < 0 or labels.max() >= self.class_count:
            raise LabelRangeError(
                f"labels must lie in [0, {self.class_count}), "
                f"got range [{labels.min()}, {labels.max()}]"
            )
        present = np.bincount(labels, minlength=self.class_count)
        if (present == 0).any():
            missing = int(np.flatnonzero(present == 0)[0])
            raise ValidationError(f"class {missing} has no samples")
        feats = np.ascontiguousarray(feats)
        feats.setflags(write=False)
        labels.setflags(write=False)
        object.__setattr__(self, "features", feats)
        object.__setattr__(self, "labels", labels)

    @property
    def sample_count(self) -> int:
        return self.features.shape[0]

    @property
    def feature_dim(self) -> int:
        return self.features.shape[1]

    def with_features(self, features: np.ndarray) -> "EmbeddingSet":
        """Same labels and identity, new feature matrix."""
        return EmbeddingSet(
            features=features,
            labels=self.labels,
            class_count=self.class_count,
            model_id=self.model_id,
            dataset_id=self.dataset_id,
            label_map=self.label_map,
        )


@dataclass(frozen=True)
class ClassPartition:
    """Row indices of each class, in row order."""

    by_class: tuple[np.ndarray, ...]


def partition(ds: EmbeddingSet) -> ClassPartition:
    idx = [np.flatnonzero(ds.labels == c) for c in range(ds.class_count)]
    return ClassPartition(by_class=tuple(idx))


def save_emb1(ds: EmbeddingSet, path: str | Path) -> None:
    """Write the canonical EMB1 layout (features stored as float32)."""
    path = Path(path)
    header = MAGIC + _HEADER.pack(ds.sample_count, ds.feature_dim, ds.class_count, 0)
    body = (
        np.ascontiguousarray(ds.features, dtype="<f4").tobytes()
        + ds.labels.astype("<u4").tobytes()
    )
    path.write_bytes(header + body)


def load_emb1(
    path: str | Path,
    model_id: str | None = None,
    dataset_id: str = "unknown",
) -> EmbeddingSet:
    """Parse an EMB1 file; the model id defaults to the file stem."""
    path = Path(path)
    raw = path.read_bytes()
    if raw[:4] != MAGIC:
        raise BadMagicError(f"{path}: expected magic {MAGIC!r}, got {raw[:4]!r}")
    if len(raw) < 4 + _HEADER.size:
        raise TruncatedPayloadError(f"{path}: header truncated at {len(raw)} bytes")
    n, d, c, reserved = _HEADER.unpack_from(raw, 4)
    if reserved != 0:
        raise ValidationError(f"{path}: reserved header field is {reserved}, not 0")
    expected = 4 + _HEADER.size + n * d * 4 + n * 4
    if len(raw) < expected:
        raise TruncatedPayloadError(
            f"{path}: payload is {len(raw)} bytes, header promises {expected}"
        )
    if len(raw) > expected:
        raise TruncatedPayloadError(
            f"{path}: {len(raw) - expected} trailing bytes after payload"
        )
    offset = 4 + _HEADER.size
    feats = np.frombuffer(raw, dtype="<f4", count=n * d, offset=offset)
    labels = np.frombuffer(raw, dtype="<u4", count=n, offset=offset + n * d * 4)
    if (labels >= c).any():
        bad = int(labels[labels >= c][0])
        raise LabelRangeError(f"{path}: label {bad} >= class count {c}")
    return EmbeddingSet(
        features=feats.reshape(n, d).copy(),
        labels=labels.astype(np.int64),
        class_count=c,
        model_id=model_id if model_id is not None else path.stem,
        dataset_id=dataset_id,
    )


def load_csv(
    path: str | Path,
    label_column: str = "label",
    model_id: str | None = None,
    dataset_id: str = "unknown",
) -> EmbeddingSet:
    """Load a header CSV. Feature column order is preserved; labels are
    remapped to a dense [0, C) range with the mapping kept on the set."""
    path = Path(path)
    with path.open(newline="") as fh:
        reader = csv.reader(fh)
        try:
            header = next(reader)
        except StopIteration:
            raise ValidationError(f"{path}: empty file") from None
        if label_column not in header:
            raise MissingLabelColumnError(
                f"{path}: no column named {label_column!r} in header {header}"
            )
        label_idx = header.index(label_column)
        feat_names = [h for i, h in enumerate(header) if i != label_idx]
        rows: list[list[float]] = []
        raw_labels: list[int] = []
        for lineno, row in enumerate(reader, start=2):
            if len(row) != len(header):
                raise ValidationError(
                    f"{path}:{lineno}: {len(row)} cells, expected {len(header)}"
                )
            try:
                raw_labels.append(int(row[label_idx]))
            except ValueError:
                raise NonNumericCellError(
                    f"{path}:{lineno}: label {row[label_idx]!r} is not an integer"
                ) from None
            vals = []
            for i, cell in enumerate(row):
                if i == label_idx:
                    continue
                try:
                    vals.append(float(cell))
                except ValueError:
                    raise NonNumericCellError(
                        f"{path}:{lineno}: column {header[i]!r} cell {cell!r} "
                        "is not numeric"
                    ) from None
            rows.append(vals)
    if not feat_names:
        raise ValidationError(f"{path}: no feature columns besides {label_column!r}")
    uniq = sorted(set(raw_labels))
    if len(uniq) < 2:
        raise SingleClassError(f"{path}: only one class present ({uniq})")
    remap = {orig: dense for dense, orig in enumerate(uniq)}
    return EmbeddingSet(
        features=np.asarray(rows, dtype=np.float32),
        labels=np.asarray([remap[v] for v in raw_labels], dtype=np.int64),
        class_count=len(uniq),
        model_id=model_id if model_id is not None else path.stem,
        dataset_id=dataset_id,
        label_map=remap,
    )
