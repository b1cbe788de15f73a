import csv
from dataclasses import dataclass, field

import numpy as np

from ..errors import DomainError, FormatError


def as_matrix(X, name="X"):
    """Accept a Dataset, FeatureSet or array-like and return a float 2-D array."""
    if isinstance(X, (Dataset, FeatureSet)):
        X = X.values
    X = np.asarray(X, dtype=np.float64)
    if X.ndim != 2:
        raise DomainError(f"{name} must be 2-D, got shape {X.shape}")
    if not np.all(np.isfinite(X)):
        raise DomainError(f"{name} contains non-finite values")
    return X


@dataclass(frozen=True)
class Dataset:
    """M observations x N variables, with integer class labels."""

    values: np.ndarray
    labels: np.ndarray
    frequencies: np.ndarray = None
    class_names: tuple = ()

    def __post_init__(self):
        X = as_matrix(self.values)
        y = np.asarray(self.labels).astype(np.int64).ravel()
        if X.shape[0] < 2:
            raise DomainError("a dataset needs at least 2 observations")
        if y.size != X.shape[0]:
            raise DomainError(f"{y.size} labels for {X.shape[0]} observations")
        if self.frequencies is not None:
            f = np.asarray(self.frequencies, dtype=np.float64).ravel()
            if f.size != X.shape[1]:
                raise DomainError("frequency axis length does not match the variable count")
            object.__setattr__(self, "frequencies", f)
        object.__setattr__(self, "values", X)
        object.__setattr__(self, "labels", y)
        object.__setattr__(self, "class_names", tuple(self.class_names))

    @property
    def X(self):
        return self.values

    @property
    def shape(self):
        return self.values.shape

    @property
    def classes(self):
        return np.unique(self.labels)

    def subset(self, index):
        return Dataset(self.values[index], self.labels[index], self.frequencies, self.class_names)

    def with_values(self, values):
        return Dataset(values, self.labels, self.frequencies, self.class_names)


@dataclass(frozen=True)
class FeatureSet:
    """Reduced M x P features plus the extractor that produced them."""

    values: np.ndarray
    extractor: str
    params: dict = field(default_factory=dict)
    labels: np.ndarray = None

    def __post_init__(self):
        Y = as_matrix(self.values, "features")
        if Y.shape[1] < 1:
            raise DomainError("a feature set needs at least one component")
        object.__setattr__(self, "values", Y)
        if self.labels is not None:
            object.__setattr__(self, "labels", np.asarray(self.labels).astype(np.int64).ravel())

    @property
    def Y(self):
        return self.values


def write_table_csv(values, labels, stream, columns=None):
    """One row per observation, label in the last column, 17 significant digits."""
    values = np.asarray(values, dtype=np.float64)
    if columns is None:
        columns = [f"c{i}" for i in range(values.shape[1])]
    stream.write(",".join([*map(str, columns), "label"]) + "\n")
    labels = [""] * values.shape[0] if labels is None else labels
    for row, lab in zip(values, labels):
        stream.write(",".join(f"{v:.17g}" for v in row) + f",{lab}\n")


def read_table_csv(stream):
    """Inverse of :func:`write_table_csv`; returns (header, values, labels)."""
    reader = csv.reader(stream)
    header = next(reader, None)
    if not header or header[-1].strip() != "label":
        raise FormatError("expected a header whose last column is 'label'", line=1)
    rows, labels = [], []
    for lineno, row in enumerate(reader, start=2):
        if not row:
            continue
        if len(row) != len(header):
            raise FormatError(f"expected {len(header)} columns, got {len(row)}", line=lineno)
        try:
            rows.append([float(v) for v in row[:-1]])
            labels.append(int(row[-1]))
        except ValueError:
            raise FormatError(f"non-numeric entry in {row!r}", line=lineno) from None
    return header[:-1], np.array(rows, dtype=np.float64).reshape(len(rows), len(header) - 1), np.array(labels, dtype=np.int64)
