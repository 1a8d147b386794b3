"""Dataset loaders, one-vs-rest splits and the seeded Gaussian toy generator."""
from __future__ import annotations

import io
import os
import sys
import warnings
from dataclasses import dataclass
from typing import NamedTuple, Optional, Sequence, Union

import numpy as np

LETTER_TRAIN_ROWS = 16000
LETTER_DIM = 16


class DataError(ValueError):
    """Malformed or inconsistent input data."""


@dataclass(frozen=True, eq=False)
class Dataset:
    """Dense feature matrix with one string label per row."""

    features: np.ndarray
    labels: tuple
    name: str = ""

    def __post_init__(self):
        X = np.array(self.features, dtype=float, copy=True)
        if X.ndim != 2:
            raise DataError("features must be a 2-D matrix")
        labels = tuple(str(lab) for lab in self.labels)
        if len(labels) != X.shape[0]:
            raise DataError(f"{len(labels)} labels for {X.shape[0]} rows")
        if any(not lab for lab in labels):
            raise DataError("labels must be nonempty strings")
        X.setflags(write=False)
        object.__setattr__(self, "features", X)
        object.__setattr__(self, "labels", labels)

    def __len__(self):
        return self.features.shape[0]

    @property
    def dim(self):
        return self.features.shape[1]

    @property
    def classes(self):
        """Distinct labels in order of first appearance."""
        return tuple(dict.fromkeys(self.labels))

    def rows(self, label):
        mask = np.fromiter((lab == label for lab in self.labels), bool, len(self.labels))
        return self.features[mask]


Source = Union[str, os.PathLike, io.IOBase]


def _read_text(source) -> tuple[str, str]:
    """Return ``(text, name)`` for a path, ``"-"`` (stdin), or a text/binary stream."""
    if isinstance(source, (str, os.PathLike)):
        if str(source) == "-":
            return sys.stdin.read(), "<stdin>"
        with open(source, "r", encoding="utf-8") as fh:
            return fh.read(), os.fspath(source)
    data = source.read()
    if isinstance(data, bytes):
        data = data.decode("utf-8")
    return data, getattr(source, "name", "<stream>")


def load_letter(source) -> Dataset:
    """Read the UCI letter-recognition format.

    Each line is ``<LETTER>,<16 integers>``. File order is preserved, so
    the first 16000 rows form the conventional training split. Feature
    values outside 0..15 are accepted with a warning.
    """
    text, name = _read_text(source)
    labels, rows = [], []
    out_of_range = 0
    for lineno, line in enumerate(text.splitlines(), 1):
        line = line.strip()
        if not line:
            continue
        parts = line.split(",")
        if len(parts) != LETTER_DIM + 1:
            raise DataError(f"{name}:{lineno}: expected {LETTER_DIM + 1} fields, got {len(parts)}")
        label = parts[0].strip()
        if not label:
            raise DataError(f"{name}:{lineno}: empty class label")
        try:
            values = [int(p) for p in parts[1:]]
        except ValueError:
            raise DataError(f"{name}:{lineno}: features must be integers") from None
        out_of_range += sum(1 for v in values if not 0 <= v <= 15)
        labels.append(label)
        rows.append(values)
    if not rows:
        raise DataError(f"{name}: no data rows")
    if out_of_range:
        warnings.warn(f"{name}: {out_of_range} feature values outside 0..15", stacklevel=2)
    return Dataset(np.array(rows, dtype=float), labels, os.path.basename(name))


def load_libsvm(source, dim: Optional[int] = None) -> Dataset:
    """Read sparse ``<label> <index>:<value> ...`` lines into a dense matrix.

    Indices are 1-based and must be strictly ascending within a line.
    The dimension is the largest index seen unless `dim` is given.
    """
    text, name = _read_text(source)
    labels, entries = [], []
    width = 0
    for lineno, line in enumerate(text.splitlines(), 1):
        line = line.split("#", 1)[0].strip()
        if not line:
            continue
        tok = line.split()
        labels.append(tok[0])
        row, last = [], 0
        for item in tok[1:]:
            idx, sep, val = item.partition(":")
            try:
                j, v = int(idx), float(val)
            except ValueError:
                raise DataError(f"{name}:{lineno}: cannot parse {item!r}") from None
            if not sep or j < 1:
                raise DataError(f"{name}:{lineno}: bad feature {item!r}")
            if j <= last:
                raise DataError(f"{name}:{lineno}: indices must be strictly ascending")
            last = j
            row.append((j - 1, v))
        width = max(width, last)
        entries.append(row)
    if not entries:
        raise DataError(f"{name}: no data rows")
    if dim is not None:
        if width > dim:
            raise DataError(f"{name}: feature index {width} exceeds dim={dim}")
        width = dim
    X = np.zeros((len(entries), max(width, 1)))
    for i, row in enumerate(entries):
        for j, v in row:
            X[i, j] = v
    return Dataset(X, labels, os.path.basename(name))


def _is_number(token):
    try:
        float(token)
    except ValueError:
        return False
    return True


def load_csv(source, label_column: Union[int, str, None] = "label",
             header_line: Optional[bool] = None) -> Dataset:
    """Read comma-separated rows.

    With ``header_line=None`` the first line is taken as a header when one
    of its fields is not a number while the same field of the next line is.
    `label_column` is a column name (requires a header), a 0-based index,
    or ``None`` for unlabeled data (every row gets the label ``"?"``).
    """
    text, name = _read_text(source)
    lines = [ln.strip() for ln in text.splitlines()]
    lines = [ln for ln in lines if ln]
    if not lines:
        raise DataError(f"{name}: no data rows")
    first = [f.strip() for f in lines[0].split(",")]
    header = None
    if header_line is None:
        # a header has a non-numeric field where the next row has a number
        if len(lines) > 1:
            second = [f.strip() for f in lines[1].split(",")]
            header_line = any(not _is_number(a) and _is_number(b) for a, b in zip(first, second))
        else:
            header_line = not any(_is_number(f) for f in first)
    if header_line:
        header, lines = first, lines[1:]
    if isinstance(label_column, str):
        if header is None:
            # a headerless file with a named label column: take the first column
            label_idx = 0 if label_column == "label" else None
            if label_idx is None:
                raise DataError(f"{name}: column {label_column!r} requires a header line")
        elif label_column in header:
            label_idx = header.index(label_column)
        else:
            raise DataError(f"{name}: no column named {label_column!r}")
    else:
        label_idx = label_column
    ncol = len(header) if header is not None else None
    labels, rows = [], []
    for lineno, line in enumerate(lines, 2 if header is not None else 1):
        fields = [f.strip() for f in line.split(",")]
        if ncol is None:
            ncol = len(fields)
        if len(fields) != ncol:
            raise DataError(f"{name}:{lineno}: expected {ncol} fields, got {len(fields)}")
        if label_idx is not None:
            if not -ncol <= label_idx < ncol:
                raise DataError(f"{name}: label column {label_idx} out of range")
            label = fields.pop(label_idx)
        else:
            label = "?"
        try:
            rows.append([float(f) for f in fields])
        except ValueError:
            raise DataError(f"{name}:{lineno}: unparsable number") from None
        labels.append(label)
    if not rows:
        raise DataError(f"{name}: no data rows")
    return Dataset(np.array(rows, dtype=float).reshape(len(rows), -1), labels, os.path.basename(name))


def write_csv(dataset: Dataset, destination=None) -> str:
    """Write ``label,x1,...,xd`` with a header; returns the text.

    Floats use the shortest representation that round-trips, so
    ``write_csv(load_csv(write_csv(d)))`` reproduces the same bytes.
    """
    out = ["label," + ",".join(f"x{j + 1}" for j in range(dataset.dim))]
    for label, row in zip(dataset.labels, dataset.features):
        out.append(label + "," + ",".join(repr(float(v)) for v in row))
    text = "\n".join(out) + "\n"
    if isinstance(destination, (str, os.PathLike)):
        with open(destination, "w", encoding="utf-8", newline="\n") as fh:
            fh.write(text)
    elif destination is not None:
        destination.write(text)
    return text


def load_plain(source) -> np.ndarray:
    """Unlabeled numeric rows separated by commas or whitespace.

    Returns an ``(n, d)`` array; an empty input gives shape ``(0, 0)``.
    """
    text, name = _read_text(source)
    rows = []
    for lineno, line in enumerate(text.splitlines(), 1):
        line = line.strip()
        if not line:
            continue
        try:
            rows.append([float(t) for t in line.replace(",", " ").split()])
        except ValueError:
            raise DataError(f"{name}:{lineno}: unparsable number") from None
        if len(rows[-1]) != len(rows[0]):
            raise DataError(f"{name}:{lineno}: expected {len(rows[0])} values, got {len(rows[-1])}")
    if not rows:
        return np.zeros((0, 0))
    return np.array(rows, dtype=float)


class OneVsRest(NamedTuple):
    train_positives: np.ndarray
    test_positives: np.ndarray
    test_negatives: np.ndarray


def one_vs_rest(data: Dataset, target: str, split: Union[int, float] = LETTER_TRAIN_ROWS) -> OneVsRest:
    """Split `data` into a one-class problem for `target`.

    `split` is either the number of leading rows forming the training
    partition or, if it is a float in (0, 1), the fraction of rows. The
    training set keeps only `target` rows; the test partition is divided
    into `target` rows and all other rows.
    """
    n = len(data)
    if isinstance(split, float) and not float(split).is_integer():
        if not 0.0 < split < 1.0:
            raise DataError("split fraction must lie in (0, 1)")
        boundary = int(round(split * n))
    else:
        boundary = int(split)
    if not 0 < boundary < n:
        raise DataError(f"split boundary {boundary} leaves an empty partition of {n} rows")
    if target not in data.labels:
        raise DataError(f"unknown target class {target!r}")
    is_pos = np.fromiter((lab == target for lab in data.labels), bool, n)
    train = np.arange(n) < boundary
    parts = OneVsRest(data.features[train & is_pos], data.features[~train & is_pos],
                      data.features[~train & ~is_pos])
    if parts.train_positives.shape[0] == 0:
        raise DataError(f"class {target!r} has no rows in the training partition")
    if parts.test_positives.shape[0] == 0:
        raise DataError(f"class {target!r} has no rows in the test partition")
    if parts.test_negatives.shape[0] == 0:
        raise DataError("test partition has no negative rows")
    return parts


# ---------------------------------------------------------------------------
# toy data

_SM_GAMMA = np.uint64(0x9E3779B97F4A7C15)
_SM_M1 = np.uint64(0xBF58476D1CE4E5B9)
_SM_M2 = np.uint64(0x94D049BB133111EB)


def splitmix64(seed: int, count: int) -> np.ndarray:
    """First `count` outputs of the SplitMix64 generator started at `seed`.

    Output ``k`` (0-based) is ``mix(seed + (k + 1) * 0x9E3779B97F4A7C15)``
    with the standard mixing function, all arithmetic modulo 2**64.
    """
    k = np.arange(1, count + 1, dtype=np.uint64)
    with np.errstate(over="ignore"):
        z = np.uint64(seed % 2**64) + k * _SM_GAMMA
        z = (z ^ (z >> np.uint64(30))) * _SM_M1
        z = (z ^ (z >> np.uint64(27))) * _SM_M2
    return z ^ (z >> np.uint64(31))


def uniforms(seed: int, count: int) -> np.ndarray:
    """Doubles in [0, 1) from the top 53 bits of each SplitMix64 output."""
    return (splitmix64(seed, count) >> np.uint64(11)).astype(np.float64) * 2.0 ** -53


def standard_normals(seed: int, count: int) -> np.ndarray:
    """Standard normal deviates via the Box-Muller transform.

    Uniform pairs ``(u1, u2)`` are consumed in order; each pair gives
    ``r cos(t)`` then ``r sin(t)`` with ``r = sqrt(-2 ln(1 - u1))`` and
    ``t = 2 pi u2``.
    """
    pairs = (count + 1) // 2
    u = uniforms(seed, 2 * pairs).reshape(pairs, 2)
    r = np.sqrt(-2.0 * np.log1p(-u[:, 0]))
    t = 2.0 * np.pi * u[:, 1]
    return np.column_stack([r * np.cos(t), r * np.sin(t)]).ravel()[:count]


@dataclass(frozen=True)
class ToyConfig:
    """Gaussian toy cloud: `count` points from N(mean, covariance)."""

    count: int = 1500
    mean: Sequence[float] = (0.0, 0.0)
    covariance: Sequence[Sequence[float]] = ((1.0, 0.0), (0.0, 1.0))
    seed: int = 0

    @property
    def dimension(self):
        return len(self.mean)


def sample_bivariate_normal(config: ToyConfig = ToyConfig()) -> Dataset:
    """Draw the toy data set described by `config`.

    Row ``i`` is ``mean + L z_i`` where ``L`` is the lower Cholesky factor
    of the covariance and ``z_i`` holds normals ``d*i .. d*i + d - 1`` of
    :func:`standard_normals`.
    """
    if int(config.count) != config.count or config.count < 1:
        raise DataError("count must be a positive integer")
    mean = np.asarray(config.mean, dtype=float)
    cov = np.asarray(config.covariance, dtype=float)
    d = mean.size
    if mean.ndim != 1 or d < 1:
        raise DataError("mean must be a nonempty vector")
    if cov.shape != (d, d) or not np.allclose(cov, cov.T, rtol=0, atol=1e-12):
        raise DataError("covariance must be a symmetric matrix matching the mean")
    try:
        L = np.linalg.cholesky(cov)
    except np.linalg.LinAlgError:
        raise DataError("covariance must be positive definite") from None
    Z = standard_normals(config.seed, config.count * d).reshape(config.count, d)
    X = mean + Z @ L.T
    return Dataset(X, ["toy"] * config.count, f"toy-seed{config.seed}")
