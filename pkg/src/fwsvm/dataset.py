"""Sparse labeled datasets in the LIBSVM/SVMlight text format.

One example per line: ``<label> <index>:<value> ...`` with 1-based, strictly
ascending feature indices. Labels must be +1/-1; files using 0/1 labels are
accepted only with an explicit remap flag. Comment markers (``#``) are
rejected. Indices are stored 0-based internally; all text I/O speaks 1-based.
"""

from __future__ import annotations

import io
from dataclasses import dataclass
from pathlib import Path
from typing import IO, Iterable, Union

import numpy as np
import scipy.sparse as sp


class DatasetFormatError(ValueError):
    """Malformed dataset text; carries the 1-based line number."""

    def __init__(self, line_no: int, message: str):
        super().__init__(f"line {line_no}: {message}")
        self.line_no = line_no


@dataclass(frozen=True)
class SparseRow:
    """One example: ascending 0-based feature indices with finite values."""

    indices: np.ndarray
    values: np.ndarray

    def __post_init__(self):
        idx = np.asarray(self.indices, dtype=np.int64)
        val = np.asarray(self.values, dtype=np.float64)
        if idx.shape != val.shape or idx.ndim != 1:
            raise ValueError("indices and values must be 1-d arrays of equal length")
        if idx.size and (np.diff(idx) <= 0).any():
            raise ValueError("feature indices must be strictly ascending")
        if idx.size and idx[0] < 0:
            raise ValueError("feature indices must be non-negative")
        if not np.isfinite(val).all():
            raise ValueError("feature values must be finite")
        idx.flags.writeable = False
        val.flags.writeable = False
        object.__setattr__(self, "indices", idx)
        object.__setattr__(self, "values", val)

    @property
    def nnz(self) -> int:
        return int(self.indices.size)


class SparseDataset:
    """Immutable ordered collection of SparseRow with +1/-1 labels."""

    def __init__(self, rows: Iterable[SparseRow], labels: Iterable[int]):
        self.rows: tuple[SparseRow, ...] = tuple(rows)
        lab = np.asarray(list(labels), dtype=np.int64)
        if len(self.rows) != lab.size:
            raise ValueError("row/label count mismatch")
        if lab.size == 0:
            raise ValueError("empty dataset")
        if not np.isin(lab, (-1, 1)).all():
            raise ValueError("labels must be +1 or -1")
        lab.flags.writeable = False
        self.labels = lab
        self.m = lab.size
        self.dim = int(max((int(r.indices[-1]) + 1 for r in self.rows if r.nnz), default=0))
        self._csr: sp.csr_matrix | None = None

    def to_csr(self) -> sp.csr_matrix:
        """CSR view of the feature rows (built once, then shared)."""
        if self._csr is None:
            indptr = np.zeros(self.m + 1, dtype=np.int64)
            for i, r in enumerate(self.rows):
                indptr[i + 1] = indptr[i] + r.nnz
            indices = np.concatenate([r.indices for r in self.rows]) if indptr[-1] else np.zeros(0, np.int64)
            data = np.concatenate([r.values for r in self.rows]) if indptr[-1] else np.zeros(0)
            self._csr = sp.csr_matrix((data, indices, indptr), shape=(self.m, max(self.dim, 1)))
        return self._csr


def _parse_line(line_no: int, line: str, remap01: bool) -> tuple[int, SparseRow]:
    if "#" in line:
        raise DatasetFormatError(line_no, "comment markers ('#') are not supported")
    parts = line.split()
    if not parts:
        raise DatasetFormatError(line_no, "blank line")
    try:
        raw_label = float(parts[0])
    except ValueError:
        raise DatasetFormatError(line_no, f"invalid label token {parts[0]!r}") from None
    if raw_label in (1.0, -1.0):
        label = int(raw_label)
    elif raw_label == 0.0 and remap01:
        label = -1
    else:
        hint = "" if remap01 else " (pass the 0/1 remap flag for 0/1-labeled files)"
        raise DatasetFormatError(line_no, f"label must be +1 or -1, got {parts[0]!r}{hint}")

    idxs: list[int] = []
    vals: list[float] = []
    prev = 0
    for tok in parts[1:]:
        idx_s, sep, val_s = tok.partition(":")
        if not sep:
            raise DatasetFormatError(line_no, f"invalid feature token {tok!r}")
        try:
            idx = int(idx_s)
            val = float(val_s)
        except ValueError:
            raise DatasetFormatError(line_no, f"invalid feature token {tok!r}") from None
        if idx < 1:
            raise DatasetFormatError(line_no, f"feature index {idx} is not 1-based positive")
        if idx <= prev:
            raise DatasetFormatError(line_no, f"feature index {idx} not strictly ascending")
        if not np.isfinite(val):
            raise DatasetFormatError(line_no, f"non-finite feature value in {tok!r}")
        prev = idx
        idxs.append(idx - 1)
        vals.append(val)
    return label, SparseRow(np.array(idxs, dtype=np.int64), np.array(vals))


def parse_libsvm(source: Union[str, Path, IO[str]], *, remap01: bool = False) -> SparseDataset:
    """Parse LIBSVM text from a path or an open text stream.

    remap01: accept {0,1} labels, remapping 0 -> -1 and keeping 1 -> +1.
    Raises DatasetFormatError (with line number) on malformed input and on
    empty input.
    """
    if isinstance(source, (str, Path)):
        with open(source, "r", encoding="utf-8") as f:
            return parse_libsvm(f, remap01=remap01)
    rows: list[SparseRow] = []
    labels: list[int] = []
    line_no = 0
    for line_no, line in enumerate(source, start=1):
        label, row = _parse_line(line_no, line, remap01)
        labels.append(label)
        rows.append(row)
    if not rows:
        raise DatasetFormatError(max(line_no, 1), "empty dataset")
    return SparseDataset(rows, labels)


def parse_libsvm_text(text: str, *, remap01: bool = False) -> SparseDataset:
    return parse_libsvm(io.StringIO(text), remap01=remap01)


def _fmt(v: float) -> str:
    return repr(float(v))


def to_libsvm(ds: SparseDataset) -> str:
    """Serialize back to LIBSVM text; parse(to_libsvm(ds)) round-trips exactly."""
    lines = []
    for row, label in zip(ds.rows, ds.labels):
        parts = ["+1" if label > 0 else "-1"]
        parts.extend(f"{int(i) + 1}:{_fmt(v)}" for i, v in zip(row.indices, row.values))
        lines.append(" ".join(parts))
    return "\n".join(lines) + "\n"


def save_libsvm(ds: SparseDataset, path: Union[str, Path]) -> None:
    Path(path).write_text(to_libsvm(ds), encoding="utf-8")


def subsample(ds: SparseDataset, n: int, seed: int) -> SparseDataset:
    """Uniform subset of n rows without replacement, original order kept."""
    if not 1 <= n <= ds.m:
        raise ValueError(f"subsample size {n} out of range [1, {ds.m}]")
    if n == ds.m:
        return ds
    rng = np.random.default_rng(seed)
    keep = np.sort(rng.choice(ds.m, size=n, replace=False))
    return SparseDataset([ds.rows[i] for i in keep], ds.labels[keep])
