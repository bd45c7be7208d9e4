"""Trained-model packaging: prediction, evaluation, serialization.

The decision rule is sign(sum_j alpha_j y_j (gaussian(x_j, x) + 1)); the +1
carries the bias folded into the effective kernel, and sign(0) maps to +1.
Model files are line-oriented text: a header with the kernel parameters,
one ``index alpha label`` triple per support vector, then a ``vectors``
section holding the support rows as 1-based ``idx:val`` pairs in the same
order. Files round-trip exactly.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from pathlib import Path
from typing import Union

import numpy as np
import scipy.sparse as sp

from .dataset import SparseDataset, SparseRow, _fmt
from .kernel import KernelSpec

_MAGIC = "fwsvm-model 1"
_PREDICT_BATCH = 512


class ModelFormatError(ValueError):
    """Malformed or truncated model file."""


@dataclass
class SvmModel:
    """Support indices/weights/labels plus the rows needed at predict time."""

    support: np.ndarray
    weights: np.ndarray
    labels: np.ndarray
    rows: tuple[SparseRow, ...]
    spec: KernelSpec
    dim: int
    _scorer: dict = field(default_factory=dict, repr=False, compare=False)

    @classmethod
    def from_iterate(cls, alpha: np.ndarray, ds: SparseDataset, spec: KernelSpec) -> "SvmModel":
        """Package the positive coordinates of a final iterate, ascending."""
        supp = np.flatnonzero(alpha > 0)
        if supp.size == 0:
            raise ValueError("iterate has empty support")
        return cls(
            support=supp,
            weights=alpha[supp].copy(),
            labels=ds.labels[supp].copy(),
            rows=tuple(ds.rows[i] for i in supp),
            spec=spec,
            dim=ds.dim,
        )

    @property
    def sv_count(self) -> int:
        return int(self.support.size)

    def _sv_arrays(self):
        if not self._scorer:
            width = max(self.dim, 1)
            indptr = np.zeros(len(self.rows) + 1, dtype=np.int64)
            for i, r in enumerate(self.rows):
                indptr[i + 1] = indptr[i] + r.nnz
            idx = np.concatenate([r.indices for r in self.rows]) if indptr[-1] else np.zeros(0, np.int64)
            dat = np.concatenate([r.values for r in self.rows]) if indptr[-1] else np.zeros(0)
            x = sp.csr_matrix((dat, idx, indptr), shape=(len(self.rows), width))
            self._scorer["x"] = x
            self._scorer["sq"] = np.asarray(x.multiply(x).sum(axis=1)).ravel()
            self._scorer["ay"] = self.weights * self.labels.astype(np.float64)
        return self._scorer["x"], self._scorer["sq"], self._scorer["ay"]

    def _decision_batch(self, queries: list[SparseRow]) -> np.ndarray:
        x, sq, ay = self._sv_arrays()
        width = x.shape[1]
        qd = np.zeros((len(queries), width))
        qsq = np.zeros(len(queries))
        for t, row in enumerate(queries):
            mask = row.indices < width
            qd[t, row.indices[mask]] = row.values[mask]
            qsq[t] = np.dot(row.values, row.values)
        dots = x @ qd.T
        dsq = np.maximum(sq[:, None] + (qsq[None, :] - 2.0 * dots), 0.0)
        g = np.exp(-self.spec.gamma * dsq)
        return ay @ (g + 1.0)

    def decision_value(self, x: SparseRow) -> float:
        return float(self._decision_batch([x])[0])


def predict(model: SvmModel, x: SparseRow) -> int:
    """Label in {+1, -1}; a zero decision value maps to +1."""
    return 1 if model.decision_value(x) >= 0.0 else -1


def predict_dataset(model: SvmModel, ds: SparseDataset) -> np.ndarray:
    out = np.empty(ds.m, dtype=np.int64)
    for lo in range(0, ds.m, _PREDICT_BATCH):
        chunk = list(ds.rows[lo : lo + _PREDICT_BATCH])
        dec = model._decision_batch(chunk)
        out[lo : lo + len(chunk)] = np.where(dec >= 0.0, 1, -1)
    return out


def evaluate(model: SvmModel, test: SparseDataset) -> float:
    """Fraction of test rows whose prediction matches the label."""
    if test.m == 0:
        raise ValueError("empty test set")
    return float((predict_dataset(model, test) == test.labels).mean())


def save_model(model: SvmModel, path: Union[str, Path]) -> None:
    lines = [
        _MAGIC,
        f"mode {model.spec.mode}",
        f"gamma {_fmt(model.spec.gamma)}",
        f"c {_fmt(model.spec.c)}",
        f"dim {model.dim}",
        f"nsv {model.sv_count}",
    ]
    for i, w, y in zip(model.support, model.weights, model.labels):
        lines.append(f"{int(i)} {_fmt(w)} {'+1' if y > 0 else '-1'}")
    lines.append("vectors")
    for row in model.rows:
        lines.append(" ".join(f"{int(i) + 1}:{_fmt(v)}" for i, v in zip(row.indices, row.values)))
    Path(path).write_text("\n".join(lines) + "\n", encoding="utf-8")


def load_model(path: Union[str, Path]) -> SvmModel:
    text = Path(path).read_text(encoding="utf-8").splitlines()
    if not text or text[0] != _MAGIC:
        raise ModelFormatError(f"{path}: not a model file (bad magic line)")
    header: dict[str, str] = {}
    pos = 1
    for key in ("mode", "gamma", "c", "dim", "nsv"):
        if pos >= len(text):
            raise ModelFormatError(f"{path}: truncated header")
        name, _, val = text[pos].partition(" ")
        if name != key:
            raise ModelFormatError(f"{path}: expected header '{key}', got {text[pos]!r}")
        header[key] = val
        pos += 1
    try:
        nsv = int(header["nsv"])
        spec = KernelSpec(gamma=float(header["gamma"]), c=float(header["c"]), mode=header["mode"])
        dim = int(header["dim"])
        if len(text) < pos + 2 * nsv + 1:
            raise ModelFormatError(f"{path}: truncated model file")
        support, weights, labels = [], [], []
        for ln in range(nsv):
            parts = text[pos + ln].split()
            if len(parts) != 3:
                raise ModelFormatError(f"{path}: malformed support line {text[pos + ln]!r}")
            support.append(int(parts[0]))
            weights.append(float(parts[1]))
            labels.append(int(float(parts[2])))
            if labels[-1] not in (-1, 1) or not weights[-1] > 0:
                raise ModelFormatError(f"{path}: bad support line {text[pos + ln]!r}")
        pos += nsv
        if text[pos] != "vectors":
            raise ModelFormatError(f"{path}: missing 'vectors' section")
        pos += 1
        rows = []
        for ln in range(nsv):
            idxs, vals = [], []
            line = text[pos + ln].strip()
            for tok in line.split() if line else []:
                i_s, _, v_s = tok.partition(":")
                idxs.append(int(i_s) - 1)
                vals.append(float(v_s))
            rows.append(SparseRow(np.array(idxs, dtype=np.int64), np.array(vals)))
    except ModelFormatError:
        raise
    except ValueError as exc:
        raise ModelFormatError(f"{path}: {exc}") from None
    total = sum(weights)
    if abs(total - 1.0) > 1e-6:
        raise ModelFormatError(f"{path}: support weights sum to {total!r}, expected 1")
    return SvmModel(
        support=np.array(support, dtype=np.int64),
        weights=np.array(weights),
        labels=np.array(labels, dtype=np.int64),
        rows=tuple(rows),
        spec=spec,
        dim=dim,
    )
