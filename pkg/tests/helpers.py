"""Shared oracles for the test suite.

Everything here is computed through plain dense numpy (and cvxopt for the
reference QP optimum), deliberately independent of the package's own
assembly paths, so the tests compare two implementations rather than one
implementation with itself.
"""

import numpy as np

import cvxopt
import cvxopt.solvers

from fwsvm import MODE_RAW, KernelSpec, SparseDataset, SparseRow

cvxopt.solvers.options.update(
    {"show_progress": False, "abstol": 1e-12, "reltol": 1e-12, "feastol": 1e-12}
)


def dense_features(ds: SparseDataset) -> np.ndarray:
    X = np.zeros((ds.m, max(ds.dim, 1)))
    for i, r in enumerate(ds.rows):
        X[i, r.indices] = r.values
    return X


def dense_kernel_ref(ds: SparseDataset, spec: KernelSpec) -> np.ndarray:
    """Entrywise dense reference for the raw / effective matrix."""
    X = dense_features(ds)
    d2 = ((X[:, None, :] - X[None, :, :]) ** 2).sum(axis=-1)
    g = np.exp(-spec.gamma * d2)
    if spec.mode == MODE_RAW:
        return g
    y = ds.labels.astype(np.float64)
    return np.outer(y, y) * (g + 1.0) + np.eye(ds.m) / spec.c


def qp_simplex_ref(K: np.ndarray) -> tuple[float, np.ndarray]:
    """Reference optimum of min (1/2) a^T K a over the unit simplex.

    The interior-point solution is projected back onto the simplex before
    evaluation, so the returned objective never falls below the true
    optimum; suboptimality bounds tested against it stay valid.
    """
    m = K.shape[0]
    sol = cvxopt.solvers.qp(
        cvxopt.matrix(K),
        cvxopt.matrix(np.zeros(m)),
        cvxopt.matrix(-np.eye(m)),
        cvxopt.matrix(np.zeros(m)),
        cvxopt.matrix(np.ones((1, m))),
        cvxopt.matrix(np.ones(1)),
    )
    x = np.clip(np.array(sol["x"]).ravel(), 0.0, None)
    x /= x.sum()
    return 0.5 * float(x @ K @ x), x


def rand_dataset(m: int, d: int, rng: np.random.Generator) -> SparseDataset:
    """Random sparse rows (1..d features each) with random +1/-1 labels."""
    rows = []
    for _ in range(m):
        k = int(rng.integers(1, d + 1))
        idx = np.sort(rng.choice(d, size=k, replace=False)).astype(np.int64)
        rows.append(SparseRow(idx, rng.normal(size=k)))
    labels = rng.choice(np.array([-1, 1]), size=m).astype(np.int64)
    return SparseDataset(rows, labels)


def identity_raw(n: int, labels=None) -> tuple[SparseDataset, KernelSpec]:
    """n one-feature points 100 apart: exp(-10^4) underflows to 0.0, so the
    raw-gaussian matrix is exactly the identity."""
    rows = tuple(
        SparseRow(np.array([0], dtype=np.int64), np.array([100.0 * i])) for i in range(n)
    )
    if labels is None:
        labels = [1] * n
    return SparseDataset(rows, labels), KernelSpec(gamma=1.0, mode=MODE_RAW)


def criterion1_instance(rng: np.random.Generator):
    """One random small instance from the oracle-equivalence family."""
    m = int(rng.integers(2, 51))
    d = int(rng.integers(2, 9))
    gamma = float(rng.uniform(0.5, 4.0)) / d
    c = float(rng.uniform(0.05, 0.3))
    ds = rand_dataset(m, d, rng)
    return ds, KernelSpec(gamma=gamma, c=c)
