"""Dense float64 matrix/vector kernels.

Matrices are 2-D ``numpy.ndarray`` objects in C (row-major) order and vectors
are 1-D arrays.  Every routine checks shapes up front and raises
:class:`ShapeError` naming both operands, so a mismatch never surfaces as a
numpy broadcasting surprise three layers later.

The batched variants treat a 2-D array ``X`` of shape ``(batch, n)`` as a stack
of row vectors; ``batch_matvec(m, X)[k] == matvec(m, X[k])`` up to summation
order.
"""

from __future__ import annotations

import numpy as np

from .errors import ShapeError

DTYPE = np.float64


def matrix(rows, cols=None, data=None) -> np.ndarray:
    """Build a ``rows x cols`` float64 matrix.

    ``matrix([[1, 2], [3, 4]])`` converts nested sequences; ``matrix(2, 3)``
    returns zeros; ``matrix(2, 3, flat)`` reshapes row-major data.
    """
    if cols is None:
        m = np.array(rows, dtype=DTYPE, order="C")
        if m.ndim != 2:
            raise ShapeError("matrix", m.shape)
    elif data is None:
        m = np.zeros((rows, cols), dtype=DTYPE)
    else:
        flat = np.asarray(data, dtype=DTYPE).ravel()
        if flat.size != rows * cols:
            raise ShapeError("matrix data", flat.shape, (rows * cols,))
        m = flat.reshape(rows, cols).copy()
    if m.shape[0] < 1 or m.shape[1] < 1:
        raise ShapeError("matrix", m.shape)
    return m


def vector(data) -> np.ndarray:
    v = np.array(data, dtype=DTYPE)
    if v.ndim != 1:
        raise ShapeError("vector", v.shape)
    return v


def _check_matrix(name: str, m: np.ndarray) -> None:
    if m.ndim != 2:
        raise ShapeError(name, m.shape)


def matvec(m: np.ndarray, v: np.ndarray) -> np.ndarray:
    """Return ``m @ v``."""
    _check_matrix("matvec", m)
    if v.ndim != 1 or m.shape[1] != v.shape[0]:
        raise ShapeError("matvec", m.shape, v.shape)
    return m @ v


def transpose_matvec(m: np.ndarray, v: np.ndarray) -> np.ndarray:
    """Return ``m.T @ v`` without materialising the transpose."""
    _check_matrix("transpose_matvec", m)
    if v.ndim != 1 or m.shape[0] != v.shape[0]:
        raise ShapeError("transpose_matvec", m.shape, v.shape)
    return v @ m


def add(a: np.ndarray, b: np.ndarray) -> np.ndarray:
    if a.shape != b.shape:
        raise ShapeError("add", a.shape, b.shape)
    return a + b


def outer(a: np.ndarray, b: np.ndarray) -> np.ndarray:
    if a.ndim != 1 or b.ndim != 1 or a.size == 0 or b.size == 0:
        raise ShapeError("outer", a.shape, b.shape)
    return np.outer(a, b)


def batch_matvec(m: np.ndarray, xs: np.ndarray) -> np.ndarray:
    """Apply ``m`` to every row of ``xs``: result shape ``(batch, m.rows)``."""
    _check_matrix("batch_matvec", m)
    if xs.ndim != 2 or xs.shape[1] != m.shape[1]:
        raise ShapeError("batch_matvec", m.shape, xs.shape)
    return xs @ m.T


def batch_transpose_matvec(m: np.ndarray, vs: np.ndarray) -> np.ndarray:
    """Apply ``m.T`` to every row of ``vs``: result shape ``(batch, m.cols)``."""
    _check_matrix("batch_transpose_matvec", m)
    if vs.ndim != 2 or vs.shape[1] != m.shape[0]:
        raise ShapeError("batch_transpose_matvec", m.shape, vs.shape)
    return vs @ m


def outer_sum(a: np.ndarray, b: np.ndarray) -> np.ndarray:
    """Sum over the batch of ``outer(a[k], b[k])``."""
    if a.ndim != 2 or b.ndim != 2 or a.shape[0] != b.shape[0]:
        raise ShapeError("outer_sum", a.shape, b.shape)
    return a.T @ b
