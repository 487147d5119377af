"""Distance matrices, double centering, and the conditional mean dependence statistic.

Everything in this module is a pure function over immutable inputs; all
operations are safe to call concurrently.  The statistic for blocks ``x``
(explanatory, n x p) and ``y`` (response, n x q) is

    (1/n^2) * sum_ij A_ij * B_ij

where ``A`` is the double-centered Euclidean distance matrix of ``x`` and
``B`` the double-centered half-squared distance matrix of ``y``.  The value
is zero exactly when the empirical conditional mean of ``y`` shows no
dependence on ``x``, and is nonnegative up to round-off.

The n^2 reduction is accumulated in row-major order with compensated
(Neumaier) summation so that results do not depend on thread count or
BLAS configuration.
"""

from __future__ import annotations

import enum
import math
from dataclasses import dataclass

import numpy as np
from scipy.spatial.distance import pdist, squareform

from .errors import ConsistencyError, DimensionMismatch, NonFiniteData

__all__ = [
    "CenteredKind",
    "CenteredMatrix",
    "pairwise_distances",
    "half_squared_distances",
    "double_center",
    "centered_distances",
    "centered_half_squared",
    "mdd_squared",
    "mdd_squared_from_centered",
    "mdd",
    "as_block",
]

# Clamp window for tiny negative round-off, relative to the mean absolute
# summand; anything more negative raises ConsistencyError.
NEGATIVE_CLAMP_RTOL = 1e-12

try:
    from numba import njit

    _HAVE_NUMBA = True
except ImportError:  # pragma: no cover - numba is a hard dependency, but degrade gracefully
    njit = None
    _HAVE_NUMBA = False


def _neumaier_sum_py(values):
    # Kahan-Babuska-Neumaier over a 1-D contiguous float64 array, strictly
    # in the order given (row-major for raveled matrices).
    total = 0.0
    comp = 0.0
    for i in range(values.shape[0]):
        v = values[i]
        t = total + v
        if abs(total) >= abs(v):
            comp += (total - t) + v
        else:
            comp += (v - t) + total
        total = t
    return total + comp


if _HAVE_NUMBA:
    # Same IEEE operation sequence as the pure loop, so both paths agree
    # bitwise; nogil lets Monte Carlo replicates run on real threads.
    _neumaier_sum = njit(cache=True, nogil=True)(_neumaier_sum_py)
else:  # pragma: no cover
    _neumaier_sum = _neumaier_sum_py


def compensated_sum(values: np.ndarray) -> float:
    """Compensated (Neumaier) sum of ``values`` in row-major order."""
    arr = np.ascontiguousarray(values, dtype=np.float64).ravel()
    return float(_neumaier_sum(arr))


class CenteredKind(enum.Enum):
    """Which pairwise quantity a centered matrix was built from."""

    DISTANCE = "distance"
    HALF_SQUARED = "half_squared"


@dataclass(frozen=True)
class CenteredMatrix:
    """A doubly centered n x n matrix: every row and column sums to zero.

    ``kind`` records whether the source was a plain Euclidean distance
    matrix or a half-squared one; the two roles are not interchangeable in
    the statistic.
    """

    values: np.ndarray
    kind: CenteredKind

    def __post_init__(self):
        if self.values.ndim != 2 or self.values.shape[0] != self.values.shape[1]:
            raise DimensionMismatch(
                f"centered matrix must be square, got shape {self.values.shape}"
            )
        self.values.setflags(write=False)

    @property
    def n(self) -> int:
        return self.values.shape[0]


def as_block(data, name: str = "block", min_rows: int = 1) -> np.ndarray:
    """Validate and normalize a sample block to a 2-D float64 array.

    1-D input is treated as a single column.  Rejects empty and non-finite
    data.
    """
    arr = np.asarray(data, dtype=np.float64)
    if arr.ndim == 1:
        arr = arr.reshape(-1, 1)
    if arr.ndim != 2:
        raise DimensionMismatch(f"{name} must be 1-D or 2-D, got ndim={arr.ndim}")
    if arr.shape[0] < min_rows or arr.shape[1] < 1:
        raise DimensionMismatch(
            f"{name} needs at least {min_rows} row(s) and 1 column, got shape {arr.shape}"
        )
    if not np.isfinite(arr).all():
        raise NonFiniteData(f"{name} contains NaN or infinite entries")
    return arr


def pairwise_distances(s) -> np.ndarray:
    """Euclidean distance matrix of the rows of ``s`` (n x d, n >= 2).

    The output is symmetric with an exactly zero diagonal; duplicated rows
    yield exact zeros (no epsilon floor).
    """
    arr = as_block(s, "sample block", min_rows=2)
    return squareform(pdist(arr))


def half_squared_distances(s) -> np.ndarray:
    """Half-squared Euclidean distance matrix: entry (i, j) is |s_i - s_j|^2 / 2."""
    arr = as_block(s, "sample block", min_rows=2)
    return squareform(0.5 * pdist(arr, "sqeuclidean"))


def _center_values(d: np.ndarray) -> np.ndarray:
    # a_ij - rowmean_i - colmean_j + grandmean.  Row and column means of
    # a symmetric matrix are equal on paper but numpy's axis-0 and axis-1
    # reductions use different summation orders, so we share one averaged
    # mean vector; that keeps the centered output exactly symmetric.
    row = d.mean(axis=1, keepdims=True)
    col = d.mean(axis=0, keepdims=True)
    mean = 0.5 * (row + col.T)
    return d - (mean + mean.T) + d.mean()


def double_center(d, kind: CenteredKind = CenteredKind.DISTANCE) -> CenteredMatrix:
    """Double-center a square symmetric matrix.

    Subtracts row means and column means and adds back the grand mean, so
    every row and column of the result sums to zero.  ``kind`` tags what
    the input was (see :class:`CenteredKind`).
    """
    arr = np.asarray(d, dtype=np.float64)
    if arr.ndim != 2 or arr.shape[0] != arr.shape[1]:
        raise DimensionMismatch(f"expected a square matrix, got shape {arr.shape}")
    if not np.isfinite(arr).all():
        raise NonFiniteData("matrix contains NaN or infinite entries")
    scale = np.abs(arr).max()
    if not np.allclose(arr, arr.T, rtol=0.0, atol=1e-9 * max(scale, 1.0)):
        raise ValueError("matrix must be symmetric")
    return CenteredMatrix(_center_values(arr), kind)


def centered_distances(s) -> CenteredMatrix:
    """Double-centered Euclidean distance matrix of the rows of ``s``."""
    return CenteredMatrix(_center_values(pairwise_distances(s)), CenteredKind.DISTANCE)


def centered_half_squared(s) -> CenteredMatrix:
    """Double-centered half-squared distance matrix of the rows of ``s``."""
    return CenteredMatrix(
        _center_values(half_squared_distances(s)), CenteredKind.HALF_SQUARED
    )


def _reduce_product(a: np.ndarray, b: np.ndarray) -> tuple[float, float]:
    # Returns (mean of a*b, mean of |a*b|); the second is the round-off scale.
    n = a.shape[0]
    prod = a * b
    total = float(_neumaier_sum(prod.ravel()))
    scale = float(np.abs(prod).sum())
    return total / (n * n), scale / (n * n)


def _clamp_nonnegative(value: float, scale: float) -> float:
    if value >= 0.0:
        return value
    if value > -NEGATIVE_CLAMP_RTOL * scale:
        return 0.0
    raise ConsistencyError(
        f"statistic {value!r} is negative beyond round-off tolerance "
        f"({-NEGATIVE_CLAMP_RTOL * scale!r}); this indicates an internal error"
    )


def mdd_squared(x, y) -> float:
    """Squared empirical conditional mean dependence of ``y`` on ``x``.

    Parameters
    ----------
    x : array_like, shape (n, p)
        Explanatory block; enters through its pairwise distances.
    y : array_like, shape (n, q)
        Response block; enters through half-squared pairwise distances.

    Returns
    -------
    float
        ``(1/n^2) * sum_ij A_ij B_ij``, clamped to 0 when a tiny negative
        arises from round-off.  The value is 0 whenever either block is
        constant across rows.
    """
    xa = as_block(x, "x", min_rows=2)
    ya = as_block(y, "y", min_rows=2)
    if xa.shape[0] != ya.shape[0]:
        raise DimensionMismatch(
            f"x and y must share n: {xa.shape[0]} != {ya.shape[0]}"
        )
    a = _center_values(squareform(pdist(xa)))
    b = _center_values(squareform(0.5 * pdist(ya, "sqeuclidean")))
    value, scale = _reduce_product(a, b)
    return _clamp_nonnegative(value, scale)


def mdd_squared_from_centered(a: CenteredMatrix, b: CenteredMatrix) -> float:
    """Statistic from precomputed centered matrices.

    ``a`` must be distance-centered and ``b`` half-squared-centered; this
    exists so a permutation engine can reuse a fixed response matrix.
    The value matches :func:`mdd_squared` on the originating samples up to
    summation order.
    """
    if a.kind is not CenteredKind.DISTANCE:
        raise ValueError(f"first argument must be distance-centered, got {a.kind}")
    if b.kind is not CenteredKind.HALF_SQUARED:
        raise ValueError(f"second argument must be half-squared-centered, got {b.kind}")
    if a.n != b.n:
        raise DimensionMismatch(f"size mismatch: {a.n} != {b.n}")
    value, scale = _reduce_product(a.values, b.values)
    return _clamp_nonnegative(value, scale)


def mdd(x, y) -> float:
    """Square root of :func:`mdd_squared`; convenience accessor only."""
    return math.sqrt(mdd_squared(x, y))
