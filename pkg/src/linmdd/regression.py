"""Least-squares residualization of the response on the covariates.

Fits y = coef @ z + v by OLS (orthogonal-decomposition solve, never an
explicit Gram inverse) and exposes the residuals used by the conditional
mean independence test.  Ridge is available as a fallback for
rank-deficient designs.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .errors import DimensionMismatch, RankDeficient
from .kernel import as_block
from .sample import Sample

__all__ = [
    "FittedLinearModel",
    "Residualization",
    "fit_ols",
    "fit_ridge",
    "residualize",
    "RANK_RTOL",
]

# Smallest singular value below RANK_RTOL * largest means rank-deficient.
RANK_RTOL = 1e-10

# Residual columns whose largest magnitude is below RESIDUAL_FLOOR_RTOL times
# the response scale are round-off from the solver, not data; they are snapped
# to exact zeros so a perfectly explained response downstream yields an exactly
# degenerate statistic.
RESIDUAL_FLOOR_RTOL = 1e-12


def _snap_residual_floor(residuals: np.ndarray, y: np.ndarray) -> np.ndarray:
    y_scale = np.abs(y).max(axis=0)
    r_scale = np.abs(residuals).max(axis=0)
    noise = r_scale <= RESIDUAL_FLOOR_RTOL * y_scale
    if noise.any():
        residuals = residuals.copy()
        residuals[:, noise] = 0.0
    return residuals


@dataclass(frozen=True)
class FittedLinearModel:
    """Coefficients and residuals of a multivariate linear fit.

    ``coef`` has shape (q, r): row k holds the loadings of response
    component k on the r design columns.  ``fitted + residuals``
    reconstructs the response.
    """

    coef: np.ndarray
    residuals: np.ndarray
    fitted: np.ndarray
    method: str
    ridge_penalty: float | None = None

    def __post_init__(self):
        for arr in (self.coef, self.residuals, self.fitted):
            arr.setflags(write=False)


def _validate_pair(y, z) -> tuple[np.ndarray, np.ndarray]:
    ya = as_block(y, "y")
    za = as_block(z, "z")
    if ya.shape[0] != za.shape[0]:
        raise DimensionMismatch(
            f"y and z must share n: {ya.shape[0]} != {za.shape[0]}"
        )
    return ya, za


def fit_ols(y, z) -> FittedLinearModel:
    """Ordinary least squares of the response block on the design block.

    Requires n > r and a full-column-rank design; raises
    :class:`RankDeficient` otherwise (callers may retry with
    :func:`fit_ridge`).
    """
    ya, za = _validate_pair(y, z)
    n, r = za.shape
    if n <= r:
        raise RankDeficient(f"need more rows than design columns (n={n}, r={r})")
    singulars = np.linalg.svd(za, compute_uv=False)
    if singulars[-1] < RANK_RTOL * singulars[0]:
        raise RankDeficient(
            f"design is rank-deficient (smallest/largest singular value "
            f"= {singulars[-1] / singulars[0]:.3e}); consider a ridge penalty"
        )
    solution, *_ = np.linalg.lstsq(za, ya, rcond=None)
    fitted = za @ solution
    residuals = _snap_residual_floor(ya - fitted, ya)
    return FittedLinearModel(
        coef=solution.T.copy(), residuals=residuals, fitted=fitted, method="ols"
    )


def fit_ridge(y, z, penalty: float) -> FittedLinearModel:
    """Ridge regression with penalty > 0; well-posed for any design rank.

    Solves the penalized normal equations through the augmented
    least-squares system [z; sqrt(penalty) * I].
    """
    if not penalty > 0.0:
        raise ValueError(f"ridge penalty must be positive, got {penalty}")
    ya, za = _validate_pair(y, z)
    n, r = za.shape
    q = ya.shape[1]
    z_aug = np.vstack([za, np.sqrt(penalty) * np.eye(r)])
    y_aug = np.vstack([ya, np.zeros((r, q))])
    solution, *_ = np.linalg.lstsq(z_aug, y_aug, rcond=None)
    fitted = za @ solution
    residuals = ya - fitted
    return FittedLinearModel(
        coef=solution.T.copy(),
        residuals=residuals,
        fitted=fitted,
        method="ridge",
        ridge_penalty=float(penalty),
    )


@dataclass(frozen=True)
class Residualization:
    """Joint block u = (x, augmented z), residuals vhat, and the fitted model."""

    u: np.ndarray
    vhat: np.ndarray
    z_design: np.ndarray
    model: FittedLinearModel


def augment_intercept(z: np.ndarray, intercept: bool) -> np.ndarray:
    """Append a ones column to z when requested.

    Refuses to add one on top of an existing constant column: that is a
    user error (duplicated intercept), not something to silently repair.
    """
    za = as_block(z, "z")
    if not intercept:
        return za
    spans = za.max(axis=0) - za.min(axis=0)
    if np.any(spans == 0.0):
        col = int(np.nonzero(spans == 0.0)[0][0])
        raise RankDeficient(
            f"z column {col} is already constant; drop it or omit the intercept flag"
        )
    return np.hstack([za, np.ones((za.shape[0], 1))])


def residualize(
    sample: Sample,
    intercept: bool = False,
    method: str = "ols",
    ridge_penalty: float | None = None,
) -> Residualization:
    """Residualize y on (optionally intercept-augmented) z.

    Returns the concatenated block u = [x | z design] alongside the
    residuals; these are exactly the inputs of the conditional mean
    independence statistic.
    """
    z_design = augment_intercept(sample.z, intercept)
    if method == "ols":
        model = fit_ols(sample.y, z_design)
    elif method == "ridge":
        if ridge_penalty is None:
            raise ValueError("method='ridge' requires ridge_penalty")
        model = fit_ridge(sample.y, z_design, ridge_penalty)
    else:
        raise ValueError(f"unknown method {method!r}; expected 'ols' or 'ridge'")
    u = np.hstack([sample.x, z_design])
    return Residualization(u=u, vhat=model.residuals, z_design=z_design, model=model)
