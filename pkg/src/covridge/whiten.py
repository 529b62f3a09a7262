"""Whitening fitted from a covariance estimate.

The transform maps a sample x to w @ (x - mean) with w the symmetric
inverse square root of the covariance estimate. Coefficients fitted in the
whitened coordinates map back to the original coordinates through the same
matrix: beta = w @ gamma.
"""
from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .covmat import CovarianceEstimate, SampleMatrix, eig_above_floor
from .errors import NumericalError, UsageError


@dataclass
class WhiteningTransform:
    mean: np.ndarray
    w: np.ndarray
    w_inv: np.ndarray
    source_estimator: str

    def __post_init__(self) -> None:
        self.mean = np.asarray(self.mean, dtype=float)
        self.w = np.asarray(self.w, dtype=float)
        self.w_inv = np.asarray(self.w_inv, dtype=float)
        p = self.mean.shape[0]
        if self.mean.ndim != 1 or self.w.shape != (p, p) or self.w_inv.shape != (p, p):
            raise UsageError("whitening transform shapes are inconsistent")
        product = self.w @ self.w_inv
        if float(np.abs(product - np.eye(p)).max()) > 1e-8:
            raise NumericalError("w @ w_inv deviates from identity beyond 1e-8")

    @property
    def p(self) -> int:
        return self.mean.shape[0]


def fit_whitener(data: SampleMatrix, cov: CovarianceEstimate) -> WhiteningTransform:
    """Whitening transform for `data` under the covariance estimate `cov`.

    w and w_inv are both built from a single eigendecomposition, so their
    product is identity up to eigensolver accuracy. Raises NumericalError
    when the estimate has an eigenvalue at or below the relative floor.
    """
    if cov.p != data.p:
        raise UsageError(f"covariance is {cov.p}x{cov.p} but data has {data.p} columns")
    evals, q = eig_above_floor(cov.matrix)
    w = (q * evals**-0.5) @ q.T
    w_inv = (q * evals**0.5) @ q.T
    return WhiteningTransform(
        mean=data.values.mean(axis=0),
        w=(w + w.T) / 2.0,
        w_inv=(w_inv + w_inv.T) / 2.0,
        source_estimator=cov.estimator,
    )


def apply_whitener(transform: WhiteningTransform, data: SampleMatrix) -> SampleMatrix:
    """Whiten every row of `data`: z = w @ (x - mean). Column names carry over."""
    if data.p != transform.p:
        raise UsageError(f"transform expects {transform.p} columns, data has {data.p}")
    z = (data.values - transform.mean) @ transform.w
    return SampleMatrix(z, list(data.column_names))


def unwhiten_coefficients(transform: WhiteningTransform, gamma: np.ndarray) -> np.ndarray:
    """Map whitened-space coefficients back to the original coordinates.

    Accepts a (p,) vector or a (p, k) matrix and returns the same shape.
    """
    gamma = np.asarray(gamma, dtype=float)
    rows = gamma.shape[0] if gamma.ndim in (1, 2) else -1
    if rows != transform.p:
        raise UsageError(f"coefficient rows {rows} do not match transform size {transform.p}")
    return transform.w @ gamma
