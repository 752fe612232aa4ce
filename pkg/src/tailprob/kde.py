"""Gaussian kernel density surrogate with boundary correction.

The surrogate h(x) = (1/(N w)) sum_j phi((x - x_j)/w) approximates the
normalized truncated density g = g'/P from chain samples x_j >= x_T.  Plain
KDE leaks kernel mass below the truncation boundary; two corrections restore
unit mass on [x_T, inf):

- reflection: every kernel is mirrored about the boundary, folding the
  leaked mass back into the support;
- rescaling: every kernel is divided by its own mass above the boundary,
  Phi((x_j - x_T)/w).

Both corrected modes evaluate to exactly zero below x_T.  The uncorrected
mode is kept for demonstrating the leak.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np
from scipy import special

__all__ = [
    "DegenerateSampleError",
    "silverman_bandwidth",
    "KdeModel",
    "fit_kde",
    "EDGE_MODES",
]

EDGE_MODES = ("none", "reflection", "rescaling")

_INV_SQRT_2PI = 1.0 / math.sqrt(2.0 * math.pi)


class DegenerateSampleError(ValueError):
    """Too few distinct sample points to define a bandwidth."""


def silverman_bandwidth(sigma_hat: float, n: int) -> float:
    """Rule-of-thumb bandwidth w = 0.9 sigma_hat n^(-1/5)."""
    if n < 1:
        raise DegenerateSampleError(f"need at least 1 point, got {n}")
    if not (sigma_hat > 0.0) or not math.isfinite(sigma_hat):
        raise DegenerateSampleError(
            f"sample spread must be positive and finite, got {sigma_hat}"
        )
    return 0.9 * sigma_hat * n ** (-0.2)


@dataclass
class KdeModel:
    """Fitted kernel density surrogate.

    points are the chain samples the fit used, bandwidth the kernel width,
    edge_mode one of EDGE_MODES and boundary the truncation point x_T
    (ignored by mode "none").  Kernels are dropped from a query once it is
    farther than truncate_radius bandwidths away; pass None for exact sums.
    Treat instances as immutable once constructed.
    """

    points: np.ndarray
    bandwidth: float
    edge_mode: str = "reflection"
    boundary: float = -math.inf
    truncate_radius: float | None = 8.0
    _centers: np.ndarray = field(init=False, repr=False)
    _weights: np.ndarray = field(init=False, repr=False)

    def __post_init__(self):
        if self.edge_mode not in EDGE_MODES:
            raise ValueError(
                f"edge_mode must be one of {EDGE_MODES}, got '{self.edge_mode}'"
            )
        if not (self.bandwidth > 0.0) or not math.isfinite(self.bandwidth):
            raise ValueError(f"bandwidth must be positive, got {self.bandwidth}")
        pts = np.asarray(self.points, dtype=float).ravel()
        if pts.size < 1:
            raise DegenerateSampleError("need at least 1 point")
        if self.edge_mode != "none":
            if not math.isfinite(self.boundary):
                raise ValueError(
                    f"edge_mode '{self.edge_mode}' needs a finite boundary"
                )
            if np.any(pts < self.boundary):
                raise ValueError("all points must satisfy x >= boundary")
        self.points = pts
        w = self.bandwidth
        base_weight = _INV_SQRT_2PI / (pts.size * w)
        if self.edge_mode == "reflection":
            centers = np.concatenate([pts, 2.0 * self.boundary - pts])
            weights = np.full(centers.size, base_weight)
        elif self.edge_mode == "rescaling":
            centers = pts
            above = special.ndtr((pts - self.boundary) / w)
            weights = base_weight / above
        else:
            centers = pts
            weights = np.full(centers.size, base_weight)
        order = np.argsort(centers, kind="stable")
        self._centers = centers[order]
        self._weights = weights[order]

    @property
    def n_points(self) -> int:
        return int(self.points.size)

    def evaluate(self, x):
        """Surrogate density h(x); accepts scalars or arrays."""
        arr = np.asarray(x, dtype=float)
        scalar = arr.ndim == 0
        flat = np.atleast_1d(arr).ravel().astype(float)
        out = np.zeros(flat.shape)
        if self.edge_mode == "none":
            live = np.ones(flat.shape, dtype=bool)
        else:
            live = flat >= self.boundary
        xs = flat[live]
        if xs.size:
            out[live] = self._sum_kernels(xs)
        out = out.reshape(np.atleast_1d(arr).shape)
        if scalar:
            return float(out[0])
        return out

    __call__ = evaluate

    def _sum_kernels(self, xs: np.ndarray) -> np.ndarray:
        w = self.bandwidth
        centers = self._centers
        weights = self._weights
        if self.truncate_radius is None:
            radius = math.inf
        else:
            radius = self.truncate_radius * w
        vals = np.empty(xs.shape)
        chunk = 256
        for start in range(0, xs.size, chunk):
            block = xs[start : start + chunk]
            if math.isfinite(radius):
                lo = np.searchsorted(centers, block.min() - radius)
                hi = np.searchsorted(centers, block.max() + radius)
            else:
                lo, hi = 0, centers.size
            if hi == lo:
                vals[start : start + chunk] = 0.0
                continue
            z = (block[:, None] - centers[lo:hi]) / w
            vals[start : start + chunk] = np.exp(-0.5 * z * z) @ weights[lo:hi]
        return vals


def fit_kde(
    chain,
    edge_mode: str = "reflection",
    boundary: float | None = None,
    bandwidth: float | None = None,
    truncate_radius: float | None = 8.0,
) -> KdeModel:
    """Fit the surrogate to a chain (post-burn-in samples) or a point array.

    The bandwidth defaults to the Silverman rule on the sample standard
    deviation.  Corrected edge modes require the truncation boundary.
    """
    kept = getattr(chain, "kept", None)
    pts = np.asarray(kept() if kept is not None else chain, dtype=float).ravel()
    if np.unique(pts).size < 2:
        raise DegenerateSampleError(
            f"need at least 2 distinct points, got {np.unique(pts).size}"
        )
    if edge_mode not in EDGE_MODES:
        raise ValueError(f"edge_mode must be one of {EDGE_MODES}, got '{edge_mode}'")
    if edge_mode != "none" and boundary is None:
        raise ValueError(f"edge_mode '{edge_mode}' needs an explicit boundary")
    if bandwidth is None:
        bandwidth = silverman_bandwidth(float(pts.std(ddof=1)), pts.size)
    return KdeModel(
        points=pts,
        bandwidth=bandwidth,
        edge_mode=edge_mode,
        boundary=-math.inf if boundary is None else float(boundary),
        truncate_radius=truncate_radius,
    )
