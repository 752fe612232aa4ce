"""Unnormalized truncated targets for right-tail failure probability problems.

A reliability problem is specified by a base probability density f(x) and a
failure indicator C(x) = 1{x >= x_T}.  The object of interest is the tail
probability P = int_{x_T}^inf f(x) dx, equivalently the normalizing constant
of the truncated density g(x) = C(x) f(x) / P.  Samplers in this package draw
from the unnormalized g'(x) = C(x) f(x), so the density classes here expose
log g' and its gradient in both scalar and vectorized form.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np
from scipy import special

__all__ = [
    "DensityError",
    "CriteriaFunction",
    "Normal",
    "GammaGaussianMixture",
    "TargetDensity",
    "truncated_normal",
    "truncated_mixture",
]

_LOG_2PI = math.log(2.0 * math.pi)


class DensityError(ValueError):
    """Invalid density parameterization."""


@dataclass(frozen=True)
class CriteriaFunction:
    """Failure-domain indicator C(x) = 1{x >= threshold}.

    The boundary point is inside the failure domain, so C(threshold) = 1.
    """

    threshold: float

    def __call__(self, x):
        arr = np.asarray(x, dtype=float)
        out = (arr >= self.threshold).astype(float)
        if out.ndim == 0:
            return float(out)
        return out

    def indicator_at(self, x: float) -> float:
        return 1.0 if x >= self.threshold else 0.0


@dataclass(frozen=True)
class Normal:
    """Gaussian base density with mean mu and standard deviation sigma."""

    mu: float
    sigma: float

    def __post_init__(self):
        if not (self.sigma > 0.0) or not math.isfinite(self.sigma):
            raise DensityError(f"sigma must be positive and finite, got {self.sigma}")
        if not math.isfinite(self.mu):
            raise DensityError(f"mu must be finite, got {self.mu}")

    @property
    def scale(self) -> float:
        """Characteristic length scale used for proposal defaults."""
        return self.sigma

    def log_pdf_at(self, x: float) -> float:
        z = (x - self.mu) / self.sigma
        return -0.5 * z * z - math.log(self.sigma) - 0.5 * _LOG_2PI

    def log_pdf(self, x):
        z = (np.asarray(x, dtype=float) - self.mu) / self.sigma
        return -0.5 * z * z - math.log(self.sigma) - 0.5 * _LOG_2PI

    def grad_log_pdf_at(self, x: float) -> float:
        return -(x - self.mu) / (self.sigma * self.sigma)

    def grad_log_pdf(self, x):
        return -(np.asarray(x, dtype=float) - self.mu) / (self.sigma * self.sigma)

    def pdf(self, x):
        return np.exp(self.log_pdf(x))

    def tail(self, t: float) -> float:
        """P(X >= t) in closed form via the complementary error function."""
        z = (t - self.mu) / (self.sigma * math.sqrt(2.0))
        return 0.5 * special.erfc(z)

    def cdf(self, x):
        z = (np.asarray(x, dtype=float) - self.mu) / (self.sigma * math.sqrt(2.0))
        return 0.5 * special.erfc(-z)

    def sample(self, rng: np.random.Generator, n: int) -> np.ndarray:
        return rng.normal(self.mu, self.sigma, size=n)


@dataclass(frozen=True)
class GammaGaussianMixture:
    """Two-component mixture: a Gamma bulk and a far Gaussian bump.

    The density is

        f(x) = f1 * alpha^nu / Gamma(nu) * exp(-alpha x) * x^(nu - 1)
             + (1 - f1) * N(x; mu, sigma),          x > 0,

    i.e. a Gamma(shape=nu, rate=alpha) component with weight f1 and a
    Gaussian component with weight f2 = 1 - f1.
    """

    alpha: float
    nu: float
    f1: float
    mu: float
    sigma: float

    def __post_init__(self):
        if not (self.alpha > 0.0):
            raise DensityError(f"alpha must be positive, got {self.alpha}")
        if not (self.nu > 0.0):
            raise DensityError(f"nu must be positive, got {self.nu}")
        if not (0.0 <= self.f1 <= 1.0):
            raise DensityError(f"f1 must lie in [0, 1], got {self.f1}")
        if not (self.sigma > 0.0):
            raise DensityError(f"sigma must be positive, got {self.sigma}")

    @property
    def f2(self) -> float:
        return 1.0 - self.f1

    @property
    def scale(self) -> float:
        """Gamma-component standard deviation sqrt(nu)/alpha."""
        return math.sqrt(self.nu) / self.alpha

    def _log_gamma_const(self) -> float:
        return self.nu * math.log(self.alpha) - special.gammaln(self.nu)

    def log_pdf_at(self, x: float) -> float:
        if x <= 0.0:
            return -math.inf
        lg = -math.inf
        if self.f1 > 0.0:
            lg = (
                math.log(self.f1)
                + self._log_gamma_const()
                - self.alpha * x
                + (self.nu - 1.0) * math.log(x)
            )
        ln = -math.inf
        if self.f2 > 0.0:
            z = (x - self.mu) / self.sigma
            ln = (
                math.log(self.f2)
                - 0.5 * z * z
                - math.log(self.sigma)
                - 0.5 * _LOG_2PI
            )
        if lg == -math.inf:
            return ln
        if ln == -math.inf:
            return lg
        m = max(lg, ln)
        return m + math.log(math.exp(lg - m) + math.exp(ln - m))

    def log_pdf(self, x):
        arr = np.asarray(x, dtype=float)
        out = np.full(arr.shape, -np.inf)
        pos = arr > 0.0
        xp = arr[pos]
        lg = np.full(xp.shape, -np.inf)
        if self.f1 > 0.0:
            lg = (
                math.log(self.f1)
                + self._log_gamma_const()
                - self.alpha * xp
                + (self.nu - 1.0) * np.log(xp)
            )
        ln = np.full(xp.shape, -np.inf)
        if self.f2 > 0.0:
            z = (xp - self.mu) / self.sigma
            ln = (
                math.log(self.f2)
                - 0.5 * z * z
                - math.log(self.sigma)
                - 0.5 * _LOG_2PI
            )
        out[pos] = np.logaddexp(lg, ln)
        if out.ndim == 0:
            return float(out)
        return out

    def grad_log_pdf_at(self, x: float) -> float:
        """d/dx log f(x); NaN outside the support x > 0."""
        if x <= 0.0:
            return math.nan
        # gradient of a mixture: weighted average of component gradients
        # with posterior component responsibilities as weights
        lg = -math.inf
        ln = -math.inf
        if self.f1 > 0.0:
            lg = (
                math.log(self.f1)
                + self._log_gamma_const()
                - self.alpha * x
                + (self.nu - 1.0) * math.log(x)
            )
        if self.f2 > 0.0:
            z = (x - self.mu) / self.sigma
            ln = (
                math.log(self.f2)
                - 0.5 * z * z
                - math.log(self.sigma)
                - 0.5 * _LOG_2PI
            )
        m = max(lg, ln)
        wg = math.exp(lg - m)
        wn = math.exp(ln - m)
        tot = wg + wn
        grad_g = -self.alpha + (self.nu - 1.0) / x
        grad_n = -(x - self.mu) / (self.sigma * self.sigma)
        g = 0.0
        if wg > 0.0:
            g += (wg / tot) * grad_g
        if wn > 0.0:
            g += (wn / tot) * grad_n
        return g

    def grad_log_pdf(self, x):
        arr = np.asarray(x, dtype=float)
        scalar = arr.ndim == 0
        arr = np.atleast_1d(arr)
        out = np.full(arr.shape, np.nan)
        pos = arr > 0.0
        xp = arr[pos]
        if xp.size:
            lg = np.full(xp.shape, -np.inf)
            ln = np.full(xp.shape, -np.inf)
            if self.f1 > 0.0:
                lg = (
                    math.log(self.f1)
                    + self._log_gamma_const()
                    - self.alpha * xp
                    + (self.nu - 1.0) * np.log(xp)
                )
            if self.f2 > 0.0:
                z = (xp - self.mu) / self.sigma
                ln = (
                    math.log(self.f2)
                    - 0.5 * z * z
                    - math.log(self.sigma)
                    - 0.5 * _LOG_2PI
                )
            m = np.maximum(lg, ln)
            wg = np.exp(lg - m)
            wn = np.exp(ln - m)
            tot = wg + wn
            grad_g = -self.alpha + (self.nu - 1.0) / xp
            grad_n = -(xp - self.mu) / (self.sigma * self.sigma)
            out[pos] = (wg * grad_g + wn * grad_n) / tot
        if scalar:
            return float(out[0])
        return out

    def pdf(self, x):
        return np.exp(self.log_pdf(x))

    def tail(self, t: float) -> float:
        """P(X >= t): regularized upper incomplete gamma plus Gaussian tail."""
        t_eff = max(t, 0.0)
        gamma_tail = special.gammaincc(self.nu, self.alpha * t_eff)
        z = (t - self.mu) / (self.sigma * math.sqrt(2.0))
        normal_tail = 0.5 * special.erfc(z)
        return self.f1 * gamma_tail + self.f2 * normal_tail

    def sample(self, rng: np.random.Generator, n: int) -> np.ndarray:
        pick_gamma = rng.random(n) < self.f1
        out = np.empty(n)
        n_gamma = int(pick_gamma.sum())
        out[pick_gamma] = rng.gamma(self.nu, 1.0 / self.alpha, size=n_gamma)
        out[~pick_gamma] = rng.normal(self.mu, self.sigma, size=n - n_gamma)
        return out


@dataclass(frozen=True)
class TargetDensity:
    """Unnormalized truncated target g'(x) = C(x) f(x).

    Wraps a base density and a failure criterion.  log g' is -inf below the
    threshold (a sentinel, never an exception); the gradient of log g' is NaN
    there because g' is identically zero and the log-gradient is undefined.
    """

    base: Normal | GammaGaussianMixture
    criteria: CriteriaFunction

    @property
    def threshold(self) -> float:
        return self.criteria.threshold

    @property
    def scale(self) -> float:
        return self.base.scale

    def in_support(self, x: float) -> bool:
        return x >= self.threshold and self.base.log_pdf_at(x) > -math.inf

    def log_gprime_at(self, x: float) -> float:
        if x < self.threshold:
            return -math.inf
        return self.base.log_pdf_at(x)

    def log_gprime(self, x):
        arr = np.asarray(x, dtype=float)
        out = np.where(arr >= self.threshold, self.base.log_pdf(arr), -np.inf)
        if out.ndim == 0:
            return float(out)
        return out

    def gprime(self, x):
        lg = self.log_gprime(x)
        return np.exp(lg)

    def grad_log_gprime_at(self, x: float) -> float:
        if x < self.threshold:
            return math.nan
        return self.base.grad_log_pdf_at(x)

    def grad_log_gprime(self, x):
        arr = np.asarray(x, dtype=float)
        out = np.where(
            arr >= self.threshold, self.base.grad_log_pdf(arr), np.nan
        )
        if out.ndim == 0:
            return float(out)
        return out

    def analytic_tail(self) -> float | None:
        """Closed-form P = int_{x_T}^inf f, or None if the base has none."""
        tail = getattr(self.base, "tail", None)
        if tail is None:
            return None
        return float(tail(self.threshold))


def truncated_normal(mu: float, sigma: float, x_t: float) -> TargetDensity:
    """Gaussian base truncated to the failure domain [x_t, inf)."""
    return TargetDensity(Normal(mu, sigma), CriteriaFunction(x_t))


def truncated_mixture(
    alpha: float, nu: float, f1: float, mu: float, sigma: float, x_t: float
) -> TargetDensity:
    """Gamma+Gaussian mixture truncated to the failure domain [x_t, inf)."""
    return TargetDensity(
        GammaGaussianMixture(alpha, nu, f1, mu, sigma), CriteriaFunction(x_t)
    )
