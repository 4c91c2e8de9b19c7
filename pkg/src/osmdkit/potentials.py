"""Legendre potentials and their Bregman geometry.

Every potential here is separable, F(x) = sum_i h(x_i), so gradients and
Hessians are handled coordinatewise.  Each potential knows how to invert its
scalar dual map h', which is what the mirror-step solvers need.
"""
from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np


class DomainError(ValueError):
    """Point outside the domain (or interior) required by the operation."""


@dataclass(frozen=True)
class Simplex:
    """Probability simplex on k coordinates."""

    k: int


@dataclass(frozen=True)
class LpBall:
    """Unit lp-ball in R^d."""

    p: float
    d: int


def _as_array(x) -> np.ndarray:
    return np.asarray(x, dtype=float)


class Potential:
    """Base class: separable Legendre potential."""

    #: open upper end of the range of h' (np.inf when h' is onto R)
    grad_upper: float = np.inf
    #: open lower end of the range of h'
    grad_lower: float = -np.inf
    #: whether the domain is the (closed) positive orthant
    positive_domain: bool = False

    # scalar maps, vectorized over numpy arrays -------------------------------
    def h(self, x: np.ndarray) -> np.ndarray:
        raise NotImplementedError

    def h_prime(self, x: np.ndarray) -> np.ndarray:
        raise NotImplementedError

    def h_double(self, x: np.ndarray) -> np.ndarray:
        raise NotImplementedError

    def dual_inv(self, theta: np.ndarray) -> np.ndarray:
        """Inverse of h'.  Only valid for theta strictly inside the range."""
        raise NotImplementedError

    def in_grad_range(self, theta: np.ndarray) -> np.ndarray:
        theta = _as_array(theta)
        return (theta > self.grad_lower) & (theta < self.grad_upper)

    # vector interface --------------------------------------------------------
    def _check_domain(self, x: np.ndarray, interior: bool) -> np.ndarray:
        x = _as_array(x)
        if self.positive_domain:
            bad = (x <= 0.0) if interior else (x < 0.0)
            if np.any(bad):
                raise DomainError(
                    f"{type(self).__name__}: coordinates must be "
                    f"{'strictly positive' if interior else 'nonnegative'}"
                )
        return x

    def value(self, x) -> float:
        x = self._check_domain(x, interior=False)
        return float(np.sum(self.h(x)))

    def gradient(self, x) -> np.ndarray:
        x = self._check_domain(x, interior=True)
        return self.h_prime(x)

    def hessian_diag(self, x) -> np.ndarray:
        x = self._check_domain(x, interior=True)
        return self.h_double(x)

    def bregman(self, x, y) -> float:
        """D(x, y) = F(x) - F(y) - <grad F(y), x - y>, y interior."""
        x = self._check_domain(x, interior=False)
        y = self._check_domain(y, interior=True)
        return float(np.sum(self.h(x) - self.h(y) - self.h_prime(y) * (x - y)))

    def diameter_upper_bound(self, geometry) -> float:
        raise DomainError(
            f"no diameter bound for {type(self).__name__} on {geometry!r}"
        )


class Negentropy(Potential):
    """Unnormalised negative entropy, sum x log x - x, on the positive orthant."""

    positive_domain = True

    def h(self, x):
        x = _as_array(x)
        with np.errstate(divide="ignore", invalid="ignore"):
            v = x * np.log(x) - x
        return np.where(x == 0.0, 0.0, v)

    def h_prime(self, x):
        return np.log(x)

    def h_double(self, x):
        return 1.0 / x

    def dual_inv(self, theta):
        return np.exp(theta)

    def diameter_upper_bound(self, geometry):
        if isinstance(geometry, Simplex):
            return math.log(geometry.k)
        return super().diameter_upper_bound(geometry)


class TsallisHalf(Potential):
    """F(x) = -2 sum sqrt(x_i) on the positive orthant."""

    positive_domain = True
    grad_upper = 0.0

    def h(self, x):
        return -2.0 * np.sqrt(_as_array(x))

    def h_prime(self, x):
        return -1.0 / np.sqrt(x)

    def h_double(self, x):
        return 0.5 * x ** (-1.5)

    def dual_inv(self, theta):
        return 1.0 / (theta * theta)

    def diameter_upper_bound(self, geometry):
        if isinstance(geometry, Simplex):
            return 2.0 * math.sqrt(geometry.k)
        return super().diameter_upper_bound(geometry)


@dataclass(frozen=True)
class TsallisAlpha(Potential):
    """F(x) = -sum x_i^alpha / (alpha (1 - alpha)), alpha in (0, 1).

    Sign chosen so the potential is convex with Hessian diag(x^(alpha-2)).
    """

    alpha: float

    positive_domain = True
    grad_upper = 0.0

    def __post_init__(self):
        if not 0.0 < self.alpha < 1.0:
            raise ValueError("alpha must lie in (0, 1)")

    def h(self, x):
        a = self.alpha
        return -_as_array(x) ** a / (a * (1.0 - a))

    def h_prime(self, x):
        a = self.alpha
        return -(x ** (a - 1.0)) / (1.0 - a)

    def h_double(self, x):
        return x ** (self.alpha - 2.0)

    def dual_inv(self, theta):
        a = self.alpha
        return ((1.0 - a) * (-theta)) ** (1.0 / (a - 1.0))

    def diameter_upper_bound(self, geometry):
        if isinstance(geometry, Simplex):
            a = self.alpha
            return geometry.k ** (1.0 - a) / (a * (1.0 - a))
        return super().diameter_upper_bound(geometry)


def graph_tsallis_alpha(k: int) -> TsallisAlpha:
    """The exponent 1 - 1/log(k) pairing used for graph feedback (k >= 8)."""
    return TsallisAlpha(alpha=1.0 - 1.0 / math.log(k))


@dataclass(frozen=True)
class ClippedLp(Potential):
    """Separable potential whose curvature is clipped at d.

    h''(x) = min{|x|^(p-2), d} for p in [1, 2].  Quadratic (d/2) x^2 below the
    knot |x| = d^(1/(p-2)); the outer branch integrates |x|^(p-2) with the
    constants chosen so h and h' are continuous at the knot.  The endpoints
    p = 1 and p = 2 use the corresponding limit forms.
    """

    p: float
    d: int

    def __post_init__(self):
        if not 1.0 <= self.p <= 2.0:
            raise ValueError("p must lie in [1, 2]")
        if self.d < 1:
            raise ValueError("d must be a positive integer")

    @property
    def knot(self) -> float:
        """Knot |x| below which the clip h'' = d is active (0 when p = 2)."""
        if self.p == 2.0:
            return 0.0
        return float(self.d) ** (1.0 / (self.p - 2.0))

    @property
    def _grad_knot(self) -> float:
        # h' at the knot: d * knot
        return self.d * self.knot

    def _h_quad(self, a):
        return 0.5 * self.d * a * a

    def _h_outer(self, a):
        p, d = self.p, float(self.d)
        if p == 2.0:
            return 0.5 * a * a
        if p == 1.0:
            with np.errstate(divide="ignore", invalid="ignore"):
                return a * np.log(d * a) + 0.5 / d
        c1 = (p - 2.0) / (p - 1.0) * d ** ((p - 1.0) / (p - 2.0))
        c0 = (2.0 - p) / (2.0 * p) * d ** (p / (p - 2.0))
        return c1 * a + a ** p / (p * (p - 1.0)) + c0

    def _hp_quad(self, a):
        return self.d * a

    def _hp_outer(self, a):
        p, d = self.p, float(self.d)
        if p == 2.0:
            return a
        if p == 1.0:
            with np.errstate(divide="ignore", invalid="ignore"):
                return 1.0 + np.log(d * a)
        c1 = (p - 2.0) / (p - 1.0) * d ** ((p - 1.0) / (p - 2.0))
        return c1 + a ** (p - 1.0) / (p - 1.0)

    def h(self, x):
        a = np.abs(_as_array(x))
        if self.p == 2.0:
            return self._h_outer(a)
        return np.where(a <= self.knot, self._h_quad(a), self._h_outer(a))

    def h_prime(self, x):
        x = _as_array(x)
        s = np.sign(x)
        a = np.abs(x)
        if self.p == 2.0:
            return x
        return s * np.where(a <= self.knot, self._hp_quad(a), self._hp_outer(a))

    def h_double(self, x):
        a = np.abs(_as_array(x))
        p, d = self.p, float(self.d)
        if p == 2.0:
            return np.ones_like(a)
        with np.errstate(divide="ignore"):
            curv = a ** (p - 2.0)
        return np.minimum(curv, d)

    def dual_inv(self, theta):
        theta = _as_array(theta)
        s = np.sign(theta)
        a = np.abs(theta)
        p, d = self.p, float(self.d)
        if p == 2.0:
            return theta.copy()
        gk = self._grad_knot
        quad = a / d
        if p == 1.0:
            outer = np.exp(a - 1.0) / d
        else:
            c1 = (p - 2.0) / (p - 1.0) * d ** ((p - 1.0) / (p - 2.0))
            outer = ((p - 1.0) * np.maximum(a - c1, 0.0)) ** (1.0 / (p - 1.0))
        return s * np.where(a <= gk, quad, outer)

    def diameter_upper_bound(self, geometry):
        if isinstance(geometry, LpBall):
            log_term = 2.0 * math.log(self.d) + 1.0
            if self.p == 1.0:
                return log_term
            return min(2.0 / (self.p - 1.0), log_term)
        return super().diameter_upper_bound(geometry)
