"""Radial basis functions and monomial augmentation.

Every kernel is evaluated through two radial factors

    g1(r) = phi'(r) / r
    g2(r) = (phi''(r) - phi'(r) / r) / r**2

so that the translated function Phi(x) = phi(|x - center|) has

    grad Phi = g1 * d                 with d = x - center,
    hess Phi = g1 * I + g2 * (d outer d),
    lap  Phi = 3 * g1 + g2 * r**2,

and the r -> 0 limits are taken analytically instead of numerically.
Computing the Laplacian from the same factors as the Hessian keeps
trace(hess) == lap to rounding error by construction.
"""

from __future__ import annotations

from dataclasses import dataclass
from math import comb

import numpy as np

FAMILIES = ("multiquadric", "inverse_multiquadric", "gaussian", "cubic")


def shape_from_spacing(family, spacing, factor=2.0):
    """Heuristic shape parameter from a node-spacing length scale.

    Multiquadric-type kernels take a length (``factor * spacing``); the
    gaussian takes an inverse length.  The cubic kernel has no shape, for
    which 1.0 is returned so callers need not special-case it.
    """
    if spacing <= 0.0:
        raise ValueError(f"spacing must be positive, got {spacing}")
    if family == "gaussian":
        return 1.0 / (factor * spacing)
    if family == "cubic":
        return 1.0
    return factor * spacing


@dataclass(frozen=True)
class RadialKernel:
    """A radial function phi(r) with closed-form derivatives.

    Parameters
    ----------
    family : str
        One of ``multiquadric`` (sqrt(r^2 + c^2)), ``inverse_multiquadric``
        (1/sqrt(r^2 + c^2)), ``gaussian`` (exp(-(c r)^2)) or ``cubic``
        (r^3, shape ignored).
    shape : float
        Shape parameter ``c``.  A length for the multiquadrics, an inverse
        length for the gaussian.
    """

    family: str
    shape: float = 1.0

    def __post_init__(self):
        if self.family not in FAMILIES:
            raise ValueError(
                f"unknown kernel family {self.family!r}; expected one of {FAMILIES}"
            )
        if self.family != "cubic" and not self.shape > 0.0:
            raise ValueError(f"shape parameter must be positive, got {self.shape}")

    def value(self, r):
        """phi(r) for scalar or array radii r >= 0."""
        r = np.asarray(r, dtype=float)
        if np.any(r < 0.0):
            raise ValueError("radii must be non-negative")
        c = self.shape
        if self.family == "multiquadric":
            return np.sqrt(r * r + c * c)
        if self.family == "inverse_multiquadric":
            return 1.0 / np.sqrt(r * r + c * c)
        if self.family == "gaussian":
            return np.exp(-((c * r) ** 2))
        return r**3

    def radial_factors(self, r):
        """Return (g1, g2) = (phi'/r, (phi'' - phi'/r)/r^2) at radii r.

        Both factors are finite at r = 0 for the smooth families.  The cubic
        g2 = 3/r is singular there, but it only ever multiplies the rank-one
        d-outer-d term which vanishes quadratically, so the r = 0 entry is
        set to its effective limit 0.
        """
        r = np.asarray(r, dtype=float)
        c = self.shape
        if self.family == "multiquadric":
            s = 1.0 / np.sqrt(r * r + c * c)
            return s, -(s**3)
        if self.family == "inverse_multiquadric":
            s = 1.0 / np.sqrt(r * r + c * c)
            return -(s**3), 3.0 * s**5
        if self.family == "gaussian":
            e = np.exp(-((c * r) ** 2))
            cc = c * c
            return -2.0 * cc * e, 4.0 * cc * cc * e
        safe = np.where(r > 0.0, r, 1.0)
        return 3.0 * r, np.where(r > 0.0, 3.0 / safe, 0.0)

    def gradient(self, x, center):
        """Gradient of Phi(x) = phi(|x - center|) with respect to x."""
        d = np.asarray(x, dtype=float) - np.asarray(center, dtype=float)
        r = np.sqrt(np.sum(d * d, axis=-1))
        g1, _ = self.radial_factors(r)
        return np.asarray(g1)[..., None] * d

    def hessian(self, x, center):
        """Hessian of Phi(x) = phi(|x - center|) with respect to x."""
        d = np.asarray(x, dtype=float) - np.asarray(center, dtype=float)
        r = np.sqrt(np.sum(d * d, axis=-1))
        g1, g2 = self.radial_factors(r)
        eye = np.eye(d.shape[-1])
        outer = d[..., :, None] * d[..., None, :]
        return np.asarray(g1)[..., None, None] * eye + np.asarray(g2)[..., None, None] * outer

    def laplacian(self, x, center):
        """Laplacian of Phi(x) = phi(|x - center|) in three dimensions."""
        d = np.asarray(x, dtype=float) - np.asarray(center, dtype=float)
        r = np.sqrt(np.sum(d * d, axis=-1))
        g1, g2 = self.radial_factors(r)
        return 3.0 * g1 + g2 * r * r


def _monomial_powers(degree):
    powers = []
    for total in range(degree + 1):
        for a in range(total, -1, -1):
            for b in range(total - a, -1, -1):
                powers.append((a, b, total - a - b))
    return tuple(powers)


def _dpow(x, n, k):
    """k-th derivative of x**n, exact at x = 0 (0**0 == 1)."""
    if k > n:
        return np.zeros_like(x)
    coeff = 1.0
    for i in range(k):
        coeff *= n - i
    return coeff * x ** (n - k)


@dataclass(frozen=True)
class PolyBasis:
    """Trivariate monomials up to ``degree`` in graded lexicographic order.

    Within each total degree the exponent of x1 decreases first, then x2:
    1; x1, x2, x3; x1^2, x1 x2, x1 x3, x2^2, x2 x3, x3^2; ...
    """

    degree: int

    def __post_init__(self):
        if self.degree < 0:
            raise ValueError(f"degree must be non-negative, got {self.degree}")

    @property
    def count(self):
        """Number of monomials, C(degree + 3, 3)."""
        return comb(self.degree + 3, 3)

    @property
    def powers(self):
        return _monomial_powers(self.degree)

    def values(self, x):
        """Monomial values at points x of shape (3,) or (n, 3)."""
        x = np.asarray(x, dtype=float)
        single = x.ndim == 1
        pts = np.atleast_2d(x)
        cols = [
            pts[:, 0] ** a * pts[:, 1] ** b * pts[:, 2] ** c
            for a, b, c in self.powers
        ]
        out = np.column_stack(cols)
        return out[0] if single else out

    def gradients(self, x):
        """Monomial gradients, shape (..., count, 3)."""
        x = np.asarray(x, dtype=float)
        single = x.ndim == 1
        pts = np.atleast_2d(x)
        x1, x2, x3 = pts[:, 0], pts[:, 1], pts[:, 2]
        out = np.empty((pts.shape[0], self.count, 3))
        for j, (a, b, c) in enumerate(self.powers):
            out[:, j, 0] = _dpow(x1, a, 1) * x2**b * x3**c
            out[:, j, 1] = x1**a * _dpow(x2, b, 1) * x3**c
            out[:, j, 2] = x1**a * x2**b * _dpow(x3, c, 1)
        return out[0] if single else out

    def hessians(self, x):
        """Monomial Hessians, shape (..., count, 3, 3)."""
        x = np.asarray(x, dtype=float)
        single = x.ndim == 1
        pts = np.atleast_2d(x)
        x1, x2, x3 = pts[:, 0], pts[:, 1], pts[:, 2]
        out = np.empty((pts.shape[0], self.count, 3, 3))
        for j, (a, b, c) in enumerate(self.powers):
            out[:, j, 0, 0] = _dpow(x1, a, 2) * x2**b * x3**c
            out[:, j, 1, 1] = x1**a * _dpow(x2, b, 2) * x3**c
            out[:, j, 2, 2] = x1**a * x2**b * _dpow(x3, c, 2)
            d12 = _dpow(x1, a, 1) * _dpow(x2, b, 1) * x3**c
            d13 = _dpow(x1, a, 1) * x2**b * _dpow(x3, c, 1)
            d23 = x1**a * _dpow(x2, b, 1) * _dpow(x3, c, 1)
            out[:, j, 0, 1] = out[:, j, 1, 0] = d12
            out[:, j, 0, 2] = out[:, j, 2, 0] = d13
            out[:, j, 1, 2] = out[:, j, 2, 1] = d23
        return out[0] if single else out

    def _check_index(self, j):
        if not 1 <= j <= self.count:
            raise IndexError(
                f"monomial index {j} out of range 1..{self.count} for degree {self.degree}"
            )

    def monomial(self, j, x):
        """Value of the j-th monomial (1-based) at a single point."""
        self._check_index(j)
        return float(self.values(np.asarray(x, dtype=float))[j - 1])

    def monomial_derivatives(self, j, x):
        """(gradient, hessian) of the j-th monomial (1-based) at a point."""
        self._check_index(j)
        x = np.asarray(x, dtype=float)
        return self.gradients(x)[j - 1], self.hessians(x)[j - 1]
