"""
Scalar special functions behind the estimator formulas: harmonic numbers,
digamma and trigamma, the dilogarithm, the normal cdf and the distribution
of the circular distance between two von Mises variables.

Arguments outside the documented domains throw `DomainError`.

@date: 18.10.2026
"""

from __future__ import annotations

import math
from typing import Final

import numpy as np
import numpy.typing as npt
from scipy import special
from scipy.integrate import cumulative_trapezoid

from ._checks import DomainError

EULER_GAMMA: Final[float] = float(np.euler_gamma)
PI2_OVER_6: Final[float] = math.pi**2 / 6.0

# Partial sums are looked up below this size, the usual regime since E[K] = 1/p.
_TABLE_SIZE: Final[int] = 256
_HARMONIC_TABLE: Final[npt.NDArray[np.float64]] = np.concatenate(
    ([0.0], np.cumsum(1.0 / np.arange(1, _TABLE_SIZE + 1)))
)
_SQUARES_TABLE: Final[npt.NDArray[np.float64]] = np.concatenate(
    ([0.0], np.cumsum(1.0 / np.arange(1, _TABLE_SIZE + 1) ** 2))
)

CIRCULAR_GRID_POINTS: Final[int] = 2000


def harmonic(n: int) -> float:
    """
    Returns
    -------
    float
        H_n = sum_{k=1..n} 1/k, with H_0 = 0.
    """
    if n < 0:
        DomainError("harmonic", n).throw()
    if n <= _TABLE_SIZE:
        return float(_HARMONIC_TABLE[n])
    return float(special.digamma(n + 1.0) + EULER_GAMMA)


def harmonic_numbers(n: npt.ArrayLike) -> npt.NDArray[np.float64]:
    """
    Vectorised `harmonic` for non-negative integer arrays.
    """
    n = np.asarray(n, dtype=np.int64)
    out = np.empty(n.shape, dtype=np.float64)
    small = n <= _TABLE_SIZE
    out[small] = _HARMONIC_TABLE[n[small]]
    out[~small] = special.digamma(n[~small] + 1.0) + EULER_GAMMA
    return out


def inverse_square_sums(n: npt.ArrayLike) -> npt.NDArray[np.float64]:
    """
    sum_{k=1..n} 1/k^2 for non-negative integer arrays.
    """
    n = np.asarray(n, dtype=np.int64)
    out = np.empty(n.shape, dtype=np.float64)
    small = n <= _TABLE_SIZE
    out[small] = _SQUARES_TABLE[n[small]]
    out[~small] = PI2_OVER_6 - special.polygamma(1, n[~small] + 1.0)
    return out


def digamma(x: float) -> float:
    if not x > 0:
        DomainError("digamma", x).throw()
    return float(special.digamma(x))


def trigamma(x: float) -> float:
    if not x > 0:
        DomainError("trigamma", x).throw()
    return float(special.polygamma(1, x))


def dilog(z: float) -> float:
    """
    Dilogarithm Li_2(z) = sum_{k>=1} z^k / k^2 on [0, 1].

    scipy's `spence(x)` is Li_2(1 - x).
    """
    if not 0.0 <= z <= 1.0:
        DomainError("dilog", z).throw()
    return float(special.spence(1.0 - z))


def dilog_array(z: npt.ArrayLike) -> npt.NDArray[np.float64]:
    z = np.asarray(z, dtype=np.float64)
    if np.any((z < 0.0) | (z > 1.0)) or np.any(np.isnan(z)):
        DomainError("dilog", z).throw()
    return np.asarray(special.spence(1.0 - z), dtype=np.float64)


def normal_cdf(x: float) -> float:
    return float(special.ndtr(x))


def _log_i0(x: npt.NDArray[np.float64]) -> npt.NDArray[np.float64]:
    # i0e(x) = exp(-|x|) I0(x)
    return np.log(special.i0e(x)) + np.abs(x)


def circular_distance_density(
    delta: npt.ArrayLike, kappa: float, shift: npt.ArrayLike = 0.0
) -> npt.NDArray[np.float64]:
    """
    Density of |d_circ(x1, x2)| on [0, pi] for x1 ~ VM(0, kappa) and
    x2 ~ VM(shift, kappa).

    The signed difference x2 - x1 has density
    I0(2 kappa |cos((d - shift) / 2)|) / (2 pi I0(kappa)^2), folded here onto
    its absolute value.
    """
    if not kappa > 0:
        DomainError("circular distance density (kappa)", kappa).throw()
    delta = np.asarray(delta, dtype=np.float64)
    log_norm = math.log(2.0 * math.pi) + 2.0 * float(_log_i0(np.asarray(kappa)))

    def signed(d: npt.NDArray[np.float64]) -> npt.NDArray[np.float64]:
        radius = 2.0 * kappa * np.abs(np.cos((d - shift) / 2.0))
        return np.exp(_log_i0(radius) - log_norm)

    return signed(delta) + signed(-delta)


def circular_distance_grid(
    kappa: float, points: int = CIRCULAR_GRID_POINTS
) -> tuple[npt.NDArray[np.float64], npt.NDArray[np.float64], npt.NDArray[np.float64]]:
    """
    Returns
    -------
    tuple
        (grid on [0, pi], density, cumulative) for two von Mises variables
        with equal centres. The cumulative is the trapezoidal integral of the
        density, renormalised so that it ends at exactly 1.
    """
    grid = np.linspace(0.0, math.pi, points)
    density = circular_distance_density(grid, kappa)
    cumulative = cumulative_trapezoid(density, grid, initial=0.0)
    cumulative /= cumulative[-1]
    return grid, density, cumulative


def circ_dist_pdf_cdf(delta: float, kappa: float) -> tuple[float, float]:
    """
    Density and cumulative probability of the absolute circular distance
    between two von Mises variables with a common centre and concentration
    `kappa`, evaluated at `delta` (radians, in [0, pi]).
    """
    if not kappa > 0:
        DomainError("circ_dist_pdf_cdf (kappa)", kappa).throw()
    if not 0.0 <= delta <= math.pi:
        DomainError("circ_dist_pdf_cdf (delta)", delta).throw()
    grid, _, cumulative = circular_distance_grid(kappa)
    density = float(circular_distance_density(np.asarray(delta), kappa))
    return density, float(np.interp(delta, grid, cumulative))
