"""Quadrature building blocks: mapped Gauss panels, graded breakpoints,
the square-lattice density of states, and compensated summation."""
from __future__ import annotations

import math
from functools import lru_cache

import numpy as np
from scipy.special import ellipkm1

__all__ = [
    "gauss_legendre",
    "cosine_panels",
    "graded",
    "square_lattice_dos",
    "fsum_complex",
    "fsum_rows",
]


@lru_cache(maxsize=64)
def _gl(n: int):
    x, w = np.polynomial.legendre.leggauss(n)
    x.setflags(write=False)
    w.setflags(write=False)
    return x, w


def gauss_legendre(n: int):
    """Nodes and weights on [-1, 1] (read-only, cached)."""
    return _gl(int(n))


def cosine_panels(breaks, order: int):
    """Gauss-Legendre on each panel after the map ``x = a + (b-a) sin^2(theta/2)``.

    The map removes square-root endpoint singularities, which every panel
    boundary here carries.  Returns ``(x, w, left, right)`` where ``left`` and
    ``right`` are the node distances to the panel endpoints, computed without
    cancellation so callers can evaluate functions singular at an endpoint.
    """
    breaks = np.asarray(breaks, dtype=float)
    a = breaks[:-1, None]
    h = np.diff(breaks)[:, None]
    t, wt = gauss_legendre(order)
    theta = (t + 1.0) * (math.pi / 2.0)
    sl = np.sin(theta / 2.0) ** 2
    sr = np.cos(theta / 2.0) ** 2
    left = h * sl
    right = h * sr
    x = a + left
    w = h * (wt * (math.pi / 4.0) * np.sin(theta))
    return x.ravel(), w.ravel(), left.ravel(), right.ravel()


def graded(a: float, b: float, toward: str, levels: int, ratio: float = 0.25):
    """Interior breakpoints on (a, b) clustered geometrically at one end."""
    if levels <= 0 or b <= a:
        return []
    offsets = (b - a) * ratio ** np.arange(1, levels + 1)
    if toward == "a":
        return list(a + offsets)
    return list(b - offsets)


def square_lattice_dos(offset_from_centre):
    """Normalized density of ``s = 4 - 2 cos q_x - 2 cos q_y`` over the zone.

    Takes ``s - 4`` so the logarithmic van Hove peak at ``s = 4`` can be
    approached without rounding onto it.  ``rho(s) = K(m) / (2 pi^2)`` with
    ``m = 1 - (s-4)^2/16``.
    """
    p = (np.asarray(offset_from_centre, dtype=float) / 4.0) ** 2
    p = np.maximum(p, np.finfo(float).tiny)
    return ellipkm1(p) / (2.0 * math.pi**2)


def fsum_complex(values) -> complex:
    values = np.asarray(values)
    return complex(math.fsum(values.real.ravel()), math.fsum(values.imag.ravel()))


def fsum_rows(values):
    """Correctly rounded sum along the last axis, row by row."""
    values = np.asarray(values)
    flat = values.reshape(-1, values.shape[-1])
    if np.iscomplexobj(flat):
        re = [math.fsum(r) for r in flat.real]
        im = [math.fsum(r) for r in flat.imag]
        out = np.array(re) + 1j * np.array(im)
    else:
        out = np.array([math.fsum(r) for r in flat])
    return out.reshape(values.shape[:-1])
