import math

import numpy as np
import pytest
from scipy import integrate

from magnon_casimir.quadrature import (
    cosine_panels,
    fsum_complex,
    fsum_rows,
    gauss_legendre,
    graded,
    square_lattice_dos,
)


def test_gauss_legendre_is_cached_and_read_only():
    x, w = gauss_legendre(12)
    assert gauss_legendre(12)[0] is x
    assert w.sum() == pytest.approx(2.0)
    with pytest.raises(ValueError):
        x[0] = 1.0


def test_cosine_panels_absorb_sqrt_endpoints():
    x, w, left, right = cosine_panels([0.0, 1.0], 16)
    assert np.dot(w, np.sqrt(left)) == pytest.approx(2 / 3, rel=1e-13)
    assert np.dot(w, 1 / np.sqrt(right)) == pytest.approx(2.0, rel=1e-13)
    assert np.allclose(left + right, 1.0)


def test_cosine_panels_on_several_panels_match_quad():
    breaks = [0.0, 0.3, 1.0]
    x, w, left, right = cosine_panels(breaks, 20)
    f = np.abs(np.sin(3 * x)) * np.sqrt(np.abs(x - 0.3))
    exact = integrate.quad(lambda t: abs(math.sin(3 * t)) * math.sqrt(abs(t - 0.3)),
                           0, 1, points=[0.3], limit=200, epsabs=1e-14)[0]
    assert np.dot(w, f) == pytest.approx(exact, rel=1e-9)


def test_graded_breakpoints():
    g = graded(0.0, 1.0, "a", 3)
    assert g == pytest.approx([0.25, 0.0625, 0.015625])
    assert graded(0.0, 1.0, "b", 2) == pytest.approx([0.75, 0.9375])
    assert graded(1.0, 1.0, "a", 3) == []


def test_square_lattice_dos_moments():
    # s = 4 - 2 cos qx - 2 cos qy: <1> = 1, <s> = 4, <s^2> = 20
    x, w, left, right = cosine_panels([0.0, 4.0, 8.0], 200)
    off = np.concatenate([-right[:200], left[200:]])  # s - 4 without rounding
    rho = square_lattice_dos(off)
    assert np.dot(w, rho) == pytest.approx(1.0, rel=1e-6)
    assert np.dot(w, rho * x) == pytest.approx(4.0, rel=1e-6)
    assert np.dot(w, rho * x * x) == pytest.approx(20.0, rel=1e-6)


def test_square_lattice_dos_band_edge_value():
    # rho(0) = 1 / (4 pi) for the square lattice (effective mass limit)
    assert square_lattice_dos(-4.0) == pytest.approx(1 / (4 * math.pi), rel=1e-12)
    assert math.isfinite(square_lattice_dos(0.0))


def test_fsum_helpers_are_exact_on_cancelling_input():
    v = np.array([1e16, 1.0, -1e16, 1.0])
    assert fsum_complex(v + 1j * v) == complex(2.0, 2.0)
    rows = np.vstack([v, 2 * v])
    assert list(fsum_rows(rows)) == [2.0, 4.0]
    assert fsum_rows(rows + 0j).dtype == complex
