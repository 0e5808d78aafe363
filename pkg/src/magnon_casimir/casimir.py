"""Lattice-regularized Casimir energy of a magnon film.

Per surface unit cell and per mode, with ``q_z`` either discretized as
``pi n / N_z`` (``n = 1 .. 2 N_z``) or continuous over ``[0, 2 pi]``::

    E0_sum = int_BZ d^2q/(2pi)^2  (1/2)(1/2) sum_n eps(q_perp, pi n / N_z)
    E0_int = int_BZ d^2q/(2pi)^2  (1/2) N_z  int dq_z/(2pi) eps(q_perp, q_z)
    E_Cas  = E0_sum - E0_int

The magnon energy depends on the in-plane wavevector only through
``s = 4 sin^2(q_x/2) + 4 sin^2(q_y/2)``, so the default in-plane rule
integrates over ``s`` against the square-lattice density of states.  The
per-``s`` difference between the mode sum and the ``q_z`` integral (the
"Casimir density") is formed before any in-plane integration.

Two evaluations of that density are provided:

``direct``
    the compensated sum of ``eps_n - <eps>`` with the ``q_z`` mean in closed
    form (complete elliptic integrals).  Loses digits once ``E_Cas`` falls
    many decades below the bulk zero-point energy.
``contour``
    the same quantity obtained by moving the ``q_z`` Fourier integral onto the
    branch cuts of ``sqrt(E^2)``.  The aliasing sum over ``2 N_z``-th Fourier
    coefficients then collapses to one integral against
    ``1/(exp(2 N_z (y - i q_c)) - 1)``; nothing large is subtracted.
"""
from __future__ import annotations

import math
import os
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass, replace
from typing import Iterable, List, Optional, Sequence

import numpy as np
from scipy.special import ellipe, ellipk, ellipkm1

from .core import MaterialParams, Mode, Regime, classify_regime, derive_params
from .errors import QuadratureFailure, ValidationError
from .quadrature import (
    cosine_panels,
    fsum_complex,
    fsum_rows,
    gauss_legendre,
    graded,
    square_lattice_dos,
)

__all__ = [
    "FilmGeometry",
    "QuadratureSpec",
    "CasimirPoint",
    "Band",
    "MagnonBand",
    "magnon_bands",
    "zero_point_sum",
    "zero_point_integral",
    "casimir_energy",
    "casimir_coefficient",
    "default_exponent",
    "thickness_sweep",
    "band_zero_point_sum",
    "band_zero_point_integral",
    "band_casimir_energy",
]

BOTH_MODES = (Mode.PLUS, Mode.MINUS)
S_MAX = 8.0  # range of s over the zone
_GRADING_LEVELS = 20
_Y_LEVELS = 20
_Y_DECAY = 46.0  # e^-46 ~ 1e-20
_ROW_CHUNK = 2048


@dataclass(frozen=True)
class FilmGeometry:
    """Film of ``N_z`` magnetic unit cells; ``L_z = a N_z``."""

    N_z: int

    def __post_init__(self):
        if isinstance(self.N_z, bool) or not isinstance(self.N_z, (int, np.integer)):
            raise ValidationError("N_z", "N_z must be an integer")
        if self.N_z < 1:
            raise ValidationError("N_z", "N_z must be >= 1")

    def thickness(self, a: float) -> float:
        return a * self.N_z


@dataclass(frozen=True)
class QuadratureSpec:
    """Quadrature controls.

    inplane_points
        Gauss nodes per ``s`` panel for ``inplane_rule="dos"``; midpoints
        per axis over ``[-pi, pi]`` for ``inplane_rule="grid"`` (even).
    kz_points
        Gauss nodes per smooth ``q_z`` piece when ``kz_rule="gauss"``; the
        contour density uses ``kz_points // 4`` nodes per graded panel.
    refine_factor, tol_rel
        Every result is recomputed with both point counts multiplied by
        ``refine_factor``; a relative change above ``tol_rel`` raises
        :class:`QuadratureFailure`.  ``check=False`` skips the second pass.
    """

    inplane_points: int = 24
    kz_points: int = 64
    refine_factor: int = 2
    tol_rel: float = 1e-6
    inplane_rule: str = "dos"
    density: str = "contour"
    kz_rule: str = "exact"
    check: bool = True

    def __post_init__(self):
        for name in ("inplane_points", "kz_points", "refine_factor"):
            v = getattr(self, name)
            if isinstance(v, bool) or not isinstance(v, (int, np.integer)):
                raise ValidationError(name, f"{name} must be an integer")
        for name in ("check",):
            if not isinstance(getattr(self, name), bool):
                raise ValidationError(name, f"{name} must be true or false")
        if isinstance(self.tol_rel, bool) or not isinstance(self.tol_rel, (int, float)):
            raise ValidationError("tol_rel", "tol_rel must be a real number")
        if self.inplane_points < 16:
            raise ValidationError("inplane_points", "inplane_points must be >= 16")
        if self.kz_points < 64:
            raise ValidationError("kz_points", "kz_points must be >= 64")
        if self.refine_factor < 2:
            raise ValidationError("refine_factor", "refine_factor must be >= 2")
        if not (math.isfinite(self.tol_rel) and self.tol_rel > 0):
            raise ValidationError("tol_rel", "tol_rel must be > 0")
        if self.inplane_rule not in ("dos", "grid"):
            raise ValidationError("inplane_rule", "inplane_rule must be 'dos' or 'grid'")
        if self.inplane_rule == "grid" and self.inplane_points % 2:
            raise ValidationError("inplane_points", "grid rule needs an even point count")
        if self.density not in ("contour", "direct"):
            raise ValidationError("density", "density must be 'contour' or 'direct'")
        if self.kz_rule not in ("exact", "gauss"):
            raise ValidationError("kz_rule", "kz_rule must be 'exact' or 'gauss'")

    def refined(self) -> "QuadratureSpec":
        f = self.refine_factor
        return replace(self, inplane_points=self.inplane_points * f,
                       kz_points=self.kz_points * f, check=False)


@dataclass(frozen=True)
class CasimirPoint:
    N_z: int
    e_cas: complex
    coeff: complex
    b: float


# ---------------------------------------------------------------------------
# bands


class Band:
    """A ``q_z``-resolved band whose energy depends on ``q_perp`` through ``s``.

    Subclasses provide :meth:`energy`.  The generic ``q_z`` mean is a plain
    Gauss rule over ``[0, 2 pi]`` and the Casimir density is the direct
    difference, which is adequate for smooth bands (and exact for flat ones).
    """

    #: rounding noise of the Casimir density relative to the bulk zero-point
    #: energy; changes below it never fail the convergence check
    noise_floor = 1e-14

    def energy(self, s, qz):
        raise NotImplementedError

    def breakpoints(self, n_z: int):
        """``(kinks, focus)``: ``s`` values where the integrand is non-smooth;
        ``focus`` points additionally get geometric grading on both sides."""
        return [], []

    def kz_mean(self, s, quad: QuadratureSpec):
        x, w = gauss_legendre(quad.kz_points)
        qz = math.pi * (x + 1.0)
        vals = self.energy(np.asarray(s)[..., None], qz)
        return fsum_rows(vals * (w / 2.0))

    def mode_sum(self, s, n_z: int):
        """``(1/4) sum_{n=1}^{2 N_z} eps(s, pi n / N_z)``."""
        qz = math.pi * np.arange(1, 2 * n_z + 1) / n_z
        vals = self.energy(np.asarray(s)[..., None], qz)
        return 0.25 * fsum_rows(vals)

    def casimir_density(self, s, n_z: int, quad: QuadratureSpec):
        s = np.asarray(s, dtype=float)
        qz = math.pi * np.arange(1, 2 * n_z + 1) / n_z
        mean = np.asarray(self.kz_mean(s, quad))
        vals = self.energy(s[..., None], qz) - mean[..., None]
        return 0.25 * fsum_rows(vals)


def _kz_integral_closed(B, A):
    """``int_0^pi sqrt(B + 4 A^2 sin^2(q/2)) dq`` on the principal branch."""
    B = np.asarray(B, dtype=float)
    out = np.empty(B.shape, dtype=complex)
    a4 = 4.0 * A * A
    p = -B / a4
    pos = B >= 0
    mid = (p > 0) & (p < 1)
    full = p >= 1
    if np.any(pos):
        P = B[pos] + a4
        out[pos] = 2.0 * np.sqrt(P) * ellipe(a4 / P)
    if np.any(mid):
        pm = p[mid]
        re = ellipe(1.0 - pm) - pm * ellipkm1(pm)
        im = ellipe(pm) - (1.0 - pm) * ellipk(pm)
        out[mid] = 2.0 * A * 2.0 * (re + 1j * im)
    if np.any(full):
        out[full] = 2j * np.sqrt(-B[full]) * ellipe(1.0 / p[full])
    return out


class MagnonBand(Band):
    """Lattice magnon dispersion of one mode, in the variables ``(s, q_z)``.

    ``E^2 = B(s) + 4 A^2 sin^2(q_z/2)`` with ``B(s) = A^2 s + delta^2 - D^2 alpha^2``.
    """

    noise_floor = 0.0  # the contour density is cancellation-free

    def __init__(self, m: MaterialParams, sigma: Mode, alpha: float):
        dp = derive_params(m, sigma, alpha)
        self.sigma = dp.sigma
        self.alpha = dp.alpha
        self.A = dp.A
        self.A2 = dp.A * dp.A
        self.B0 = dp.gap_term
        self.pref = 2.0 * m.S / (1.0 + dp.alpha**2)
        self.shift = -1j * dp.alpha * dp.C

    def __repr__(self):
        return f"MagnonBand(sigma={self.sigma.label}, alpha={self.alpha})"

    def B(self, s):
        return self.A2 * np.asarray(s, dtype=float) + self.B0

    def energy(self, s, qz):
        e2 = self.B(s) + 4.0 * self.A2 * np.sin(np.asarray(qz) / 2.0) ** 2
        return self.pref * (self.shift + np.sqrt(e2.astype(complex)))

    def breakpoints(self, n_z: int):
        s0 = -self.B0 / self.A2
        kinks = []
        n = np.arange(1, n_z + 1)
        sn = s0 - 4.0 * np.sin(math.pi * n / (2 * n_z)) ** 2
        kinks.extend(float(v) for v in sn if 0.0 < v < S_MAX)
        s_full = (-4.0 * self.A2 - self.B0) / self.A2
        if 0.0 < s_full < S_MAX:
            kinks.append(s_full)
        focus = [s0] if 0.0 < s0 < S_MAX else []
        return kinks, focus

    # q_z mean ---------------------------------------------------------------

    def kz_mean(self, s, quad: QuadratureSpec):
        if quad.kz_rule == "gauss":
            return self.pref * (self.shift + self._root_mean_gauss(s, quad.kz_points))
        return self.pref * (self.shift + self._root_mean(s))

    def _root_mean(self, s):
        return _kz_integral_closed(self.B(s), self.A) / math.pi

    def _root_mean_gauss(self, s, order):
        # pieces split where E^2 changes sign; cosine map absorbs the sqrt ends
        B = np.atleast_1d(self.B(s))
        p = np.clip(-B / (4.0 * self.A2), 0.0, 1.0)
        qc = 2.0 * np.arcsin(np.sqrt(p))
        unit = np.array([0.0, 1.0])
        _, w, left, _ = cosine_panels(unit, order)
        out = np.zeros(B.shape, dtype=complex)
        for lo, hi in ((np.zeros_like(qc), qc), (qc, np.full_like(qc, math.pi))):
            h = (hi - lo)[:, None]
            q = lo[:, None] + h * left
            e2 = B[:, None] + 4.0 * self.A2 * np.sin(q / 2.0) ** 2
            # on the inner piece E^2 <= 0 by construction; guard rounding at qc
            vals = np.sqrt(e2.astype(complex))
            out += fsum_rows(vals * (h * w))
        out /= math.pi
        return out.reshape(np.shape(s)) if np.ndim(s) else out[0]

    # sums -------------------------------------------------------------------

    def _root_terms(self, s, n_z):
        # n and 2N_z - n coincide; n = N_z (q_z = pi) and n = 2N_z (q_z = 0) are single
        n = np.arange(1, n_z + 1)
        w4 = 4.0 * self.A2 * np.sin(math.pi * n / (2 * n_z)) ** 2
        w4 = np.append(w4, 0.0)
        mult = np.full(n_z + 1, 2.0)
        mult[-2:] = 1.0
        if n_z == 1:
            mult = np.array([1.0, 1.0])
        e2 = self.B(s)[..., None] + w4
        return np.sqrt(e2.astype(complex)), mult

    def mode_sum(self, s, n_z: int):
        s = np.asarray(s, dtype=float)
        roots, mult = self._root_terms(s, n_z)
        total = fsum_rows(roots * mult)
        return self.pref * (0.25 * total + self.shift * (n_z / 2.0))

    def casimir_density(self, s, n_z: int, quad: QuadratureSpec):
        s = np.asarray(s, dtype=float)
        if quad.density == "direct":
            return self._direct_density(s, n_z, quad)
        return self._contour_density(s, n_z, quad)

    def _direct_density(self, s, n_z, quad):
        if quad.kz_rule == "gauss":
            mean = self._root_mean_gauss(s, quad.kz_points)
        else:
            mean = self._root_mean(s)
        flat, mean = s.ravel(), np.asarray(mean).ravel()
        out = np.empty(flat.shape, dtype=complex)
        for lo in range(0, flat.size, _ROW_CHUNK):
            sl = slice(lo, lo + _ROW_CHUNK)
            roots, mult = self._root_terms(flat[sl], n_z)
            out[sl] = 0.25 * fsum_rows((roots - mean[sl][:, None]) * mult)
        return self.pref * out.reshape(s.shape)

    def _contour_density(self, s, n_z, quad):
        order = max(8, quad.kz_points // 4)
        B = self.B(s).ravel()
        out = np.zeros(B.shape, dtype=complex)
        a4 = 4.0 * self.A2
        # y = T u^2 on geometrically graded u-panels toward 0
        u_breaks = np.concatenate([[0.0], 4.0 ** -np.arange(_Y_LEVELS, -1, -1.0)])
        x, wx = gauss_legendre(order)
        h = np.diff(u_breaks)[:, None]
        u = (u_breaks[:-1, None] + h * (x + 1.0) / 2.0).ravel()
        wu = (h * wx / 2.0).ravel()
        T = _Y_DECAY / (2.0 * n_z - 0.5)
        y = T * u * u
        jac = wu * 2.0 * T * u

        gapped = B > 0
        ep = (~gapped) & (B > -a4)
        full = B <= -a4

        if np.any(gapped):
            idx = np.flatnonzero(gapped)
            kappa = 2.0 * np.arcsinh(np.sqrt(B[idx]) / (2.0 * self.A))
            live = 2.0 * n_z * kappa < 700.0
            idx, kappa = idx[live], kappa[live]
            for lo in range(0, idx.size, _ROW_CHUNK):
                k = kappa[lo:lo + _ROW_CHUNK, None]
                rad = a4 * np.sinh(y / 2.0) * np.sinh(k + y / 2.0)
                xx = 2.0 * n_z * (k + y)
                kern = np.exp(-xx) / -np.expm1(-xx)
                val = (np.sqrt(rad) * kern) @ jac
                out[idx[lo:lo + _ROW_CHUNK]] = -(n_z / math.pi) * val

        if np.any(ep):
            idx = np.flatnonzero(ep)
            p = -B[idx] / a4
            qc = 2.0 * np.arcsin(np.sqrt(p))
            phase = np.remainder(2.0 * n_z * qc + math.pi, 2.0 * math.pi) - math.pi
            for lo in range(0, idx.size, _ROW_CHUNK):
                sl = slice(lo, lo + _ROW_CHUNK)
                c = np.cos(qc[sl])[:, None]
                sn = np.sin(qc[sl])[:, None]
                ph = phase[sl][:, None]
                g = -a4 * c * np.sinh(y / 2.0) ** 2 + 2j * self.A2 * sn * np.sinh(y)
                xx = 2.0 * n_z * y
                ex = np.exp(-xx)
                one_minus_z = (-np.expm1(-xx) + 2.0 * ex * np.sin(ph / 2.0) ** 2) \
                    - 1j * ex * np.sin(ph)
                kern = ex * np.exp(1j * ph) / one_minus_z
                x1 = (np.sqrt(g) * kern) @ jac
                x2 = (np.sqrt(-g) * kern) @ jac
                out[idx[sl]] = n_z * (-x1.imag + 1j * x2.imag) / math.pi

        if np.any(full):
            idx = np.flatnonzero(full)
            out[idx] = self._direct_density(s.ravel()[idx], n_z, quad) / self.pref

        return (self.pref * out).reshape(s.shape)


def magnon_bands(m: MaterialParams, alpha: float, modes: Iterable[Mode] = BOTH_MODES):
    return [MagnonBand(m, Mode(sigma), alpha) for sigma in modes]


# ---------------------------------------------------------------------------
# in-plane rules


def _dos_nodes(band: Band, n_z: int, order: int):
    kinks, focus = band.breakpoints(n_z)
    pts = {0.0, 4.0, S_MAX}
    pts.update(v for v in list(kinks) + list(focus) if 0.0 < v < S_MAX)
    pts = sorted(pts)
    clustered = set(focus) | {0.0, 4.0}
    extra = []
    for a, b in zip(pts[:-1], pts[1:]):
        if a in clustered:
            extra += graded(a, b, "a", _GRADING_LEVELS)
        if b in clustered:
            extra += graded(a, b, "b", _GRADING_LEVELS)
    breaks = np.array(sorted(set(pts) | set(extra)))
    s, w, left, right = cosine_panels(breaks, order)
    a = np.repeat(breaks[:-1], order)
    b = np.repeat(breaks[1:], order)
    off4 = np.where(a == 4.0, left, np.where(b == 4.0, -right, s - 4.0))
    return s, w * square_lattice_dos(off4)


def _grid_nodes(n: int):
    # midpoint grid on [-pi, pi]^2 folded onto one octant of the zone
    h = 2.0 * math.pi / n
    q = (np.arange(n // 2) + 0.5) * h
    c = 4.0 * np.sin(q / 2.0) ** 2
    i, j = np.triu_indices(n // 2)
    s = c[i] + c[j]
    w = np.where(i == j, 4.0, 8.0) / float(n * n)
    return s, w


def _inplane_nodes(band: Band, n_z: int, quad: QuadratureSpec):
    if quad.inplane_rule == "grid":
        return _grid_nodes(quad.inplane_points)
    return _dos_nodes(band, n_z, quad.inplane_points)


def _integrate(band: Band, n_z: int, quad: QuadratureSpec, density) -> complex:
    s, w = _inplane_nodes(band, n_z, quad)
    return fsum_complex(w * density(s))


def _checked(compute, quad: QuadratureSpec, n_z: int, floor: float = 0.0) -> complex:
    base = compute(quad)
    if not quad.check:
        return base
    fine = compute(quad.refined())
    change = abs(fine - base)
    if change > max(quad.tol_rel * abs(fine), floor):
        rel = change / abs(fine) if fine != 0 else math.inf
        raise QuadratureFailure(
            f"refined quadrature changed the result by {rel:.3g} (tol_rel={quad.tol_rel:g})",
            n_z=n_z, rel_change=rel)
    return fine


def _geom(geom) -> FilmGeometry:
    return geom if isinstance(geom, FilmGeometry) else FilmGeometry(int(geom))


def band_zero_point_sum(bands: Sequence[Band], geom, quad: Optional[QuadratureSpec] = None) -> complex:
    geom, quad = _geom(geom), quad or QuadratureSpec()
    n_z = geom.N_z

    def compute(qs):
        return sum(_integrate(b, n_z, qs, lambda s, b=b: b.mode_sum(s, n_z)) for b in bands)

    return _checked(compute, quad, n_z)


def band_zero_point_integral(bands: Sequence[Band], geom,
                             quad: Optional[QuadratureSpec] = None) -> complex:
    geom, quad = _geom(geom), quad or QuadratureSpec()
    n_z = geom.N_z

    def compute(qs):
        # N_z enters only as a prefactor; the breakpoints use N_z = 1
        return sum(_integrate(b, 1, qs, lambda s, b=b: np.asarray(b.kz_mean(s, qs)))
                   for b in bands)

    return 0.5 * n_z * _checked(compute, quad, n_z)


def band_casimir_energy(bands: Sequence[Band], geom, quad: Optional[QuadratureSpec] = None) -> complex:
    geom, quad = _geom(geom), quad or QuadratureSpec()
    n_z = geom.N_z

    def compute(qs):
        return sum(_integrate(b, n_z, qs, lambda s, b=b: b.casimir_density(s, n_z, qs))
                   for b in bands)

    floor = 0.0
    if quad.check and any(b.noise_floor > 0 for b in bands):
        floor = sum(b.noise_floor * abs(_integrate(b, 1, quad, lambda s, b=b: b.kz_mean(s, quad)))
                    for b in bands) * 0.5 * n_z
    return _checked(compute, quad, n_z, floor=floor)


def zero_point_sum(m: MaterialParams, alpha: float, geom, quad: Optional[QuadratureSpec] = None,
                   modes: Iterable[Mode] = BOTH_MODES) -> complex:
    return band_zero_point_sum(magnon_bands(m, alpha, modes), geom, quad)


def zero_point_integral(m: MaterialParams, alpha: float, geom,
                        quad: Optional[QuadratureSpec] = None,
                        modes: Iterable[Mode] = BOTH_MODES) -> complex:
    return band_zero_point_integral(magnon_bands(m, alpha, modes), geom, quad)


def casimir_energy(m: MaterialParams, alpha: float, geom, quad: Optional[QuadratureSpec] = None,
                   modes: Iterable[Mode] = BOTH_MODES) -> complex:
    return band_casimir_energy(magnon_bands(m, alpha, modes), geom, quad)


def casimir_coefficient(e_cas: complex, n_z: int, b: float) -> complex:
    if n_z < 1:
        raise ValidationError("N_z", "N_z must be >= 1")
    return complex(e_cas) * float(n_z) ** float(b)


def default_exponent(m: MaterialParams, alpha: float) -> float:
    """3 in the gap-melting regime, 1.5 once an exceptional point exists."""
    return 3.0 if classify_regime(m, alpha).regime is Regime.GAP_MELTING else 1.5


def _sweep_point(args) -> CasimirPoint:
    m, alpha, n_z, b, quad = args
    e = casimir_energy(m, alpha, FilmGeometry(n_z), quad)
    return CasimirPoint(n_z, e, casimir_coefficient(e, n_z, b), b)


def thickness_sweep(m: MaterialParams, alpha: float, n_z_range, b: Optional[float] = None,
                    quad: Optional[QuadratureSpec] = None, workers: int = 1) -> List[CasimirPoint]:
    """One :class:`CasimirPoint` per ``N_z`` in the inclusive ``(lo, hi)`` range.

    Points are computed independently, so the output does not depend on
    ``workers``.
    """
    if isinstance(n_z_range, range):
        values = list(n_z_range)
    else:
        lo, hi = n_z_range
        values = list(range(int(lo), int(hi) + 1))
    if not values:
        raise ValidationError("n_z_range", "empty N_z range")
    if values[0] < 1:
        raise ValidationError("n_z_range", "N_z must be >= 1")
    if isinstance(workers, bool) or int(workers) < 1:
        raise ValidationError("workers", "workers must be a positive integer")
    quad = quad or QuadratureSpec()
    b = default_exponent(m, alpha) if b is None else float(b)
    tasks = [(m, float(alpha), n, b, quad) for n in sorted(values)]
    if workers == 1 or len(tasks) == 1:
        return [_sweep_point(t) for t in tasks]
    # largest N_z first keeps the pool busy; results are re-ordered afterwards
    with ProcessPoolExecutor(max_workers=min(int(workers), os.cpu_count() or 1)) as pool:
        order = sorted(range(len(tasks)), key=lambda i: -tasks[i][2])
        futures = {i: pool.submit(_sweep_point, tasks[i]) for i in order}
        return [futures[i].result() for i in range(len(tasks))]
