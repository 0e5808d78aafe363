"""Dissipative magnon dispersion of a two-sublattice antiferromagnet.

Energies are in meV, the unit-cell length ``a`` in nm, and every wavenumber
is reduced (``q = a k``), so hbar never enters a computation.

The complex dispersion of mode ``sigma`` at Gilbert damping ``alpha`` is::

    eps = 2S / (1 + alpha^2) * (-i alpha C + sqrt(E^2))
    E^2 = A^2 |q|^2 + delta^2 - D^2 alpha^2

where ``sqrt`` is the principal branch, so ``Re(eps) >= 0``.  On the lattice
each ``q_j^2`` is replaced by ``2 (1 - cos q_j)``.

Stability of the Neel phase is assumed for every ``alpha >= 0``; the model
itself does not check it.
"""
from __future__ import annotations

import math
from dataclasses import dataclass
from enum import Enum, IntEnum
from typing import Optional

import numpy as np

from .errors import ValidationError

__all__ = [
    "MaterialParams",
    "Mode",
    "DerivedParams",
    "Regime",
    "RegimeReport",
    "NIO",
    "derive_params",
    "e_squared",
    "dispersion",
    "energy_gap",
    "critical_alpha",
    "critical_wavenumber",
    "group_velocity",
    "classify_regime",
]


@dataclass(frozen=True)
class MaterialParams:
    """Exchange ``J``, easy-axis ``K_e`` and hard-axis ``K_h`` anisotropies
    (meV), spin per magnetic unit cell ``S`` and cell length ``a`` (nm)."""

    J: float
    K_e: float
    K_h: float
    S: float
    a: float

    def __post_init__(self):
        for name in ("J", "K_e", "K_h", "S", "a"):
            value = getattr(self, name)
            if not isinstance(value, (int, float)) or isinstance(value, bool):
                raise ValidationError(name, f"{name} must be a real number, got {value!r}")
            if not math.isfinite(value):
                raise ValidationError(name, f"{name} must be finite")
        for name in ("J", "K_e", "S", "a"):
            if getattr(self, name) <= 0:
                raise ValidationError(name, f"{name} must be > 0")
        if self.K_h < 0:
            raise ValidationError("K_h", "K_h must be >= 0")

    def with_(self, **changes) -> "MaterialParams":
        values = {k: getattr(self, k) for k in ("J", "K_e", "K_h", "S", "a")}
        values.update(changes)
        return MaterialParams(**values)


#: NiO estimate (biaxial, K_h > 0).
NIO = MaterialParams(J=47.1, K_e=0.00172, K_h=0.0395, S=1.21, a=0.417)


class Mode(IntEnum):
    """Magnon branch; the value is the sign multiplying ``K_h``."""

    PLUS = 1  # acoustic
    MINUS = -1  # optical

    @property
    def label(self) -> str:
        return "+" if self is Mode.PLUS else "-"


@dataclass(frozen=True)
class DerivedParams:
    """Per-mode dispersion constants in meV, evaluated at ``alpha``."""

    A: float
    delta: float
    D: float
    C: float
    alpha: float
    sigma: Mode

    @property
    def gap_term(self) -> float:
        """``delta^2 - D^2 alpha^2``; negative once an exceptional point exists."""
        return self.delta**2 - (self.D * self.alpha) ** 2


def _check_alpha(alpha) -> float:
    if isinstance(alpha, bool) or not isinstance(alpha, (int, float, np.floating)):
        raise ValidationError("alpha", f"alpha must be a real number, got {alpha!r}")
    alpha = float(alpha)
    if not math.isfinite(alpha) or alpha < 0:
        raise ValidationError("alpha", "alpha must be finite and >= 0")
    return alpha


def derive_params(m: MaterialParams, sigma: Mode, alpha: float) -> DerivedParams:
    if not isinstance(m, MaterialParams):
        raise ValidationError("material", "expected MaterialParams")
    alpha = _check_alpha(alpha)
    sigma = Mode(sigma)
    s = int(sigma)
    J, Ke, Kh = m.J, m.K_e, m.K_h
    A = math.sqrt((1.0 + alpha**2) * (J * J + s * Kh * J / 2.0))
    delta = math.sqrt(Ke * (2.0 * J + Ke) + Kh * (J - s * J + Ke))
    D = math.sqrt(J * J + s * Kh * J + Kh * Kh / 4.0)
    C = J + Ke + Kh / 2.0
    return DerivedParams(A=A, delta=delta, D=D, C=C, alpha=alpha, sigma=sigma)


def _k2(q, lattice: bool):
    q = np.asarray(q, dtype=float)
    if q.shape[-1] != 3:
        raise ValidationError("q", "wavevector must have 3 components in its last axis")
    if not np.all(np.isfinite(q)):
        raise ValidationError("q", "wavevector components must be finite")
    if lattice:
        # 2 (1 - cos q) written as 4 sin^2(q/2) to keep precision near q = 0
        return np.sum(4.0 * np.sin(q / 2.0) ** 2, axis=-1)
    return np.sum(q * q, axis=-1)


def e_squared(dp: DerivedParams, q, lattice: bool = True):
    """``E^2`` in meV^2 for reduced wavevector(s) ``q`` (last axis of length 3)."""
    out = dp.A**2 * _k2(q, lattice) + dp.gap_term
    return float(out) if np.ndim(out) == 0 else out


def dispersion(dp: DerivedParams, m: MaterialParams, q, lattice: bool = True,
               branch: str = "principal"):
    """Complex magnon energy (meV).

    ``branch="conjugate"`` flips the sign of the imaginary square root inside
    the exceptional-point region; the Casimir engine never uses it.
    """
    e2 = np.asarray(e_squared(dp, q, lattice), dtype=float)
    root = np.sqrt(e2.astype(complex))
    if branch == "conjugate":
        root = np.where(e2 < 0, -root, root)
    elif branch != "principal":
        raise ValidationError("branch", f"unknown branch {branch!r}")
    eps = 2.0 * m.S / (1.0 + dp.alpha**2) * (-1j * dp.alpha * dp.C + root)
    return complex(eps) if eps.ndim == 0 else eps


def energy_gap(dp: DerivedParams, m: MaterialParams) -> float:
    root = np.sqrt(complex(dp.gap_term))
    return 2.0 * m.S / (1.0 + dp.alpha**2) * root.real


def critical_alpha(m: MaterialParams, sigma: Mode) -> float:
    dp = derive_params(m, sigma, 0.0)
    return dp.delta / dp.D


def critical_wavenumber(m: MaterialParams, sigma: Mode, alpha: float,
                        lattice: bool = False) -> Optional[float]:
    """Reduced exceptional-point wavenumber ``a k_cri``; None without an EP.

    The default is the continuum radius.  ``lattice=True`` returns the radius
    along an axis of the lattice dispersion instead, ``2 asin(a k_cri / 2)``.
    """
    dp = derive_params(m, sigma, alpha)
    if alpha <= critical_alpha(m, sigma):
        return None
    x = max(-dp.gap_term, 0.0) / dp.A**2
    if not lattice:
        return math.sqrt(x)
    if x > 4.0:
        return math.pi
    return 2.0 * math.asin(math.sqrt(x) / 2.0)


def group_velocity(dp: DerivedParams, m: MaterialParams, q, axis=0, step: float = 1e-4,
                   side: str = "auto", lattice: bool = True) -> float:
    """``Re d(eps)/d(a k)`` along ``axis`` by finite differences (meV).

    The derivative is discontinuous on the exceptional-point contour.  With
    ``side="auto"`` a central difference is used unless its stencil straddles
    the contour, in which case a one-sided difference is taken on the side the
    point itself lies.  ``side="left"``/``"right"`` force a one-sided stencil.
    """
    if not step > 0:
        raise ValidationError("step", "step must be > 0")
    if isinstance(axis, str):
        axis = "xyz".index(axis)
    q = np.asarray(q, dtype=float)
    e = np.zeros(3)
    e[axis] = step

    def re_eps(p):
        return dispersion(dp, m, p, lattice).real

    def region(p):
        return e_squared(dp, p, lattice) >= 0

    if side == "auto":
        here = region(q)
        fwd_ok = region(q + e) == here
        bwd_ok = region(q - e) == here
        if fwd_ok and bwd_ok:
            return (re_eps(q + e) - re_eps(q - e)) / (2 * step)
        side = "right" if fwd_ok else "left"
    if side == "right":
        return (-3 * re_eps(q) + 4 * re_eps(q + e) - re_eps(q + 2 * e)) / (2 * step)
    if side == "left":
        return (3 * re_eps(q) - 4 * re_eps(q - e) + re_eps(q - 2 * e)) / (2 * step)
    raise ValidationError("side", f"unknown side {side!r}")


def _period(k):
    if k is None:
        return None
    return math.pi / k if k > 0 else math.inf


class Regime(str, Enum):
    GAP_MELTING = "GapMelting"
    OSCILLATING = "Oscillating"
    BEATING = "Beating"


@dataclass(frozen=True)
class RegimeReport:
    regime: Regime
    alpha: float
    alpha_cri_plus: float
    alpha_cri_minus: float
    k_cri_plus: Optional[float] = None
    k_cri_minus: Optional[float] = None
    lambda_plus: Optional[float] = None
    lambda_minus: Optional[float] = None
    beat_period: Optional[float] = None

    @property
    def degenerate(self) -> bool:
        return self.alpha_cri_plus == self.alpha_cri_minus

    @property
    def n_eps(self) -> int:
        """Number of distinct exceptional points."""
        ks = {k for k in (self.k_cri_plus, self.k_cri_minus) if k is not None}
        return len(ks)

    def summary(self) -> str:
        parts = [self.regime.value]
        for label, k, lam in (("+", self.k_cri_plus, self.lambda_plus),
                              ("-", self.k_cri_minus, self.lambda_minus)):
            if k is not None:
                parts.append(f"k_cri_{label}={k:.4f}")
                parts.append(f"Lambda_{label}={lam:.1f}")
        if self.beat_period is not None:
            parts.append(f"beat_period={self.beat_period:.1f}")
        return ", ".join(parts)


def classify_regime(m: MaterialParams, alpha: float) -> RegimeReport:
    """Place ``alpha`` in the gap-melting / oscillating / beating diagram.

    ``alpha_cri_plus <= alpha_cri_minus`` holds for every ``K_h >= 0``.  With
    ``K_h = 0`` the modes are degenerate: above the shared critical damping
    there is a single EP, so the regime is Oscillating and no beat exists.
    """
    alpha = _check_alpha(alpha)
    a_p = critical_alpha(m, Mode.PLUS)
    a_m = critical_alpha(m, Mode.MINUS)
    k_p = critical_wavenumber(m, Mode.PLUS, alpha)
    k_m = critical_wavenumber(m, Mode.MINUS, alpha)
    lam_p = _period(k_p)
    lam_m = _period(k_m)
    if alpha <= a_p:
        regime = Regime.GAP_MELTING
    elif alpha < a_m or a_p == a_m:
        regime = Regime.OSCILLATING
    else:
        regime = Regime.BEATING
    beat = None
    if lam_p is not None and lam_m is not None and lam_p != lam_m and 1.0 / lam_p != 1.0 / lam_m:
        beat = 1.0 / abs(1.0 / lam_p - 1.0 / lam_m)
    return RegimeReport(regime, alpha, a_p, a_m, k_p, k_m, lam_p, lam_m, beat)
