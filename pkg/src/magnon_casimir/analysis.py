"""Period, beat, asymptote and sign-change analysis of thickness sweeps."""
from __future__ import annotations

import math
from dataclasses import dataclass, field
from enum import Enum
from typing import List, Optional, Tuple

import numpy as np

from .casimir import CasimirPoint
from .core import (
    MaterialParams,
    Mode,
    classify_regime,
    critical_alpha,
    critical_wavenumber,
    derive_params,
)
from .errors import (
    DegenerateBeat,
    InsufficientSpan,
    NoBeat,
    NoEP,
    NotConverged,
    ValidationError,
)

__all__ = [
    "SweepSeries",
    "PeriodMethod",
    "PeriodEstimate",
    "Asymptote",
    "ModeTraits",
    "predicted_period",
    "predicted_beat_period",
    "beat_period",
    "measure_period",
    "consensus_period",
    "spectral_components",
    "envelope",
    "envelope_period",
    "estimate_asymptote",
    "sign_changes",
    "mode_traits",
]


@dataclass(frozen=True)
class SweepSeries:
    """Casimir points of one ``(material, alpha, b)`` sweep, ascending in ``N_z``."""

    points: Tuple[CasimirPoint, ...]
    material: Optional[MaterialParams] = None
    alpha: Optional[float] = None
    b: Optional[float] = None

    def __post_init__(self):
        pts = tuple(self.points)
        object.__setattr__(self, "points", pts)
        if not pts:
            raise ValidationError("points", "a sweep series needs at least one point")
        n = [p.N_z for p in pts]
        if any(b <= a for a, b in zip(n[:-1], n[1:])):
            raise ValidationError("points", "N_z must be strictly ascending")
        bs = {p.b for p in pts}
        if len(bs) != 1:
            raise ValidationError("b", "all points of a series must share b")
        if self.b is None:
            object.__setattr__(self, "b", pts[0].b)
        elif float(self.b) != pts[0].b:
            raise ValidationError("b", "series b disagrees with its points")

    @classmethod
    def from_arrays(cls, n_z, coeff, b: float, **meta) -> "SweepSeries":
        """Build a series directly from coefficient values (``e_cas`` is derived)."""
        pts = tuple(
            CasimirPoint(int(n), complex(c) / float(n) ** b, complex(c), float(b))
            for n, c in zip(n_z, coeff))
        return cls(pts, b=float(b), **meta)

    def __len__(self):
        return len(self.points)

    @property
    def n_z(self) -> np.ndarray:
        return np.array([p.N_z for p in self.points], dtype=float)

    @property
    def coeff(self) -> np.ndarray:
        return np.array([p.coeff for p in self.points], dtype=complex)

    @property
    def e_cas(self) -> np.ndarray:
        return np.array([p.e_cas for p in self.points], dtype=complex)

    def part(self, which: str = "real") -> np.ndarray:
        if which == "real":
            return self.coeff.real
        if which == "imag":
            return self.coeff.imag
        raise ValidationError("part", f"part must be 'real' or 'imag', got {which!r}")

    def step(self) -> float:
        n = self.n_z
        if len(n) < 2:
            return 1.0
        steps = np.diff(n)
        if not np.all(steps == steps[0]):
            raise ValidationError("points", "period analysis needs uniformly spaced N_z")
        return float(steps[0])

    def predicted_periods(self) -> List[float]:
        """EP periods implied by the series metadata (empty if unknown)."""
        if self.material is None or self.alpha is None:
            return []
        rep = classify_regime(self.material, self.alpha)
        return sorted({lam for lam in (rep.lambda_plus, rep.lambda_minus)
                       if lam is not None and math.isfinite(lam)})


class PeriodMethod(str, Enum):
    PEAK_SPACING = "peak-spacing"
    DOMINANT_FREQUENCY = "dominant-frequency"


@dataclass(frozen=True)
class PeriodEstimate:
    period: float
    method: PeriodMethod
    uncertainty: float

    def __post_init__(self):
        if not self.period > 0:
            raise ValidationError("period", "period must be > 0")
        if not self.uncertainty >= 0:
            raise ValidationError("uncertainty", "uncertainty must be >= 0")

    def agrees_with(self, other: "PeriodEstimate") -> bool:
        return abs(self.period - other.period) <= self.uncertainty + other.uncertainty


# ---------------------------------------------------------------------------
# analytic predictions


def predicted_period(m: MaterialParams, sigma: Mode, alpha: float) -> float:
    """``pi / (a k_cri)`` in unit cells."""
    sigma = Mode(sigma)
    k = critical_wavenumber(m, sigma, alpha)
    if k is None:
        raise NoEP(f"no exceptional point for sigma={sigma.label} at alpha={alpha} "
                   f"(alpha_cri={critical_alpha(m, sigma):.6g})")
    return math.pi / k if k > 0 else math.inf


def predicted_beat_period(m: MaterialParams, alpha: float) -> float:
    lam_p = predicted_period(m, Mode.PLUS, alpha) if alpha > critical_alpha(m, Mode.PLUS) else None
    try:
        lam_m = predicted_period(m, Mode.MINUS, alpha)
    except NoEP:
        lam_m = None
    if lam_p is None or lam_m is None:
        raise NoBeat(f"a beat needs two exceptional points; alpha={alpha} has "
                     f"{(lam_p is not None) + (lam_m is not None)}")
    return beat_period(lam_p, lam_m)


def beat_period(lambda_plus: float, lambda_minus: float) -> float:
    """``1 / |1/Lambda_+ - 1/Lambda_-|``."""
    if not (lambda_plus > 0 and lambda_minus > 0):
        raise ValidationError("period", "periods must be > 0")
    if lambda_plus == lambda_minus:
        raise DegenerateBeat("the two modes share one exceptional point, so no beat exists")
    return 1.0 / abs(1.0 / lambda_plus - 1.0 / lambda_minus)


# ---------------------------------------------------------------------------
# measured periods


def _analysis_window(series: SweepSeries, part: str, skip: Optional[float]):
    n = series.n_z
    y = series.part(part)
    if skip is None:
        periods = series.predicted_periods()
        skip = periods[0] if periods else 0.0
    keep = n >= skip
    return n[keep], y[keep]


def _local_maxima(y: np.ndarray) -> np.ndarray:
    """Interior strict-on-one-side maxima (plateaus count once)."""
    i = np.arange(1, len(y) - 1)
    return i[(y[i] > y[i - 1]) & (y[i] >= y[i + 1])]


def _refine_peak(n, y, i) -> float:
    # vertex of the parabola through three neighbours
    y0, y1, y2 = y[i - 1], y[i], y[i + 1]
    den = y0 - 2.0 * y1 + y2
    shift = 0.5 * (y0 - y2) / den if den != 0 else 0.0
    return float(n[i] + shift * (n[i + 1] - n[i]))


def _spectrum(y: np.ndarray, step: float, pad: int = 16):
    y = y - y.mean()
    size = pad * len(y)
    mag = np.abs(np.fft.rfft(y, size))
    freq = np.fft.rfftfreq(size, d=step)
    return freq, mag


def _spectral_peaks(freq, mag, min_freq):
    idx = np.arange(1, len(mag) - 1)
    idx = idx[(mag[idx] > mag[idx - 1]) & (mag[idx] >= mag[idx + 1]) & (freq[idx] >= min_freq)]
    return idx[np.argsort(-mag[idx], kind="stable")]


def _check_span(n: np.ndarray, period: float, periods_needed: float, what: str):
    span = n[-1] - n[0] if len(n) else 0.0
    if not span >= periods_needed * period:
        raise InsufficientSpan(
            f"{what}: span of {span:g} unit cells covers fewer than "
            f"{periods_needed:g} periods of {period:.4g}")


def measure_period(series: SweepSeries, part: str = "real",
                   method: PeriodMethod | str = PeriodMethod.PEAK_SPACING,
                   skip: Optional[float] = None, min_periods: float = 3.0) -> PeriodEstimate:
    """Period of the oscillation in ``part`` of ``C^[b]``.

    Points with ``N_z`` below ``skip`` are discarded first; by default
    ``skip`` is the shortest EP period predicted from the series metadata,
    which removes the non-universal thin-film transient.

    ``peak-spacing`` averages the spacing of successive local maxima (each
    located by parabolic interpolation); its uncertainty is half the sampling
    step.  ``dominant-frequency`` takes the largest nonzero-frequency peak of
    the zero-padded discrete Fourier transform; its uncertainty is one
    unpadded frequency bin, expressed as a period.
    """
    method = PeriodMethod(method)
    n, y = _analysis_window(series, part, skip)
    if len(n) < 8:
        raise InsufficientSpan("fewer than 8 points after discarding the transient")
    step = series.step()
    if method is PeriodMethod.PEAK_SPACING:
        peaks = _local_maxima(y)
        if len(peaks) < 2:
            raise InsufficientSpan("fewer than two local maxima in the analysis window")
        locs = [_refine_peak(n, y, i) for i in peaks]
        period = (locs[-1] - locs[0]) / (len(locs) - 1)
        _check_span(series.n_z, period, min_periods, "peak-spacing")
        return PeriodEstimate(period, method, 0.5 * step)
    span = n[-1] - n[0] + step
    freq, mag = _spectrum(y, step)
    order = _spectral_peaks(freq, mag, min_freq=0.5 / span)
    if len(order) == 0:
        raise InsufficientSpan("no spectral peak in the analysis window")
    f0 = freq[order[0]]
    period = 1.0 / f0
    _check_span(series.n_z, period, min_periods, "dominant-frequency")
    bin_ = 1.0 / span
    unc = 1.0 / max(f0 - bin_, bin_) - period
    return PeriodEstimate(period, method, unc)


def consensus_period(series: SweepSeries, part: str = "real", **kw) -> PeriodEstimate:
    """Peak-spacing estimate, returned only if the spectral estimate agrees."""
    a = measure_period(series, part, PeriodMethod.PEAK_SPACING, **kw)
    b = measure_period(series, part, PeriodMethod.DOMINANT_FREQUENCY, **kw)
    if not a.agrees_with(b):
        raise NotConverged(
            f"period estimators disagree: {a.period:.4g}±{a.uncertainty:.2g} ({a.method.value}) "
            f"vs {b.period:.4g}±{b.uncertainty:.2g} ({b.method.value})")
    return a


def spectral_components(series: SweepSeries, part: str = "real", count: int = 2,
                        skip: Optional[float] = None,
                        rel_height: float = 0.1) -> List[PeriodEstimate]:
    """The ``count`` strongest spectral peaks, longest period first.

    Peaks weaker than ``rel_height`` times the strongest are ignored, so fewer
    than ``count`` estimates may come back.
    """
    n, y = _analysis_window(series, part, skip)
    if len(n) < 8:
        raise InsufficientSpan("fewer than 8 points after discarding the transient")
    step = series.step()
    span = n[-1] - n[0] + step
    freq, mag = _spectrum(y, step)
    order = _spectral_peaks(freq, mag, min_freq=0.5 / span)
    if len(order) == 0:
        return []
    top = mag[order[0]]
    bin_ = 1.0 / span
    out = []
    for i in order[:count]:
        if mag[i] < rel_height * top:
            break
        f = freq[i]
        out.append(PeriodEstimate(1.0 / f, PeriodMethod.DOMINANT_FREQUENCY,
                                  1.0 / max(f - bin_, bin_) - 1.0 / f))
    return sorted(out, key=lambda e: -e.period)


def envelope(values: np.ndarray, window: int) -> np.ndarray:
    """Rectify and smooth with a centred moving average of ``window`` samples.

    Only fully covered positions are returned, so the result is shorter than
    the input by ``window - 1``.
    """
    window = int(window)
    if window < 1:
        raise ValidationError("window", "window must be >= 1")
    values = np.abs(np.asarray(values, dtype=float))
    if len(values) < window:
        raise InsufficientSpan("series shorter than the smoothing window")
    c = np.concatenate([[0.0], np.cumsum(values)])
    return (c[window:] - c[:-window]) / window


def envelope_period(series: SweepSeries, part: str = "real", window: Optional[int] = None,
                    skip: Optional[float] = None,
                    method: PeriodMethod | str = PeriodMethod.DOMINANT_FREQUENCY,
                    min_periods: float = 2.0) -> PeriodEstimate:
    """Beat period: the period of the rectified, smoothed oscillation.

    The default smoothing window is one short EP period, which averages out
    the carrier while keeping the much slower beat.
    """
    n, y = _analysis_window(series, part, skip)
    step = series.step()
    if window is None:
        periods = series.predicted_periods()
        if not periods:
            raise ValidationError("window", "window is required without material metadata")
        window = max(1, int(round(periods[0] / step)))
    env = envelope(y, window)
    centre = n[(window - 1) // 2: (window - 1) // 2 + len(env)]
    if (window - 1) % 2:
        centre = centre + 0.5 * step
    pts = SweepSeries.from_arrays(centre, env, b=0.0) if np.all(np.diff(centre) > 0) else None
    if pts is None:
        raise InsufficientSpan("not enough points for an envelope")
    return measure_period(pts, "real", method, skip=-math.inf, min_periods=min_periods)


# ---------------------------------------------------------------------------


@dataclass(frozen=True)
class Asymptote:
    """Mean of ``C^[b]`` over the final window and the largest departure from it."""

    value: complex
    deviation: float
    window: Tuple[int, int]

    @property
    def relative_deviation(self) -> float:
        return self.deviation / abs(self.value) if self.value != 0 else math.inf

    def __complex__(self):
        return complex(self.value)


def estimate_asymptote(series: SweepSeries, fraction: float = 0.2, tol: float = 0.05) -> Asymptote:
    """Large-``N_z`` limit of ``C^[b]``.

    Converged means either the final window varies by less than ``tol``
    relative to its mean, or the whole window is below ``tol`` times the
    largest ``|C^[b]|`` of the series (a limit of zero).
    """
    if not 0 < fraction <= 1:
        raise ValidationError("fraction", "fraction must be in (0, 1]")
    c = series.coeff
    k = max(1, int(math.ceil(fraction * len(c))))
    if k < 3:
        raise NotConverged(f"the final window holds {k} point(s); at least 3 are needed")
    tail = c[-k:]
    # offset by the first value so a constant tail averages to itself exactly
    c0 = tail[0]
    d = tail - c0
    mean = complex(c0 + complex(math.fsum(d.real), math.fsum(d.imag)) / len(tail))
    dev = float(np.max(np.abs(tail - mean)))
    n = series.n_z
    result = Asymptote(mean, dev, (int(n[-k]), int(n[-1])))
    if dev <= tol * abs(mean):
        return result
    peak = float(np.max(np.abs(c)))
    if np.max(np.abs(tail)) <= tol * peak:
        return result
    raise NotConverged(
        f"C^[b] over N_z {result.window[0]}..{result.window[1]} varies by "
        f"{result.relative_deviation:.3g} relative to its mean")


def sign_changes(series: SweepSeries) -> List[Tuple[int, int]]:
    """Consecutive ``(N_z, N_z')`` pairs across which ``Re C^[b]`` changes sign."""
    n = [p.N_z for p in series.points]
    y = np.sign(series.coeff.real)
    out = []
    last = None  # index of the last nonzero value
    for i, s in enumerate(y):
        if s == 0:
            continue
        if last is not None and s != y[last]:
            out.append((n[last], n[i]))
        last = i
    return out


# ---------------------------------------------------------------------------


@dataclass(frozen=True)
class ModeTraits:
    """Qualitative Casimir behaviour of a material, one column of the summary
    table for easy-axis antiferromagnets."""

    degenerate_modes: bool
    n_eps: int
    oscillation: bool
    beating: bool
    alpha_probe: float = field(default=0.0)

    def rows(self):
        yes = {True: "Yes", False: "No"}
        return [
            ("The degeneracy of magnons", yes[self.degenerate_modes]),
            ("The number of the magnonic EPs", str(self.n_eps)),
            ("The EP-induced Casimir oscillation", yes[self.oscillation]),
            ("The beating behavior of the oscillation", yes[self.beating]),
        ]


def _same_dispersion(m: MaterialParams, alpha: float) -> bool:
    p = derive_params(m, Mode.PLUS, alpha)
    q = derive_params(m, Mode.MINUS, alpha)
    return (p.A, p.delta, p.D, p.C) == (q.A, q.delta, q.D, q.C)


def mode_traits(m: MaterialParams, alpha: Optional[float] = None) -> ModeTraits:
    """Degeneracy, EP count, oscillation and beat for a material.

    ``alpha`` defaults to 1.25 times the larger critical damping, which is
    past every threshold the material has.
    """
    a_p = critical_alpha(m, Mode.PLUS)
    a_m = critical_alpha(m, Mode.MINUS)
    if alpha is None:
        alpha = 1.25 * max(a_p, a_m)
    rep = classify_regime(m, alpha)
    try:
        predicted_beat_period(m, alpha)
        beating = True
    except NoBeat:
        beating = False
    return ModeTraits(
        degenerate_modes=_same_dispersion(m, alpha),
        n_eps=rep.n_eps,
        oscillation=rep.n_eps > 0,
        beating=beating,
        alpha_probe=alpha,
    )
