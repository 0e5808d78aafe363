"""Casimir energy of magnons in damped antiferromagnetic thin films.

The Gilbert damping makes the magnon energy complex.  Above a critical
damping an exceptional point appears in the spectrum, and the Casimir
energy of a film of ``N_z`` unit cells starts to oscillate with ``N_z``.
"""

__version__ = "0.1.0"

from .core import (  # noqa: E402
    NIO,
    DerivedParams,
    MaterialParams,
    Mode,
    Regime,
    RegimeReport,
    classify_regime,
    critical_alpha,
    critical_wavenumber,
    derive_params,
    dispersion,
    e_squared,
    energy_gap,
    group_velocity,
)
from .casimir import (  # noqa: E402
    CasimirPoint,
    FilmGeometry,
    QuadratureSpec,
    casimir_coefficient,
    casimir_energy,
    thickness_sweep,
    zero_point_integral,
    zero_point_sum,
)
from .analysis import (  # noqa: E402
    PeriodEstimate,
    SweepSeries,
    estimate_asymptote,
    measure_period,
    predicted_beat_period,
    predicted_period,
    sign_changes,
)
from .errors import (  # noqa: E402
    DegenerateBeat,
    InsufficientSpan,
    MagnonCasimirError,
    NoBeat,
    NoEP,
    NotConverged,
    ParseError,
    QuadratureFailure,
    ValidationError,
)

__all__ = [name for name in dir() if not name.startswith("_")]
