import math

import numpy as np
import pytest

from magnon_casimir import NIO, MaterialParams, Mode, Regime, ValidationError
from magnon_casimir.core import (
    classify_regime,
    critical_alpha,
    critical_wavenumber,
    derive_params,
    dispersion,
    e_squared,
    energy_gap,
    group_velocity,
)

KH0 = NIO.with_(K_h=0.0)


def test_derived_constants_match_hand_values():
    p = derive_params(NIO, Mode.PLUS, 0.0)
    m = derive_params(NIO, Mode.MINUS, 0.0)
    assert p.A == pytest.approx(math.sqrt(47.1**2 + 0.0395 * 47.1 / 2), rel=1e-15)
    assert m.A == pytest.approx(math.sqrt(47.1**2 - 0.0395 * 47.1 / 2), rel=1e-15)
    assert p.delta == pytest.approx(math.sqrt(0.00172 * (94.2 + 0.00172) + 0.0395 * 0.00172))
    assert p.C == m.C == pytest.approx(47.1 + 0.00172 + 0.0395 / 2)


def test_damping_rescales_exchange_only():
    a0 = derive_params(NIO, Mode.PLUS, 0.0)
    a1 = derive_params(NIO, Mode.PLUS, 0.3)
    assert a1.A == pytest.approx(a0.A * math.sqrt(1.09))
    assert (a1.delta, a1.D, a1.C) == (a0.delta, a0.D, a0.C)


@pytest.mark.parametrize("field,value", [("J", 0.0), ("K_e", -1.0), ("K_h", -0.1),
                                         ("S", 0.0), ("a", float("nan")), ("J", True)])
def test_material_validation_names_field(field, value):
    with pytest.raises(ValidationError) as err:
        NIO.with_(**{field: value})
    assert err.value.field == field


@pytest.mark.parametrize("alpha", [-0.1, float("inf"), "0.1", None])
def test_alpha_validation(alpha):
    with pytest.raises(ValidationError):
        derive_params(NIO, Mode.PLUS, alpha)


def test_lattice_and_continuum_agree_at_small_q():
    dp = derive_params(NIO, Mode.PLUS, 0.02)
    q = np.array([1e-3, -2e-3, 5e-4])
    lat = e_squared(dp, q, lattice=True)
    cont = e_squared(dp, q, lattice=False)
    assert lat == pytest.approx(cont, rel=1e-6)
    # 2(1 - cos q) at q = pi
    assert e_squared(dp, [math.pi, 0, 0]) == pytest.approx(dp.A**2 * 4 + dp.gap_term)


def test_dispersion_shape_and_scalar():
    dp = derive_params(NIO, Mode.MINUS, 0.05)
    grid = np.zeros((4, 5, 3))
    out = dispersion(dp, NIO, grid)
    assert out.shape == (4, 5)
    assert isinstance(dispersion(dp, NIO, [0.1, 0, 0]), complex)


def test_dispersion_inside_ep_disk_is_purely_imaginary():
    dp = derive_params(NIO, Mode.PLUS, 0.04)
    eps = dispersion(dp, NIO, [0.01, 0, 0], lattice=False)
    assert eps.real == 0.0
    assert eps.imag < 0


def test_conjugate_branch_flips_only_inside_disk():
    dp = derive_params(NIO, Mode.PLUS, 0.04)
    inside, outside = [0.01, 0, 0], [0.2, 0, 0]
    assert dispersion(dp, NIO, outside, branch="conjugate") == dispersion(dp, NIO, outside)
    pr = dispersion(dp, NIO, inside)
    cj = dispersion(dp, NIO, inside, branch="conjugate")
    shift = 2 * NIO.S / (1 + 0.04**2) * 0.04 * dp.C
    assert pr.imag + cj.imag == pytest.approx(-2 * shift)
    with pytest.raises(ValidationError):
        dispersion(dp, NIO, inside, branch="other")


def test_wavevector_validation():
    dp = derive_params(NIO, Mode.PLUS, 0.0)
    with pytest.raises(ValidationError):
        e_squared(dp, [0.1, 0.2])
    with pytest.raises(ValidationError):
        e_squared(dp, [0.1, float("nan"), 0])


def test_energy_gap_closes_at_critical_alpha():
    a_c = critical_alpha(NIO, Mode.PLUS)
    assert energy_gap(derive_params(NIO, Mode.PLUS, a_c), NIO) == pytest.approx(0, abs=1e-6)
    assert energy_gap(derive_params(NIO, Mode.PLUS, 2 * a_c), NIO) == 0.0
    assert energy_gap(derive_params(NIO, Mode.PLUS, 0.0), NIO) == pytest.approx(2 * 1.21 * 0.402610, rel=1e-5)


def test_critical_values():
    assert critical_alpha(NIO, Mode.PLUS) == pytest.approx(0.0085444, abs=1e-7)
    assert critical_alpha(NIO, Mode.MINUS) == pytest.approx(0.041855, abs=1e-6)
    assert critical_wavenumber(NIO, Mode.PLUS, 0.005) is None
    assert critical_wavenumber(NIO, Mode.PLUS, 0.04) == pytest.approx(0.039054, abs=1e-6)
    lat = critical_wavenumber(NIO, Mode.PLUS, 0.04, lattice=True)
    assert lat == pytest.approx(2 * math.asin(0.039054 / 2), rel=1e-5)
    # the EP disk outgrows the zone only for K_h > 6 J
    strong = NIO.with_(K_h=7 * NIO.J)
    assert critical_wavenumber(strong, Mode.PLUS, 50.0) > 2
    assert critical_wavenumber(strong, Mode.PLUS, 50.0, lattice=True) == math.pi


def test_critical_wavenumber_lies_on_kink():
    k = critical_wavenumber(NIO, Mode.MINUS, 0.05)
    dp = derive_params(NIO, Mode.MINUS, 0.05)
    assert e_squared(dp, [k, 0, 0], lattice=False) == pytest.approx(0, abs=1e-9)


def test_group_velocity_matches_analytic_slope():
    dp = derive_params(NIO, Mode.PLUS, 0.0)
    q = 0.3
    # Re eps = pref sqrt(A^2 4 sin^2(q/2) + gap); derivative by hand
    e2 = dp.A**2 * 4 * math.sin(q / 2) ** 2 + dp.gap_term
    exact = 2 * NIO.S * dp.A**2 * math.sin(q) / math.sqrt(e2)
    assert group_velocity(dp, NIO, [q, 0, 0]) == pytest.approx(exact, rel=1e-7)
    assert group_velocity(dp, NIO, [0, q, 0], axis="y") == pytest.approx(exact, rel=1e-7)


def test_group_velocity_inside_disk_is_zero_and_one_sided_near_kink():
    dp = derive_params(NIO, Mode.PLUS, 0.04)
    assert group_velocity(dp, NIO, [0.01, 0, 0]) == 0.0
    k = critical_wavenumber(NIO, Mode.PLUS, 0.04, lattice=True)
    near = group_velocity(dp, NIO, [k + 5e-5, 0, 0], step=1e-4)
    assert near > 0 and math.isfinite(near)
    with pytest.raises(ValidationError):
        group_velocity(dp, NIO, [0.1, 0, 0], side="up")
    with pytest.raises(ValidationError):
        group_velocity(dp, NIO, [0.1, 0, 0], step=0)


@pytest.mark.parametrize("alpha,regime", [(0.0, Regime.GAP_MELTING), (0.005, Regime.GAP_MELTING),
                                          (0.04, Regime.OSCILLATING), (0.05, Regime.BEATING)])
def test_regimes(alpha, regime):
    assert classify_regime(NIO, alpha).regime is regime


def test_regime_report_fields_and_summary():
    rep = classify_regime(NIO, 0.04)
    assert rep.summary() == "Oscillating, k_cri_+=0.0391, Lambda_+=80.4"
    assert rep.n_eps == 1 and rep.beat_period is None and not rep.degenerate
    rep = classify_regime(NIO, 0.05)
    assert rep.n_eps == 2
    assert rep.beat_period == pytest.approx(143.45, abs=0.01)
    assert "beat_period=143.4" in rep.summary()
    assert classify_regime(NIO, 0.0).summary() == "GapMelting"


def test_degenerate_material_has_one_ep_and_no_beat():
    rep = classify_regime(KH0, 0.05)
    assert rep.degenerate
    assert rep.regime is Regime.OSCILLATING
    assert rep.n_eps == 1
    assert rep.beat_period is None
    assert rep.lambda_plus == rep.lambda_minus
