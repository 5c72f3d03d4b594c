import math

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from wlcnoise.errors import PoleError, SingularParametrizationError
from wlcnoise.medium import (
    MediumClass,
    MediumParams,
    NoiseModel,
    classify_medium,
    eta_xi_of,
    map_eta_xi,
    noise_coefficients,
    probe_transfer,
    round_trip_phase,
    solve_detuning,
    susceptibility,
    validity_margin,
)
from wlcnoise.numerics import derivative_central

REF = MediumParams(gamma12=1.0, gamma_opt_total=0.1, delta0=2.0)


def rates_strategy():
    return st.tuples(
        st.floats(0.05, 10.0),     # gamma12
        st.floats(0.0, 0.99),      # eta
        st.floats(0.0, 10.0),      # delta0
        st.floats(-30.0, 30.0),    # omega
    )


# ---------------------------------------------------------------------------
# susceptibility and probe transfer
# ---------------------------------------------------------------------------

def test_susceptibility_no_pump():
    p = MediumParams(1.0, 0.0, 2.0)
    for om in (0.0, 1.0, -3.7):
        assert susceptibility(p, om) == 0.0


def test_susceptibility_dc_value():
    # purely imaginary at omega = 0: -4 Gamma g / (g^2 + d0^2) with g = 0.9
    chi = susceptibility(REF, 0.0)
    two_fraction_sum = (2j * 0.1 / (1j * 2.0 - 0.9)
                        + 2j * 0.1 / (-1j * 2.0 - 0.9))
    assert chi == pytest.approx(two_fraction_sum, rel=1e-15)
    assert chi.real == pytest.approx(0.0, abs=1e-16)
    assert chi.imag == pytest.approx(-0.07484407484407484, rel=1e-14)


def test_susceptibility_vanishes_at_infinity():
    assert abs(susceptibility(REF, 1e9)) < 1e-8
    assert abs(susceptibility(REF, -1e9)) < 1e-8


def test_susceptibility_pole():
    p = MediumParams(1.0, 1.0, 2.0)
    with pytest.raises(PoleError):
        susceptibility(p, -2.0)
    with pytest.raises(PoleError):
        susceptibility(p, 2.0)


def test_probe_transfer_identity_medium():
    p = MediumParams(1.0, 0.0, 2.0)
    for om in (0.0, 5.0, -0.3):
        assert probe_transfer(p, om) == 1.0


def test_probe_transfer_dc_gain():
    m0 = probe_transfer(REF, 0.0)
    assert m0.imag == pytest.approx(0.0, abs=1e-16)
    assert m0.real == pytest.approx(1.0 + 2 * 0.1 * 0.9 / (0.81 + 4.0), rel=1e-14)
    assert m0.real > 1.0


def test_probe_transfer_chi_identity():
    omegas = np.linspace(-10.0, 10.0, 1000)
    m = probe_transfer(REF, omegas)
    chi = susceptibility(REF, omegas)
    assert np.abs(m - (1.0 + 0.5j * chi)).max() < 1e-14


@settings(max_examples=100, deadline=None)
@given(rates_strategy())
def test_conjugation_symmetry(draw):
    gamma12, eta, delta0, omega = draw
    p = MediumParams(gamma12, eta * gamma12, delta0)
    m_pos = probe_transfer(p, omega)
    m_neg = probe_transfer(p, -omega)
    assert abs(np.conj(m_neg) - m_pos) <= 1e-13 * max(abs(m_pos), 1.0)
    n_up_pos, n_lo_pos = noise_coefficients(p, omega, NoiseModel.LOCAL)
    n_up_neg, _ = noise_coefficients(p, -omega, NoiseModel.LOCAL)
    assert abs(np.conj(n_up_neg) - n_lo_pos) <= 1e-13 * max(abs(n_lo_pos), 1.0)


# ---------------------------------------------------------------------------
# noise coefficients
# ---------------------------------------------------------------------------

def test_noise_zero_without_decoherence():
    # gamma12 -> 0 limit: no decoherence channel, no added noise
    p = MediumParams(1e-300, 0.0, 1.0)
    n_up, n_lo = noise_coefficients(p, 0.3, NoiseModel.LOCAL)
    assert n_up == 0.0 and n_lo == 0.0


def test_local_collective_noise_power_equal():
    rng = np.random.default_rng(11)
    for _ in range(50):
        gamma12 = rng.uniform(0.1, 5.0)
        p = MediumParams(gamma12, rng.uniform(0.0, 0.9) * gamma12,
                         rng.uniform(0.0, 5.0),
                         atom_count=int(rng.integers(1, 500)))
        om = rng.uniform(-10, 10)
        lu, ll = noise_coefficients(p, om, NoiseModel.LOCAL)
        cu, cl = noise_coefficients(p, om, NoiseModel.COLLECTIVE)
        local_power = p.atom_count * (abs(lu) ** 2 + abs(ll) ** 2)
        collective_power = abs(cu) ** 2 + abs(cl) ** 2
        assert local_power == pytest.approx(collective_power, rel=1e-14)


def test_commutation_sum_rule_single_pump():
    # delta0 = 0: |M|^2 - N sum |N_pm|^2 == 1 exactly
    rng = np.random.default_rng(12)
    for _ in range(200):
        gamma12 = rng.uniform(0.05, 5.0)
        p = MediumParams(gamma12, rng.uniform(0.0, 0.99) * gamma12, 0.0,
                         atom_count=int(rng.integers(1, 100)))
        om = rng.uniform(-20, 20)
        m = probe_transfer(p, om)
        n_up, n_lo = noise_coefficients(p, om, NoiseModel.LOCAL)
        value = abs(m) ** 2 - p.atom_count * (abs(n_up) ** 2 + abs(n_lo) ** 2)
        assert value == pytest.approx(1.0, rel=1e-12)


def test_commutation_defect_closed_form():
    # two-pump defect: |M|^2 - N sum |N_pm|^2 - 1
    #   = -4 Gamma^2 d0^2 / (((om+d0)^2+g^2) ((om-d0)^2+g^2));
    # the weak-coupling envelope 8 Gamma^2 / (d0^2 + g^2) holds inside
    # the anomalous-dispersion band but not at the gain peaks.
    rng = np.random.default_rng(13)
    for _ in range(60):
        gamma12 = rng.uniform(0.1, 5.0)
        gamma_opt = rng.uniform(0.01, 0.99) * gamma12
        delta0 = rng.uniform(0.01, 10.0)
        n_atoms = int(rng.integers(1, 40))
        p = MediumParams(gamma12, gamma_opt, delta0, atom_count=n_atoms)
        g = gamma12 - gamma_opt
        omegas = np.linspace(-3 * delta0, 3 * delta0, 501)
        m = probe_transfer(p, omegas)
        n_up, n_lo = noise_coefficients(p, omegas, NoiseModel.LOCAL)
        power = np.abs(m) ** 2
        defect = power - n_atoms * (np.abs(n_up) ** 2 + np.abs(n_lo) ** 2) - 1.0
        exact = (-4.0 * gamma_opt**2 * delta0**2
                 / (((omegas + delta0) ** 2 + g * g)
                    * ((omegas - delta0) ** 2 + g * g)))
        assert np.abs(defect - exact).max() <= 1e-12 * (power.max() + 1.0)
        band = np.abs(omegas) <= 0.5 * delta0
        envelope = 8.0 * gamma_opt**2 / (delta0**2 + g * g)
        assert np.abs(defect[band]).max() <= envelope


# ---------------------------------------------------------------------------
# classification and validity
# ---------------------------------------------------------------------------

def test_classify_atomic_instability():
    assert classify_medium(MediumParams(1.0, 2.0, 1.0)) is MediumClass.ATOMIC_INSTABILITY


def test_classify_stationary():
    assert classify_medium(REF) is MediumClass.STATIONARY  # 4.81 >= 0.0025


def test_classify_non_stationary():
    p = MediumParams(1.0, 0.999, 0.01)
    assert classify_medium(p) is MediumClass.NON_STATIONARY  # 1.01e-4 < 0.2495


def test_classify_margin_knob():
    # just stationary at margin 1, pushed over by a larger margin
    p = MediumParams(1.0, 0.6, 0.4)  # lhs = 0.32, rhs = 0.09
    assert classify_medium(p) is MediumClass.STATIONARY
    assert classify_medium(p, margin=4.0) is MediumClass.NON_STATIONARY
    with pytest.raises(ValueError):
        classify_medium(p, margin=0.5)


def test_validity_margin_values():
    p = MediumParams(1.0, 0.0, 2.0)
    assert validity_margin(p, 0.0) == 0.0
    assert validity_margin(REF, 0.0) == pytest.approx(0.0025 / 4.81, rel=1e-12)
    # decays with detuning at fixed rates
    wide = MediumParams(1.0, 0.1, 2000.0)
    assert validity_margin(wide, 0.0) < 1e-6


def test_gain_peaks_near_detuning():
    # narrow-line media peak within 5 percent of the pump splitting
    rng = np.random.default_rng(14)
    checked = 0
    while checked < 20:
        gamma12 = rng.uniform(0.1, 5.0)
        ratio = rng.uniform(10.0, 100.0)      # gamma_opt / gap
        gamma_opt = gamma12 * ratio / (1.0 + ratio)
        delta0 = rng.uniform(0.5, 20.0)
        p = MediumParams(gamma12, gamma_opt, delta0)
        if classify_medium(p) is not MediumClass.STATIONARY:
            continue
        checked += 1
        omegas = np.linspace(0.0, 2.0 * delta0, 20001)
        gain = np.abs(probe_transfer(p, omegas))
        peak = omegas[int(np.argmax(gain))]
        assert abs(peak - delta0) <= 0.05 * delta0


# ---------------------------------------------------------------------------
# detuning solver
# ---------------------------------------------------------------------------

def test_detuning_degenerate_single_pump_root():
    # g = 0: the x = 0 root is dropped, leaving sqrt(Gamma / tau)
    roots = solve_detuning(0.1, 0.1, 1.0)
    assert roots == (pytest.approx(math.sqrt(0.1), rel=1e-12),)


def test_detuning_double_root():
    # (gamma12 - Gamma)^2 == Gamma / (8 tau) exactly: single repeated root
    gap = math.sqrt(0.1)
    roots = solve_detuning(0.8 + gap, 0.8, 1.0)
    assert len(roots) == 1
    assert roots[0] == pytest.approx(math.sqrt(0.3), rel=1e-12)


def test_detuning_infeasible():
    assert solve_detuning(2.0, 0.1, 1.0) == ()


def test_detuning_residual_and_order():
    rng = np.random.default_rng(15)
    found = 0
    while found < 100:
        tau = rng.uniform(0.1, 10.0)
        gamma12 = rng.uniform(0.05, 20.0)
        gamma_opt = rng.uniform(0.01, 0.99) * gamma12
        roots = solve_detuning(gamma12, gamma_opt, tau)
        if not roots:
            continue
        found += 1
        assert list(roots) == sorted(roots)
        g2 = (gamma12 - gamma_opt) ** 2
        for d0 in roots:
            x = d0 * d0
            lhs = gamma_opt * (g2 - x) / (g2 + x) ** 2
            assert lhs == pytest.approx(-tau, rel=1e-9)


def test_detuning_feasibility_equivalence():
    # non-empty root set iff xi <= eta (30x30 slice of the full grid)
    tau = 1.0
    grid = np.linspace(0.02, 0.98, 30)
    for eta in grid:
        for xi in grid:
            gamma12, gamma_opt = map_eta_xi(eta, xi, tau)
            feasible = bool(solve_detuning(gamma12, gamma_opt, tau))
            assert feasible == (xi <= eta)


def test_phase_slope_cancels_at_roots():
    rng = np.random.default_rng(16)
    found = 0
    while found < 30:
        tau = rng.uniform(0.1, 10.0)
        gamma12 = rng.uniform(0.05, 20.0)
        gamma_opt = rng.uniform(0.01, 0.99) * gamma12
        roots = solve_detuning(gamma12, gamma_opt, tau)
        if not roots:
            continue
        found += 1
        for d0 in roots:
            p = MediumParams(gamma12, gamma_opt, d0)
            slope = derivative_central(
                lambda om: round_trip_phase(p, om, tau), 0.0, d0 * 1e-5)
            assert abs(slope) < 1e-6 * 2.0 * tau


# ---------------------------------------------------------------------------
# survey coordinates
# ---------------------------------------------------------------------------

def test_map_eta_xi_example():
    gamma12, gamma_opt = map_eta_xi(0.5, 0.32, 1.0)
    assert gamma12 == pytest.approx(0.16, rel=1e-14)
    assert gamma_opt == pytest.approx(0.08, rel=1e-14)


@settings(max_examples=100, deadline=None)
@given(st.floats(0.01, 0.99), st.floats(0.01, 1.0), st.floats(0.01, 100.0))
def test_map_eta_xi_round_trip(eta, xi, tau):
    gamma12, gamma_opt = map_eta_xi(eta, xi, tau)
    eta_back, xi_back = eta_xi_of(gamma12, gamma_opt, tau)
    assert eta_back == pytest.approx(eta, rel=1e-12)
    assert xi_back == pytest.approx(xi, rel=1e-12)


def test_map_eta_xi_singular_line():
    with pytest.raises(SingularParametrizationError):
        map_eta_xi(1.0, 0.5, 1.0)
    with pytest.raises(ValueError):
        map_eta_xi(0.0, 0.5, 1.0)
    with pytest.raises(ValueError):
        map_eta_xi(0.5, 1.5, 1.0)


def test_map_eta_xi_diverges_toward_unity():
    gamma_a, _ = map_eta_xi(0.9, 0.5, 1.0)
    gamma_b, _ = map_eta_xi(0.999, 0.5, 1.0)
    assert gamma_b > 1e3 * gamma_a


# ---------------------------------------------------------------------------
# parameter validation
# ---------------------------------------------------------------------------

@pytest.mark.parametrize("kwargs", [
    dict(gamma12=0.0, gamma_opt_total=0.1, delta0=1.0),
    dict(gamma12=1.0, gamma_opt_total=-0.1, delta0=1.0),
    dict(gamma12=1.0, gamma_opt_total=0.1, delta0=-1.0),
    dict(gamma12=1.0, gamma_opt_total=0.1, delta0=1.0, atom_count=0),
])
def test_params_validation(kwargs):
    with pytest.raises(ValueError):
        MediumParams(**kwargs)


def test_per_atom_rate():
    p = MediumParams(1.0, 0.5, 1.0, atom_count=10)
    assert p.gamma_opt_per_atom == pytest.approx(0.05)
