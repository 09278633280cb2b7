"""Analytic kernels against independent oracles: quadrature, high-precision
finite differences, and symbolic-free evaluations of the distribution table."""

import math

import mpmath as mp
import numpy as np
import pytest

from qnoise.errors import GridTooCoarse, NotHighTemperature, RangeError
from qnoise.kernels import (cavity_squeezed_nonstationary_kernel,
                            cavity_squeezed_stationary_kernel,
                            cavity_squeezed_thermal_kernel,
                            cavity_vacuum_kernel, deterministic_force_cavity,
                            deterministic_force_single_mode,
                            dissipation_force_cavity,
                            dissipation_force_single_mode, fdt_check,
                            force_scale, lorentzian_J, reduce_delta_product,
                            single_mode_nonstationary, single_mode_stationary)
from qnoise.oracles import (fd_fourth_derivative, fd_third_derivative,
                            gaussian_bump, integrate_against_delta_family,
                            integrate_product_numerically,
                            lorentzian_J_quadrature)
from qnoise.params import (CODATA, SqueezedCoherent, SqueezedThermal, Vacuum,
                           derive_cavity)

from test_params import TABLE1_CAV, TABLE1_OSC


@pytest.fixture(scope="module")
def dp1():
    return derive_cavity(CODATA, TABLE1_OSC, TABLE1_CAV)


# --------------------------------------------------------------------------
# Single-mode kernels
# --------------------------------------------------------------------------

def test_single_mode_equal_time_values():
    g, w = 0.31, 7.7e5
    assert single_mode_stationary(Vacuum(), g, w, 0.3, 0.3) == pytest.approx(g * g)
    r = 1.4
    assert single_mode_stationary(SqueezedCoherent(r=r), g, w, 0.2, 0.2) \
        == pytest.approx(g * g * math.cosh(2 * r), rel=1e-14)


def test_single_mode_thermal_ratio_oracle():
    # ratio to vacuum = cosh(2r) coth(beta hw / 2): multiply the two
    # closed-form factors independently of the kernel implementation
    rng = np.random.default_rng(5)
    g, w = 0.9, 4.4e5
    r, beta_hw = 0.8, 0.05
    expected_ratio = math.cosh(2 * r) * (1.0 / math.tanh(beta_hw / 2))
    state = SqueezedThermal(r=r, beta_hw=beta_hw)
    for _ in range(5):
        t, tp = rng.uniform(0, 2e-5, size=2)
        vac = single_mode_stationary(Vacuum(), g, w, t, tp)
        th = single_mode_stationary(state, g, w, t, tp)
        assert th == pytest.approx(expected_ratio * vac, rel=1e-12)


def test_single_mode_nonstationary():
    g, w = 0.5, 3.1e5
    assert single_mode_nonstationary(Vacuum(), g, w, 0.11, 0.37) == 0.0
    r, phi = 0.9, 0.73
    state = SqueezedCoherent(r=r, phi=phi)
    t = phi / w
    assert single_mode_nonstationary(state, g, w, t, t) == pytest.approx(
        g * g * math.sinh(2 * r), rel=1e-13)
    # pi-periodicity in phi
    shifted = SqueezedCoherent(r=r, phi=phi + math.pi)
    rng = np.random.default_rng(8)
    for _ in range(10):
        t, tp = rng.uniform(0, 1e-4, size=2)
        assert single_mode_nonstationary(state, g, w, t, tp) == pytest.approx(
            single_mode_nonstationary(shifted, g, w, t, tp), rel=1e-10, abs=1e-12)


# --------------------------------------------------------------------------
# Lorentzian transforms
# --------------------------------------------------------------------------

def test_lorentzian_J_boundary():
    wc, g = 1e6, 1e3
    j1, j2 = lorentzian_J(0.0, wc, g)
    # resonant normalization pi/gamma (the pi/2gamma variant fails the
    # quadrature oracle by a factor 2; see ledger)
    assert j1 == pytest.approx(math.pi / g, rel=1e-12)
    assert j2 == 0.0


def test_lorentzian_J_vs_quadrature_spec_point():
    wc, g = 1e6, 1e3
    tau = 1.0 / wc
    j1, j2 = lorentzian_J(tau, wc, g)
    q1, q2 = lorentzian_J_quadrature(tau, wc, g)
    assert q1 == pytest.approx(j1, rel=1e-6)
    assert q2 == pytest.approx(j2, rel=1e-6)


# --------------------------------------------------------------------------
# Cavity vacuum kernel
# --------------------------------------------------------------------------

def test_vacuum_kernel_at_zero_lag(dp1):
    k = cavity_vacuum_kernel(dp1)
    v = dp1.nu
    assert k.smooth(0.0, 0.0) == pytest.approx(
        dp1.f0 ** 2 * (1 - 6 * v ** 2 + v ** 4), rel=1e-12)
    assert k.stationary and k.units == "N^2"
    assert k.delta_coeff > 0 and k.delta2_coeff < 0


def test_vacuum_kernel_vs_fourth_derivative_oracle(dp1):
    # smooth part = (hbar a / q0)^2 (gamma/pi) d^4 J1/dtau^4 away from tau = 0
    k = cavity_vacuum_kernel(dp1)
    pref = (CODATA.hbar * dp1.a / dp1.q0) ** 2 * dp1.gamma / math.pi
    tau = 3.0 / dp1.gamma
    oracle = pref * fd_fourth_derivative("J1", tau, dp1.omega_c, dp1.gamma)
    assert k.smooth(tau, 0.0) == pytest.approx(oracle, rel=1e-6)


def test_vacuum_kernel_zeroth_order_in_nu(dp1):
    # nu ~ 1e-9 here, so the kernel is its own leading form
    k = cavity_vacuum_kernel(dp1)
    rng = np.random.default_rng(2)
    for _ in range(10):
        tau = rng.uniform(0, 3.0 / dp1.gamma)
        approx = dp1.f0 ** 2 * math.exp(-dp1.gamma * tau) * math.cos(dp1.omega_c * tau)
        assert k.smooth(tau, 0.0) == pytest.approx(approx, rel=1e-6, abs=1e-8 * dp1.f0 ** 2)


def test_fourth_derivative_consistency_J1_J2(dp1):
    # criterion 11 at tau in {1/g, 3/g, 10/g}: FD d^4 of both transforms
    # against the analytic smooth kernel parts, relative 1e-5
    wc, g = dp1.omega_c, dp1.gamma
    v = g / wc
    for mult in (1.0, 3.0, 10.0):
        tau = mult / g
        E = math.exp(-g * tau)
        analytic_cos = (math.pi / g) * wc ** 4 * E * (
            (1 - 6 * v ** 2 + v ** 4) * math.cos(wc * tau)
            - 4 * (v - v ** 3) * math.sin(wc * tau))
        analytic_sin = (math.pi / g) * wc ** 4 * E * (
            (1 - 6 * v ** 2 + v ** 4) * math.sin(wc * tau)
            + 4 * (v - v ** 3) * math.cos(wc * tau))
        scale = (math.pi / g) * wc ** 4 * E
        assert abs(fd_fourth_derivative("J1", tau, wc, g) - analytic_cos) / scale < 1e-5
        assert abs(fd_fourth_derivative("J2", tau, wc, g) - analytic_sin) / scale < 1e-5


def test_squeezing_factorization_exact(dp1):
    # criterion 13: squeezed stationary kernel = cosh(2r) x vacuum, term by
    # term and pointwise to 1e-12, 100 random points
    r = 1.9
    vac = cavity_vacuum_kernel(dp1)
    sq = cavity_squeezed_stationary_kernel(dp1, SqueezedCoherent(r=r))
    factor = math.cosh(2 * r)
    assert sq.delta_coeff == pytest.approx(factor * vac.delta_coeff, rel=1e-12)
    assert sq.delta2_coeff == pytest.approx(factor * vac.delta2_coeff, rel=1e-12)
    rng = np.random.default_rng(17)
    t = rng.uniform(0, 5 / dp1.gamma, size=100)
    tp = rng.uniform(0, 5 / dp1.gamma, size=100)
    np.testing.assert_allclose(sq.smooth(t, tp), factor * vac.smooth(t, tp),
                               rtol=1e-12, atol=1e-300)


def test_nonstationary_kernel_symmetry_and_phase(dp1):
    state = SqueezedCoherent(r=1.1, phi=0.62)
    k = cavity_squeezed_nonstationary_kernel(dp1, state)
    assert not k.stationary
    rng = np.random.default_rng(4)
    t = rng.uniform(0, 2 / dp1.gamma, size=40)
    tp = rng.uniform(0, 2 / dp1.gamma, size=40)
    np.testing.assert_allclose(k.smooth(t, tp), k.smooth(tp, t), rtol=1e-13)
    k2 = cavity_squeezed_nonstationary_kernel(
        dp1, SqueezedCoherent(r=1.1, phi=0.62 + math.pi))
    np.testing.assert_allclose(k.smooth(t, tp), k2.smooth(t, tp), rtol=1e-9)


# --------------------------------------------------------------------------
# Squeezed-thermal cavity kernel (high-T)
# --------------------------------------------------------------------------

def test_thermal_kernel_zero_lag(dp1):
    r, beta_hw = 0.7, 1e-5
    st = cavity_squeezed_thermal_kernel(dp1, SqueezedThermal(r=r, beta_hw=beta_hw))
    # tau = 0, nu -> 0: 2 cosh(2r) (kT/hbar wc) f0^2
    expected = 2 * math.cosh(2 * r) / beta_hw * dp1.f0 ** 2
    assert st.smooth(0.0, 0.0) == pytest.approx(expected, rel=1e-6)
    assert st.delta2_coeff == 0.0


def test_thermal_kernel_ratio_to_vacuum(dp1):
    # r = 0: thermal/vacuum smooth ratio = 2 kT / (hbar wc) at nu -> 0, tau = 0
    beta_hw = 3e-3
    th = cavity_squeezed_thermal_kernel(dp1, SqueezedThermal(r=0.0, beta_hw=beta_hw))
    vac = cavity_vacuum_kernel(dp1)
    ratio = th.smooth(0.0, 0.0) / vac.smooth(0.0, 0.0)
    assert ratio == pytest.approx(2.0 / beta_hw, rel=1e-6)


def test_thermal_kernel_nonstationary_vs_direct_form(dp1):
    # equal-time section against the direct high-T closed form
    r, phi, beta_hw = 1.2, 0.8, 1e-4
    state = SqueezedThermal(r=r, phi=phi, beta_hw=beta_hw)
    nst = cavity_squeezed_thermal_kernel(dp1, state, "nonstationary")
    v = dp1.nu
    for t in (0.1 / dp1.gamma, phi / dp1.omega_c, 0.9 / dp1.gamma):
        s = 2 * t
        arg = dp1.omega_c * s - 2 * phi
        direct = (2 * math.sinh(2 * r) / beta_hw * dp1.f0 ** 2
                  * math.exp(-dp1.gamma * s)
                  * ((1 - 3 * v ** 2) * math.cos(arg)
                     - (3 * v - v ** 3) * math.sin(arg)))
        assert nst.smooth(t, t) == pytest.approx(direct, rel=1e-12)


def test_thermal_kernel_requires_high_T(dp1):
    with pytest.raises(NotHighTemperature):
        cavity_squeezed_thermal_kernel(dp1, SqueezedThermal(r=0.0, beta_hw=0.5))


# --------------------------------------------------------------------------
# Fluctuation-dissipation relation
# --------------------------------------------------------------------------

def test_fdt_table1(dp1):
    beta = 1e-5 / (CODATA.hbar * dp1.omega_c)   # beta hw = 1e-5, deep high-T
    report = fdt_check(dp1, beta)
    assert report.max_rel_deviation < 1e-6


def test_fdt_beta_scaling(dp1):
    beta = 1e-5 / (CODATA.hbar * dp1.omega_c)
    r1 = fdt_check(dp1, beta)
    r2 = fdt_check(dp1, 2 * beta)
    assert r2.max_rel_deviation == pytest.approx(r1.max_rel_deviation, abs=1e-12)


def test_fdt_dissipation_side_vs_fd_oracle(dp1):
    # the dissipation kernel's omega^3 transform equals -(d^3/dtau^3) J2:
    # check the closed form used inside fdt_check against high-precision FD
    wc, g = dp1.omega_c, dp1.gamma
    v = g / wc
    tau = 1.7 / g
    closed = (math.pi / g) * wc ** 3 * math.exp(-g * tau) * (
        (1 - 3 * v ** 2) * math.cos(wc * tau) - (3 * v - v ** 3) * math.sin(wc * tau))
    oracle = -fd_third_derivative("J2", tau, wc, g)
    assert closed == pytest.approx(oracle, rel=1e-6)


# --------------------------------------------------------------------------
# Deterministic force
# --------------------------------------------------------------------------

def test_deterministic_force_zero_displacement(dp1):
    state = SqueezedCoherent(r=1.0, phi=0.3, alpha_mag=0.0)
    t = np.linspace(0, 1e-5, 50)
    assert np.all(deterministic_force_single_mode(state, 1.0, 1e6, t) == 0.0)
    assert np.all(deterministic_force_cavity(state, dp1, t) == 0.0)
    assert np.all(deterministic_force_cavity(Vacuum(), dp1, t) == 0.0)


def test_deterministic_force_single_mode_value():
    state = SqueezedCoherent(r=0.0, phi=0.0, alpha_mag=2.5, theta=0.0)
    hbar_g_over_q0 = 1.7e-20
    val = deterministic_force_single_mode(state, hbar_g_over_q0, 1e6, 0.0)
    assert float(val) == pytest.approx(-2 * 2.5 * hbar_g_over_q0, rel=1e-14)


def test_deterministic_force_cavity_time_average(dp1):
    # averages to zero over one cavity period (gamma t << 1 regime)
    state = SqueezedCoherent(r=0.0, phi=0.0, alpha_mag=1.0, theta=0.0)
    period = 2 * math.pi / dp1.omega_c
    t = np.linspace(0.0, period, 20001)
    f = deterministic_force_cavity(state, dp1, t)
    mean = np.trapezoid(f, t) / period
    assert abs(mean) < 1e-9 * np.max(np.abs(f))


def test_deterministic_force_cavity_reduces_to_single_mode_shape(dp1):
    # at nu -> 0 and short times the cavity form is the single-mode force
    # evaluated at (g_c, omega_c) with an e^{-gamma t} envelope
    state = SqueezedCoherent(r=0.8, phi=0.45, alpha_mag=1.3, theta=0.2)
    t = np.linspace(0, 3 * 2 * math.pi / dp1.omega_c, 7)
    cav = deterministic_force_cavity(state, dp1, t)
    single = deterministic_force_single_mode(state, dp1.f0, dp1.omega_c, t)
    np.testing.assert_allclose(cav, single * np.exp(-dp1.gamma * t), rtol=1e-7)


# --------------------------------------------------------------------------
# Dissipation force
# --------------------------------------------------------------------------

def test_dissipation_zero_path():
    w = 1e6
    t = np.linspace(0, 20 * 2 * math.pi / w, 4001)
    q = np.zeros_like(t)
    assert dissipation_force_single_mode(1.0, w, t, q, t[-1]) == 0.0


def test_dissipation_constant_path_oracle():
    # q = qbar: 2 (hbar g^2/q0^2) qbar (1 - cos w t)/w
    w = 1e6
    coeff = 3.3e-8
    qbar = 2.1e-12
    t_end = 13.7 / w
    t = np.linspace(0, t_end, 60001)
    q = np.full_like(t, qbar)
    val = dissipation_force_single_mode(coeff, w, t, q, t_end)
    expected = 2 * coeff * qbar * (1 - math.cos(w * t_end)) / w
    assert val == pytest.approx(expected, rel=1e-6)


def test_dissipation_grid_too_coarse():
    w = 1e6
    t = np.linspace(0, 100 * 2 * math.pi / w, 50)
    with pytest.raises(GridTooCoarse):
        dissipation_force_single_mode(1.0, w, t, np.zeros_like(t), t[-1])


def test_dissipation_cavity_order_of_magnitude(dp1):
    # |f_diss|/f0 <= max(O(nu^3), O(eps)) for |q| ~ q0 (short window resolving
    # the cavity frequency; the mechanical coordinate is frozen there)
    period = 2 * math.pi / dp1.omega_c
    t = np.linspace(0, 50 * period, 2501)
    q = dp1.q0 * np.cos(dp1.omega_m * t)
    f = dissipation_force_cavity(dp1, t, q, t[-1])
    assert abs(f) / dp1.f0 <= dp1.epsilon


# --------------------------------------------------------------------------
# Distribution identities (criterion 9)
# --------------------------------------------------------------------------

@pytest.mark.parametrize("order,trig", [(0, "cos"), (0, "sin"), (1, "sin"),
                                        (1, "cos"), (2, "sin"), (2, "cos")])
def test_distribution_identities(order, trig):
    wc = 2.9
    comps = reduce_delta_product(order, trig, wc)
    rng = np.random.default_rng(23 + order * 10 + (trig == "sin"))
    for _ in range(20):
        c = rng.uniform(-2.0, 2.0)
        w = rng.uniform(0.4, 2.5)
        phi_np = gaussian_bump(c, w)
        phi_mp = lambda x: mp.e ** (-((x - c) ** 2) / (2 * w ** 2))
        lhs = integrate_product_numerically(order, trig, wc, phi_mp)
        dphi = lambda x: -(x - c) / w ** 2 * phi_np(x)
        d2phi = lambda x: (((x - c) / w ** 2) ** 2 - 1.0 / w ** 2) * phi_np(x)
        rhs = integrate_against_delta_family(comps, phi_np, dphi, d2phi)
        scale = max(abs(lhs), abs(rhs), phi_np(0.0) * wc ** order, 1e-8)
        assert abs(lhs - rhs) / scale < 1e-8


def test_force_scale_record():
    fs = force_scale(SqueezedThermal(r=0.5, beta_hw=0.08), f0=2e-18)
    assert fs.enhancement_st >= 1.0
    assert fs.enhancement_nst >= 0.0
    assert fs.f0 == 2e-18


def test_fdt_rejects_squeezed_states(dp1):
    beta = 1e-5 / (CODATA.hbar * dp1.omega_c)
    with pytest.raises(RangeError):
        fdt_check(dp1, beta, state=SqueezedCoherent(r=0.5))
