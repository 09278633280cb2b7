"""Parameter records, derived constants, and their scaling laws."""

import math

import numpy as np
import pytest

from qnoise.errors import ImaginaryFrequency, RangeError
from qnoise.kernels import single_mode_nonstationary, single_mode_stationary
from qnoise.params import (CODATA, CavityParams, CoulombPairParams,
                           GravityPairParams, OscillatorParams,
                           PhysicalConstants, SqueezedCoherent, SqueezedThermal,
                           Vacuum, db_to_r, derive_cavity, derive_coulomb,
                           derive_gravity, nbar_to_beta_hw,
                           nonstationary_enhancement, silica_polarizability,
                           squeezing_db, stationary_enhancement,
                           zero_point_spread)

TABLE1_OSC = OscillatorParams(mass=2.8e-18, bare_frequency=2 * math.pi * 190e3,
                              damping_rate=5e-6, bath_temperature=293.0)
TABLE1_CAV = CavityParams(length=0.03, central_frequency=1.22e15,
                          linewidth=2 * math.pi * 193e3,
                          tweezer_field=1.1245674e7,
                          polarizability=silica_polarizability(CODATA, 1.43675504e-21))

TABLE2_PAIR = CoulombPairParams(
    charge_a=250 * CODATA.e_charge, charge_b=250 * CODATA.e_charge,
    separation=2e-6, mass_a=3.16e-18, mass_b=3.16e-18,
    bare_freq_a=2 * math.pi * 190e3, bare_freq_b=2 * math.pi * 180e3)


def test_constants_positive_and_overridable():
    c = PhysicalConstants()
    assert c.hbar > 0 and c.G > 0
    scaled = c.scaled_hbar(4.0)
    assert scaled.hbar == 4.0 * c.hbar and scaled.kB == c.kB
    with pytest.raises(RangeError):
        PhysicalConstants(hbar=0.0)


def test_zero_point_spread_scaling():
    # q0 halves when the mass quadruples, for any record
    rng = np.random.default_rng(3)
    for _ in range(10):
        m = 10.0 ** rng.uniform(-20, -15)
        w = 10.0 ** rng.uniform(4, 7)
        assert zero_point_spread(CODATA, 4 * m, w) == pytest.approx(
            0.5 * zero_point_spread(CODATA, m, w), rel=1e-14)


def test_table1_derived_values():
    dp = derive_cavity(CODATA, TABLE1_OSC, TABLE1_CAV)
    # independent arithmetic for q0
    q0_expected = math.sqrt(CODATA.hbar / (2 * 2.8e-18 * 2 * math.pi * 190e3))
    assert dp.q0 == pytest.approx(q0_expected, rel=1e-12)
    # table quotes 3.6e-12 (rounded/inconsistent); recomputation within 15%
    assert dp.q0 == pytest.approx(3.6e-12, rel=0.15)
    assert dp.g_c == pytest.approx(2 * math.pi * 18e3, rel=0.10)
    assert dp.epsilon == pytest.approx(0.1, rel=0.10)
    assert dp.nu == pytest.approx(1e-9, rel=0.05)
    assert dp.g_c == pytest.approx(dp.a * dp.omega_c ** 2, rel=1e-14)
    assert dp.f0 == pytest.approx(CODATA.hbar * dp.g_c / dp.q0, rel=1e-14)


def test_hbar_scaling_of_f0():
    # g is hbar-free, q0 ~ sqrt(hbar), so f0 = hbar g / q0 ~ sqrt(hbar)
    dp = derive_cavity(CODATA, TABLE1_OSC, TABLE1_CAV)
    dp4 = derive_cavity(CODATA.scaled_hbar(4.0), TABLE1_OSC, TABLE1_CAV)
    assert dp4.g_c == pytest.approx(dp.g_c, rel=1e-14)
    assert dp4.f0 == pytest.approx(2.0 * dp.f0, rel=1e-14)


def test_cavity_rejects_wide_line():
    bad = CavityParams(length=0.03, central_frequency=1e10, linewidth=2e9,
                       tweezer_field=1e7, polarizability=1e-32)
    with pytest.raises(RangeError, match="nu"):
        derive_cavity(CODATA, TABLE1_OSC, bad)


def test_table2_derived_values():
    dp = derive_coulomb(CODATA, TABLE2_PAIR)
    # frozen from independent arithmetic (shift = Q^2/(4 pi eps0 m d^3), run
    # before the build): Omega_a/2pi = 147.15 kHz, Omega_b/2pi = 133.99 kHz
    shift = (250 * CODATA.e_charge) ** 2 / (4 * math.pi * CODATA.eps0
                                            * 3.16e-18 * (2e-6) ** 3)
    assert dp.Omega_a == pytest.approx(
        math.sqrt((2 * math.pi * 190e3) ** 2 - shift), rel=1e-12)
    assert dp.Omega_a == pytest.approx(2 * math.pi * 147e3, rel=0.05)
    assert dp.Omega_b == pytest.approx(2 * math.pi * 134e3, rel=0.05)
    assert abs(dp.g_e) == pytest.approx(2 * math.pi * 51e3, rel=0.10)
    assert dp.f0 == pytest.approx(7e-18, rel=0.20)
    assert dp.kappa == pytest.approx(dp.Omega_a / dp.Omega_b, rel=1e-14)
    # like charges soften the traps and give a negative coupling
    assert dp.g_e < 0
    # q0's computed at the modified frequencies, not the bare ones
    assert dp.q0a == pytest.approx(
        math.sqrt(CODATA.hbar / (2 * 3.16e-18 * dp.Omega_a)), rel=1e-12)


def test_coulomb_sign_flip_invariance():
    flipped = CoulombPairParams(
        charge_a=-TABLE2_PAIR.charge_a, charge_b=-TABLE2_PAIR.charge_b,
        separation=TABLE2_PAIR.separation, mass_a=TABLE2_PAIR.mass_a,
        mass_b=TABLE2_PAIR.mass_b, bare_freq_a=TABLE2_PAIR.bare_freq_a,
        bare_freq_b=TABLE2_PAIR.bare_freq_b)
    a, b = derive_coulomb(CODATA, TABLE2_PAIR), derive_coulomb(CODATA, flipped)
    assert a == b


def test_coulomb_zero_charge_decouples():
    pair = CoulombPairParams(charge_a=0.0, charge_b=100 * CODATA.e_charge,
                             separation=2e-6, mass_a=3.16e-18, mass_b=3.16e-18,
                             bare_freq_a=2 * math.pi * 190e3,
                             bare_freq_b=2 * math.pi * 180e3)
    dp = derive_coulomb(CODATA, pair)
    assert dp.g_e == 0.0 and dp.f0 == 0.0
    assert dp.Omega_a == pair.bare_freq_a and dp.Omega_b == pair.bare_freq_b


def test_coulomb_trap_instability():
    pair = CoulombPairParams(
        charge_a=5000 * CODATA.e_charge, charge_b=5000 * CODATA.e_charge,
        separation=2e-6, mass_a=3.16e-18, mass_b=3.16e-18,
        bare_freq_a=2 * math.pi * 190e3, bare_freq_b=2 * math.pi * 180e3)
    with pytest.raises(ImaginaryFrequency):
        derive_coulomb(CODATA, pair)


def test_gravity_pair_values():
    pair = GravityPairParams(mass=2.8e-18, separation=2e-6,
                             bare_freq_a=2 * math.pi * 190e3,
                             bare_freq_b=2 * math.pi * 190e3, squeezing_r=0.0)
    dg = derive_gravity(CODATA, pair)
    # independent arithmetic oracle, evaluated stepwise
    stiffening = 2 * CODATA.G * 2.8e-18 / (2e-6) ** 3
    W = math.sqrt((2 * math.pi * 190e3) ** 2 + stiffening)
    q0 = math.sqrt(CODATA.hbar / (2 * 2.8e-18 * W))
    gamma_expected = 2 * (CODATA.G / CODATA.hbar) * (2.8e-18) ** 2 * q0 * q0 / (2e-6) ** 3
    assert dg.Gamma_ent == pytest.approx(gamma_expected, rel=1e-12)
    assert dg.Gamma_ent == pytest.approx(1.9569e-17, rel=1e-3)
    assert dg.Omega_a >= pair.bare_freq_a
    # r = 0: entanglement rate equals |g_N| exactly
    assert dg.Gamma_ent == pytest.approx(abs(dg.g_N), rel=1e-14)


def test_gravity_switchoff_scaling():
    pair = GravityPairParams(mass=2.8e-18, separation=2e-6,
                             bare_freq_a=2 * math.pi * 190e3,
                             bare_freq_b=2 * math.pi * 190e3)
    # G enters g_N and Gamma_ent linearly (q0 shift is negligible here), so
    # scaling G down drives the interaction to zero
    tiny = derive_gravity(PhysicalConstants(G=CODATA.G * 1e-20), pair)
    full = derive_gravity(CODATA, pair)
    assert tiny.g_N == pytest.approx(full.g_N * 1e-20, rel=1e-9)
    assert tiny.Gamma_ent == pytest.approx(full.Gamma_ent * 1e-20, rel=1e-9)


def test_gravity_squeezing_relation():
    pair = GravityPairParams(mass=2.8e-18, separation=2e-6,
                             bare_freq_a=2 * math.pi * 190e3,
                             bare_freq_b=2 * math.pi * 190e3, squeezing_r=2.5)
    dg = derive_gravity(CODATA, pair)
    assert dg.Gamma_ent == pytest.approx(math.exp(2.5) * abs(dg.g_N), rel=1e-13)


def test_vacuum_equivalence_of_state_encodings():
    # the three degenerate encodings agree to 1e-12 at 100 random (t, t')
    states = [Vacuum(), SqueezedCoherent(r=0.0, alpha_mag=0.0),
              SqueezedThermal(r=0.0, beta_hw=math.inf)]
    rng = np.random.default_rng(11)
    g, w = 0.7, 2 * math.pi * 1.3e5
    for _ in range(100):
        t, tp = rng.uniform(0, 1e-4, size=2)
        vals = [single_mode_stationary(s, g, w, t, tp) for s in states]
        ref = vals[0]
        for v in vals[1:]:
            assert v == pytest.approx(ref, rel=1e-12, abs=1e-12 * g * g)
        nst = [single_mode_nonstationary(s, g, w, t, tp) for s in states]
        assert all(abs(v) < 1e-15 for v in nst)


def test_enhancement_factors():
    assert stationary_enhancement(Vacuum()) == 1.0
    assert nonstationary_enhancement(Vacuum()) == 0.0
    st = SqueezedThermal(r=1.2, beta_hw=0.3)
    coth = 1.0 / math.tanh(0.15)
    assert stationary_enhancement(st) == pytest.approx(math.cosh(2.4) * coth, rel=1e-14)
    assert nonstationary_enhancement(st) == pytest.approx(math.sinh(2.4) * coth, rel=1e-14)
    assert stationary_enhancement(st) >= 1.0
    assert nonstationary_enhancement(st) >= 0.0


def test_nbar_beta_roundtrip():
    # coth(beta hw / 2) = 2 nbar + 1 exactly
    for nbar in (0.1, 0.5, 3.0, 100.0):
        beta_hw = nbar_to_beta_hw(nbar)
        assert 1.0 / math.tanh(beta_hw / 2) == pytest.approx(2 * nbar + 1, rel=1e-12)


def test_db_conventions():
    assert squeezing_db(3.0) == pytest.approx(26.0568, rel=1e-4)
    assert db_to_r(squeezing_db(1.7)) == pytest.approx(1.7, rel=1e-14)


def test_rejection_not_clamping():
    with pytest.raises(RangeError):
        OscillatorParams(mass=-1.0, bare_frequency=1.0)
    with pytest.raises(RangeError):
        OscillatorParams(mass=1.0, bare_frequency=1.0, bath_temperature=-0.1)
    with pytest.raises(RangeError):
        CoulombPairParams(charge_a=0, charge_b=0, separation=-1,
                          mass_a=1, mass_b=1, bare_freq_a=1, bare_freq_b=1)
    with pytest.raises(RangeError):
        SqueezedCoherent(r=-0.1)
    with pytest.raises(RangeError):
        SqueezedThermal(beta_hw=0.0)
