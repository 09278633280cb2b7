"""Physical parameter records and derivation of secondary constants.

Everything here is an immutable dataclass validated on construction; invalid
configurations are rejected, never clamped. Derived records carry every
constant the kernel and dynamics layers need (zero-point spreads, coupling
rates, characteristic forces, frequency ratios) in SI units.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, replace

from .errors import DimensionError, ImaginaryFrequency, RangeError

__all__ = [
    "PhysicalConstants",
    "CODATA",
    "OscillatorParams",
    "CavityParams",
    "CoulombPairParams",
    "GravityPairParams",
    "Vacuum",
    "SqueezedCoherent",
    "SqueezedThermal",
    "QuantumState",
    "DerivedCavityParams",
    "DerivedCoulombParams",
    "DerivedGravityParams",
    "zero_point_spread",
    "silica_polarizability",
    "stationary_enhancement",
    "nonstationary_enhancement",
    "nbar_to_beta_hw",
    "squeezing_db",
    "db_to_r",
    "derive_cavity",
    "derive_coulomb",
    "derive_gravity",
]


@dataclass(frozen=True)
class PhysicalConstants:
    """CODATA SI constants. Override only as a whole record (hbar-scaling tests)."""

    hbar: float = 1.054571817e-34   # J s
    kB: float = 1.380649e-23        # J/K
    c: float = 2.99792458e8         # m/s
    eps0: float = 8.8541878128e-12  # F/m
    G: float = 6.67430e-11          # m^3 kg^-1 s^-2
    e_charge: float = 1.602176634e-19  # C

    def __post_init__(self):
        for name in ("hbar", "kB", "c", "eps0", "G", "e_charge"):
            if not (getattr(self, name) > 0):
                raise RangeError(f"PhysicalConstants.{name} must be strictly positive")

    def scaled_hbar(self, factor: float) -> "PhysicalConstants":
        """A copy with hbar multiplied by `factor`; used by scaling tests."""
        return replace(self, hbar=self.hbar * factor)


CODATA = PhysicalConstants()


def zero_point_spread(constants: PhysicalConstants, mass: float, omega: float) -> float:
    """Ground-state position spread sqrt(hbar / (2 m omega)) in meters."""
    if mass <= 0 or omega <= 0:
        raise RangeError("zero_point_spread needs mass > 0 and omega > 0")
    return math.sqrt(constants.hbar / (2.0 * mass * omega))


@dataclass(frozen=True)
class OscillatorParams:
    """A trapped mechanical oscillator with phenomenological damping and bath."""

    mass: float              # kg
    bare_frequency: float    # rad/s
    damping_rate: float = 0.0      # gamma_m, 1/s
    bath_temperature: float = 0.0  # K

    def __post_init__(self):
        if self.mass <= 0:
            raise RangeError("oscillator mass must be > 0")
        if self.bare_frequency <= 0:
            raise RangeError("oscillator bare_frequency must be > 0")
        if self.damping_rate < 0:
            raise RangeError("oscillator damping_rate must be >= 0")
        if self.bath_temperature < 0:
            raise RangeError("oscillator bath_temperature must be >= 0")


@dataclass(frozen=True)
class CavityParams:
    """Optical cavity driven through coherent scattering off a trapped particle."""

    length: float             # m
    central_frequency: float  # omega_c, rad/s
    linewidth: float          # gamma, rad/s
    tweezer_field: float      # E0, V/m
    polarizability: float     # alpha_pol, C m^2 / V

    def __post_init__(self):
        for name in ("length", "central_frequency", "linewidth", "tweezer_field",
                     "polarizability"):
            if not (getattr(self, name) > 0):
                raise RangeError(f"cavity {name} must be > 0")


def silica_polarizability(constants: PhysicalConstants, volume: float,
                          epsilon_r: float = 2.07) -> float:
    """Clausius-Mossotti polarizability 3 eps0 V (e_r - 1)/(e_r + 2).

    Default epsilon_r is the standard silica value.
    """
    if volume <= 0:
        raise RangeError("particle volume must be > 0")
    if epsilon_r <= 1:
        raise RangeError("relative permittivity must exceed 1")
    return 3.0 * constants.eps0 * volume * (epsilon_r - 1.0) / (epsilon_r + 2.0)


@dataclass(frozen=True)
class CoulombPairParams:
    """Two charged trapped particles coupled through the linearized Coulomb force."""

    charge_a: float       # C, signed
    charge_b: float       # C, signed
    separation: float     # d, m
    mass_a: float         # kg
    mass_b: float         # kg
    bare_freq_a: float    # rad/s
    bare_freq_b: float    # rad/s

    def __post_init__(self):
        if self.separation <= 0:
            raise RangeError("separation must be > 0")
        if self.mass_a <= 0 or self.mass_b <= 0:
            raise RangeError("masses must be > 0")
        if self.bare_freq_a <= 0 or self.bare_freq_b <= 0:
            raise RangeError("bare frequencies must be > 0")


@dataclass(frozen=True)
class GravityPairParams:
    """Two identical masses coupled through the linearized Newtonian force."""

    mass: float          # kg
    separation: float    # m
    bare_freq_a: float   # rad/s
    bare_freq_b: float   # rad/s
    squeezing_r: float = 0.0

    def __post_init__(self):
        if self.mass <= 0 or self.separation <= 0:
            raise RangeError("gravity pair needs mass > 0 and separation > 0")
        if self.bare_freq_a <= 0 or self.bare_freq_b <= 0:
            raise RangeError("bare frequencies must be > 0")
        if self.squeezing_r < 0:
            raise RangeError("squeezing_r must be >= 0")


# --------------------------------------------------------------------------
# Quantum state of the traced-out system
# --------------------------------------------------------------------------

@dataclass(frozen=True)
class Vacuum:
    """Ground state of the quantum mode."""


@dataclass(frozen=True)
class SqueezedCoherent:
    """S(r e^{i phi}) |alpha|, alpha = alpha_mag e^{i theta}."""

    r: float = 0.0
    phi: float = 0.0
    alpha_mag: float = 0.0
    theta: float = 0.0

    def __post_init__(self):
        if self.r < 0:
            raise RangeError("squeezing parameter r must be >= 0")
        if self.alpha_mag < 0:
            raise RangeError("alpha_mag must be >= 0")


@dataclass(frozen=True)
class SqueezedThermal:
    """Squeezed thermal state; beta_hw = beta * hbar * omega of the quantum mode."""

    r: float = 0.0
    phi: float = 0.0
    beta_hw: float = math.inf

    def __post_init__(self):
        if self.r < 0:
            raise RangeError("squeezing parameter r must be >= 0")
        if not self.beta_hw > 0:
            raise RangeError("beta_hw must be > 0")


QuantumState = Vacuum | SqueezedCoherent | SqueezedThermal


def _thermal_factor(state: QuantumState) -> float:
    if isinstance(state, SqueezedThermal):
        if math.isinf(state.beta_hw):
            return 1.0
        return 1.0 / math.tanh(state.beta_hw / 2.0)
    return 1.0


def stationary_enhancement(state: QuantumState) -> float:
    """cosh(2r) times coth(beta hw / 2) for thermal states; 1 for vacuum."""
    r = getattr(state, "r", 0.0)
    return math.cosh(2.0 * r) * _thermal_factor(state)


def nonstationary_enhancement(state: QuantumState) -> float:
    """sinh(2r) times coth(beta hw / 2) for thermal states; 0 for vacuum."""
    r = getattr(state, "r", 0.0)
    return math.sinh(2.0 * r) * _thermal_factor(state)


def nbar_to_beta_hw(nbar: float) -> float:
    """Occupation to beta*hbar*omega: coth(beta hw/2) = 2 nbar + 1 exactly."""
    if nbar < 0:
        raise RangeError("occupation must be >= 0")
    if nbar == 0:
        return math.inf
    return math.log(1.0 + 1.0 / nbar)


def squeezing_db(r: float) -> float:
    """S = 10 log10(e^{2r}), the variance ratio of the anti-squeezed quadrature."""
    return 10.0 * (2.0 * r) / math.log(10.0)


def db_to_r(db: float) -> float:
    """Inverse of squeezing_db."""
    return db * math.log(10.0) / 20.0


# --------------------------------------------------------------------------
# Derived parameter records
# --------------------------------------------------------------------------

@dataclass(frozen=True)
class DerivedCavityParams:
    """Cavity-particle coherent-scattering constants.

    g(omega) = a omega^2; g_c = g(omega_c); f0 = hbar g_c / q0.
    """

    q0: float        # m
    a: float         # s (coupling scale)
    g_c: float       # rad/s
    f0: float        # N
    epsilon: float   # g_c / omega_m
    nu: float        # gamma / omega_c
    omega_m: float   # rad/s
    omega_c: float   # rad/s
    gamma: float     # rad/s
    mass: float      # kg
    hbar: float      # J s


@dataclass(frozen=True)
class DerivedCoulombParams:
    """Coulomb-coupled pair constants; q0's at the modified frequencies."""

    Omega_a: float   # rad/s
    Omega_b: float   # rad/s
    q0a: float       # m
    q0b: float       # m
    g_e: float       # rad/s, signed (-sign(Qa Qb))
    f0: float        # N, hbar |g_e| / q0b
    kappa: float     # Omega_a / Omega_b
    mass_a: float
    mass_b: float
    hbar: float


@dataclass(frozen=True)
class DerivedGravityParams:
    """Newtonian analogue of the Coulomb pair plus the entanglement rate."""

    Omega_a: float
    Omega_b: float
    q0a: float
    q0b: float
    g_N: float        # rad/s, signed (negative for the attractive coupling)
    Gamma_ent: float  # 1/s
    mass: float
    hbar: float


def derive_cavity(constants: PhysicalConstants, osc: OscillatorParams,
                  cav: CavityParams) -> DerivedCavityParams:
    """Derive the coherent-scattering constants for the cavity-particle setup.

    Rejects configurations with nu = gamma/omega_c >= 0.1 (the Lorentzian
    mode-sum closed forms assume a narrow line).
    """
    nu = cav.linewidth / cav.central_frequency
    if not math.isfinite(nu):
        raise DimensionError("nu = gamma/omega_c is not finite")
    if nu >= 0.1:
        raise RangeError(f"nu = gamma/omega_c = {nu:.3g} >= 0.1: mode-sum forms invalid")

    q0 = zero_point_spread(constants, osc.mass, osc.bare_frequency)
    a = cav.polarizability * cav.tweezer_field / math.sqrt(
        math.pi * constants.eps0 * constants.c ** 3 * cav.length ** 2
        * osc.mass * osc.bare_frequency)
    g_c = a * cav.central_frequency ** 2
    epsilon = g_c / osc.bare_frequency
    f0 = constants.hbar * g_c / q0
    for name, value in (("g_c", g_c), ("epsilon", epsilon), ("f0", f0)):
        if not math.isfinite(value):
            raise DimensionError(f"derived {name} is not finite")
    return DerivedCavityParams(
        q0=q0, a=a, g_c=g_c, f0=f0, epsilon=epsilon, nu=nu,
        omega_m=osc.bare_frequency, omega_c=cav.central_frequency,
        gamma=cav.linewidth, mass=osc.mass, hbar=constants.hbar)


def derive_coulomb(constants: PhysicalConstants,
                   pair: CoulombPairParams) -> DerivedCoulombParams:
    """Derive modified frequencies and the Coulomb coupling rate.

    The linearized Coulomb interaction softens both traps by
    Qa Qb / (4 pi eps0 m d^3); zero-point spreads are computed at the
    modified frequencies.
    """
    coeff = pair.charge_a * pair.charge_b / (4.0 * math.pi * constants.eps0
                                             * pair.separation ** 3)
    Wa_sq = pair.bare_freq_a ** 2 - coeff / pair.mass_a
    Wb_sq = pair.bare_freq_b ** 2 - coeff / pair.mass_b
    if Wa_sq <= 0 or Wb_sq <= 0:
        raise ImaginaryFrequency(
            "Coulomb softening exceeds the trap stiffness (unstable trap); "
            f"Omega_a^2 = {Wa_sq:.3g}, Omega_b^2 = {Wb_sq:.3g}")
    Omega_a, Omega_b = math.sqrt(Wa_sq), math.sqrt(Wb_sq)
    q0a = zero_point_spread(constants, pair.mass_a, Omega_a)
    q0b = zero_point_spread(constants, pair.mass_b, Omega_b)
    g_e = -coeff / constants.hbar * q0a * q0b
    f0 = constants.hbar * abs(g_e) / q0b
    return DerivedCoulombParams(
        Omega_a=Omega_a, Omega_b=Omega_b, q0a=q0a, q0b=q0b, g_e=g_e, f0=f0,
        kappa=Omega_a / Omega_b, mass_a=pair.mass_a, mass_b=pair.mass_b,
        hbar=constants.hbar)


def derive_gravity(constants: PhysicalConstants,
                   pair: GravityPairParams) -> DerivedGravityParams:
    """Derive the Newtonian coupling and the short-time entanglement rate.

    Gamma_ent = 2 (G/hbar) m^2 Dq_a Dq_b / d^3 with Dq_a = e^r q0a, Dq_b = q0b,
    so Gamma_ent = e^r |g_N| identically.
    """
    stiffening = 2.0 * constants.G * pair.mass / pair.separation ** 3
    Omega_a = math.sqrt(pair.bare_freq_a ** 2 + stiffening)
    Omega_b = math.sqrt(pair.bare_freq_b ** 2 + stiffening)
    q0a = zero_point_spread(constants, pair.mass, Omega_a)
    q0b = zero_point_spread(constants, pair.mass, Omega_b)
    g_N = -2.0 * constants.G * pair.mass ** 2 * q0a * q0b / (
        constants.hbar * pair.separation ** 3)
    Gamma_ent = 2.0 * (constants.G / constants.hbar) * pair.mass ** 2 * (
        math.exp(pair.squeezing_r) * q0a) * q0b / pair.separation ** 3
    assert abs(Gamma_ent - math.exp(pair.squeezing_r) * abs(g_N)) <= 1e-12 * Gamma_ent + 1e-300
    return DerivedGravityParams(
        Omega_a=Omega_a, Omega_b=Omega_b, q0a=q0a, q0b=q0b,
        g_N=g_N, Gamma_ent=Gamma_ent, mass=pair.mass, hbar=constants.hbar)
