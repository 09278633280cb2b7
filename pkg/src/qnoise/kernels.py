"""Noise kernels of a semiclassical probe coupled to a quantum oscillator.

Every covariance produced here is a KernelDecomposition: a smooth two-time
part built from exponentially damped oscillator terms, plus coefficients of
delta(tau) and delta''(tau). The distributional parts are carried symbolically
and only ever discretized by the sampler or reduced analytically by the
dynamics layer.

Smooth stationary terms have the shape

    A e^{-decay |tau|} (c cos(w tau) + s sin(w |tau|)),   tau = t - t'

and non-stationary terms the shape

    A e^{-decay (t+t')} (c cos(arg) + s sin(arg)),  arg = w (t+t') - 2 phi.

Both families close under the operations the library needs (pointwise
evaluation, exact double time integrals against the oscillator Green's
function, spectral densities), which is what makes cavity-scale kernels
tractable without resolving the optical frequency on a grid.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field, replace
from typing import Iterable

import numpy as np

from .errors import GridTooCoarse, NotHighTemperature, RangeError
from .params import (DerivedCavityParams, QuantumState, SqueezedCoherent,
                     SqueezedThermal, Vacuum, nonstationary_enhancement,
                     stationary_enhancement)

__all__ = [
    "StationaryOsc",
    "NonStationaryOsc",
    "KernelDecomposition",
    "ForceScale",
    "force_scale",
    "lorentzian_J",
    "single_mode_stationary",
    "single_mode_nonstationary",
    "single_mode_kernel",
    "single_mode_nonstationary_kernel",
    "cavity_vacuum_kernel",
    "cavity_squeezed_stationary_kernel",
    "cavity_squeezed_nonstationary_kernel",
    "cavity_squeezed_thermal_kernel",
    "deterministic_force_single_mode",
    "deterministic_force_cavity",
    "dissipation_force_single_mode",
    "dissipation_force_cavity",
    "fdt_check",
    "FdtReport",
    "reduce_delta_product",
]


# --------------------------------------------------------------------------
# Smooth kernel terms
# --------------------------------------------------------------------------

@dataclass(frozen=True)
class StationaryOsc:
    """A e^{-decay|tau|} (cos_coeff cos(freq tau) + sin_coeff sin(freq |tau|))."""

    amplitude: float
    decay: float
    freq: float
    cos_coeff: float = 1.0
    sin_coeff: float = 0.0

    def evaluate(self, t, tp):
        tau = np.abs(np.asarray(t) - np.asarray(tp))
        return (self.amplitude * np.exp(-self.decay * tau)
                * (self.cos_coeff * np.cos(self.freq * tau)
                   + self.sin_coeff * np.sin(self.freq * tau)))

    def scaled(self, factor):
        return replace(self, amplitude=self.amplitude * factor)


@dataclass(frozen=True)
class NonStationaryOsc:
    """A e^{-decay(t+t')} (cos_coeff cos(arg) + sin_coeff sin(arg)), arg = freq (t+t') - 2 phi."""

    amplitude: float
    decay: float
    freq: float
    phi: float = 0.0
    cos_coeff: float = 1.0
    sin_coeff: float = 0.0

    def evaluate(self, t, tp):
        s = np.asarray(t) + np.asarray(tp)
        arg = self.freq * s - 2.0 * self.phi
        return (self.amplitude * np.exp(-self.decay * s)
                * (self.cos_coeff * np.cos(arg) + self.sin_coeff * np.sin(arg)))

    def scaled(self, factor):
        return replace(self, amplitude=self.amplitude * factor)


@dataclass(frozen=True)
class KernelDecomposition:
    """Noise covariance: smooth part + delta(tau) and delta''(tau) coefficients.

    Units: smooth and the distributional coefficients share a base unit
    (N^2 for force kernels, 1 for dimensionless xi-level kernels); delta_coeff
    then carries base*s and delta2_coeff base*s^3.
    """

    terms: tuple = ()
    delta_coeff: float = 0.0
    delta2_coeff: float = 0.0
    stationary: bool = True
    units: str = "N^2"

    def smooth(self, t, tp):
        """Evaluate the smooth covariance part at (t, t'); symmetric by construction."""
        total = np.zeros(np.broadcast(np.asarray(t), np.asarray(tp)).shape)
        for term in self.terms:
            total = total + term.evaluate(t, tp)
        return total if total.shape else float(total)

    def __call__(self, t, tp):
        return self.smooth(t, tp)

    def scaled(self, factor: float) -> "KernelDecomposition":
        """Same kernel with every component multiplied by `factor`."""
        return KernelDecomposition(
            terms=tuple(term.scaled(factor) for term in self.terms),
            delta_coeff=self.delta_coeff * factor,
            delta2_coeff=self.delta2_coeff * factor,
            stationary=self.stationary, units=self.units)

    @property
    def omega_max(self) -> float:
        """Fastest oscillation frequency present in the smooth part."""
        return max((term.freq for term in self.terms), default=0.0)


@dataclass(frozen=True)
class ForceScale:
    """Characteristic force and the state enhancement factors that multiply f0^2."""

    f0: float
    enhancement_st: float
    enhancement_nst: float


def force_scale(state: QuantumState, f0: float) -> ForceScale:
    return ForceScale(f0=f0,
                      enhancement_st=stationary_enhancement(state),
                      enhancement_nst=nonstationary_enhancement(state))


# --------------------------------------------------------------------------
# Single-mode kernels (dimensionless-noise level, scaled by g^2)
# --------------------------------------------------------------------------

def single_mode_kernel(state: QuantumState, g: float, omega: float) -> KernelDecomposition:
    """Stationary single-mode covariance: enh_st g^2 cos(omega (t-t'))."""
    if omega <= 0:
        raise RangeError("single-mode omega must be > 0")
    amp = stationary_enhancement(state) * g * g
    return KernelDecomposition(terms=(StationaryOsc(amp, 0.0, omega),),
                               stationary=True, units="1")


def single_mode_nonstationary_kernel(state: QuantumState, g: float,
                                     omega: float) -> KernelDecomposition:
    """Non-stationary single-mode covariance: enh_nst g^2 cos(omega (t+t') - 2 phi)."""
    if omega <= 0:
        raise RangeError("single-mode omega must be > 0")
    amp = nonstationary_enhancement(state) * g * g
    phi = getattr(state, "phi", 0.0)
    return KernelDecomposition(
        terms=(NonStationaryOsc(amp, 0.0, omega, phi),),
        stationary=False, units="1")


def single_mode_stationary(state: QuantumState, g: float, omega: float,
                           t: float, tp: float) -> float:
    """Pointwise value of the stationary single-mode covariance."""
    return float(single_mode_kernel(state, g, omega).smooth(t, tp))


def single_mode_nonstationary(state: QuantumState, g: float, omega: float,
                              t: float, tp: float) -> float:
    """Pointwise value of the non-stationary single-mode covariance."""
    return float(single_mode_nonstationary_kernel(state, g, omega).smooth(t, tp))


# --------------------------------------------------------------------------
# Lorentzian mode-sum building blocks
# --------------------------------------------------------------------------

def lorentzian_J(tau: float, omega_c: float, gamma: float) -> tuple[float, float]:
    """Resonant closed forms of the Lorentzian cosine/sine transforms.

    J1 = int_0^inf cos(w tau) / ((w-wc)^2 + g^2) dw = (pi/g) e^{-g|tau|} cos(wc tau)
    J2 = int_0^inf sin(w tau) / ((w-wc)^2 + g^2) dw = (pi/g) e^{-g|tau|} sin(wc tau)

    valid for gamma << omega_c (relative corrections O(gamma/omega_c) from the
    anti-resonant tail, which the mode-sum treatment drops throughout).
    """
    if gamma <= 0:
        raise RangeError("lorentzian_J needs gamma > 0")
    envelope = math.pi / gamma * math.exp(-gamma * abs(tau))
    return envelope * math.cos(omega_c * tau), envelope * math.sin(omega_c * tau)


def cavity_vacuum_kernel(dp: DerivedCavityParams) -> KernelDecomposition:
    """Vacuum force covariance after the Lorentzian sum over cavity modes.

    smooth(tau) = f0^2 e^{-g|tau|} [(1 - 6v^2 + v^4) cos(wc tau)
                                    - 4 (v - v^3) sin(wc |tau|)]
    delta coefficient 2 f0^2 (3v - v^3)/wc, delta'' coefficient -2 f0^2 v/wc^3,
    v = gamma/omega_c. The total spectral density is
    gamma f0^2 (w/wc)^4 / ((|w|-wc)^2 + gamma^2) >= 0.
    """
    if dp.nu >= 0.1:
        raise RangeError("cavity kernel requires nu < 0.1")
    v = dp.nu
    f0sq = dp.f0 ** 2
    term = StationaryOsc(amplitude=f0sq, decay=dp.gamma, freq=dp.omega_c,
                         cos_coeff=1.0 - 6.0 * v ** 2 + v ** 4,
                         sin_coeff=-4.0 * (v - v ** 3))
    return KernelDecomposition(
        terms=(term,),
        delta_coeff=2.0 * f0sq * (3.0 * v - v ** 3) / dp.omega_c,
        delta2_coeff=-2.0 * f0sq * v / dp.omega_c ** 3,
        stationary=True, units="N^2")


def cavity_squeezed_stationary_kernel(dp: DerivedCavityParams,
                                      state: QuantumState) -> KernelDecomposition:
    """Stationary squeezed(-coherent) cavity kernel: cosh(2r) x vacuum, term by term."""
    if isinstance(state, SqueezedThermal) and not math.isinf(state.beta_hw):
        raise NotHighTemperature(
            "finite-temperature cavity kernels only exist in the high-T closed form; "
            "use cavity_squeezed_thermal_kernel")
    return cavity_vacuum_kernel(dp).scaled(stationary_enhancement(state))


def cavity_squeezed_nonstationary_kernel(dp: DerivedCavityParams,
                                         state: SqueezedCoherent) -> KernelDecomposition:
    """Non-stationary squeezed-coherent cavity kernel.

    smooth(t,t') = sinh(2r) f0^2 e^{-g(t+t')} [(1-6v^2+v^4) cos(arg)
                                               - 4(v-v^3) sin(arg)],
    arg = wc (t+t') - 2 phi. Corner (t=t'=0) distributional terms are dropped:
    they have zero measure against paths.
    """
    if dp.nu >= 0.1:
        raise RangeError("cavity kernel requires nu < 0.1")
    v = dp.nu
    amp = nonstationary_enhancement(state) * dp.f0 ** 2
    term = NonStationaryOsc(amplitude=amp, decay=dp.gamma, freq=dp.omega_c,
                            phi=state.phi,
                            cos_coeff=1.0 - 6.0 * v ** 2 + v ** 4,
                            sin_coeff=-4.0 * (v - v ** 3))
    return KernelDecomposition(terms=(term,), stationary=False, units="N^2")


def cavity_squeezed_thermal_kernel(dp: DerivedCavityParams, state: SqueezedThermal,
                                   branch: str = "stationary") -> KernelDecomposition:
    """High-temperature squeezed-thermal cavity kernel.

    Valid for beta hbar omega_c < 0.1 (coth(x/2) ~ 2/x to 0.1%). All terms
    carry cosh(2r) kT/(hbar wc) [stationary] or sinh(2r) kT/(hbar wc)
    [non-stationary]:

      stationary smooth = 2 pref f0^2 e^{-g|tau|} [(1-3v^2) cos(wc tau)
                                                   - (3v-v^3) sin(wc |tau|)]
      stationary delta  = 8 v pref f0^2 / wc      (no delta'' term)
      non-stationary    = 2 pref f0^2 e^{-g(t+t')} [(1-3v^2) cos(arg)
                                                    - (3v-v^3) sin(arg)]
    """
    if not isinstance(state, SqueezedThermal):
        raise RangeError("cavity_squeezed_thermal_kernel needs a SqueezedThermal state")
    if not state.beta_hw < 0.1:
        raise NotHighTemperature(
            f"beta*hbar*omega_c = {state.beta_hw:.3g} >= 0.1: high-T closed form invalid")
    if branch not in ("stationary", "nonstationary"):
        raise RangeError(f"unknown branch {branch!r}")
    v = dp.nu
    pref = 1.0 / state.beta_hw  # kB T / (hbar omega_c)
    f0sq = dp.f0 ** 2
    cos_c = 1.0 - 3.0 * v ** 2
    sin_c = -(3.0 * v - v ** 3)
    if branch == "stationary":
        amp = 2.0 * math.cosh(2.0 * state.r) * pref * f0sq
        term = StationaryOsc(amp, dp.gamma, dp.omega_c, cos_c, sin_c)
        return KernelDecomposition(
            terms=(term,),
            delta_coeff=8.0 * v * math.cosh(2.0 * state.r) * pref * f0sq / dp.omega_c,
            stationary=True, units="N^2")
    amp = 2.0 * math.sinh(2.0 * state.r) * pref * f0sq
    term = NonStationaryOsc(amp, dp.gamma, dp.omega_c, state.phi, cos_c, sin_c)
    return KernelDecomposition(terms=(term,), stationary=False, units="N^2")


# --------------------------------------------------------------------------
# Deterministic and dissipative forces
# --------------------------------------------------------------------------

def deterministic_force_single_mode(state: QuantumState, hbar_g_over_q0: float,
                                    omega: float, t) -> np.ndarray | float:
    """Coherent-displacement force of a single squeezed-coherent mode.

    f(t) = -2 |alpha| (hbar g / q0) [sin(w t - theta - 2 phi) sinh r
                                     + cos(w t + theta) cosh r]
    Identically zero for vacuum and thermal states (zero mean field).
    """
    if not isinstance(state, SqueezedCoherent) or state.alpha_mag == 0.0:
        return np.zeros_like(np.asarray(t, dtype=float)) + 0.0
    t = np.asarray(t, dtype=float)
    return (-2.0 * state.alpha_mag * hbar_g_over_q0
            * (np.sin(omega * t - state.theta - 2.0 * state.phi) * math.sinh(state.r)
               + np.cos(omega * t + state.theta) * math.cosh(state.r)))


def deterministic_force_cavity(state: QuantumState, dp: DerivedCavityParams,
                               t) -> np.ndarray | float:
    """Mode-summed coherent-displacement force, exact in nu = gamma/omega_c.

    f(t) = -2 |alpha| f0 e^{-g t} { cosh r [(1-v^2) cos(wc t + theta)
                                            - 2v sin(wc t + theta)]
                                  + sinh r [(1-v^2) sin(wc t - theta - 2 phi)
                                            + 2v cos(wc t - theta - 2 phi)] }

    Fast-oscillating at omega_c; time averages to zero over a cavity period.
    """
    if not isinstance(state, SqueezedCoherent) or state.alpha_mag == 0.0:
        return np.zeros_like(np.asarray(t, dtype=float)) + 0.0
    t = np.asarray(t, dtype=float)
    v = dp.nu
    arg_c = dp.omega_c * t + state.theta
    arg_s = dp.omega_c * t - state.theta - 2.0 * state.phi
    envelope = np.exp(-dp.gamma * t)
    return (-2.0 * state.alpha_mag * dp.f0 * envelope
            * (math.cosh(state.r) * ((1.0 - v ** 2) * np.cos(arg_c) - 2.0 * v * np.sin(arg_c))
               + math.sinh(state.r) * ((1.0 - v ** 2) * np.sin(arg_s) + 2.0 * v * np.cos(arg_s))))


def _check_force_grid(times: np.ndarray, omega: float):
    if len(times) > 1:
        dt = times[1] - times[0]
        if dt > 0.05 * (2.0 * math.pi / omega):
            raise GridTooCoarse(
                f"path grid dt = {dt:.3g} s exceeds 0.05 periods of omega = {omega:.3g}")


def dissipation_force_single_mode(hbar_gsq_over_q0sq: float, omega: float,
                                  times: np.ndarray, positions: np.ndarray,
                                  t: float) -> float:
    """Memory force 2 (hbar g^2/q0^2) int_0^t q(t') sin(w (t-t')) dt', trapezoid rule."""
    times = np.asarray(times, dtype=float)
    positions = np.asarray(positions, dtype=float)
    _check_force_grid(times, omega)
    mask = times <= t + 1e-15 * max(abs(t), 1.0)
    ts, qs = times[mask], positions[mask]
    integrand = qs * np.sin(omega * (t - ts))
    return 2.0 * hbar_gsq_over_q0sq * float(np.trapezoid(integrand, ts))


def dissipation_force_cavity(dp: DerivedCavityParams, times: np.ndarray,
                             positions: np.ndarray, t: float) -> float:
    """Mode-summed dissipation: velocity term plus memory spring correction.

    f = f0 [ 12 v (g_c/wc) qdot/wc + eps u(t) ],
    u(t) = 2 w_m int_0^t e^{-g(t-t')} [(1-6v^2+v^4) sin(wc(t-t'))
                                       + 4(v-v^3) cos(wc(t-t'))] q(t') dt'
    with q measured in units of q0 (dimensionless paths, as in the equation of
    motion this force enters).
    """
    times = np.asarray(times, dtype=float)
    positions = np.asarray(positions, dtype=float)
    _check_force_grid(times, dp.omega_c)
    mask = times <= t + 1e-15 * max(abs(t), 1.0)
    ts = times[mask]
    qs = positions[mask] / dp.q0
    v = dp.nu
    tau = t - ts
    memory = (np.exp(-dp.gamma * tau)
              * ((1.0 - 6.0 * v ** 2 + v ** 4) * np.sin(dp.omega_c * tau)
                 + 4.0 * (v - v ** 3) * np.cos(dp.omega_c * tau)))
    u = 2.0 * dp.omega_m * float(np.trapezoid(memory * qs, ts))
    qdot = float(np.gradient(qs, ts)[-1]) if len(ts) > 1 else 0.0
    return dp.f0 * (12.0 * v * (dp.g_c / dp.omega_c) * qdot / dp.omega_c
                    + dp.epsilon * u)


# --------------------------------------------------------------------------
# Fluctuation-dissipation consistency
# --------------------------------------------------------------------------

@dataclass(frozen=True)
class FdtReport:
    """Pointwise comparison of the high-T noise kernel against beta^-1 T(t,t')."""

    taus: np.ndarray
    fluctuation: np.ndarray
    dissipation_over_beta: np.ndarray
    max_rel_deviation: float


def fdt_check(dp: DerivedCavityParams, beta: float, taus=None) -> FdtReport:
    """Check <f f>(tau) = beta^-1 T(tau) in the unsqueezed high-T regime.

    The fluctuation side is the high-T stationary kernel; the dissipation side
    is the memory kernel T(t,t') evaluated through its own closed form
    (independent third-derivative route of the sine transform, exercised
    against finite differences in the test suite).
    """
    beta_hw = beta * dp.hbar * dp.omega_c
    state = SqueezedThermal(r=0.0, phi=0.0, beta_hw=beta_hw)
    kernel = cavity_squeezed_thermal_kernel(dp, state, "stationary")
    if taus is None:
        taus = np.linspace(0.0, 5.0 / dp.gamma, 401)
    taus = np.asarray(taus, dtype=float)
    fluct = kernel.smooth(taus, 0.0)

    # T(t,t') = (2/pi) (gamma / hbar wc^4) f0^2 * int_0^inf w^3 cos(w tau) L(w) dw;
    # the frequency integral's smooth part is (pi/g) wc^3 e^{-g|tau|}
    # [(1-3v^2) cos(wc tau) - (3v-v^3) sin(wc |tau|)].
    v = dp.nu
    w3_smooth = (math.pi / dp.gamma * dp.omega_c ** 3
                 * np.exp(-dp.gamma * np.abs(taus))
                 * ((1.0 - 3.0 * v ** 2) * np.cos(dp.omega_c * taus)
                    - (3.0 * v - v ** 3) * np.sin(dp.omega_c * np.abs(taus))))
    T_smooth = (2.0 / math.pi) * (dp.gamma / (dp.hbar * dp.omega_c ** 4)) * dp.f0 ** 2 * w3_smooth
    diss = T_smooth / beta

    scale = float(np.max(np.abs(fluct)))
    max_rel = float(np.max(np.abs(fluct - diss)) / scale)
    return FdtReport(taus=taus, fluctuation=fluct, dissipation_over_beta=diss,
                     max_rel_deviation=max_rel)


# --------------------------------------------------------------------------
# Distribution identity table (products of delta family with cavity trig)
# --------------------------------------------------------------------------

def reduce_delta_product(order: int, trig: str, omega_c: float) -> list[tuple[int, float]]:
    """Reduce delta^(order)(tau) * trig(omega_c tau) to the delta family.

    Returns [(order, coefficient), ...] meaning sum_i coeff_i delta^(order_i).
    General rule for smooth f: f delta = f(0) delta; f delta' = f(0) delta' - f'(0) delta;
    f delta'' = f(0) delta'' - 2 f'(0) delta' + f''(0) delta. Specialized:
        delta   * cos ->  delta
        delta   * sin ->  0
        delta'  * sin -> -wc delta
        delta'  * cos ->  delta'
        delta'' * sin -> -2 wc delta'
        delta'' * cos ->  delta'' - wc^2 delta
    """
    if trig not in ("cos", "sin"):
        raise RangeError("trig must be 'cos' or 'sin'")
    table = {
        (0, "cos"): [(0, 1.0)],
        (0, "sin"): [],
        (1, "sin"): [(0, -omega_c)],
        (1, "cos"): [(1, 1.0)],
        (2, "sin"): [(1, -2.0 * omega_c)],
        (2, "cos"): [(2, 1.0), (0, -omega_c ** 2)],
    }
    try:
        return table[(order, trig)]
    except KeyError:
        raise RangeError(f"no reduction for delta^({order}) * {trig}") from None
