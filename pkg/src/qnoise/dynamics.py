"""Semiclassical equations of motion and analytic variance formulas.

The probe obeys m qdd + 2 m gamma_m qd + m w_m^2 q = F(t) with q(0)=qd(0)=0,
solved by convolution against G(t,s) = e^{-gm (t-s)} sin(W (t-s)) / (m W),
W = sqrt(w_m^2 - gm^2).

Excess variances are double time integrals of the noise covariance against G.
For the exponential-oscillator kernel terms used throughout the library these
integrals close in elementary functions (everything reduces to
E(w,t) = (e^{wt}-1)/w over a handful of complex rates), which is what makes
cavity-scale kernels (omega_c ~ 1e15 rad/s) computable without a grid that
resolves the optical period. A nested-trapezoid route exists alongside for
grid-resolvable kernels and for cross-validation.
"""

from __future__ import annotations

import cmath
import math
from dataclasses import dataclass

import numpy as np

from .errors import (GridTooCoarse, OverdampedUnsupported, RangeError,
                     ResonanceSingularity)
from .kernels import KernelDecomposition, NonStationaryOsc, StationaryOsc
from .params import (DerivedCavityParams, OscillatorParams, QuantumState,
                     SqueezedThermal, nonstationary_enhancement,
                     stationary_enhancement)
from .sampler import SamplePath, TimeGrid

__all__ = [
    "Trajectory",
    "VarianceTrace",
    "integrate_langevin",
    "integrate_semi_implicit",
    "excess_variance_integral",
    "excess_variance_exact",
    "excess_variance_trapezoid",
    "thermal_variance_exact",
    "closed_form_h",
    "closed_form_h_phi",
    "optical_quadrature_variance",
    "steady_state_rms",
]


@dataclass(frozen=True)
class Trajectory:
    """Position/velocity realization of the probe on a grid."""

    grid: TimeGrid
    position: np.ndarray   # m
    velocity: np.ndarray   # m/s

    def __post_init__(self):
        if len(self.position) != self.grid.n_steps or len(self.velocity) != self.grid.n_steps:
            raise RangeError("trajectory length does not match its grid")
        if not (np.all(np.isfinite(self.position)) and np.all(np.isfinite(self.velocity))):
            raise RangeError("trajectory contains non-finite values")


@dataclass(frozen=True)
class VarianceTrace:
    """Variance-vs-time decomposition: sigma^2 = sigma0^2 + st + nst.

    The individual quantum contributions may be negative (squeezing); the
    total radicand must not be.
    """

    grid: TimeGrid
    sigma0_sq: np.ndarray
    delta_sigma_st_sq: np.ndarray
    delta_sigma_nst_sq: np.ndarray

    def __post_init__(self):
        radicand = self.sigma0_sq + self.delta_sigma_st_sq + self.delta_sigma_nst_sq
        if np.any(radicand < -1e-12 * max(float(np.max(np.abs(radicand))), 1e-300)):
            raise RangeError(
                "total variance radicand is negative: unphysical state/config combination")

    @property
    def total_sigma(self) -> np.ndarray:
        radicand = self.sigma0_sq + self.delta_sigma_st_sq + self.delta_sigma_nst_sq
        return np.sqrt(np.maximum(radicand, 0.0))


def _omega_damped(osc: OscillatorParams) -> float:
    if osc.damping_rate >= osc.bare_frequency:
        raise OverdampedUnsupported(
            f"gamma_m = {osc.damping_rate:.3g} >= omega_m = {osc.bare_frequency:.3g}")
    return math.sqrt(osc.bare_frequency ** 2 - osc.damping_rate ** 2)


def green_matrix(osc: OscillatorParams, grid: TimeGrid) -> np.ndarray:
    """Trapezoid-weighted Green's matrix: q = G @ F for forces sampled on the grid."""
    W = _omega_damped(osc)
    t = grid.times() - grid.t_start
    dtau = t[:, None] - t[None, :]
    G = np.where(dtau >= 0.0,
                 np.exp(-osc.damping_rate * np.maximum(dtau, 0.0)) * np.sin(W * np.maximum(dtau, 0.0)),
                 0.0)
    G *= grid.dt / (osc.mass * W)
    G[:, 0] *= 0.5
    G[np.arange(len(t)), np.arange(len(t))] *= 0.5
    return G


def integrate_langevin(osc: OscillatorParams, force_paths, deterministic=None,
                       grid: TimeGrid | None = None) -> list[Trajectory]:
    """Green's-function solution q(t) for each force path, zero initial conditions.

    `deterministic`, if given, is a callable f(t_array) added to every path.
    The grid must resolve the mechanical frequency.
    """
    if grid is None:
        if not force_paths:
            raise RangeError("need at least one force path or an explicit grid")
        grid = force_paths[0].grid
    grid.check_resolves(osc.bare_frequency)
    t = grid.times()
    G = green_matrix(osc, grid)
    extra = deterministic(t) if deterministic is not None else 0.0
    F = np.stack([p.values for p in force_paths], axis=1) if force_paths else \
        np.zeros((grid.n_steps, 0))
    if np.ndim(extra):
        F = F + extra[:, None] if F.size else extra[:, None]
    elif extra:
        F = F + extra
    Q = G @ F
    V = np.gradient(Q, grid.dt, axis=0)
    return [Trajectory(grid=grid, position=np.ascontiguousarray(Q[:, j]),
                       velocity=np.ascontiguousarray(V[:, j]))
            for j in range(Q.shape[1])]


def integrate_semi_implicit(osc: OscillatorParams, force: SamplePath) -> Trajectory:
    """Velocity-Verlet (kick-drift-kick) cross-check integrator.

    Independent of the Green's-function route; used as an oracle, not in the
    production variance path.
    """
    grid = force.grid
    grid.check_resolves(osc.bare_frequency)
    dt = grid.dt
    m, w2 = osc.mass, osc.bare_frequency ** 2
    two_gm = 2.0 * osc.damping_rate
    F = force.values
    n = grid.n_steps
    q = np.zeros(n)
    v = np.zeros(n)
    for i in range(n - 1):
        acc = F[i] / m - w2 * q[i] - two_gm * v[i]
        v_half = v[i] + 0.5 * dt * acc
        q[i + 1] = q[i] + dt * v_half
        acc_new = F[i + 1] / m - w2 * q[i + 1] - two_gm * v_half
        v[i + 1] = v_half + 0.5 * dt * acc_new
    return Trajectory(grid=grid, position=q, velocity=v)


# --------------------------------------------------------------------------
# Exact variance engine for exponential-oscillator kernels
# --------------------------------------------------------------------------

def _cE(w, t):
    """E(w, t) = (e^{w t} - 1)/w, elementwise for complex w and array t."""
    t = np.asarray(t, dtype=float)
    w = complex(w)
    if abs(w) * float(np.max(t, initial=0.0)) < 1e-8:
        wt = w * t
        return t * (1.0 + wt / 2.0 + wt * wt / 6.0)
    return (np.exp(w * t) - 1.0) / w


def _green_exponentials(osc: OscillatorParams, t):
    """f(s) = e^{gm s} sin(W(s-t)) as sum_k alpha_k e^{beta_k s} (alpha depends on t)."""
    W = _omega_damped(osc)
    t = np.asarray(t, dtype=float)
    alphas = [np.exp(-1j * W * t) / 2j, -np.exp(1j * W * t) / 2j]
    betas = [osc.damping_rate + 1j * W, osc.damping_rate - 1j * W]
    return alphas, betas, W


def _stationary_double_integral(term: StationaryOsc, osc: OscillatorParams, t):
    """II f(s) f(s') K(s-s') ds ds' for K = A e^{-decay|tau|}(c cos + s sin)."""
    alphas, betas, W = _green_exponentials(osc, t)
    z = complex(term.decay, -term.freq)
    ctilde = complex(term.cos_coeff, -term.sin_coeff)
    acc = 0.0 + 0.0j
    for ak, bk in zip(alphas, betas):
        for aj, bj in zip(alphas, betas):
            denom = z + bj
            if abs(denom) < 1e-12 * max(abs(z), abs(bj), 1e-300):
                raise ResonanceSingularity(
                    "kernel pole degenerate with the probe response; "
                    "the exponential closed form is singular here")
            acc = acc + ak * aj / denom * (_cE(bk + bj, t) - _cE(bk - z, t))
    return term.amplitude * np.real(ctilde * 2.0 * acc)


def _nonstationary_double_integral(term: NonStationaryOsc, osc: OscillatorParams, t):
    """II f(s) f(s') K(s,s') for K = A e^{-decay(s+s')}(c cos(arg) + s sin(arg))."""
    alphas, betas, W = _green_exponentials(osc, t)
    w = complex(-term.decay, term.freq)   # e^{(i freq - decay) s}
    ctilde = complex(term.cos_coeff, -term.sin_coeff) * cmath.exp(-2j * term.phi)
    single = 0.0 + 0.0j
    for ak, bk in zip(alphas, betas):
        single = single + ak * _cE(bk + w, t)
    return term.amplitude * np.real(ctilde * single * single)


def _delta_double_integral(coeff: float, osc: OscillatorParams, t):
    """II f f' delta -> coeff * int_0^t f(s)^2 ds."""
    alphas, betas, _ = _green_exponentials(osc, t)
    acc = 0.0 + 0.0j
    for ak, bk in zip(alphas, betas):
        for aj, bj in zip(alphas, betas):
            acc = acc + ak * aj * _cE(bk + bj, t)
    return coeff * np.real(acc)


def _delta2_double_integral(coeff: float, osc: OscillatorParams, t):
    """delta'' contribution, integrated by parts onto the Green's function.

    II f f' delta'' -> int f f'' = [f f']_0^t - int f'^2; f vanishes at s = t,
    so the result is -f(0) f'(0) - int_0^t f'(s)^2 ds. The UV-divergent
    turn-on edge term is dropped (see ledger).
    """
    alphas, betas, _ = _green_exponentials(osc, t)
    int_fp2 = 0.0 + 0.0j
    for ak, bk in zip(alphas, betas):
        for aj, bj in zip(alphas, betas):
            int_fp2 = int_fp2 + ak * bk * aj * bj * _cE(bk + bj, t)
    f0 = sum(alphas)
    fp0 = sum(a * b for a, b in zip(alphas, betas))
    return coeff * np.real(-f0 * fp0 - int_fp2)


def excess_variance_exact(kernel: KernelDecomposition, osc: OscillatorParams, t):
    """Closed-form Delta sigma_q^2(t), vectorized over t (kernel in N^2)."""
    t = np.asarray(t, dtype=float)
    total = np.zeros(t.shape)
    for term in kernel.terms:
        if isinstance(term, StationaryOsc):
            total = total + _stationary_double_integral(term, osc, t)
        elif isinstance(term, NonStationaryOsc):
            total = total + _nonstationary_double_integral(term, osc, t)
        else:
            raise RangeError(f"unknown kernel term {type(term).__name__}")
    if kernel.delta_coeff:
        total = total + _delta_double_integral(kernel.delta_coeff, osc, t)
    if kernel.delta2_coeff:
        total = total + _delta2_double_integral(kernel.delta2_coeff, osc, t)
    W = _omega_damped(osc)
    pref = np.exp(-2.0 * osc.damping_rate * t) / (osc.mass * W) ** 2
    out = pref * total
    return out if out.shape else float(out)


def excess_variance_trapezoid(kernel: KernelDecomposition, osc: OscillatorParams,
                              t: float, n: int | None = None) -> float:
    """Nested-trapezoid route for grid-resolvable kernels.

    Smooth parts are integrated on an n-point grid that must resolve the
    fastest kernel frequency; distributional parts use their exact reduced
    forms (same reductions as the exact engine).
    """
    wmax = max(kernel.omega_max, osc.bare_frequency)
    if n is None:
        n = max(513, int(20.0 * wmax * t / (2.0 * math.pi)) + 1)
    dt = t / (n - 1)
    if wmax > 0 and dt > 0.05 * 2.0 * math.pi / wmax:
        raise GridTooCoarse(
            f"trapezoid grid dt = {dt:.3g} cannot resolve omega = {wmax:.3g}; "
            "use the exact engine for cavity-scale kernels")
    W = _omega_damped(osc)
    s = np.linspace(0.0, t, n)
    f = np.exp(osc.damping_rate * s) * np.sin(W * (s - t))
    w = np.full(n, dt)
    w[0] *= 0.5
    w[-1] *= 0.5
    total = 0.0
    if kernel.terms:
        K = kernel.smooth(s[:, None], s[None, :])
        g = f * w
        total += float(g @ K @ g)
    if kernel.delta_coeff:
        total += kernel.delta_coeff * float(np.sum(w * f * f))
    if kernel.delta2_coeff:
        total += float(_delta2_double_integral(kernel.delta2_coeff, osc, t))
    return math.exp(-2.0 * osc.damping_rate * t) / (osc.mass * W) ** 2 * total


def excess_variance_integral(kernel: KernelDecomposition, osc: OscillatorParams,
                             t: float) -> float:
    """Excess position variance at time t (m^2); exact engine under the hood."""
    return float(excess_variance_exact(kernel, osc, t))


def thermal_variance_exact(osc: OscillatorParams, kB: float, t):
    """Position variance from the white thermal force 2 Gamma_m kB T delta(tau)."""
    Gamma_m = 2.0 * osc.mass * osc.damping_rate
    coeff = 2.0 * Gamma_m * kB * osc.bath_temperature
    if coeff == 0.0:
        t = np.asarray(t, dtype=float)
        return np.zeros(t.shape) if t.shape else 0.0
    t = np.asarray(t, dtype=float)
    total = _delta_double_integral(coeff, osc, t)
    W = _omega_damped(osc)
    out = np.exp(-2.0 * osc.damping_rate * t) / (osc.mass * W) ** 2 * total
    return out if out.shape else float(out)


# --------------------------------------------------------------------------
# Closed-form oscillation envelopes
# --------------------------------------------------------------------------

def closed_form_h(kappa: float, Omega_a: float, Omega_b: float, t):
    """Oscillation envelope of the excess variance for a stationary driver.

    Convention: Omega_a is the driver (quantum) frequency, Omega_b the probe,
    kappa = Omega_a / Omega_b. h(0) = 0; 0 <= h <= (1 + kappa)^2.
    """
    t = np.asarray(t, dtype=float)
    ca, cb = np.cos(Omega_a * t), np.cos(Omega_b * t)
    sa, sb = np.sin(Omega_a * t), np.sin(Omega_b * t)
    h = 1.0 + cb * cb - 2.0 * ca * cb - 2.0 * kappa * sa * sb + kappa ** 2 * sb * sb
    return h if h.shape else float(h)


def closed_form_h_phi(kappa: float, Omega_a: float, Omega_b: float, phi: float, t):
    """Non-stationary envelope carrying the squeezing phase; h_phi(0) = 0.

    Same driver/probe convention as closed_form_h; pi-periodic in phi.
    """
    t = np.asarray(t, dtype=float)
    cb, sb = np.cos(Omega_b * t), np.sin(Omega_b * t)
    h = (np.cos(2.0 * (phi - Omega_a * t))
         + cb * (math.cos(2.0 * phi) * cb - 2.0 * np.cos(2.0 * phi - Omega_a * t))
         + 2.0 * kappa * sb * (math.sin(2.0 * phi) * cb - np.sin(2.0 * phi - Omega_a * t))
         - kappa ** 2 * math.cos(2.0 * phi) * sb * sb)
    return h if h.shape else float(h)


RESONANCE_GUARD = 1e-12


def optical_quadrature_variance(dp: DerivedCavityParams, t):
    """Excess optical X-quadrature variance from a ground-state mechanical oscillator.

    Delta sigma_X^2(t) = 4 g^2 w^2 / (w^2 - w_m^2)^2 * h(t), probe = cavity
    mode at w = omega_c, driver = mechanics at omega_m, kappa = omega_m/omega.
    """
    w, wm = dp.omega_c, dp.omega_m
    if abs(w - wm) / w < RESONANCE_GUARD:
        raise ResonanceSingularity(
            "optical and mechanical frequencies degenerate; use the two-oscillator "
            "near-resonant treatment instead")
    kappa = wm / w
    h = closed_form_h(kappa, wm, w, t)
    return 4.0 * dp.g_c ** 2 * w ** 2 / (w ** 2 - wm ** 2) ** 2 * h


def steady_state_rms(state: QuantumState, dp: DerivedCavityParams) -> float:
    """Characteristic long-time excess rms f0/(m sqrt(Omega_m^3 omega_c)) with
    state enhancements sqrt(cosh 2r) (squeezed) and sqrt(2 kT / hbar omega_c)
    (squeezed-thermal, high-T)."""
    base = dp.f0 / (dp.mass * math.sqrt(dp.omega_m ** 3 * dp.omega_c))
    r = getattr(state, "r", 0.0)
    enh = math.cosh(2.0 * r)
    if isinstance(state, SqueezedThermal) and not math.isinf(state.beta_hw):
        enh *= 2.0 / state.beta_hw
    return base * math.sqrt(enh)
