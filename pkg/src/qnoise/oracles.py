"""Independent numerical oracles for the analytic kernels.

These deliberately avoid the closed-form route used by `kernels`:
the Lorentzian transforms are integrated by adaptive quadrature, the
omega^3/omega^4 kernels are reached by finite differences of the convergent
transforms (the raw integrands grow as omega^2..omega^4 and only the
differentiated route converges), and variance double integrals are done by
nested quadrature. Used by the test suite and the `selftest` CLI command.
"""

from __future__ import annotations

import math

import mpmath as mp
import numpy as np
from scipy import integrate

__all__ = [
    "lorentzian_J_quadrature",
    "fd_fourth_derivative",
    "fd_third_derivative",
    "fd_second_derivative",
    "smooth_kernel_from_J",
    "double_integral_variance",
    "gaussian_bump",
    "integrate_against_delta_family",
    "integrate_product_numerically",
]

#: half-width of the resonant quadrature window, in linewidths
WINDOW_LINEWIDTHS = 1.0e4


def lorentzian_J_quadrature(tau: float, omega_c: float, gamma: float,
                            span: float = WINDOW_LINEWIDTHS,
                            epsabs_scale: float = 1e-10) -> tuple[float, float]:
    """Numerically integrate the Lorentzian cosine/sine transforms.

    The window is symmetric about the resonance, omega_c +- span*gamma, with
    the residual tails added analytically-by-quadrature using the oscillatory
    (QAWF-style) rule, so the truncation error is controlled rather than
    bounded by the raw 1/span falloff. Returns (J1, J2).
    """
    lo, hi = omega_c - span * gamma, omega_c + span * gamma
    lorentz = lambda w: 1.0 / ((w - omega_c) ** 2 + gamma ** 2)
    scale = math.pi / gamma
    pts = [omega_c - 5 * gamma, omega_c, omega_c + 5 * gamma]
    if abs(tau) < 1e-300:
        core = integrate.quad(lorentz, lo, hi, points=pts, limit=400,
                              epsabs=epsabs_scale * scale, epsrel=1e-12)[0]
        tail = integrate.quad(lambda x: 1.0 / (x * x + gamma * gamma),
                              span * gamma, np.inf)[0]
        return core + 2.0 * tail, 0.0

    j1_core = integrate.quad(lambda w: math.cos(w * tau) * lorentz(w), lo, hi,
                             points=pts, limit=800,
                             epsabs=epsabs_scale * scale, epsrel=1e-13)[0]
    j2_core = integrate.quad(lambda w: math.sin(w * tau) * lorentz(w), lo, hi,
                             points=pts, limit=800,
                             epsabs=epsabs_scale * scale, epsrel=1e-13)[0]
    # Both tails together contribute 2 trig(wc tau) * int_L^inf cos(x tau)/(x^2+g^2) dx
    # (the odd sine pieces cancel between the two sides of the window).
    tail = integrate.quad(lambda x: 1.0 / (x * x + gamma * gamma),
                          span * gamma, np.inf, weight="cos", wvar=tau)[0]
    return (j1_core + 2.0 * math.cos(omega_c * tau) * tail,
            j2_core + 2.0 * math.sin(omega_c * tau) * tail)


# --------------------------------------------------------------------------
# High-precision finite differences of the closed-form transforms
# --------------------------------------------------------------------------

def _mp_J(which: str, omega_c, gamma):
    wc, g = mp.mpf(omega_c), mp.mpf(gamma)
    if which == "J1":
        return lambda tau: (mp.pi / g) * mp.e ** (-g * abs(tau)) * mp.cos(wc * tau)
    if which == "J2":
        return lambda tau: (mp.pi / g) * mp.e ** (-g * abs(tau)) * mp.sin(wc * tau)
    raise ValueError(which)


def _fd_stencil(f, x0, h, weights, dps=50):
    with mp.workdps(dps):
        x0, h = mp.mpf(x0), mp.mpf(h)
        acc = mp.mpf(0)
        half = (len(weights) - 1) // 2
        for k, w in zip(range(-half, half + 1), weights):
            if w:
                acc += w * f(x0 + k * h)
        return acc


def fd_fourth_derivative(which: str, tau: float, omega_c: float, gamma: float,
                         rel_step: float = 1e-4) -> float:
    """Five-point central 4th derivative of the closed-form J1 or J2.

    Evaluated in 50-digit arithmetic so the stencil cancellation costs no
    precision; the step is rel_step cavity radians. Only valid away from
    tau = 0 where the closed forms are smooth.
    """
    f = _mp_J(which, omega_c, gamma)
    h = rel_step / omega_c
    val = _fd_stencil(f, tau, h, [1, -4, 6, -4, 1]) / mp.mpf(h) ** 4
    return float(val)


def fd_third_derivative(which: str, tau: float, omega_c: float, gamma: float,
                        rel_step: float = 1e-4) -> float:
    """Five-point central 3rd derivative of closed-form J1 or J2 (high precision)."""
    f = _mp_J(which, omega_c, gamma)
    h = rel_step / omega_c
    val = _fd_stencil(f, tau, h, [mp.mpf(-1) / 2, 1, 0, -1, mp.mpf(1) / 2]) / mp.mpf(h) ** 3
    return float(val)


def fd_second_derivative(which: str, tau: float, omega_c: float, gamma: float,
                         rel_step: float = 1e-4) -> float:
    """Three-point central 2nd derivative of closed-form J1 or J2 (high precision)."""
    f = _mp_J(which, omega_c, gamma)
    h = rel_step / omega_c
    val = _fd_stencil(f, tau, h, [1, -2, 1]) / mp.mpf(h) ** 2
    return float(val)


def smooth_kernel_from_J(tau: float, omega_c: float, gamma: float,
                         prefactor: float) -> float:
    """Vacuum-kernel smooth part via the differentiated-transform route.

    prefactor carries (hbar a / q0)^2; the kernel is
    prefactor * (gamma/pi) * d^4 J1 / dtau^4 away from tau = 0.
    """
    return prefactor * gamma / math.pi * fd_fourth_derivative("J1", tau, omega_c, gamma)


# --------------------------------------------------------------------------
# Brute-force variance double integrals
# --------------------------------------------------------------------------

def double_integral_variance(kernel_smooth, t: float, mass: float, omega: float,
                             gamma_m: float = 0.0, n: int = 2001) -> float:
    """Nested-trapezoid evaluation of the excess-variance double integral.

    Delta sigma^2(t) = e^{-2 gm t}/(m W)^2 * II e^{gm(s+s')} sin(W(s-t))
    sin(W(s'-t)) K(s,s') ds ds', W = sqrt(omega^2 - gamma_m^2). `kernel_smooth`
    takes vectorized (s, s').
    """
    W = math.sqrt(omega * omega - gamma_m * gamma_m)
    s = np.linspace(0.0, t, n)
    f = np.exp(gamma_m * s) * np.sin(W * (s - t))
    K = kernel_smooth(s[:, None], s[None, :])
    w = np.full(n, t / (n - 1))
    w[0] *= 0.5
    w[-1] *= 0.5
    g = f * w
    val = float(g @ K @ g)
    return math.exp(-2.0 * gamma_m * t) / (mass * W) ** 2 * val


# --------------------------------------------------------------------------
# Test functions for the distribution identities
# --------------------------------------------------------------------------

def gaussian_bump(center: float, width: float):
    """A smooth rapidly decaying test function exp(-(x-c)^2 / (2 w^2))."""
    def phi(x):
        return np.exp(-((x - center) ** 2) / (2.0 * width ** 2))
    return phi


def integrate_against_delta_family(components, phi, dphi, d2phi) -> float:
    """Action of sum_i c_i delta^(order_i) on a test function.

    <delta, phi> = phi(0); <delta', phi> = -phi'(0); <delta'', phi> = phi''(0).
    """
    action = {0: phi, 1: lambda x: -dphi(x), 2: d2phi}
    return sum(c * action[order](0.0) for order, c in components)


def integrate_product_numerically(order: int, trig: str, omega_c: float,
                                  phi_callable, dps: int = 40) -> float:
    """<delta^(order) * trig(wc tau), phi> computed by differentiating trig*phi at 0.

    Uses mpmath numerical differentiation of the product, which never touches
    the symbolic reduction table.
    """
    trig_f = {"cos": mp.cos, "sin": mp.sin}[trig]
    wc = mp.mpf(omega_c)
    product = lambda x: trig_f(wc * x) * phi_callable(x)
    with mp.workdps(dps):
        val = mp.diff(product, mp.mpf(0), order, h=mp.mpf("1e-6") / max(omega_c, 1.0))
    sign = -1.0 if order == 1 else 1.0
    return float(sign * val)
