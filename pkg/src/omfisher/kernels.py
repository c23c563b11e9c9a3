"""Ohmic bath spectral density and non-Markovian Brownian kernels.

The symmetric kernel D_R and antisymmetric kernel D_I are defined by

    D_R(tau) = int_0^inf dw J(w) cos(w tau) coth(hbar w / (2 kB T)),
    D_I(tau) = int_0^inf dw J(w) sin(w tau),

with the exponential-cutoff ohmic density J(w) = (2 m gamma / pi) w e^(-w/W).
Both admit closed forms; D_R involves the complex trigamma function at
z = (1 - i W tau) kB T / (hbar W).  The closed forms are cross-validated
against adaptive quadrature of the defining integrals.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np
from scipy.integrate import quad

from .constants import HBAR, KB
from .errors import DomainError, QuadratureError

__all__ = [
    "BathSpec",
    "KernelValue",
    "spectral_density",
    "trigamma",
    "kernel_dr",
    "kernel_di",
    "kernel_dr_numeric",
    "kernel_di_numeric",
    "dr_closed_array",
]

# Bernoulli numbers B_2..B_20 for the asymptotic tail of trigamma.
_BERNOULLI = (
    1.0 / 6.0, -1.0 / 30.0, 1.0 / 42.0, -1.0 / 30.0, 5.0 / 66.0,
    -691.0 / 2730.0, 7.0 / 6.0, -3617.0 / 510.0, 43867.0 / 798.0,
    -174611.0 / 330.0,
)


@dataclass(frozen=True)
class BathSpec:
    """Mechanical bath: mass [kg], damping gamma [rad/s], temperature [K],
    cutoff [rad/s]."""

    mass: float
    gamma: float
    temperature: float
    cutoff: float

    def __post_init__(self):
        if self.mass <= 0 or self.gamma <= 0 or self.cutoff <= 0:
            raise DomainError("mass, gamma and cutoff must be positive")
        if self.temperature < 0:
            raise DomainError("temperature must be non-negative")

    @classmethod
    def from_params(cls, params) -> "BathSpec":
        return cls(mass=params.mass, gamma=params.gamma,
                   temperature=params.temperature, cutoff=params.cutoff)


@dataclass(frozen=True)
class KernelValue:
    """Kernel evaluation at lag tau; quadrature paths carry an absolute
    error estimate."""

    tau: float
    d_r: float | None = None
    d_i: float | None = None
    abs_error_estimate: float | None = None


def spectral_density(bath: BathSpec, omega):
    """Ohmic spectral density with exponential cutoff, (2 m gamma/pi) w e^(-w/W)."""
    omega = np.asarray(omega, dtype=float)
    if np.any(omega < 0):
        raise DomainError("spectral density defined for omega >= 0")
    value = (2.0 * bath.mass * bath.gamma / math.pi) * omega * np.exp(-omega / bath.cutoff)
    return float(value) if value.ndim == 0 else value


def trigamma(z):
    """Complex trigamma Psi^(1)(z), vectorized.

    Recurrence Psi1(z) = Psi1(z+1) + 1/z^2 shifts the argument until
    Re(z) >= 10, then a 10-term Bernoulli asymptotic series is applied.
    Conjugate symmetry Psi1(conj(z)) = conj(Psi1(z)) holds to ~1e-13.
    """
    z_arr = np.atleast_1d(np.asarray(z, dtype=complex))
    on_pole = (z_arr.imag == 0) & (z_arr.real <= 0) & (z_arr.real == np.round(z_arr.real))
    if np.any(on_pole):
        raise DomainError("trigamma pole at non-positive integer argument")

    w = z_arr.copy()
    acc = np.zeros_like(w)
    mask = w.real < 10.0
    while np.any(mask):
        acc[mask] += 1.0 / (w[mask] * w[mask])
        w[mask] += 1.0
        mask = w.real < 10.0

    r = 1.0 / w
    r2 = r * r
    tail = np.zeros_like(w)
    for b2k in reversed(_BERNOULLI):
        tail = (tail + b2k) * r2
    out = acc + r + 0.5 * r2 + r * tail
    return complex(out[0]) if np.isscalar(z) or np.asarray(z).ndim == 0 else out


def _closed_pair(bath: BathSpec, tau):
    """Closed-form (D_R, D_I) on an array of lags."""
    tau = np.asarray(tau, dtype=float)
    m, g, T, W = bath.mass, bath.gamma, bath.temperature, bath.cutoff
    pref = 2.0 * m * g / math.pi
    x = W * tau
    den = (x * x + 1.0) ** 2
    d_i = pref * 2.0 * W * W * x / den
    first = pref * W * W * (x * x - 1.0) / den
    if T == 0.0:
        # (kB T)^2 Psi1(z) -> (hbar W)^2 / (1 - i W tau)^2 as T -> 0
        zinv2 = 1.0 / (1.0 - 1j * x) ** 2
        thermal = pref * 2.0 * W * W * zinv2.real
    else:
        kt = KB * T
        zz = (1.0 - 1j * x) * (kt / (HBAR * W))
        thermal = (pref / HBAR ** 2) * kt * kt * 2.0 * np.real(trigamma(zz))
    return first + thermal, d_i


def kernel_dr(bath: BathSpec, tau: float) -> KernelValue:
    """Closed-form symmetric kernel D_R(tau)."""
    if not math.isfinite(tau):
        raise DomainError("tau must be finite")
    d_r, d_i = _closed_pair(bath, np.array([tau]))
    return KernelValue(tau=tau, d_r=float(d_r[0]), d_i=float(d_i[0]))


def kernel_di(bath: BathSpec, tau: float) -> KernelValue:
    """Closed-form antisymmetric kernel D_I(tau)."""
    if not math.isfinite(tau):
        raise DomainError("tau must be finite")
    d_r, d_i = _closed_pair(bath, np.array([tau]))
    return KernelValue(tau=tau, d_r=float(d_r[0]), d_i=float(d_i[0]))


def dr_closed_array(bath: BathSpec, tau: np.ndarray) -> np.ndarray:
    """Vectorized closed-form D_R, used by the diffusion integrator."""
    return _closed_pair(bath, tau)[0]


def _cutoff_upper(bath: BathSpec, tol_abs: float) -> float:
    """Upper integration bound with analytic tail below tol_abs."""
    m, g, T, W = bath.mass, bath.gamma, bath.temperature, bath.cutoff
    pref = 2.0 * m * g / math.pi
    upper = 40.0 * W
    for _ in range(30):
        coth_cap = 1.0 if T == 0.0 else 1.0 + 2.0 * KB * T / (HBAR * upper)
        tail = pref * coth_cap * W * (upper + W) * math.exp(-upper / W)
        if tail < tol_abs:
            return upper
        upper *= 1.5
    return upper


def _kernel_quad(bath: BathSpec, tau: float, tol: float, kind: str) -> KernelValue:
    """Adaptive quadrature of a defining integral (QAWO oscillatory weight).

    ``tol`` is relative to the non-oscillatory envelope int J coth dw;
    the returned ``abs_error_estimate`` is absolute.
    """
    if tol <= 0:
        raise DomainError("tol must be positive")
    if not math.isfinite(tau):
        raise DomainError("tau must be finite")
    m, g, T, W = bath.mass, bath.gamma, bath.temperature, bath.cutoff
    pref = 2.0 * m * g / math.pi

    if kind == "dr":
        if T == 0.0:
            def f(w):
                return pref * w * math.exp(-w / W)
        else:
            def f(w):
                x = HBAR * w / (2.0 * KB * T)
                if x < 1e-4:
                    # w * coth(x) -> (2 kB T / hbar)(1 + x^2/3 - x^4/45)
                    core = (2.0 * KB * T / HBAR) * (1.0 + x * x / 3.0 - x ** 4 / 45.0)
                else:
                    core = w / math.tanh(x)
                return pref * core * math.exp(-w / W)
        weight = "cos"
    else:
        def f(w):
            return pref * w * math.exp(-w / W)
        weight = "sin"

    scale, _ = quad(f, 0.0, 20.0 * W, limit=200)
    scale = abs(scale) + 1e-300
    tol_abs = tol * scale
    upper = _cutoff_upper(bath, 0.25 * tol_abs)

    abs_tau = abs(tau)
    if abs_tau == 0.0:
        if kind == "di":
            return KernelValue(tau=tau, d_i=0.0, abs_error_estimate=0.0)
        val, err = quad(f, 0.0, upper, epsabs=0.5 * tol_abs, epsrel=1e-12, limit=400)
    else:
        res = quad(f, 0.0, upper, weight=weight, wvar=abs_tau,
                   epsabs=0.5 * tol_abs, epsrel=1e-12, limit=400, maxp1=100,
                   full_output=1)
        if len(res) > 3:
            raise QuadratureError(
                f"kernel quadrature did not converge: {res[3]}", estimate=res[0])
        val, err = res[0], res[1]
    err = err + 0.25 * tol_abs  # truncated tail contribution
    if err > tol_abs:
        raise QuadratureError(
            f"kernel quadrature error {err:.3e} exceeds budget {tol_abs:.3e}",
            estimate=val)
    if kind == "dr":
        return KernelValue(tau=tau, d_r=val, abs_error_estimate=err)
    return KernelValue(tau=tau, d_i=math.copysign(1.0, tau) * val,
                       abs_error_estimate=err)


def kernel_dr_numeric(bath: BathSpec, tau: float, tol: float = 1e-9) -> KernelValue:
    """D_R(tau) by adaptive quadrature of the defining integral."""
    return _kernel_quad(bath, tau, tol, "dr")


def kernel_di_numeric(bath: BathSpec, tau: float, tol: float = 1e-9) -> KernelValue:
    """D_I(tau) by adaptive quadrature of the defining integral."""
    return _kernel_quad(bath, tau, tol, "di")
