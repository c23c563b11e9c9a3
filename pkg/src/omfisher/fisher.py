"""Quantum and classical Fisher information of the Gaussian output state.

For the zero-mean two-dimensional Gaussian with covariance sigma(g) the QFI
is evaluated as

    H = (1/2) Tr[(d(sigma^-1) sigma)^2] - (1/8) det[d(sigma^-1)],

algebraically identical to the long form written with the SLD coefficients
Phi = -(1/2) d(sigma^-1), nu = Tr[Phi sigma] (both are exposed and checked
against each other).  The homodyne CFI at local-oscillator phase theta and
detector efficiency eta is

    F = 2 (eta R^T dsigma R / (1 - eta + 2 eta R^T sigma R))^2,

which is exactly the Fisher information of the normalized outcome
distribution; its eta -> 1 limit is half the alternative normalization
(R^T dsigma R / R^T sigma R)^2 kept as cfi_ideal, and the numeric-FI
oracle singles out the former as correct.  Both are reported.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from typing import Callable

import numpy as np
from scipy.linalg import eigh

from .errors import DerivativeUndefinedError, DomainError
from .errors import AmbiguousBranchError

__all__ = [
    "SldCoefficients",
    "FisherReport",
    "ThetaMaxResult",
    "dsigma_dg",
    "sld_coefficients",
    "qfi_gaussian",
    "qfi_gaussian_long_form",
    "cfi_bhd",
    "cfi_ideal",
    "theta_max",
]

FD_STEP_REL = 1e-6
FD_STEP_FLOOR = 2.0 * math.pi * 1e-3  # rad/s, ~1 mHz in g/2pi terms


@dataclass(frozen=True)
class SldCoefficients:
    """Quadratic-form coefficients of the symmetric logarithmic derivative."""

    phi: np.ndarray  # 2x2 symmetric
    nu: float


@dataclass(frozen=True)
class ThetaMaxResult:
    theta: float
    lambda_max: float
    degenerate: bool = False


@dataclass(frozen=True)
class FisherReport:
    """Fisher quantities of one parameter point."""

    qfi: float
    cfi: float
    cfi_printed_ideal: float  # alternative eta=1 normalization, = 2*cfi at eta=1
    theta: float
    eta: float
    theta_max: float
    lambda_max: float
    saturation_ratio: float   # max_theta CFI(eta=1) / QFI
    derivative_method: str
    tolerances: dict = field(default_factory=dict)
    diagnostics: dict = field(default_factory=dict)


def _sigma_inv(sigma: np.ndarray) -> np.ndarray:
    sigma = np.asarray(sigma, dtype=float)
    det = sigma[0, 0] * sigma[1, 1] - sigma[0, 1] * sigma[1, 0]
    if det <= 0.0 or not np.isfinite(det):
        raise DomainError("sigma must be positive definite")
    return np.array([[sigma[1, 1], -sigma[0, 1]],
                     [-sigma[1, 0], sigma[0, 0]]]) / det


def dsigma_dg(pipeline: Callable[[float], np.ndarray], g: float,
              method: str = "finite-difference", h: float | None = None) -> np.ndarray:
    """Derivative of a matrix-valued pipeline with respect to the coupling.

    ``pipeline`` maps g (frequency-convention coupling, rad/s) to a
    covariance matrix with every other parameter frozen.  The default is
    central differences with one Richardson level; objects exposing a
    ``derivative_lyapunov(g)`` attribute (see ``pipeline.OutputPipeline``)
    provide the implicit-differentiation route.
    """
    if method == "derivative-lyapunov":
        deriv = getattr(pipeline, "derivative_lyapunov", None)
        if deriv is None:
            raise DomainError("pipeline does not expose a derivative_lyapunov route")
        return deriv(g)
    if method != "finite-difference":
        raise DomainError(f"unknown derivative method {method!r}")

    h0 = h if h is not None else max(FD_STEP_REL * abs(g), FD_STEP_FLOOR)
    try:
        coarse = (pipeline(g + h0) - pipeline(g - h0)) / (2.0 * h0)
        fine = (pipeline(g + 0.5 * h0) - pipeline(g - 0.5 * h0)) / h0
    except AmbiguousBranchError as exc:
        raise DerivativeUndefinedError(
            f"derivative undefined near a bistability branch boundary at g={g}") from exc
    return (4.0 * fine - coarse) / 3.0


def sld_coefficients(sigma: np.ndarray, dsigma: np.ndarray) -> SldCoefficients:
    """Phi = -(1/2) d(sigma^-1) and nu = Tr[Phi sigma]."""
    si = _sigma_inv(sigma)
    dinv = -si @ np.asarray(dsigma, dtype=float) @ si
    phi = -0.5 * dinv
    nu = float(np.trace(phi @ sigma))
    return SldCoefficients(phi=phi, nu=nu)


def qfi_gaussian(sigma: np.ndarray, dsigma: np.ndarray) -> float:
    """QFI of the zero-mean Gaussian family (compact form)."""
    si = _sigma_inv(sigma)
    dinv = -si @ np.asarray(dsigma, dtype=float) @ si
    k = dinv @ np.asarray(sigma, dtype=float)
    return float(0.5 * np.trace(k @ k) - 0.125 * np.linalg.det(dinv))


def qfi_gaussian_long_form(sigma: np.ndarray, dsigma: np.ndarray) -> float:
    """Long form 3Tr[(Phi s)^2] - 2 nu Tr[Phi s] + 2 det s det Phi
    - det(Phi)/2 + nu^2; equals the compact form identically."""
    co = sld_coefficients(sigma, dsigma)
    ps = co.phi @ np.asarray(sigma, dtype=float)
    det_phi = float(np.linalg.det(co.phi))
    det_sig = float(np.linalg.det(np.asarray(sigma, dtype=float)))
    tr_ps = float(np.trace(ps))
    return float(3.0 * np.trace(ps @ ps) - 2.0 * co.nu * tr_ps
                 + 2.0 * det_sig * det_phi - 0.5 * det_phi + co.nu ** 2)


def _quadrature_forms(sigma, dsigma, theta):
    r = np.array([math.cos(theta), math.sin(theta)])
    return float(r @ np.asarray(sigma, dtype=float) @ r), \
        float(r @ np.asarray(dsigma, dtype=float) @ r)


def cfi_bhd(sigma: np.ndarray, dsigma: np.ndarray, theta: float, eta: float) -> float:
    """Homodyne CFI at phase theta, detector efficiency eta."""
    if not 0.0 < eta <= 1.0:
        raise DomainError("eta must be in (0, 1]")
    s_q, d_q = _quadrature_forms(sigma, dsigma, theta)
    den = 1.0 - eta + 2.0 * eta * s_q
    if den <= 0.0:
        raise DomainError("non-positive homodyne variance")
    return 2.0 * (eta * d_q / den) ** 2


def cfi_ideal(sigma: np.ndarray, dsigma: np.ndarray, theta: float) -> float:
    """Alternative ideal-detector normalization (R^T ds R / R^T s R)^2.

    Identically 2 * cfi_bhd(theta, eta=1); the oracle-validated value is
    the eta -> 1 limit of cfi_bhd.
    """
    s_q, d_q = _quadrature_forms(sigma, dsigma, theta)
    if s_q <= 0.0:
        raise DomainError("sigma must be positive definite")
    return (d_q / s_q) ** 2


def theta_max(sigma: np.ndarray, dsigma: np.ndarray, eta: float = 1.0) -> ThetaMaxResult:
    """Optimal local-oscillator phase in [0, pi).

    For eta = 1 the maximizer of the squared generalized Rayleigh quotient
    is the generalized eigenvector of (dsigma, sigma) whose eigenvalue has
    the largest magnitude (CFI depends on the quotient squared, so sign is
    irrelevant).  For eta < 1 a 360-point grid plus golden-section
    refinement maximizes cfi_bhd directly.
    """
    sigma = np.asarray(sigma, dtype=float)
    dsigma = np.asarray(dsigma, dtype=float)
    _sigma_inv(sigma)  # positive-definite gate
    vals, vecs = eigh(np.asarray(dsigma), b=sigma)
    idx = int(np.argmax(np.abs(vals)))
    lam_max = float(vals[idx])
    spread = abs(abs(vals[0]) - abs(vals[1]))
    degenerate = spread <= 1e-9 * max(np.max(np.abs(vals)), 1e-300)
    v = vecs[:, idx]
    theta = math.atan2(v[1], v[0]) % math.pi

    if eta >= 1.0:
        return ThetaMaxResult(theta=theta, lambda_max=lam_max, degenerate=degenerate)

    grid = np.linspace(0.0, math.pi, 360, endpoint=False)
    vals_grid = [cfi_bhd(sigma, dsigma, t, eta) for t in grid]
    i_best = int(np.argmax(vals_grid))
    lo = grid[i_best] - math.pi / 360.0
    hi = grid[i_best] + math.pi / 360.0
    invphi = (math.sqrt(5.0) - 1.0) / 2.0
    x1 = hi - invphi * (hi - lo)
    x2 = lo + invphi * (hi - lo)
    f1 = cfi_bhd(sigma, dsigma, x1, eta)
    f2 = cfi_bhd(sigma, dsigma, x2, eta)
    while hi - lo > 1e-10:
        if f1 < f2:
            lo, x1, f1 = x1, x2, f2
            x2 = lo + invphi * (hi - lo)
            f2 = cfi_bhd(sigma, dsigma, x2, eta)
        else:
            hi, x2, f2 = x2, x1, f1
            x1 = hi - invphi * (hi - lo)
            f1 = cfi_bhd(sigma, dsigma, x1, eta)
    return ThetaMaxResult(theta=(0.5 * (lo + hi)) % math.pi,
                          lambda_max=lam_max, degenerate=degenerate)
