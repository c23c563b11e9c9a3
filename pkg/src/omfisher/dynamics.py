"""Linearized dynamics: drift matrix, diffusion matrix, stationary covariance.

Everything is solved in an internally nondimensionalized basis where the
mechanical quadratures are measured in zero-point units
(x_zp = sqrt(hbar/(2 m omega_m)), p_zp = sqrt(hbar m omega_m / 2)); raw SI
drift entries span ~30 orders of magnitude and would wreck conditioning.
SI matrices are recovered on output through the diagonal scale vector.

The diffusion matrix is

    D = int_0^inf [M1(tau) exp(A^T tau) + exp(A tau) M1(tau)] dtau,

where M1 carries the delta-correlated optical noise (kappa/2 on the optical
diagonal, with the half-weight endpoint convention int_0^inf delta f = f(0)/2)
and the Brownian kernel hbar*D_R(tau) in the momentum slot.  The Brownian
part reduces to a rank-2 update e1 u^T + u e1^T with
u = int k(tau) exp(A tau) e1 dtau, evaluated by composite Gauss-Legendre
panels after eigendecomposition of A (panels split at the mechanical
half-period; a finer grid resolves the optical rotation while those modes
are alive).
"""

from __future__ import annotations

import math
import warnings
from dataclasses import dataclass

import numpy as np
from numpy.polynomial.legendre import leggauss
from scipy.integrate import quad_vec
from scipy.linalg import LinAlgWarning, expm, lu_factor, lu_solve

from .constants import HBAR, KB
from .errors import (DegenerateLyapunovError, DomainError, NumericalError,
                     QuadratureError, UnstableDriftError)
from .kernels import BathSpec, dr_closed_array
from .params import SteadyState, SystemParams, is_stable

__all__ = [
    "DriftMatrix",
    "DiffusionMatrix",
    "CovarianceMatrix4",
    "drift_matrix",
    "matrix_exponential",
    "diffusion_matrix",
    "brownian_diffusion_freq",
    "lyapunov_solve",
    "stationary_covariance",
    "transient_covariance",
]

_E1 = np.array([0.0, 1.0, 0.0, 0.0])


@dataclass(frozen=True)
class DriftMatrix:
    """Drift matrix over (dq, dp, dX, dY); SI and scaled forms."""

    matrix: np.ndarray         # SI units
    matrix_scaled: np.ndarray  # zero-point mechanical units
    scale: np.ndarray          # diag vector s: M_SI = S M_scaled S for cov/diffusion


@dataclass(frozen=True)
class DiffusionMatrix:
    """Symmetrized noise input of the covariance dynamics."""

    matrix: np.ndarray
    matrix_scaled: np.ndarray
    scale: np.ndarray
    error_estimate: float      # relative, scaled space
    tail_bound: float          # relative truncation bound of the tau integral


@dataclass(frozen=True)
class CovarianceMatrix4:
    """Stationary covariance over (dq, dp, dX, dY)."""

    matrix: np.ndarray
    matrix_scaled: np.ndarray
    scale: np.ndarray
    residual: float            # relative Lyapunov residual, scaled space

    @property
    def optical_block(self) -> np.ndarray:
        """2x2 covariance of (dX, dY); scale-free."""
        return self.matrix_scaled[2:, 2:].copy()


def drift_matrix(params: SystemParams, ss: SteadyState) -> DriftMatrix:
    """Assemble the drift matrix of the linearized Langevin equations."""
    m, wm, gam = params.mass, params.omega_m, params.gamma
    kap, delta = params.kappa, ss.delta_eff
    gsi, alpha = params.g_si, ss.alpha

    a = np.zeros((4, 4))
    a[0, 1] = 1.0 / m
    a[1, 0] = -m * wm ** 2
    a[1, 1] = -gam
    a[1, 2] = math.sqrt(2.0) * HBAR * gsi * alpha
    a[2, 2] = a[3, 3] = -kap / 2.0
    a[2, 3] = delta
    a[3, 2] = -delta
    a[3, 0] = math.sqrt(2.0) * gsi * alpha

    x_zp = math.sqrt(HBAR / (2.0 * m * wm))
    p_zp = math.sqrt(HBAR * m * wm / 2.0)
    scale = np.array([x_zp, p_zp, 1.0, 1.0])
    a_scaled = (a / scale[:, None]) * scale[None, :]
    return DriftMatrix(matrix=a, matrix_scaled=a_scaled, scale=scale)


def matrix_exponential(m: np.ndarray) -> np.ndarray:
    """exp(m) by scaling-and-squaring with diagonal Pade approximants."""
    m = np.asarray(m, dtype=float)
    if not np.all(np.isfinite(m)):
        raise DomainError("matrix entries must be finite")
    out = expm(m)
    if not np.all(np.isfinite(out)):
        raise NumericalError("matrix exponential overflowed")
    return out


def _scaled_kernel(params: SystemParams, tau: np.ndarray) -> np.ndarray:
    """hbar*D_R(tau) expressed in zero-point momentum units: 2 D_R/(m omega_m)."""
    bath = BathSpec.from_params(params)
    return dr_closed_array(bath, tau) * (2.0 / (params.mass * params.omega_m))


def _tau_grid(params: SystemParams, n_periods: int, nodes: int):
    """Deterministic quadrature grid for the Brownian tau integral.

    Built from static parameters only (not from the computed drift
    eigenvalues) so that grids at g and g +- h coincide and quadrature error
    cancels in finite differences.
    """
    kap, wm, cut, d0 = params.kappa, params.omega_m, params.cutoff, params.delta0
    omega_fast = max(abs(d0), kap, cut, wm)
    w2 = math.pi / wm
    t_end = max(n_periods * 2.0 * math.pi / wm, 100.0 / cut)
    # fine region covers the optical transient and the kernel support
    t1 = min(max(80.0 / kap, 40.0 / cut), t_end)
    w1 = min(math.pi / omega_fast, 0.25 / cut, w2)

    n1 = max(1, math.ceil(t1 / w1))
    edges = [np.linspace(0.0, t1, n1 + 1)]
    if t_end > t1:
        n2 = max(1, math.ceil((t_end - t1) / w2))
        edges.append(np.linspace(t1, t_end, n2 + 1)[1:])
    edges = np.concatenate(edges)

    x, w = leggauss(nodes)
    half = 0.5 * np.diff(edges)
    mid = 0.5 * (edges[:-1] + edges[1:])
    taus = (mid[:, None] + half[:, None] * x[None, :]).ravel()
    wts = (half[:, None] * w[None, :]).ravel()
    return taus, wts, t_end


def _eigen(a_scaled: np.ndarray):
    lam, vec = np.linalg.eig(a_scaled)
    cond = np.linalg.cond(vec)
    c = np.linalg.solve(vec, _E1.astype(complex))
    return lam, vec, c, cond


def _brownian_u(params, lam, vec, c, taus, wts):
    """u = int k(tau) exp(A tau) e1 dtau via the eigenbasis."""
    k = _scaled_kernel(params, taus)
    phases = np.exp(np.outer(lam, taus))
    integrals = phases @ (wts * k)
    u = np.real(vec @ (c * integrals))
    return u, integrals


def diffusion_matrix(params: SystemParams, a: DriftMatrix,
                     tol: float = 1e-7, n_periods: int = 2000,
                     nodes: int = 10) -> DiffusionMatrix:
    """Assemble D: optical delta part plus integrated Brownian part.

    The half-weight endpoint convention for the delta noise puts exactly
    kappa/2 on the optical diagonal, reproducing the g = 0 optical vacuum.
    The error estimate compares the Gauss-Legendre rule against a
    three-orders-lower one on the same panels; the tail bound uses the
    kernel envelope at the truncation time with the
    oscillatory-cancellation credit 1/|Im lambda|.
    """
    if not is_stable(a.matrix_scaled):
        raise UnstableDriftError("diffusion matrix requires a Hurwitz drift matrix")

    d_scaled = np.zeros((4, 4))
    d_scaled[2, 2] = d_scaled[3, 3] = params.kappa / 2.0

    lam, vec, c, cond = _eigen(a.matrix_scaled)
    taus, wts, t_end = _tau_grid(params, n_periods, nodes)

    if cond < 1e10:
        u, _ = _brownian_u(params, lam, vec, c, taus, wts)
        taus_lo, wts_lo, _ = _tau_grid(params, n_periods, max(4, nodes - 3))
        u_lo, _ = _brownian_u(params, lam, vec, c, taus_lo, wts_lo)
        err_abs = float(np.max(np.abs(u - u_lo)))
    else:
        u = brownian_diffusion_freq(params, a, _u_only=True)
        err_abs = tol * float(np.max(np.abs(u)))  # quad_vec already met tol

    brown = np.outer(_E1, u) + np.outer(u, _E1)
    d_scaled = d_scaled + brown
    d_scaled = 0.5 * (d_scaled + d_scaled.T)

    k_end = abs(float(_scaled_kernel(params, np.array([t_end]))[0]))
    decay = math.exp(max(lam.real) * t_end)
    osc = max(params.omega_m, 1.0 / t_end)
    tail_abs = k_end * decay / osc
    norm = float(np.linalg.norm(d_scaled)) + 1e-300
    rel_err = 2.0 * err_abs / norm
    rel_tail = 2.0 * tail_abs / norm
    if rel_err > tol:
        raise QuadratureError(
            f"Brownian quadrature estimate {rel_err:.3e} exceeds tol {tol:.3e}",
            estimate=rel_err)

    d_si = d_scaled * np.outer(a.scale, a.scale)
    return DiffusionMatrix(matrix=d_si, matrix_scaled=d_scaled, scale=a.scale,
                           error_estimate=rel_err, tail_bound=rel_tail)


def brownian_diffusion_freq(params: SystemParams, a: DriftMatrix,
                            rtol: float = 1e-10, _u_only: bool = False):
    """Frequency-domain evaluation of the Brownian block (cross-check path).

    Uses int_0^inf cos(w tau) exp(A tau) dtau = -Re (A + i w)^(-1) to turn
    the tau integral into a smooth spectral integral with a narrow feature
    at the mechanical resonance.
    """
    m, wm, gam, T, W = (params.mass, params.omega_m, params.gamma,
                        params.temperature, params.cutoff)
    pref = 2.0 * m * gam / math.pi
    a_s = a.matrix_scaled
    eye = np.eye(4)

    def integrand(w):
        if T == 0.0:
            core = w
        else:
            x = HBAR * w / (2.0 * KB * T)
            if x < 1e-4:  # w coth(x) -> (2 kB T/hbar)(1 + x^2/3 - x^4/45)
                core = (2.0 * KB * T / HBAR) * (1.0 + x * x / 3.0 - x ** 4 / 45.0)
            else:
                core = w / math.tanh(x)
        f = pref * core * math.exp(-w / W) * (2.0 / (m * wm))
        r = np.linalg.solve(a_s + 1j * w * eye, _E1.astype(complex))
        return -f * r.real

    upper = 60.0 * W
    pts = [p for p in (wm, abs(params.delta0), params.kappa) if 0 < p < upper]
    u, _ = quad_vec(integrand, 0.0, upper, epsrel=rtol, epsabs=0.0,
                    points=sorted(set(pts)), limit=2000)
    if _u_only:
        return u
    return np.outer(_E1, u) + np.outer(u, _E1)


def lyapunov_solve(a: np.ndarray, d: np.ndarray):
    """Solve A s + s A^T = -D through the 16x16 Kronecker system.

    One step of iterative refinement keeps the relative residual at the
    rounding floor.  Returns (sigma, residual).
    """
    a = np.asarray(a, dtype=float)
    d = np.asarray(d, dtype=float)
    n = a.shape[0]
    eye = np.eye(n)
    big = np.kron(a, eye) + np.kron(eye, a)
    try:
        with warnings.catch_warnings():
            warnings.simplefilter("ignore", LinAlgWarning)  # pivot check below
            lu, piv = lu_factor(big)
    except np.linalg.LinAlgError as exc:  # pragma: no cover
        raise DegenerateLyapunovError("Lyapunov operator factorization failed") from exc
    diag = np.abs(np.diag(lu))
    if diag.min() <= 1e-14 * diag.max():
        raise DegenerateLyapunovError(
            "Lyapunov operator is singular (eigenvalue pair summing to zero)")
    rhs = -d.ravel()
    x = lu_solve((lu, piv), rhs)
    x -= lu_solve((lu, piv), big @ x - rhs)
    sigma = x.reshape(n, n)
    sigma = 0.5 * (sigma + sigma.T)
    res = np.linalg.norm(a @ sigma + sigma @ a.T + d) / (np.linalg.norm(d) + 1e-300)
    return sigma, float(res)


def stationary_covariance(a: DriftMatrix, d: DiffusionMatrix) -> CovarianceMatrix4:
    """Stationary covariance from the Lyapunov equation (scaled solve)."""
    if not is_stable(a.matrix_scaled):
        raise UnstableDriftError("stationary covariance requires a Hurwitz drift matrix")
    sigma_scaled, res = lyapunov_solve(a.matrix_scaled, d.matrix_scaled)
    sigma_si = sigma_scaled * np.outer(a.scale, a.scale)
    return CovarianceMatrix4(matrix=sigma_si, matrix_scaled=sigma_scaled,
                             scale=a.scale.copy(), residual=res)


def _van_loan_step(a_scaled: np.ndarray, d_scaled: np.ndarray, h: float):
    """(E, Q) with E = exp(A h), Q = int_0^h exp(A s) D exp(A^T s) ds."""
    blk = np.zeros((8, 8))
    blk[:4, :4] = -a_scaled
    blk[:4, 4:] = d_scaled
    blk[4:, 4:] = a_scaled.T
    f = matrix_exponential(blk * h)
    e = f[4:, 4:].T
    q = e @ f[:4, 4:]
    return e, 0.5 * (q + q.T)


def transient_covariance(params: SystemParams, a: DriftMatrix,
                         d: DiffusionMatrix, n_periods: int = 2000,
                         nodes: int = 7, rel_settle: float = 1e-9) -> CovarianceMatrix4:
    """Long-time integration of d sigma/dt = A sigma + sigma A^T + D(t).

    Oracle for the stationary Lyapunov solve.  Starting from sigma(0) = 0,
    the build-up phase with the time-dependent D(t) (cumulative Brownian
    integral) is evaluated in closed form in the drift eigenbasis; the
    remaining relaxation uses exact discrete steps sigma -> E sigma E^T + Q
    with the converged D.  Never touches the Kronecker solve.
    """
    if not is_stable(a.matrix_scaled):
        raise UnstableDriftError("transient integration requires a stable drift")
    lam, vec, c, cond = _eigen(a.matrix_scaled)
    if cond > 1e10:
        raise NumericalError("drift eigenbasis too ill-conditioned for the "
                             "transient oracle", details={"cond": cond})

    taus, wts, t_a = _tau_grid(params, n_periods, nodes)
    k = _scaled_kernel(params, taus)
    kw = wts * k
    # K_j = int k e^(lam_j tau); Khat_i = int k(tau) e^(lam_i (TA - tau))
    big_k = np.exp(np.outer(lam, taus)) @ kw
    khat = np.exp(np.outer(lam, t_a - taus)) @ kw

    lsum = lam[:, None] + lam[None, :]
    vinv = np.linalg.inv(vec)
    d_delta = np.zeros((4, 4))
    d_delta[2, 2] = d_delta[3, 3] = params.kappa / 2.0
    w_delta = vinv @ d_delta @ vinv.T
    s_delta = w_delta * (np.exp(lsum * t_a) - 1.0) / lsum

    exp_lam_ta = np.exp(lam * t_a)
    j_mat = (khat[:, None] * exp_lam_ta[None, :] - big_k[None, :]) / lsum
    s_brown = np.outer(c, c) * (j_mat + j_mat.T)

    sigma = np.real(vec @ (s_delta + s_brown) @ vec.T)
    sigma = 0.5 * (sigma + sigma.T)

    # relaxation with converged D: exact discrete flow, doubled in horizon
    # (E, Q) at step h obey E_2h = E_h^2, Q_2h = E_h Q_h E_h^T + Q_h
    h0 = 1.0 / max(np.max(np.abs(lam)), 1.0 / t_a)
    e_step, q_step = _van_loan_step(a.matrix_scaled, d.matrix_scaled, h0)
    for _ in range(200):
        if np.linalg.norm(e_step) <= rel_settle:
            break
        q_step = e_step @ q_step @ e_step.T + q_step
        q_step = 0.5 * (q_step + q_step.T)
        e_step = e_step @ e_step
    sigma = e_step @ sigma @ e_step.T + q_step
    sigma = 0.5 * (sigma + sigma.T)

    sigma_si = sigma * np.outer(a.scale, a.scale)
    return CovarianceMatrix4(matrix=sigma_si, matrix_scaled=sigma,
                             scale=a.scale.copy(), residual=float("nan"))
