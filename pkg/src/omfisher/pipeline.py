"""Full parameter-point pipeline: steady state -> covariance -> output state
-> Fisher report.

The coupling derivative of the output covariance is taken with respect to
the frequency-convention coupling g (rad/s).  Because the output filter is
a fixed linear map of the optical block, differentiation is performed on
the intracavity optical block and pushed through the map; the map is
g-independent so this is equivalent to differencing the full pipeline.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from . import fisher as _fisher
from .dynamics import (CovarianceMatrix4, DiffusionMatrix, DriftMatrix,
                       diffusion_matrix, drift_matrix, lyapunov_solve,
                       stationary_covariance, _eigen, _scaled_kernel, _tau_grid)
from .errors import DomainError
from .fisher import FisherReport, cfi_bhd, cfi_ideal, qfi_gaussian, theta_max
from .output import MeasurementSpec, OutputCovariance2, output_covariance
from .params import SteadyState, SystemParams, steady_state

__all__ = [
    "PipelineSettings",
    "CavityState",
    "build_measurement",
    "cavity_covariance",
    "output_state",
    "cavity_output_map",
    "OutputPipeline",
    "cavity_dsigma_opt",
    "fisher_report",
]

_SQRT2 = math.sqrt(2.0)


@dataclass(frozen=True)
class PipelineSettings:
    """Convention switches and numerical knobs of the pipeline."""

    epsilon_uses_total_kappa: bool = False
    kappa_meas_mode: str = "kappa_in"  # or "kappa_total"
    branch: str | None = None
    diffusion_tol: float = 1e-7
    diffusion_periods: int = 2000
    diffusion_nodes: int = 10
    vacuum_mode: str = "identity"  # or "printed_sinc"
    derivative_method: str = "finite-difference"
    fd_step: float | None = None


@dataclass(frozen=True)
class CavityState:
    steady: SteadyState
    drift: DriftMatrix
    diffusion: DiffusionMatrix
    covariance: CovarianceMatrix4


def build_measurement(params: SystemParams, omega_k: float = 0.0,
                      window: float | None = None, eta: float = 1.0,
                      theta: float = 0.0,
                      settings: PipelineSettings = PipelineSettings()) -> MeasurementSpec:
    """Measurement spec with defaults tau = 1/kappa and kappa_meas chosen by
    the configured convention (input-coupling rate, or total rate for
    literal reproduction with the printed_sinc-style total rate)."""
    if settings.kappa_meas_mode == "kappa_in":
        kappa_meas = params.kappa_in
    elif settings.kappa_meas_mode == "kappa_total":
        kappa_meas = params.kappa
    else:
        raise DomainError(f"unknown kappa_meas_mode {settings.kappa_meas_mode!r}")
    if window is None:
        window = 1.0 / params.kappa
    return MeasurementSpec(omega_k=omega_k, window=window, kappa_meas=kappa_meas,
                           eta=eta, theta=theta)


def cavity_covariance(params: SystemParams,
                      settings: PipelineSettings = PipelineSettings()) -> CavityState:
    """Steady state, drift, diffusion and stationary covariance at one point."""
    ss = steady_state(params, branch=settings.branch,
                      epsilon_uses_total_kappa=settings.epsilon_uses_total_kappa)
    a = drift_matrix(params, ss)
    d = diffusion_matrix(params, a, tol=settings.diffusion_tol,
                         n_periods=settings.diffusion_periods,
                         nodes=settings.diffusion_nodes)
    cov = stationary_covariance(a, d)
    return CavityState(steady=ss, drift=a, diffusion=d, covariance=cov)


def cavity_output_map(spec: MeasurementSpec) -> np.ndarray:
    """G_int = int_0^tau G(t') dt'; the cavity term of the output covariance
    is (kappa/tau) G_int sigma_opt G_int^T."""
    tau, wk = spec.window, spec.omega_k
    if wk == 0.0:
        return np.eye(2) * tau
    c = math.sin(wk * tau) / wk
    s = (1.0 - math.cos(wk * tau)) / wk
    return np.array([[c, s], [-s, c]])


def output_state(sigma_opt: np.ndarray, spec: MeasurementSpec,
                 vacuum: str = "identity") -> OutputCovariance2:
    return output_covariance(sigma_opt, spec, vacuum=vacuum)


def _apply_output_map(dsigma_opt: np.ndarray, spec: MeasurementSpec) -> np.ndarray:
    g_int = cavity_output_map(spec)
    return (spec.kappa_meas / spec.window) * g_int @ dsigma_opt @ g_int.T


class _CavityOpticalPipeline:
    """g -> intracavity optical block, all other parameters frozen."""

    def __init__(self, params: SystemParams, settings: PipelineSettings):
        self.params = params
        self.settings = settings

    def __call__(self, g: float) -> np.ndarray:
        # sigma_opt is even in g: g -> -g conjugates the mechanical
        # quadratures only, leaving the optical block invariant
        cav = cavity_covariance(self.params.with_(g_freq=abs(g)), self.settings)
        return cav.covariance.optical_block

    def derivative_lyapunov(self, g: float) -> np.ndarray:
        return _cavity_derivative_lyapunov(self.params.with_(g_freq=g), self.settings)


class OutputPipeline:
    """g -> output covariance matrix (the params -> sigma_out map)."""

    def __init__(self, params: SystemParams, spec: MeasurementSpec,
                 settings: PipelineSettings = PipelineSettings()):
        self.spec = spec
        self.vacuum = settings.vacuum_mode
        self._cavity = _CavityOpticalPipeline(params, settings)

    def __call__(self, g: float) -> np.ndarray:
        return output_state(self._cavity(g), self.spec, vacuum=self.vacuum).matrix

    def derivative_lyapunov(self, g: float) -> np.ndarray:
        return _apply_output_map(self._cavity.derivative_lyapunov(g), self.spec)


def cavity_dsigma_opt(params: SystemParams,
                      settings: PipelineSettings = PipelineSettings()) -> np.ndarray:
    """d(sigma_opt)/dg at the configured coupling, by the configured method."""
    pipe = _CavityOpticalPipeline(params, settings)
    return _fisher.dsigma_dg(pipe, params.g_freq,
                             method=settings.derivative_method,
                             h=settings.fd_step)


def _steady_derivatives(params: SystemParams, ss: SteadyState):
    """(d|alpha|^2/dg, d alpha/dg, d delta/dg) by implicit differentiation
    of the photon-number cubic, g in the frequency convention."""
    g = params.g_freq
    b = 2.0 * g * g / params.omega_m  # per-photon detuning shift
    a_n = ss.alpha_abs2
    if g == 0.0 or a_n == 0.0:
        return 0.0, 0.0, 0.0
    db = 2.0 * b / g
    c_lor = params.delta0 ** 2 + params.kappa ** 2 / 4.0
    f_a = 3.0 * b * b * a_n * a_n - 4.0 * params.delta0 * b * a_n + c_lor
    f_b = 2.0 * b * a_n ** 3 - 2.0 * params.delta0 * a_n ** 2
    da_n = -f_b * db / f_a
    ddelta = -(db * a_n + b * da_n)
    dalpha = da_n / (2.0 * ss.alpha)
    return da_n, dalpha, ddelta


def _cavity_derivative_lyapunov(params: SystemParams,
                                settings: PipelineSettings) -> np.ndarray:
    """d(sigma_opt)/dg via the derivative Lyapunov equation

        A s' + s' A^T = -(A' s + s A'^T + D'),

    with A' from implicit differentiation of the steady state and D' from
    the Frechet derivative of exp(A tau) inside the Brownian integral.
    """
    ss = steady_state(params, branch=settings.branch,
                      epsilon_uses_total_kappa=settings.epsilon_uses_total_kappa)
    a = drift_matrix(params, ss)
    d = diffusion_matrix(params, a, tol=settings.diffusion_tol,
                         n_periods=settings.diffusion_periods,
                         nodes=settings.diffusion_nodes)
    sigma_s = stationary_covariance(a, d).matrix_scaled

    g = params.g_freq
    _, dalpha, ddelta = _steady_derivatives(params, ss)
    da = np.zeros((4, 4))
    da[1, 2] = 2.0 * _SQRT2 * (ss.alpha + g * dalpha)
    da[3, 0] = _SQRT2 * (ss.alpha + g * dalpha)
    da[2, 3] = ddelta
    da[3, 2] = -ddelta

    # Frechet derivative of exp(A tau) contracted with the kernel:
    # d/dg int k(tau) e^(A tau) e1 dtau
    lam, vec, c_vec, _ = _eigen(a.matrix_scaled)
    taus, wts, _ = _tau_grid(params, settings.diffusion_periods,
                             settings.diffusion_nodes)
    kw = wts * _scaled_kernel(params, taus)
    phases = np.exp(np.outer(lam, taus))
    ints = phases @ kw                 # int k e^(lam tau)
    ints_tau = phases @ (kw * taus)    # int k tau e^(lam tau)

    b_mat = np.linalg.solve(vec, da.astype(complex) @ vec)
    lam_scale = np.max(np.abs(lam))
    theta = np.empty((4, 4), dtype=complex)
    for i in range(4):
        for j in range(4):
            dl = lam[j] - lam[i]
            if abs(dl) < 1e-8 * lam_scale:
                theta[i, j] = ints_tau[i]
            else:
                theta[i, j] = (ints[j] - ints[i]) / dl
    xi = (b_mat * theta) @ c_vec
    w_int = np.real(vec @ xi)
    e1 = np.array([0.0, 1.0, 0.0, 0.0])
    d_brown_prime = np.outer(e1, w_int) + np.outer(w_int, e1)

    rhs = da @ sigma_s + sigma_s @ da.T + d_brown_prime
    sigma_prime, _ = lyapunov_solve(a.matrix_scaled, rhs)
    return sigma_prime[2:, 2:]


def fisher_report(params: SystemParams, spec: MeasurementSpec,
                  settings: PipelineSettings = PipelineSettings(),
                  auto_theta: bool = False,
                  cavity: CavityState | None = None,
                  dsigma_opt: np.ndarray | None = None) -> FisherReport:
    """QFI, CFI and optimal quadrature at one parameter point.

    ``cavity`` and ``dsigma_opt`` allow sweeps over measurement-only
    variables to reuse the state pipeline.
    """
    if cavity is None:
        cavity = cavity_covariance(params, settings)
    if dsigma_opt is None:
        dsigma_opt = cavity_dsigma_opt(params, settings)

    sigma_out = output_state(cavity.covariance.optical_block, spec,
                             vacuum=settings.vacuum_mode).matrix
    dsigma_out = _apply_output_map(dsigma_opt, spec)

    tm = theta_max(sigma_out, dsigma_out, eta=spec.eta)
    theta = tm.theta if auto_theta else spec.theta
    qfi = qfi_gaussian(sigma_out, dsigma_out)
    cfi = cfi_bhd(sigma_out, dsigma_out, theta, spec.eta)
    cfi_printed = cfi_ideal(sigma_out, dsigma_out, theta)
    saturation = 0.5 * tm.lambda_max ** 2 / qfi if qfi > 0 else float("nan")

    h_used = settings.fd_step
    if h_used is None:
        h_used = max(_fisher.FD_STEP_REL * abs(params.g_freq), _fisher.FD_STEP_FLOOR)
    return FisherReport(
        qfi=qfi, cfi=cfi, cfi_printed_ideal=cfi_printed,
        theta=theta, eta=spec.eta,
        theta_max=tm.theta, lambda_max=tm.lambda_max,
        saturation_ratio=saturation,
        derivative_method=settings.derivative_method,
        tolerances={"diffusion_tol": settings.diffusion_tol, "fd_step": h_used},
        diagnostics={
            "lyapunov_residual": cavity.covariance.residual,
            "diffusion_error": cavity.diffusion.error_estimate,
            "branch_count": cavity.steady.branch_count,
            "stable": cavity.steady.stable,
            "theta_max_degenerate": bool(tm.degenerate),
        },
    )
