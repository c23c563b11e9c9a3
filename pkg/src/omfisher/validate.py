"""Oracle validation suites behind `omfisher validate` and the test surface.

Each check pits an implementation path against an independent oracle:
closed-form kernels vs adaptive quadrature, Lyapunov solve vs transient
integration, closed-form output covariance vs the double integral, the
Gaussian QFI formula vs the truncated-Fock SLD oracle, and the homodyne CFI
formula vs numeric Fisher information of the outcome pdf (including the
factor-2 adjudication between the two printed ideal-detector forms).
"""

from __future__ import annotations

import math
import time
from dataclasses import dataclass

import numpy as np

from .constants import TWO_PI
from .errors import OmfisherError
from .fisher import cfi_bhd, cfi_ideal, qfi_gaussian, theta_max
from .kernels import BathSpec, kernel_di, kernel_di_numeric, kernel_dr, kernel_dr_numeric
from .dynamics import (diffusion_matrix, drift_matrix, stationary_covariance,
                       transient_covariance)
from .oracle import cfi_numeric, qfi_fock_converged
from .output import MeasurementSpec, homodyne_variance, output_covariance, \
    output_covariance_numeric
from .params import rossi_params, steady_state
from .pipeline import (OutputPipeline, PipelineSettings, build_measurement,
                       cavity_covariance, cavity_dsigma_opt, output_state,
                       _apply_output_map)

__all__ = ["CheckResult", "validate", "SUITES"]

SUITES = ("kernels", "lyapunov", "transient", "output", "qfi", "cfi")

_SETTINGS = PipelineSettings(kappa_meas_mode="kappa_total")


@dataclass(frozen=True)
class CheckResult:
    suite: str
    name: str
    passed: bool
    measured: float
    tolerance: float
    detail: str = ""


def _suite_kernels(tol: float) -> list[CheckResult]:
    base = rossi_params()
    results = []
    worst = 0.0
    worst_at = ""
    for temp in (0.1, 11.0, 300.0):
        bath = BathSpec(mass=base.mass, gamma=base.gamma, temperature=temp,
                        cutoff=base.cutoff)
        for x in (0.01, 0.05, 0.3, 1.0, 2.5, 7.0, 20.0, 100.0):
            tau = x / bath.cutoff
            dr_c = kernel_dr(bath, tau).d_r
            dr_n = kernel_dr_numeric(bath, tau, tol=1e-9).d_r
            rel = abs(dr_c - dr_n) / max(abs(dr_n), 1e-300)
            if rel > worst:
                worst, worst_at = rel, f"D_R at tau*W={x}, T={temp}"
            di_c = kernel_di(bath, tau).d_i
            di_n = kernel_di_numeric(bath, tau, tol=1e-9).d_i
            scale = max(abs(di_n), abs(dr_n) * 1e-6)
            rel = abs(di_c - di_n) / max(scale, 1e-300)
            if rel > worst:
                worst, worst_at = rel, f"D_I at tau*W={x}, T={temp}"
    results.append(CheckResult("kernels", "closed form vs defining integrals",
                               worst <= tol, worst, tol, worst_at))
    return results


def _random_stable_points(n: int, rng: np.random.Generator):
    """Stable, monostable parameter points scattered around the baseline."""
    points = []
    while len(points) < n:
        kappa = TWO_PI * 18.5e6 * math.exp(rng.uniform(math.log(0.5), math.log(3.0)))
        p = rossi_params(
            kappa_in=kappa / 2.0, kappa_loss=kappa / 2.0,
            gamma=TWO_PI * 130.0 * math.exp(rng.uniform(math.log(0.3), math.log(30.0))),
            omega_m=TWO_PI * 1.14e6 * math.exp(rng.uniform(math.log(0.5), math.log(2.0))),
            temperature=math.exp(rng.uniform(math.log(0.5), math.log(50.0))),
            g_freq=TWO_PI * 129.0 * rng.uniform(0.0, 4.0),
            power=1e-6 * math.exp(rng.uniform(math.log(0.1), math.log(10.0))),
            delta0=float(rng.choice([-1.0, 1.0])) * kappa * rng.uniform(0.3, 3.0),
        )
        try:
            ss = steady_state(p)
        except OmfisherError:
            continue
        if ss.stable and ss.branch_count == 1:
            points.append((p, ss))
    return points


def _suite_lyapunov(tol: float) -> list[CheckResult]:
    rng = np.random.default_rng(20240811)
    points = [(rossi_params(), None)] + _random_stable_points(50, rng)
    worst = 0.0
    elapsed = 0.0
    for p, ss in points:
        t0 = time.perf_counter()
        ss = ss or steady_state(p)
        a = drift_matrix(p, ss)
        d = diffusion_matrix(p, a)
        cov = stationary_covariance(a, d)
        elapsed += time.perf_counter() - t0
        worst = max(worst, cov.residual)
    per_point = elapsed / len(points)
    return [
        CheckResult("lyapunov", "relative residual, baseline + 50 random points",
                    worst <= tol, worst, tol),
        CheckResult("lyapunov", "runtime per point [s]", per_point < 0.05,
                    per_point, 0.05),
    ]


def _transient_points():
    return [
        rossi_params(),
        rossi_params(gamma=TWO_PI * 1300.0),
        rossi_params(temperature=0.5),
        rossi_params(kappa_in=TWO_PI * 18.5e6, kappa_loss=TWO_PI * 18.5e6),
        rossi_params(g_freq=TWO_PI * 258.0),
    ]


def _suite_transient(tol: float) -> list[CheckResult]:
    worst = 0.0
    t0 = time.perf_counter()
    for p in _transient_points():
        ss = steady_state(p)
        a = drift_matrix(p, ss)
        d = diffusion_matrix(p, a)
        cov = stationary_covariance(a, d)
        tc = transient_covariance(p, a, d)
        rel = np.linalg.norm(tc.matrix_scaled - cov.matrix_scaled) / \
            np.linalg.norm(cov.matrix_scaled)
        worst = max(worst, float(rel))
    elapsed = time.perf_counter() - t0
    return [
        CheckResult("transient", "stationary sigma vs long-time integration",
                    worst <= tol, worst, tol),
        CheckResult("transient", "total runtime [s]", elapsed < 10.0, elapsed, 10.0),
    ]


def _suite_output(tol: float) -> list[CheckResult]:
    sigma = np.array([[0.93, -0.21], [-0.21, 0.58]])
    results = []
    for vacuum in ("identity", "printed_sinc"):
        worst = 0.0
        for phase in (0.0, 1.57, 3.3, 7.0, 11.0):
            for kt in (0.1, 0.5, 1.0, 3.16, 10.0):
                spec = MeasurementSpec(omega_k=phase, window=1.0, kappa_meas=kt)
                closed = output_covariance(sigma, spec, vacuum=vacuum).matrix
                numeric = output_covariance_numeric(sigma, spec, vacuum=vacuum).matrix
                rel = np.linalg.norm(closed - numeric) / np.linalg.norm(closed)
                worst = max(worst, float(rel))
        results.append(CheckResult(
            "output", f"closed form vs double integral ({vacuum})",
            worst <= tol, worst, tol))
    spec0 = MeasurementSpec(omega_k=0.0, window=0.7, kappa_meas=2.0)
    closed0 = output_covariance(sigma, spec0).matrix
    exact0 = spec0.kappa_meas * spec0.window * sigma + np.eye(2)
    dev = float(np.max(np.abs(closed0 - exact0)))
    results.append(CheckResult("output", "Omega_k=0 reduction k*tau*sigma + 1",
                               dev == 0.0, dev, 0.0, "bitwise identity"))
    return results


def _rossi_output_state():
    p = rossi_params()
    cav = cavity_covariance(p, _SETTINGS)
    dso = cavity_dsigma_opt(p, _SETTINGS)
    spec = build_measurement(p, omega_k=0.0, settings=_SETTINGS)
    sig = output_state(cav.covariance.optical_block, spec).matrix
    dsig = _apply_output_map(dso, spec)
    return p, spec, sig, dsig


def _suite_qfi(tol: float) -> list[CheckResult]:
    results = []
    drift_tol = 1e-4

    # thermal family sigma(g) = (nu0 + g) I
    nu0 = 25.0
    fam = lambda g: np.eye(2) * (nu0 + g)
    fock, drift = qfi_fock_converged(fam, 0.0, h=1e-3)
    formula = qfi_gaussian(fam(0.0), np.eye(2))
    rel = abs(formula - fock) / abs(fock)
    results.append(CheckResult("qfi", f"thermal family (nu={nu0})", rel <= tol,
                               rel, tol, f"truncation drift {drift:.1e}"))

    # squeezed-thermal family: squeeze angle and strength vary with g
    nu0, r0 = 25.0, 0.15

    def sq_fam(g):
        r = r0 + 0.4 * g
        phi = 0.3 + 0.5 * g
        rot = np.array([[math.cos(phi), -math.sin(phi)],
                        [math.sin(phi), math.cos(phi)]])
        core = np.diag([nu0 * math.exp(2 * r), nu0 * math.exp(-2 * r)])
        return rot @ core @ rot.T

    h = 1e-4
    fock, drift = qfi_fock_converged(sq_fam, 0.0, h=h)
    dsig = (sq_fam(h) - sq_fam(-h)) / (2 * h)
    formula = qfi_gaussian(sq_fam(0.0), dsig)
    rel = abs(formula - fock) / abs(fock)
    results.append(CheckResult("qfi", f"squeezed-thermal family (nu={nu0}, r={r0})",
                               rel <= tol, rel, tol, f"truncation drift {drift:.1e}"))

    # baseline output state: the full pipeline family
    p, spec, sig, dsig = _rossi_output_state()
    pipe = OutputPipeline(p, spec, _SETTINGS)
    h = max(1e-6 * p.g_freq, TWO_PI * 1e-3)
    fock, drift = qfi_fock_converged(pipe, p.g_freq, h=h)
    formula = qfi_gaussian(sig, dsig)
    rel = abs(formula - fock) / abs(fock)
    results.append(CheckResult(
        "qfi", "baseline output state", rel <= tol, rel, tol,
        f"truncation drift {drift:.1e}; known gap: the compact QFI formula "
        "is a large-purity truncation and sits below the SLD oracle at this "
        "state's mixedness"))
    return results


def _suite_cfi(tol: float) -> list[CheckResult]:
    results = []
    p, spec, sig, dsig = _rossi_output_state()
    pipe = OutputPipeline(p, spec, _SETTINGS)
    g0 = p.g_freq
    h = 1e-4 * g0
    sig_m, sig_p = pipe(g0 - h), pipe(g0 + h)
    dsig_fd = (sig_p - sig_m) / (2.0 * h)

    def family_for(theta, eta):
        def fam(g):
            if g == g0:
                s = sig
            elif g == g0 - h:
                s = sig_m
            elif g == g0 + h:
                s = sig_p
            else:
                s = pipe(g)
            v = homodyne_variance(s, theta, eta)
            return lambda k: np.exp(-k * k / (2.0 * v)) / math.sqrt(2.0 * math.pi * v)
        return fam

    worst = 0.0
    worst_at = ""
    tm = theta_max(sig, dsig, 1.0)
    grid = [(tm.theta, 1.0), (tm.theta, 0.8), (0.0, 1.0), (0.0, 0.5),
            (0.3, 0.8), (0.9, 0.9), (1.4, 0.6), (2.2, 1.0), (2.8, 0.7),
            (tm.theta + math.pi / 4, 0.95)]
    for theta, eta in grid:
        numeric = cfi_numeric(family_for(theta, eta), g0, h)
        formula = cfi_bhd(sig, dsig_fd, theta, eta)
        rel = abs(formula - numeric) / max(abs(numeric), 1e-300)
        if rel > worst:
            worst, worst_at = rel, f"theta={theta:.3f}, eta={eta}"
    results.append(CheckResult("cfi", "homodyne CFI formula vs numeric FI (10 points)",
                               worst <= tol, worst, tol, worst_at))

    # factor-2 adjudication between the two printed eta=1 normalizations
    theta = tm.theta
    numeric = cfi_numeric(family_for(theta, 1.0), g0, h)
    f_bhd = cfi_bhd(sig, dsig_fd, theta, 1.0)
    f_ideal = cfi_ideal(sig, dsig_fd, theta)
    ratio_bhd = numeric / f_bhd
    ratio_ideal = numeric / f_ideal
    ok = abs(ratio_bhd - 1.0) < 1e-4 and abs(ratio_ideal - 0.5) < 1e-4
    results.append(CheckResult(
        "cfi", "factor-2 adjudication at eta=1", ok, ratio_bhd, 1.0,
        f"numeric/bhd_limit = {ratio_bhd:.8f}, numeric/printed_ideal = "
        f"{ratio_ideal:.8f}: the eta->1 limit of the efficiency-dependent "
        "form is correct; the printed_ideal normalization counts twice"))
    return results


_DEFAULT_TOLS = {
    "kernels": 1e-6,
    "lyapunov": 1e-10,
    "transient": 1e-6,
    "output": 1e-8,
    "qfi": 1e-3,
    "cfi": 1e-6,
}

_RUNNERS = {
    "kernels": _suite_kernels,
    "lyapunov": _suite_lyapunov,
    "transient": _suite_transient,
    "output": _suite_output,
    "qfi": _suite_qfi,
    "cfi": _suite_cfi,
}


def validate(only: list[str] | None = None,
             tolerance_overrides: dict | None = None) -> list[CheckResult]:
    """Run oracle suites; returns one CheckResult per check."""
    names = list(SUITES) if not only else list(only)
    unknown = [n for n in names if n not in _RUNNERS]
    if unknown:
        raise OmfisherError(f"unknown validate suites {unknown}; available: {SUITES}")
    overrides = tolerance_overrides or {}
    results = []
    for name in names:
        tol = overrides.get(name, _DEFAULT_TOLS[name])
        results.extend(_RUNNERS[name](tol))
    return results
