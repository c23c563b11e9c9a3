"""Parameter sweeps: worker pool over pure pipeline calls, deterministic
tabular output (17-significant-digit CSV or JSON).

Unstable or branch-ambiguous points are emitted with stable=false and empty
Fisher fields; nothing is silently dropped.  Rows appear in grid order
regardless of worker completion order, so repeated runs of one config are
byte-identical.
"""

from __future__ import annotations

import json
import math
import os
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass

from . import __version__ as _version
from .config import RunConfig
from .errors import (AmbiguousBranchError, ConfigError, OmfisherError,
                     UnstableDriftError)
from .fisher import FisherReport
from .params import bistability_window, steady_state
from .pipeline import (build_measurement, cavity_covariance, cavity_dsigma_opt,
                       fisher_report)

__all__ = ["SweepRow", "SweepPointError", "run_sweep", "write_rows",
           "render_csv", "render_json"]

ROW_FIELDS = ("value", "qfi", "cfi", "theta_max", "saturation_ratio",
              "stable", "lyapunov_residual", "diffusion_error")


@dataclass(frozen=True)
class SweepRow:
    value: float
    qfi: float | None
    cfi: float | None
    theta_max: float | None
    saturation_ratio: float | None
    stable: bool
    lyapunov_residual: float | None
    diffusion_error: float | None


class SweepPointError(OmfisherError, RuntimeError):
    def __init__(self, variable, value, cause):
        super().__init__(f"sweep failed at {variable} = {value!r}: {cause}")
        self.variable = variable
        self.value = value
        self.cause = cause


def _worker_count(n_points: int) -> int:
    env = os.environ.get("OMFISHER_THREADS")
    if env:
        try:
            cap = max(1, int(env))
        except ValueError as exc:
            raise ConfigError(f"OMFISHER_THREADS must be an integer, got {env!r}") from exc
    else:
        cap = os.cpu_count() or 1
    return max(1, min(cap, n_points))


def _row_from_report(value: float, rep: FisherReport, cfi_convention: str) -> SweepRow:
    cfi = rep.cfi_printed_ideal if cfi_convention == "printed_ideal" else rep.cfi
    return SweepRow(value=value, qfi=rep.qfi, cfi=cfi, theta_max=rep.theta_max,
                    saturation_ratio=rep.saturation_ratio, stable=True,
                    lyapunov_residual=rep.diagnostics["lyapunov_residual"],
                    diffusion_error=rep.diagnostics["diffusion_error"])


def run_sweep(cfg: RunConfig):
    """Evaluate the configured sweep; returns (metadata, rows)."""
    if cfg.sweep is None:
        raise ConfigError("no sweep configured; set [sweep] or use a preset")
    settings = cfg.settings()

    base_params, base_meas = cfg.materialize()
    window = bistability_window(base_params,
                                epsilon_uses_total_kappa=cfg.epsilon_uses_total_kappa)
    if not window.monostable_for_all_power and \
            window.p_minus <= base_params.power <= window.p_plus:
        raise ConfigError(
            "baseline power sits in the bistable window "
            f"({window.p_minus:.3e}, {window.p_plus:.3e}) W; consult "
            "bistability_window and move the operating point")
    base_ss = steady_state(base_params, branch=cfg.branch,
                           epsilon_uses_total_kappa=cfg.epsilon_uses_total_kappa)
    if not base_ss.stable:
        raise ConfigError("baseline parameter point is dynamically unstable")

    variable = cfg.sweep.variable
    grid = cfg.sweep.grid()

    shared = {}
    if variable in ("omega_k", "theta", "eta"):
        # state pipeline is identical across the grid; compute once
        shared["cavity"] = cavity_covariance(base_params, settings)
        shared["dsigma_opt"] = cavity_dsigma_opt(base_params, settings)

    def evaluate(value: float) -> SweepRow:
        try:
            params, meas = cfg.materialize(variable, value)
            theta = meas["theta"]
            auto = theta == "auto"
            spec = build_measurement(params, omega_k=meas["omega_k"],
                                     window=meas["window"], eta=meas["eta"],
                                     theta=0.0 if auto else float(theta),
                                     settings=settings)
            rep = fisher_report(params, spec, settings, auto_theta=auto,
                                cavity=shared.get("cavity"),
                                dsigma_opt=shared.get("dsigma_opt"))
            return _row_from_report(value, rep, cfg.cfi_convention)
        except (UnstableDriftError, AmbiguousBranchError):
            return SweepRow(value=value, qfi=None, cfi=None, theta_max=None,
                            saturation_ratio=None, stable=False,
                            lyapunov_residual=None, diffusion_error=None)
        except OmfisherError as exc:
            raise SweepPointError(variable, value, exc) from exc

    workers = _worker_count(len(grid))
    if workers == 1:
        rows = [evaluate(v) for v in grid]
    else:
        with ThreadPoolExecutor(max_workers=workers) as pool:
            rows = list(pool.map(evaluate, grid))

    metadata = {
        "generator": f"omfisher {_version}",
        "preset": cfg.preset,
        "sweep": {"variable": variable, "scale": cfg.sweep.scale,
                  "start": cfg.sweep.start, "stop": cfg.sweep.stop,
                  "points": cfg.sweep.points},
        "baseline": {
            "kappa_in": base_params.kappa_in,
            "kappa_loss": base_params.kappa_loss,
            "gamma": base_params.gamma,
            "omega_m": base_params.omega_m,
            "mass": base_params.mass,
            "temperature": base_params.temperature,
            "g_freq": base_params.g_freq,
            "power": base_params.power,
            "delta0": base_params.delta0,
            "omega_laser": base_params.omega_laser,
            "cutoff": base_params.cutoff,
            "omega_k": base_meas["omega_k"],
            "window": base_meas["window"],
            "eta": base_meas["eta"],
            "theta": base_meas["theta"],
        },
        "switches": {
            "epsilon_uses_total_kappa": cfg.epsilon_uses_total_kappa,
            "kappa_meas_mode": cfg.kappa_meas_mode,
            "cfi_convention": cfg.cfi_convention,
            "vacuum_mode": cfg.vacuum_mode,
            "derivative_method": cfg.derivative_method,
        },
    }
    return metadata, rows


def _fmt(x) -> str:
    if x is None:
        return ""
    if isinstance(x, bool):
        return "true" if x else "false"
    if isinstance(x, float):
        if math.isnan(x):
            return "nan"
        return "%.17g" % x
    return str(x)


def render_csv(metadata: dict, rows: list[SweepRow]) -> str:
    lines = ["# " + json.dumps(metadata, sort_keys=True)]
    lines.append(",".join(ROW_FIELDS))
    for row in rows:
        lines.append(",".join(_fmt(getattr(row, f)) for f in ROW_FIELDS))
    return "\n".join(lines) + "\n"


def render_json(metadata: dict, rows: list[SweepRow]) -> str:
    payload = {
        "metadata": metadata,
        "rows": [{f: getattr(r, f) for f in ROW_FIELDS} for r in rows],
    }
    return json.dumps(payload, sort_keys=True, indent=1) + "\n"


def write_rows(path: str, metadata: dict, rows: list[SweepRow], fmt: str) -> None:
    text = render_csv(metadata, rows) if fmt == "csv" else render_json(metadata, rows)
    with open(path, "w", newline="") as fh:
        fh.write(text)
