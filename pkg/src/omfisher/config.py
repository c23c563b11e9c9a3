"""Run configuration: flat INI-style key=value files with section headers.

All quantities are SI; frequency-like entries accept the /2pi convenience
keys the experimental literature quotes (e.g. ``kappa_over_2pi_hz``).
Relational defaults mirror the baseline study: delta0 = -2 kappa,
cutoff = 5 omega_m, detection window 1/kappa.  Figure presets fig1..fig5
fill the sweep block programmatically; ranges the source figures leave
unstated are chosen so the claimed features (peak, monotone trends) fall
inside the grid, and are recorded in the emitted metadata.
"""

from __future__ import annotations

import configparser
import math
from dataclasses import dataclass, replace

from .constants import C_LIGHT, TWO_PI
from .errors import ConfigError
from .params import SystemParams
from .pipeline import PipelineSettings

__all__ = ["SweepSpec", "RunConfig", "load_config", "apply_preset", "PRESETS"]

SWEEP_VARIABLES = ("omega_k", "theta", "eta", "kappa", "gamma", "power", "g",
                   "temperature", "delta0")


@dataclass(frozen=True)
class SweepSpec:
    variable: str
    scale: str       # linear | log
    start: float
    stop: float
    points: int

    def grid(self) -> list[float]:
        if self.points < 2:
            raise ConfigError("sweep grids need at least 2 points")
        n = self.points
        if self.scale == "linear":
            step = (self.stop - self.start) / (n - 1)
            return [self.start + i * step for i in range(n)]
        if self.scale == "log":
            if self.start <= 0 or self.stop <= 0:
                raise ConfigError("log grids need positive endpoints")
            la, lb = math.log(self.start), math.log(self.stop)
            return [math.exp(la + i * (lb - la) / (n - 1)) for i in range(n)]
        raise ConfigError(f"unknown grid scale {self.scale!r}")


@dataclass(frozen=True)
class RunConfig:
    """Materializes (SystemParams, measurement, settings) per sweep point."""

    kappa_in: float = TWO_PI * 18.5e6 / 2.0
    kappa_loss: float = TWO_PI * 18.5e6 / 2.0
    gamma: float = TWO_PI * 130.0
    omega_m: float = TWO_PI * 1.14e6
    mass: float = 16e-12
    temperature: float = 11.0
    g_freq: float = TWO_PI * 129.0
    power: float = 1e-6
    omega_laser: float = TWO_PI * C_LIGHT / 1550e-9
    delta0_in_kappa: float | None = -2.0   # relational default
    delta0: float | None = None            # absolute override [rad/s]
    cutoff_in_omega_m: float | None = 5.0
    cutoff: float | None = None

    omega_k: float = 0.0
    window: float | None = None            # None -> 1/kappa
    eta: float = 1.0
    theta: float | str = "auto"

    sweep: SweepSpec | None = None
    preset: str | None = None

    epsilon_uses_total_kappa: bool = False
    kappa_meas_mode: str = "kappa_total"
    cfi_convention: str = "bhd_limit"      # or printed_ideal
    vacuum_mode: str = "identity"
    derivative_method: str = "finite-difference"
    branch: str | None = None
    diffusion_tol: float = 1e-7
    diffusion_periods: int = 2000
    diffusion_nodes: int = 10
    fd_step: float | None = None

    out_path: str = "sweep.csv"
    out_format: str = "csv"

    def settings(self) -> PipelineSettings:
        return PipelineSettings(
            epsilon_uses_total_kappa=self.epsilon_uses_total_kappa,
            kappa_meas_mode=self.kappa_meas_mode,
            branch=self.branch,
            diffusion_tol=self.diffusion_tol,
            diffusion_periods=self.diffusion_periods,
            diffusion_nodes=self.diffusion_nodes,
            vacuum_mode=self.vacuum_mode,
            derivative_method=self.derivative_method,
            fd_step=self.fd_step,
        )

    def base_kappa(self) -> float:
        return self.kappa_in + self.kappa_loss

    def materialize(self, variable: str | None = None, value: float | None = None):
        """(SystemParams, measurement dict) with one variable overridden.

        The override is applied before relational defaults are resolved, so
        e.g. a kappa sweep with delta0_in_kappa = -2 keeps delta0 tracking
        the swept kappa.
        """
        kappa_in, kappa_loss = self.kappa_in, self.kappa_loss
        gamma, temperature = self.gamma, self.temperature
        g_freq, power = self.g_freq, self.power
        delta0_in_kappa, delta0 = self.delta0_in_kappa, self.delta0
        omega_k, eta, theta = self.omega_k, self.eta, self.theta

        if variable is not None:
            if variable == "kappa":
                total = kappa_in + kappa_loss
                ratio = kappa_in / total
                kappa_in, kappa_loss = ratio * value, (1.0 - ratio) * value
            elif variable == "gamma":
                gamma = value
            elif variable == "power":
                power = value
            elif variable == "g":
                g_freq = value
            elif variable == "temperature":
                temperature = value
            elif variable == "delta0":
                delta0, delta0_in_kappa = value, None
            elif variable == "omega_k":
                omega_k = value
            elif variable == "eta":
                eta = value
            elif variable == "theta":
                theta = value
            else:
                raise ConfigError(f"unknown sweep variable {variable!r}")

        kappa = kappa_in + kappa_loss
        d0 = delta0 if delta0 is not None else (delta0_in_kappa or 0.0) * kappa
        cut = self.cutoff if self.cutoff is not None else \
            (self.cutoff_in_omega_m or 0.0) * self.omega_m
        try:
            params = SystemParams(
                kappa_in=kappa_in, kappa_loss=kappa_loss, gamma=gamma,
                omega_m=self.omega_m, mass=self.mass, temperature=temperature,
                g_freq=g_freq, power=power, delta0=d0,
                omega_laser=self.omega_laser, cutoff=cut)
        except Exception as exc:
            raise ConfigError(f"invalid parameter set: {exc}") from exc
        meas = {
            "omega_k": omega_k,
            "window": self.window if self.window is not None else 1.0 / kappa,
            "eta": eta,
            "theta": theta,
        }
        return params, meas


_FREQ_KEYS = {
    # config key -> RunConfig attribute  (accepts <key> in rad/s or
    # <key>_over_2pi_hz)
    "kappa_in": "kappa_in",
    "kappa_loss": "kappa_loss",
    "gamma": "gamma",
    "omega_m": "omega_m",
    "g": "g_freq",
    "delta0": "delta0",
    "cutoff": "cutoff",
    "omega_k": "omega_k",
    "omega_laser": "omega_laser",
}


def _parse_system(cfg: RunConfig, section) -> RunConfig:
    updates = {}
    known = set()
    for key, attr in _FREQ_KEYS.items():
        if attr in ("omega_k",):
            continue
        known.update({key, key + "_over_2pi_hz"})
        if key in section:
            updates[attr] = section.getfloat(key)
        if key + "_over_2pi_hz" in section:
            updates[attr] = TWO_PI * section.getfloat(key + "_over_2pi_hz")
    if "kappa" in section or "kappa_over_2pi_hz" in section:
        known.update({"kappa", "kappa_over_2pi_hz"})
        total = section.getfloat("kappa") if "kappa" in section else \
            TWO_PI * section.getfloat("kappa_over_2pi_hz")
        updates.setdefault("kappa_in", total / 2.0)
        updates.setdefault("kappa_loss", total / 2.0)
    scalars = {"mass_kg": "mass", "temperature_k": "temperature",
               "power_w": "power", "delta0_in_kappa": "delta0_in_kappa",
               "cutoff_in_omega_m": "cutoff_in_omega_m"}
    for key, attr in scalars.items():
        known.add(key)
        if key in section:
            updates[attr] = section.getfloat(key)
    if "laser_wavelength_m" in section:
        known.add("laser_wavelength_m")
        updates["omega_laser"] = TWO_PI * C_LIGHT / section.getfloat("laser_wavelength_m")
    if "delta0" in updates or "delta0_over_2pi_hz" in section:
        updates.setdefault("delta0_in_kappa", None)
        if updates.get("delta0") is not None:
            updates["delta0_in_kappa"] = None
    if "cutoff" in updates:
        updates["cutoff_in_omega_m"] = None
    unknown = set(section.keys()) - known
    if unknown:
        raise ConfigError(f"unknown [system] keys: {sorted(unknown)}")
    return replace(cfg, **updates)


def _parse_measurement(cfg: RunConfig, section) -> RunConfig:
    updates = {}
    known = {"omega_k", "omega_k_over_2pi_hz", "omega_k_in_kappa",
             "window_s", "eta", "theta"}
    if "omega_k" in section:
        updates["omega_k"] = section.getfloat("omega_k")
    if "omega_k_over_2pi_hz" in section:
        updates["omega_k"] = TWO_PI * section.getfloat("omega_k_over_2pi_hz")
    if "omega_k_in_kappa" in section:
        updates["omega_k"] = section.getfloat("omega_k_in_kappa") * cfg.base_kappa()
    if "window_s" in section:
        updates["window"] = section.getfloat("window_s")
    if "eta" in section:
        updates["eta"] = section.getfloat("eta")
    if "theta" in section:
        raw = section.get("theta").strip()
        updates["theta"] = "auto" if raw == "auto" else float(raw)
    unknown = set(section.keys()) - known
    if unknown:
        raise ConfigError(f"unknown [measurement] keys: {sorted(unknown)}")
    return replace(cfg, **updates)


def _parse_sweep(cfg: RunConfig, section) -> RunConfig:
    known = {"variable", "scale", "start", "stop", "points"}
    unknown = set(section.keys()) - known
    if unknown:
        raise ConfigError(f"unknown [sweep] keys: {sorted(unknown)}")
    variable = section.get("variable")
    if variable not in SWEEP_VARIABLES:
        raise ConfigError(f"sweep variable must be one of {SWEEP_VARIABLES}")
    spec = SweepSpec(variable=variable,
                     scale=section.get("scale", "linear"),
                     start=section.getfloat("start"),
                     stop=section.getfloat("stop"),
                     points=section.getint("points"))
    spec.grid()  # validate now
    return replace(cfg, sweep=spec)


def _parse_switches(cfg: RunConfig, section) -> RunConfig:
    updates = {}
    known = {"epsilon_uses_total_kappa", "kappa_meas_mode", "cfi_convention",
             "vacuum_mode", "derivative_method", "branch"}
    if "epsilon_uses_total_kappa" in section:
        updates["epsilon_uses_total_kappa"] = section.getboolean("epsilon_uses_total_kappa")
    for key in ("kappa_meas_mode", "cfi_convention", "vacuum_mode",
                "derivative_method"):
        if key in section:
            updates[key] = section.get(key).strip()
    if "branch" in section:
        raw = section.get("branch").strip()
        updates["branch"] = raw or None
    unknown = set(section.keys()) - known
    if unknown:
        raise ConfigError(f"unknown [switches] keys: {sorted(unknown)}")
    if updates.get("kappa_meas_mode", cfg.kappa_meas_mode) not in ("kappa_in", "kappa_total"):
        raise ConfigError("kappa_meas_mode must be kappa_in or kappa_total")
    if updates.get("cfi_convention", cfg.cfi_convention) not in ("bhd_limit", "printed_ideal"):
        raise ConfigError("cfi_convention must be bhd_limit or printed_ideal")
    if updates.get("vacuum_mode", cfg.vacuum_mode) not in ("identity", "printed_sinc"):
        raise ConfigError("vacuum_mode must be identity or printed_sinc")
    return replace(cfg, **updates)


def _parse_tolerances(cfg: RunConfig, section) -> RunConfig:
    updates = {}
    known = {"diffusion_tol", "diffusion_periods", "diffusion_nodes", "fd_step"}
    if "diffusion_tol" in section:
        updates["diffusion_tol"] = section.getfloat("diffusion_tol")
    if "diffusion_periods" in section:
        updates["diffusion_periods"] = section.getint("diffusion_periods")
    if "diffusion_nodes" in section:
        updates["diffusion_nodes"] = section.getint("diffusion_nodes")
    if "fd_step" in section:
        updates["fd_step"] = section.getfloat("fd_step")
    unknown = set(section.keys()) - known
    if unknown:
        raise ConfigError(f"unknown [tolerances] keys: {sorted(unknown)}")
    return replace(cfg, **updates)


def _parse_output(cfg: RunConfig, section) -> RunConfig:
    updates = {}
    known = {"path", "format"}
    if "path" in section:
        updates["out_path"] = section.get("path")
    if "format" in section:
        fmt = section.get("format").strip()
        if fmt not in ("csv", "json"):
            raise ConfigError("output format must be csv or json")
        updates["out_format"] = fmt
    unknown = set(section.keys()) - known
    if unknown:
        raise ConfigError(f"unknown [output] keys: {sorted(unknown)}")
    return replace(cfg, **updates)


_SECTION_PARSERS = {
    "system": _parse_system,
    "measurement": _parse_measurement,
    "sweep": _parse_sweep,
    "switches": _parse_switches,
    "tolerances": _parse_tolerances,
    "output": _parse_output,
}


def load_config(path: str | None = None) -> RunConfig:
    """Parse a config file; with no path, return baseline defaults."""
    cfg = RunConfig()
    if path is None:
        return cfg
    parser = configparser.ConfigParser(inline_comment_prefixes=("#", ";"))
    try:
        with open(path) as fh:
            parser.read_file(fh)
    except OSError as exc:
        raise ConfigError(f"cannot read config file {path}: {exc}") from exc
    except configparser.Error as exc:
        raise ConfigError(f"malformed config file {path}: {exc}") from exc
    for name in parser.sections():
        parse = _SECTION_PARSERS.get(name)
        if parse is None:
            raise ConfigError(f"unknown config section [{name}]")
        cfg = parse(cfg, parser[name])
    return cfg


def _fig1(cfg: RunConfig) -> RunConfig:
    k = cfg.base_kappa()
    return replace(cfg, sweep=SweepSpec("omega_k", "linear", -3.0 * k, 3.0 * k, 121))


def _fig2(cfg: RunConfig) -> RunConfig:
    return replace(cfg, sweep=SweepSpec("eta", "linear", 0.05, 1.0, 96))


def _fig3a(cfg: RunConfig) -> RunConfig:
    k = cfg.base_kappa()
    return replace(cfg, sweep=SweepSpec("omega_k", "linear", -3.0 * k, 3.0 * k, 121))


def _fig3b(cfg: RunConfig) -> RunConfig:
    k = cfg.base_kappa()
    return replace(cfg, omega_k=0.0,
                   sweep=SweepSpec("delta0", "linear", -20.0 * k, -0.5 * k, 40))


def _fig4a(cfg: RunConfig) -> RunConfig:
    k = cfg.base_kappa()
    return replace(cfg, sweep=SweepSpec("kappa", "log", 0.5 * k, 4.0 * k, 25))


def _fig4b(cfg: RunConfig) -> RunConfig:
    return replace(cfg, sweep=SweepSpec("gamma", "log", 0.5 * cfg.gamma,
                                        10.0 * cfg.gamma, 25))


def _fig4c(cfg: RunConfig) -> RunConfig:
    return replace(cfg, sweep=SweepSpec("power", "log", 0.1e-6, 10e-6, 25))


def _fig4d(cfg: RunConfig) -> RunConfig:
    return replace(cfg, sweep=SweepSpec("g", "linear", 0.0, 2.0 * cfg.g_freq, 21))


def _fig5(cfg: RunConfig) -> RunConfig:
    return replace(cfg, sweep=SweepSpec("temperature", "log", 0.01, 100.0, 41))


PRESETS = {
    "fig1": _fig1,
    "fig2": _fig2,
    "fig3a": _fig3a,
    "fig3b": _fig3b,
    "fig4a": _fig4a,
    "fig4b": _fig4b,
    "fig4c": _fig4c,
    "fig4d": _fig4d,
    "fig5": _fig5,
}


def apply_preset(cfg: RunConfig, name: str) -> RunConfig:
    if name not in PRESETS:
        raise ConfigError(f"unknown preset {name!r}; available: {sorted(PRESETS)}")
    return replace(PRESETS[name](cfg), preset=name)
