#!/usr/bin/env python3
"""Emit the data behind the five numerical-study figures as CSV files.

fig1   QFI vs filter center frequency Omega_k
fig2   CFI vs detector efficiency eta (theta at the optimal quadrature)
fig3a  theta_max vs Omega_k (read the theta_max column)
fig3b  theta_max vs detuning at Omega_k = 0
fig4a..fig4d  CFI vs kappa, gamma, laser power, coupling
fig5   QFI vs bath temperature, repeated for gamma x {1, 10, 100}

Usage: python scripts/reproduce_figures.py [outdir]
"""

import sys
from pathlib import Path

from omfisher.config import RunConfig, apply_preset, load_config
from omfisher.sweep import run_sweep, write_rows


def main() -> int:
    outdir = Path(sys.argv[1]) if len(sys.argv) > 1 else Path("data")
    outdir.mkdir(parents=True, exist_ok=True)
    base = load_config(None)

    for preset in ("fig1", "fig2", "fig3a", "fig3b", "fig4a", "fig4b",
                   "fig4c", "fig4d"):
        cfg = apply_preset(base, preset)
        metadata, rows = run_sweep(cfg)
        path = outdir / f"{preset}.csv"
        write_rows(str(path), metadata, rows, "csv")
        print(f"{preset}: {len(rows)} rows -> {path}")

    for factor in (1.0, 10.0, 100.0):
        cfg = RunConfig(**{**base.__dict__, "gamma": factor * base.gamma})
        cfg = apply_preset(cfg, "fig5")
        metadata, rows = run_sweep(cfg)
        path = outdir / f"fig5_gamma_x{factor:g}.csv"
        write_rows(str(path), metadata, rows, "csv")
        print(f"fig5 (gamma x {factor:g}): {len(rows)} rows -> {path}")
    return 0


if __name__ == "__main__":
    sys.exit(main())
