"""SVG plots of scans with optional fitted overlays."""

from __future__ import annotations

import logging

import matplotlib

matplotlib.use("Agg")

import matplotlib.pyplot as plt
import numpy as np

from .experiment import ScanResult
from .fitting import FitResult, fitted_curve

log = logging.getLogger(__name__)

_AXIS_LABELS = {
    "hom": ("relative delay (fs)", "coincidence rate (1/s)"),
    "noon": ("heater voltage (V)", "coincidence rate (1/s)"),
    "singles": ("heater voltage (V)", "count rate (1/s)"),
    "background": ("blocked input", "accidental rate (1/s)"),
}


def emit_plot(scan: ScanResult, fit: FitResult | None, path, title: str = "") -> None:
    """Errorbar plot of a scan; adds the fitted model when a fit is given."""
    x = np.array([r.setting for r in scan.records])
    y = np.array([r.rate for r in scan.records])
    yerr = np.array([r.rate_err for r in scan.records])

    fig, ax = plt.subplots(figsize=(6.0, 4.0))
    ax.errorbar(x, y, yerr=yerr, fmt="o", ms=3.5, lw=1.0, capsize=2.0, color="#1f4e8c")

    if fit is not None:
        dense = np.linspace(x.min(), x.max(), 400)
        ax.plot(dense, fitted_curve(fit, dense), "-", lw=1.2, color="#c23b22")
    else:
        log.warning("no fit supplied for %s; plotting data only", path)

    xlabel, ylabel = _AXIS_LABELS.get(scan.kind, ("setting", "rate (1/s)"))
    ax.set_xlabel(xlabel)
    ax.set_ylabel(ylabel)
    if title:
        ax.set_title(title)
    ax.margins(x=0.02)
    fig.tight_layout()
    fig.savefig(path, format="svg")
    plt.close(fig)
