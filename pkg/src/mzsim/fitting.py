"""Weighted fits for dip and fringe scans.

All fits share the same recipe: extract (setting, rate, rate_err) from a
ScanResult, floor the per-point error at one count per integration time so
zero-count bins cannot get infinite weight, build an initial guess from the
data, and refine with the damped least-squares solver. Uncertainties are
absolute, from the diagonal of (J^T J)^-1.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np

from .circuit import ThermoOpticCalibration, thermo_phase
from .errors import CoverageError, DegenerateDataError, FitError
from .experiment import ScanResult
from .optimize import LMResult, levenberg_marquardt, weighted_covariance

GAUSSIAN_DIP = "gaussian_dip"
TWO_PHI_FRINGE = "two_phi_fringe"
FREE_FREQUENCY_FRINGE = "free_frequency_fringe"
CLASSICAL_FRINGE = "classical_fringe"

_MODEL_PARAMS = {
    GAUSSIAN_DIP: ("r_base", "visibility", "center_fs", "width_fs"),
    TWO_PHI_FRINGE: ("r0", "amplitude", "phi0"),
    FREE_FREQUENCY_FRINGE: ("r0", "amplitude", "frequency", "offset"),
    CLASSICAL_FRINGE: ("r0", "amplitude", "alpha_deg_per_mw", "phi0"),
}


@dataclass(frozen=True)
class FitResult:
    """Converged fit with parameter table and visibility extraction."""

    model: str
    params: dict[str, float]
    param_errs: dict[str, float]
    covariance: tuple[tuple[float, ...], ...]
    chi2: float
    n_points: int
    n_iter: int
    visibility: float
    visibility_err: float
    flagged: bool
    context: dict[str, float] = field(default_factory=dict)

    @property
    def param_names(self) -> tuple[str, ...]:
        return _MODEL_PARAMS[self.model]

    def to_dict(self) -> dict:
        return {
            "model": self.model,
            "params": dict(self.params),
            "param_errs": dict(self.param_errs),
            "covariance": [list(row) for row in self.covariance],
            "chi2": self.chi2,
            "n_points": self.n_points,
            "n_iter": self.n_iter,
            "visibility": self.visibility,
            "visibility_err": self.visibility_err,
            "flagged": self.flagged,
            "context": dict(self.context),
        }

    @classmethod
    def from_dict(cls, d: dict) -> "FitResult":
        return cls(
            model=d["model"],
            params={k: float(v) for k, v in d["params"].items()},
            param_errs={k: float(v) for k, v in d["param_errs"].items()},
            covariance=tuple(tuple(float(v) for v in row) for row in d["covariance"]),
            chi2=float(d["chi2"]),
            n_points=int(d["n_points"]),
            n_iter=int(d["n_iter"]),
            visibility=float(d["visibility"]),
            visibility_err=float(d["visibility_err"]),
            flagged=bool(d["flagged"]),
            context={k: float(v) for k, v in d.get("context", {}).items()},
        )


def scan_arrays(data: ScanResult) -> tuple[np.ndarray, np.ndarray, np.ndarray]:
    """Settings, rates, and floored rate errors from a scan.

    The floor is one count over the bin's integration time: a zero-count bin
    is evidence of a low rate, not of zero uncertainty.
    """
    x = np.array([r.setting for r in data.records], dtype=float)
    y = np.array([r.rate for r in data.records], dtype=float)
    sigma = np.array(
        [max(r.rate_err, 1.0 / r.integration_time) for r in data.records], dtype=float
    )
    return x, y, sigma


def _visibility_flag(v: float, v_err: float) -> bool:
    slack = 3.0 * v_err
    return v < -slack or v > 1.0 + slack


def _package(model: str, lm: LMResult, n_points: int, visibility_index: int,
             context: dict[str, float] | None = None) -> FitResult:
    names = _MODEL_PARAMS[model]
    errs = np.sqrt(np.maximum(np.diag(lm.covariance), 0.0))
    v = float(lm.params[visibility_index])
    v_err = float(errs[visibility_index])
    return FitResult(
        model=model,
        params={n: float(p) for n, p in zip(names, lm.params)},
        param_errs={n: float(e) for n, e in zip(names, errs)},
        covariance=tuple(tuple(float(c) for c in row) for row in lm.covariance),
        chi2=lm.chi2,
        n_points=n_points,
        n_iter=lm.n_iter,
        visibility=v,
        visibility_err=v_err,
        flagged=_visibility_flag(v, v_err),
        context=dict(context or {}),
    )


# --- gaussian dip -----------------------------------------------------------

def _dip_model(x: np.ndarray, p: np.ndarray) -> np.ndarray:
    r_base, vis, center, width = p
    e = np.exp(-((x - center) ** 2) / (2.0 * width**2))
    return r_base * (1.0 - vis * e)


def _dip_jac(x: np.ndarray, p: np.ndarray) -> np.ndarray:
    r_base, vis, center, width = p
    u = x - center
    e = np.exp(-(u**2) / (2.0 * width**2))
    j = np.empty((x.size, 4))
    j[:, 0] = 1.0 - vis * e
    j[:, 1] = -r_base * e
    j[:, 2] = -r_base * vis * e * u / width**2
    j[:, 3] = -r_base * vis * e * u**2 / width**3
    return j


def _smooth(y: np.ndarray, window: int = 5) -> np.ndarray:
    window = min(window, y.size if y.size % 2 == 1 else y.size - 1)
    if window < 3:
        return y.copy()
    pad = window // 2
    padded = np.pad(y, pad, mode="edge")
    return np.convolve(padded, np.ones(window) / window, mode="valid")


def _dip_guess(x: np.ndarray, y: np.ndarray) -> np.ndarray:
    s = _smooth(y)
    r_base = float(np.max(s))
    if r_base <= 0.0:
        r_base = max(float(np.max(y)), 1e-12)
    i_min = int(np.argmin(s))
    depth = r_base - float(s[i_min])
    vis = min(max(depth / r_base, 1e-3), 1.0)
    center = float(x[i_min])

    # half-depth crossing on both sides of the minimum, if present
    target = r_base - 0.5 * depth
    half_widths = []
    for direction in (1, -1):
        i = i_min
        while 0 <= i + direction < s.size and s[i + direction] < target:
            i += direction
        if 0 <= i + direction < s.size:
            half_widths.append(abs(x[i + direction] - center))
    span = float(abs(x[-1] - x[0]))
    hwhd = float(np.mean(half_widths)) if half_widths else span / 6.0
    width = max(hwhd / math.sqrt(2.0 * math.log(2.0)), span / x.size)
    return np.array([r_base, vis, center, width])


def fit_gaussian_dip(data: ScanResult) -> FitResult:
    """Fit r_base * (1 - V exp(-(t - t0)^2 / 2w^2)) to a delay scan.

    The center and width are confined to the scanned window (and the
    visibility to [-1.5, 1.5]): outside that box the parameters are not
    identifiable from the data, and on featureless scans an unconstrained
    fit walks off along a flat ridge instead of settling.
    """
    x, y, sigma = scan_arrays(data)
    if x.size < 5:
        raise FitError(f"dip fit needs at least 5 points, got {x.size}")
    span = float(np.max(x) - np.min(x))
    spacing = float(np.median(np.abs(np.diff(x))))
    lower = [1e-12, -1.5, float(np.min(x)), 0.5 * spacing]
    upper = [np.inf, 1.5, float(np.max(x)), span]
    lm = levenberg_marquardt(
        _dip_model, _dip_jac, x, y, sigma, _dip_guess(x, y), lower=lower, upper=upper
    )
    # the model is even in the width, so report its magnitude
    if lm.params[3] < 0:
        lm.params[3] = -lm.params[3]
        lm.covariance = weighted_covariance(_dip_jac, x, lm.params, sigma)
    return _package(GAUSSIAN_DIP, lm, x.size, visibility_index=1)


# --- phase-doubled fringe ---------------------------------------------------

def _fringe2_model(phi: np.ndarray, p: np.ndarray) -> np.ndarray:
    r0, amp, phi0 = p
    return r0 * (1.0 + amp * np.cos(2.0 * (phi + phi0)))


def _fringe2_jac(phi: np.ndarray, p: np.ndarray) -> np.ndarray:
    r0, amp, phi0 = p
    c = np.cos(2.0 * (phi + phi0))
    s = np.sin(2.0 * (phi + phi0))
    j = np.empty((phi.size, 3))
    j[:, 0] = 1.0 + amp * c
    j[:, 1] = r0 * c
    j[:, 2] = -2.0 * r0 * amp * s
    return j


def _harmonic_lstsq(phi: np.ndarray, y: np.ndarray, freq: float):
    """Linear fit y = c0 + ca cos(f phi) + cb sin(f phi); returns coeffs, sse."""
    basis = np.column_stack([np.ones_like(phi), np.cos(freq * phi), np.sin(freq * phi)])
    coeffs, *_ = np.linalg.lstsq(basis, y, rcond=None)
    sse = float(np.sum((y - basis @ coeffs) ** 2))
    return coeffs, sse


def _phases_from_settings(x: np.ndarray, cal: ThermoOpticCalibration | None) -> np.ndarray:
    if cal is None:
        return x
    # heater phase without the fitted offset; the fringe fit owns phi0
    return np.array([thermo_phase(v, cal) - cal.phi0 for v in x])


def _check_fringe_coverage(phi: np.ndarray, n_min: int) -> None:
    if phi.size < n_min:
        raise FitError(f"fringe fit needs at least {n_min} points, got {phi.size}")
    span = float(np.max(phi) - np.min(phi))
    if span < math.pi:
        raise CoverageError(
            f"phase span {span:.3f} rad covers less than half a fringe period; "
            "need at least pi"
        )


def fit_two_phi_fringe(data: ScanResult, cal: ThermoOpticCalibration | None = None) -> FitResult:
    """Fit r0 * (1 + A cos 2(phi + phi0)) to a phase (or heater-voltage) scan.

    With a calibration the settings are heater voltages and are converted to
    phase through it; phi0 is always a free parameter, so the calibration's
    own offset is not applied. The reported phi0 is reduced mod pi into
    [0, pi), flipping the sign of A into A >= 0 first if needed.
    """
    x, y, sigma = scan_arrays(data)
    phi = _phases_from_settings(x, cal)
    _check_fringe_coverage(phi, n_min=8)

    (c0, ca, cb), _ = _harmonic_lstsq(phi, y, 2.0)
    r0 = max(float(c0), 1e-12)
    amp = math.hypot(ca, cb) / r0
    phi0 = 0.5 * math.atan2(-cb, ca)
    lm = levenberg_marquardt(
        _fringe2_model, _fringe2_jac, phi, y, sigma, np.array([r0, amp, phi0])
    )

    if lm.params[1] < 0:
        lm.params[1] = -lm.params[1]
        lm.params[2] += math.pi / 2.0
    lm.params[2] = lm.params[2] % math.pi
    lm.covariance = weighted_covariance(_fringe2_jac, phi, lm.params, sigma)

    context = {}
    if cal is not None:
        context = {"alpha_deg_per_mw": cal.alpha, "resistance_ohm": cal.resistance}
    return _package(TWO_PHI_FRINGE, lm, x.size, visibility_index=1, context=context)


# --- free-frequency fringe --------------------------------------------------

def _fringef_model(phi: np.ndarray, p: np.ndarray) -> np.ndarray:
    r0, amp, freq, offset = p
    return r0 * (1.0 + amp * np.cos(freq * phi + offset))


def _fringef_jac(phi: np.ndarray, p: np.ndarray) -> np.ndarray:
    r0, amp, freq, offset = p
    arg = freq * phi + offset
    c = np.cos(arg)
    s = np.sin(arg)
    j = np.empty((phi.size, 4))
    j[:, 0] = 1.0 + amp * c
    j[:, 1] = r0 * c
    j[:, 2] = -r0 * amp * s * phi
    j[:, 3] = -r0 * amp * s
    return j


def _best_frequency(phi: np.ndarray, y: np.ndarray, freqs: np.ndarray):
    best = None
    for f in freqs:
        coeffs, sse = _harmonic_lstsq(phi, y, f)
        if best is None or sse < best[1]:
            best = (f, sse, coeffs)
    return best[0], best[2]


def fit_fringe_free_frequency(
    data: ScanResult, cal: ThermoOpticCalibration | None = None
) -> FitResult:
    """Like fit_two_phi_fringe but with the oscillation frequency free.

    Used to check that a coincidence fringe really runs at twice the phase:
    the fitted frequency should come out at 2 for the pair fringe and 1 for
    a singles fringe on the same axis.
    """
    x, y, sigma = scan_arrays(data)
    phi = _phases_from_settings(x, cal)
    _check_fringe_coverage(phi, n_min=8)

    f0, (c0, ca, cb) = _best_frequency(phi, y, np.linspace(0.25, 4.0, 376))
    r0 = max(float(c0), 1e-12)
    amp = math.hypot(ca, cb) / r0
    offset = math.atan2(-cb, ca)
    lm = levenberg_marquardt(
        _fringef_model, _fringef_jac, phi, y, sigma, np.array([r0, amp, f0, offset])
    )

    if lm.params[2] < 0:  # cos is even: fold onto positive frequency
        lm.params[2] = -lm.params[2]
        lm.params[3] = -lm.params[3]
    if lm.params[1] < 0:
        lm.params[1] = -lm.params[1]
        lm.params[3] += math.pi
    lm.params[3] = lm.params[3] % (2.0 * math.pi)
    lm.covariance = weighted_covariance(_fringef_jac, phi, lm.params, sigma)

    context = {}
    if cal is not None:
        context = {"alpha_deg_per_mw": cal.alpha, "resistance_ohm": cal.resistance}
    return _package(FREE_FREQUENCY_FRINGE, lm, x.size, visibility_index=1, context=context)


# --- classical calibration fringe -------------------------------------------

def _classical_model(power_mw: np.ndarray, p: np.ndarray) -> np.ndarray:
    r0, amp, alpha, phi0 = p
    return r0 * (1.0 + amp * np.cos(np.radians(alpha) * power_mw + phi0))


def _classical_jac(power_mw: np.ndarray, p: np.ndarray) -> np.ndarray:
    r0, amp, alpha, phi0 = p
    arg = np.radians(alpha) * power_mw + phi0
    c = np.cos(arg)
    s = np.sin(arg)
    j = np.empty((power_mw.size, 4))
    j[:, 0] = 1.0 + amp * c
    j[:, 1] = r0 * c
    j[:, 2] = -r0 * amp * s * power_mw * math.pi / 180.0
    j[:, 3] = -r0 * amp * s
    return j


def classical_fringe_calibrate(
    data: ScanResult, resistance_ohm: float
) -> tuple[ThermoOpticCalibration, FitResult]:
    """Calibrate the heater from a bright-light singles fringe.

    Settings are heater voltages; the fit runs against dissipated power
    P = V^2/R in mW with model r0 * (1 + A cos(alpha * P + phi0)), alpha in
    degrees per mW. Returns the calibration and the underlying fit. The scan
    must cover at least one full fringe period in power, judged against the
    fitted alpha.
    """
    if resistance_ohm <= 0:
        raise ValueError("resistance_ohm must be positive")
    x, y, sigma = scan_arrays(data)
    if x.size < 8:
        raise FitError(f"calibration fringe needs at least 8 points, got {x.size}")
    if np.any(x < 0):
        raise ValueError("heater voltages must be non-negative")
    power_mw = x**2 / resistance_ohm * 1e3
    span = float(np.max(power_mw) - np.min(power_mw))
    if span <= 0:
        raise DegenerateDataError("voltage scan spans zero dissipated power")

    # frequency scan in rad/mW over 0.25..4 periods across the span
    omegas = np.linspace(2.0 * math.pi * 0.25 / span, 2.0 * math.pi * 4.0 / span, 376)
    w0, (c0, ca, cb) = _best_frequency(power_mw, y, omegas)
    r0 = max(float(c0), 1e-12)
    amp = math.hypot(ca, cb) / r0
    phi0 = math.atan2(-cb, ca)
    p0 = np.array([r0, amp, math.degrees(w0), phi0])
    lm = levenberg_marquardt(_classical_model, _classical_jac, power_mw, y, sigma, p0)

    if lm.params[2] < 0:
        lm.params[2] = -lm.params[2]
        lm.params[3] = -lm.params[3]
    if lm.params[1] < 0:
        lm.params[1] = -lm.params[1]
        lm.params[3] += math.pi
    lm.params[3] = lm.params[3] % (2.0 * math.pi)
    lm.covariance = weighted_covariance(_classical_jac, power_mw, lm.params, sigma)

    alpha = float(lm.params[2])
    if alpha <= 0:
        raise FitError("calibration fringe collapsed to zero frequency")
    full_period_mw = 360.0 / alpha
    if span < full_period_mw:
        raise CoverageError(
            f"power span {span:.1f} mW is less than one fringe period "
            f"({full_period_mw:.1f} mW at the fitted slope)"
        )

    fit = _package(
        CLASSICAL_FRINGE,
        lm,
        x.size,
        visibility_index=1,
        context={"resistance_ohm": resistance_ohm, "full_period_mw": full_period_mw},
    )
    cal = ThermoOpticCalibration(
        alpha=alpha, resistance=resistance_ohm, phi0=fit.params["phi0"]
    )
    return cal, fit


# --- prediction on arbitrary settings ----------------------------------------

def fitted_curve(fit: FitResult, settings) -> np.ndarray:
    """Evaluate a converged fit on raw scan settings (delays, volts, or rad)."""
    x = np.asarray(settings, dtype=float)
    names = _MODEL_PARAMS[fit.model]
    p = np.array([fit.params[n] for n in names])
    if fit.model == GAUSSIAN_DIP:
        return _dip_model(x, p)
    if fit.model in (TWO_PHI_FRINGE, FREE_FREQUENCY_FRINGE):
        if "alpha_deg_per_mw" in fit.context:
            cal = ThermoOpticCalibration(
                alpha=fit.context["alpha_deg_per_mw"],
                resistance=fit.context["resistance_ohm"],
            )
            x = _phases_from_settings(x, cal)
        model = _fringe2_model if fit.model == TWO_PHI_FRINGE else _fringef_model
        return model(x, p)
    if fit.model == CLASSICAL_FRINGE:
        power_mw = x**2 / fit.context["resistance_ohm"] * 1e3
        return _classical_model(power_mw, p)
    raise ValueError(f"unknown fit model {fit.model!r}")
