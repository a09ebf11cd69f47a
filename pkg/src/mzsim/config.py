"""Scenario configs.

INI files describing one synthetic run: what to scan, the circuit behind it,
the source rates, whether to measure and subtract background, and what to
write out. Parsing is strict: unknown sections or keys are rejected with
their location, so a typo cannot silently fall back to a default.
"""

from __future__ import annotations

import configparser
import math
from dataclasses import dataclass, field
from pathlib import Path

import numpy as np

from .circuit import ThermoOpticCalibration, mzi_effective_reflectivity
from .errors import ConfigError
from .experiment import (
    HomScanConfig,
    NoonScanConfig,
    SinglesScanConfig,
    SourceSpec,
)
from .interference import standard_wavepacket_pair

_REQUIRED = object()

# section -> key -> (kinds that accept it, kinds that require it)
_ALL = ("hom", "noon", "singles", "background")
_HEATED = ("noon", "singles")
_SCANNED = ("hom", "noon", "singles")

_SCHEMA: dict[str, dict[str, tuple[tuple[str, ...], tuple[str, ...]]]] = {
    "scenario": {
        "kind": (_ALL, _ALL),
        "seed": (_ALL, _ALL),
        "expectation_mode": (_ALL, ()),
    },
    "circuit": {
        "eta": (("hom",), ()),
        "mzi_delta_phi_rad": (("hom",), ()),
        "alpha_deg_per_mw": (_HEATED, _HEATED),
        "resistance_ohm": (_HEATED, _HEATED),
        "phi0_rad": (_HEATED, ()),
        "eta_first": (_HEATED, ()),
        "eta_second": (_HEATED, ()),
        "input_mode": (("singles",), ()),
    },
    "wavepacket": {
        "center_wavelength_nm": (("hom",), ()),
        "bandwidth_fwhm_nm": (("hom",), ()),
        "polarization_overlap_a": (("hom",), ()),
        "polarization_overlap_b": (("hom",), ()),
        "mode_overlap": (("noon",), ()),
    },
    "scan": {
        "start": (_SCANNED, _SCANNED),
        "stop": (_SCANNED, _SCANNED),
        "points": (_SCANNED, _SCANNED),
        "integration_time_s": (_SCANNED, _SCANNED),
    },
    "source": {
        "pair_rate_per_s": (_ALL, _ALL),
        "background_rate_per_s": (_ALL, _ALL),
    },
    # blocked-input backgrounds are a coincidence concept; a singles scan
    # has no pair accidentals to subtract, so only hom and noon accept them
    "background": {
        "measure": (("hom", "noon"), ()),
        "time_per_side_s": (("hom", "noon", "background"), ()),
        "table": (("hom", "noon"), ()),
    },
    "output": {
        "prefix": (_ALL, ()),
        "plot": (_ALL, ()),
    },
}

_BOOL_TOKENS = {
    "true": True, "yes": True, "on": True, "1": True,
    "false": False, "no": False, "off": False, "0": False,
}


@dataclass
class ScenarioConfig:
    """Typed view of one scenario file."""

    kind: str
    seed: int
    expectation: bool
    source: SourceSpec
    # scan grid (absent for kind=background)
    start: float = 0.0
    stop: float = 0.0
    points: int = 0
    integration_time_s: float = 0.0
    # circuit
    eta: float | None = None
    mzi_delta_phi_rad: float | None = None
    calibration: ThermoOpticCalibration | None = None
    eta_first: float = 0.5
    eta_second: float = 0.5
    input_mode: int = 0
    # wavepackets (hom) / overlap (noon)
    center_wavelength_nm: float = 830.0
    bandwidth_fwhm_nm: float = 3.0
    polarization_overlap_a: float = 1.0
    polarization_overlap_b: float = 1.0
    mode_overlap: float = 1.0
    # background handling
    measure_background: bool = False
    background_time_per_side_s: float = 300.0
    background_table: Path | None = None
    # output
    prefix: str = "scan"
    plot: bool = True
    source_path: Path | None = field(default=None, repr=False)

    def settings_grid(self) -> tuple[float, ...]:
        return tuple(np.linspace(self.start, self.stop, self.points))

    def build_scan_config(self):
        if self.kind == "hom":
            eta = self.eta
            if eta is None:
                eta = mzi_effective_reflectivity(self.mzi_delta_phi_rad)
            pair = standard_wavepacket_pair(
                overlap=self.polarization_overlap_a * self.polarization_overlap_b,
                center_wavelength_nm=self.center_wavelength_nm,
                bandwidth_fwhm_nm=self.bandwidth_fwhm_nm,
            )
            return HomScanConfig(
                source=self.source,
                delays_fs=self.settings_grid(),
                integration_time_s=self.integration_time_s,
                photons=pair,
                eta=eta,
                expectation=self.expectation,
            )
        if self.kind == "noon":
            return NoonScanConfig(
                source=self.source,
                voltages_v=self.settings_grid(),
                integration_time_s=self.integration_time_s,
                calibration=self.calibration,
                overlap=self.mode_overlap,
                eta_first=self.eta_first,
                eta_second=self.eta_second,
                expectation=self.expectation,
            )
        if self.kind == "singles":
            return SinglesScanConfig(
                source=self.source,
                voltages_v=self.settings_grid(),
                integration_time_s=self.integration_time_s,
                calibration=self.calibration,
                input_mode=self.input_mode,
                eta_first=self.eta_first,
                eta_second=self.eta_second,
                expectation=self.expectation,
            )
        raise ConfigError(f"kind {self.kind!r} does not define a scan")


class _Sections:
    """Raw key/value view with schema checks and typed getters."""

    def __init__(self, parser: configparser.ConfigParser, kind: str, path: Path):
        self.kind = kind
        self.path = path
        self.data = {s: dict(parser.items(s)) for s in parser.sections()}

    def check_schema(self):
        for section, keys in self.data.items():
            if section not in _SCHEMA:
                raise ConfigError(f"unknown section [{section}]", location=str(self.path))
            for key in keys:
                entry = _SCHEMA[section].get(key)
                if entry is None:
                    raise ConfigError("unknown key", location=f"{section}.{key}")
                accepted, _ = entry
                if self.kind not in accepted:
                    raise ConfigError(
                        f"not valid for kind={self.kind}", location=f"{section}.{key}"
                    )
        for section, keys in _SCHEMA.items():
            for key, (_, required) in keys.items():
                if self.kind in required and self.data.get(section, {}).get(key) is None:
                    raise ConfigError("missing required key", location=f"{section}.{key}")

    def _raw(self, section: str, key: str, default):
        value = self.data.get(section, {}).get(key)
        if value is None:
            if default is _REQUIRED:
                raise ConfigError("missing required key", location=f"{section}.{key}")
            return None
        return value

    def get_float(self, section, key, default=_REQUIRED, minimum=None, maximum=None):
        raw = self._raw(section, key, default)
        if raw is None:
            return default
        try:
            value = float(raw)
        except ValueError:
            raise ConfigError(f"not a number: {raw!r}", location=f"{section}.{key}") from None
        if not math.isfinite(value):
            raise ConfigError("must be finite", location=f"{section}.{key}")
        if minimum is not None and value < minimum:
            raise ConfigError(f"must be >= {minimum}, got {value}", location=f"{section}.{key}")
        if maximum is not None and value > maximum:
            raise ConfigError(f"must be <= {maximum}, got {value}", location=f"{section}.{key}")
        return value

    def get_int(self, section, key, default=_REQUIRED, minimum=None):
        raw = self._raw(section, key, default)
        if raw is None:
            return default
        try:
            value = int(raw)
        except ValueError:
            raise ConfigError(f"not an integer: {raw!r}", location=f"{section}.{key}") from None
        if minimum is not None and value < minimum:
            raise ConfigError(f"must be >= {minimum}, got {value}", location=f"{section}.{key}")
        return value

    def get_bool(self, section, key, default=_REQUIRED):
        raw = self._raw(section, key, default)
        if raw is None:
            return default
        token = str(raw).strip().lower()
        if token not in _BOOL_TOKENS:
            raise ConfigError(f"not a boolean: {raw!r}", location=f"{section}.{key}")
        return _BOOL_TOKENS[token]

    def get_str(self, section, key, default=_REQUIRED):
        raw = self._raw(section, key, default)
        return default if raw is None else str(raw)


def load_scenario(path) -> ScenarioConfig:
    """Parse and validate one scenario file."""
    path = Path(path)
    parser = configparser.ConfigParser(
        interpolation=None, inline_comment_prefixes=("#",), strict=True
    )
    try:
        text = path.read_text()
    except OSError as exc:
        raise ConfigError(f"cannot read config: {exc}", location=str(path)) from exc
    try:
        parser.read_string(text, source=str(path))
    except configparser.Error as exc:
        raise ConfigError(f"parse failure: {exc}", location=str(path)) from exc

    if not parser.has_section("scenario"):
        raise ConfigError("missing [scenario] section", location=str(path))
    kind = parser.get("scenario", "kind", fallback="").strip()
    if kind not in _ALL:
        raise ConfigError(
            f"kind must be one of {_ALL}, got {kind!r}", location="scenario.kind"
        )

    sec = _Sections(parser, kind, path)
    sec.check_schema()

    cfg = ScenarioConfig(
        kind=kind,
        seed=sec.get_int("scenario", "seed", minimum=0),
        expectation=sec.get_bool("scenario", "expectation_mode", default=False),
        source=SourceSpec(
            pair_rate=sec.get_float("source", "pair_rate_per_s", minimum=0.0),
            background_rate=sec.get_float("source", "background_rate_per_s", minimum=0.0),
            seed=sec.get_int("scenario", "seed", minimum=0),
        ),
        measure_background=sec.get_bool("background", "measure", default=False),
        background_time_per_side_s=sec.get_float(
            "background", "time_per_side_s", default=300.0, minimum=1e-9
        ),
        prefix=sec.get_str("output", "prefix", default=path.stem),
        plot=sec.get_bool("output", "plot", default=True),
        source_path=path,
    )

    table = sec.get_str("background", "table", default=None)
    if table is not None:
        if cfg.measure_background:
            raise ConfigError(
                "choose either measure=true or a table, not both",
                location="background.table",
            )
        cfg.background_table = Path(table)
        if not cfg.background_table.is_absolute():
            cfg.background_table = path.parent / cfg.background_table

    if kind in _SCANNED:
        cfg.start = sec.get_float("scan", "start")
        cfg.stop = sec.get_float("scan", "stop")
        cfg.points = sec.get_int("scan", "points", minimum=1)
        cfg.integration_time_s = sec.get_float("scan", "integration_time_s", minimum=1e-9)
        if cfg.points > 1 and cfg.start == cfg.stop:
            raise ConfigError("start and stop coincide", location="scan.stop")

    if kind == "hom":
        eta = sec.get_float("circuit", "eta", default=None, minimum=0.0, maximum=1.0)
        delta = sec.get_float("circuit", "mzi_delta_phi_rad", default=None)
        if (eta is None) == (delta is None):
            raise ConfigError(
                "give exactly one of eta or mzi_delta_phi_rad", location="circuit.eta"
            )
        cfg.eta = eta
        cfg.mzi_delta_phi_rad = delta
        cfg.center_wavelength_nm = sec.get_float(
            "wavepacket", "center_wavelength_nm", default=830.0, minimum=1e-3
        )
        cfg.bandwidth_fwhm_nm = sec.get_float(
            "wavepacket", "bandwidth_fwhm_nm", default=3.0, minimum=1e-6
        )
        cfg.polarization_overlap_a = sec.get_float(
            "wavepacket", "polarization_overlap_a", default=1.0, minimum=0.0, maximum=1.0
        )
        cfg.polarization_overlap_b = sec.get_float(
            "wavepacket", "polarization_overlap_b", default=1.0, minimum=0.0, maximum=1.0
        )

    if kind in _HEATED:
        cfg.calibration = ThermoOpticCalibration(
            alpha=sec.get_float("circuit", "alpha_deg_per_mw", minimum=1e-9),
            resistance=sec.get_float("circuit", "resistance_ohm", minimum=1e-9),
            phi0=sec.get_float("circuit", "phi0_rad", default=0.0),
        )
        cfg.eta_first = sec.get_float("circuit", "eta_first", default=0.5, minimum=0.0, maximum=1.0)
        cfg.eta_second = sec.get_float("circuit", "eta_second", default=0.5, minimum=0.0, maximum=1.0)
        if cfg.start < 0 or cfg.stop < 0:
            raise ConfigError("heater voltages must be non-negative", location="scan.start")

    if kind == "noon":
        cfg.mode_overlap = sec.get_float(
            "wavepacket", "mode_overlap", default=1.0, minimum=0.0, maximum=1.0
        )
    if kind == "singles":
        cfg.input_mode = sec.get_int("circuit", "input_mode", default=0, minimum=0)
        if cfg.input_mode > 1:
            raise ConfigError("input_mode must be 0 or 1", location="circuit.input_mode")

    return cfg
