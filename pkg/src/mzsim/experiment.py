"""Synthetic counting experiments.

Turns interference probabilities into count records the way the bench
produces them: per-setting Poisson draws of (signal + background) over a
fixed integration time, an accidental-background measurement with both
inputs alternately blocked, and background subtraction with propagated
errors. Expectation mode skips the sampling and stores the Poisson mean
directly, which the invariant checks rely on.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, replace

import numpy as np

from .circuit import ThermoOpticCalibration, thermo_phase
from .interference import (
    TwoPhotonInput,
    hom_dip_curve,
    noon_fringe_curve,
    singles_fringe_curve,
    standard_wavepacket_pair,
)

SCAN_KINDS = ("hom", "noon", "singles", "background")

# sub-streams of the scenario seed, so scan and background draws never overlap
_SCAN_STREAM = 0
_BACKGROUND_STREAM = 1


@dataclass(frozen=True)
class SourceSpec:
    """Pair source and detector floor.

    pair_rate is the detected-pair rate entering the circuit per second;
    background_rate is the total accidental coincidence rate. For a singles
    scan pair_rate doubles as the bright-beam detection rate.
    """

    pair_rate: float
    background_rate: float
    seed: int = 0

    def __post_init__(self):
        if self.pair_rate < 0:
            raise ValueError("pair_rate must be non-negative")
        if self.background_rate < 0:
            raise ValueError("background_rate must be non-negative")


def scan_rng(source: SourceSpec, stream: int = _SCAN_STREAM) -> np.random.Generator:
    return np.random.default_rng([int(source.seed), int(stream)])


@dataclass(frozen=True)
class CountRecord:
    """One scan point: raw counts plus the derived rate and its error."""

    setting: float
    counts: float
    integration_time: float
    rate: float
    rate_err: float
    bg_rate: float | None = None
    bg_rate_err: float | None = None

    @classmethod
    def from_counts(cls, setting: float, counts: float, integration_time: float) -> "CountRecord":
        if integration_time <= 0:
            raise ValueError("integration_time must be positive")
        if counts < 0:
            raise ValueError("counts must be non-negative")
        return cls(
            setting=float(setting),
            counts=counts,
            integration_time=float(integration_time),
            rate=counts / integration_time,
            rate_err=math.sqrt(counts) / integration_time,
        )


@dataclass(frozen=True)
class ScanResult:
    """Ordered scan records of one kind (hom, noon, singles, background)."""

    kind: str
    records: tuple[CountRecord, ...]

    def __post_init__(self):
        if self.kind not in SCAN_KINDS:
            raise ValueError(f"kind must be one of {SCAN_KINDS}, got {self.kind!r}")
        object.__setattr__(self, "records", tuple(self.records))
        settings = [r.setting for r in self.records]
        diffs = np.diff(settings)
        if len(diffs) and not (np.all(diffs > 0) or np.all(diffs < 0)):
            raise ValueError("scan settings must be strictly monotone")

    @property
    def settings(self) -> tuple[float, ...]:
        return tuple(r.setting for r in self.records)

    @property
    def rates(self) -> tuple[float, ...]:
        return tuple(r.rate for r in self.records)

    @property
    def subtracted(self) -> bool:
        return bool(self.records) and self.records[0].bg_rate is not None


def simulate_counts(
    prob: float,
    source: SourceSpec,
    integration_time: float,
    rng: np.random.Generator,
    setting: float = 0.0,
    expectation: bool = False,
) -> CountRecord:
    """Poisson-sample one bin at event rate prob*pair_rate + background_rate."""
    if not -1e-12 <= prob <= 1.0 + 1e-12:
        raise ValueError(f"probability out of range: {prob}")
    prob = min(max(prob, 0.0), 1.0)
    if integration_time <= 0:
        raise ValueError("integration_time must be positive")
    mean = (prob * source.pair_rate + source.background_rate) * integration_time
    counts = mean if expectation else int(rng.poisson(mean))
    return CountRecord.from_counts(setting, counts, integration_time)


def _run_curve(kind, settings, probabilities, source, integration_time, rng, expectation):
    if rng is None:
        rng = scan_rng(source)
    records = tuple(
        simulate_counts(p, source, integration_time, rng, setting=s, expectation=expectation)
        for s, p in zip(settings, probabilities)
    )
    return ScanResult(kind=kind, records=records)


@dataclass(frozen=True)
class HomScanConfig:
    """Delay scan through the two-photon dip at a single coupler."""

    source: SourceSpec
    delays_fs: tuple[float, ...]
    integration_time_s: float
    photons: TwoPhotonInput
    eta: float = 0.5
    expectation: bool = False


def run_hom_scan(config: HomScanConfig, rng: np.random.Generator | None = None) -> ScanResult:
    curve = hom_dip_curve(config.eta, config.photons, config.delays_fs)
    return _run_curve(
        "hom", curve.settings, curve.probabilities, config.source,
        config.integration_time_s, rng, config.expectation,
    )


@dataclass(frozen=True)
class NoonScanConfig:
    """Heater-voltage scan of the two-photon fringe behind the full circuit."""

    source: SourceSpec
    voltages_v: tuple[float, ...]
    integration_time_s: float
    calibration: ThermoOpticCalibration
    overlap: float = 1.0
    eta_first: float = 0.5
    eta_second: float = 0.5
    expectation: bool = False

    def __post_init__(self):
        if not 0.0 <= self.overlap <= 1.0:
            raise ValueError("overlap must lie in [0, 1]")


def run_noon_scan(config: NoonScanConfig, rng: np.random.Generator | None = None) -> ScanResult:
    photons = standard_wavepacket_pair(config.overlap)
    phases = [thermo_phase(v, config.calibration) for v in config.voltages_v]
    curve = noon_fringe_curve(photons, phases, config.eta_first, config.eta_second)
    return _run_curve(
        "noon", config.voltages_v, curve.probabilities, config.source,
        config.integration_time_s, rng, config.expectation,
    )


@dataclass(frozen=True)
class SinglesScanConfig:
    """Heater-voltage scan of a one-input (classical light) fringe."""

    source: SourceSpec
    voltages_v: tuple[float, ...]
    integration_time_s: float
    calibration: ThermoOpticCalibration
    input_mode: int = 0
    eta_first: float = 0.5
    eta_second: float = 0.5
    expectation: bool = False


def run_singles_scan(config: SinglesScanConfig, rng: np.random.Generator | None = None) -> ScanResult:
    phases = [thermo_phase(v, config.calibration) for v in config.voltages_v]
    curve = singles_fringe_curve(
        config.input_mode, phases, config.eta_first, config.eta_second
    )
    return _run_curve(
        "singles", config.voltages_v, curve.probabilities, config.source,
        config.integration_time_s, rng, config.expectation,
    )


# --- blocked-input background -----------------------------------------------

@dataclass(frozen=True)
class BackgroundEstimate:
    """Accidental rate with its error; counts are kept when measured here."""

    rate: float
    rate_err: float
    counts_by_side: tuple[float, float] | None = None
    time_per_side_s: float | None = None

    def as_scan(self) -> ScanResult:
        if self.counts_by_side is None:
            raise ValueError("estimate has no per-side counts to serialize")
        records = tuple(
            CountRecord.from_counts(float(i), c, self.time_per_side_s)
            for i, c in enumerate(self.counts_by_side)
        )
        return ScanResult(kind="background", records=records)


def measure_background(
    source: SourceSpec,
    time_per_side_s: float = 300.0,
    rng: np.random.Generator | None = None,
    expectation: bool = False,
) -> BackgroundEstimate:
    """Block each input in turn and count accidentals.

    Each blocked side sees half the accidental rate (one arm of the random
    coincidences is gone), so the two runs pool into a single estimate of
    the full rate: B = (C1 + C2) / T with error sqrt(C1 + C2) / T.
    """
    if time_per_side_s <= 0:
        raise ValueError("time_per_side_s must be positive")
    if rng is None:
        rng = scan_rng(source, stream=_BACKGROUND_STREAM)
    mean_per_side = 0.5 * source.background_rate * time_per_side_s
    if expectation:
        counts = (mean_per_side, mean_per_side)
    else:
        counts = (int(rng.poisson(mean_per_side)), int(rng.poisson(mean_per_side)))
    total = counts[0] + counts[1]
    return BackgroundEstimate(
        rate=total / time_per_side_s,
        rate_err=math.sqrt(total) / time_per_side_s,
        counts_by_side=counts,
        time_per_side_s=time_per_side_s,
    )


def subtract_background(raw: ScanResult, background) -> ScanResult:
    """Subtract a flat (or per-setting) background rate, propagating errors.

    background is a single BackgroundEstimate applied to every record, or a
    sequence of them matching the scan length. Rates may go negative; that
    is what an unbiased subtraction does to near-zero bins.
    """
    if isinstance(background, BackgroundEstimate):
        per_record = [background] * len(raw.records)
    else:
        per_record = list(background)
        if len(per_record) != len(raw.records):
            raise ValueError(
                f"background table has {len(per_record)} entries "
                f"for {len(raw.records)} scan points"
            )
    records = tuple(
        replace(
            rec,
            rate=rec.rate - bg.rate,
            rate_err=math.sqrt(rec.rate_err**2 + bg.rate_err**2),
            bg_rate=bg.rate,
            bg_rate_err=bg.rate_err,
        )
        for rec, bg in zip(raw.records, per_record)
    )
    return ScanResult(kind=raw.kind, records=records)
