import json
import logging
import math

import numpy as np
import pytest

from mzsim.cli import main, resolve_config, run_scenario
from mzsim.config import load_scenario
from mzsim.errors import ConfigError
from mzsim.experiment import CountRecord, ScanResult
from mzsim.scanio import read_scan_csv, write_scan_csv

HOM_TEMPLATE = """
[scenario]
kind = hom
seed = {seed}
{scenario_extra}
[circuit]
{circuit}
[scan]
start = -600
stop = 600
points = {points}
integration_time_s = 1.0
[wavepacket]
polarization_overlap_b = 0.95
[source]
pair_rate_per_s = 1000
background_rate_per_s = 50
{background}
[output]
prefix = {prefix}
plot = {plot}
"""


def hom_config(tmp_path, seed=5, points=61, circuit="eta = 0.5", background="",
               plot="false", prefix="t", scenario_extra="", name="scan.config"):
    path = tmp_path / name
    path.write_text(
        HOM_TEMPLATE.format(
            seed=seed, points=points, circuit=circuit, background=background,
            plot=plot, prefix=prefix, scenario_extra=scenario_extra,
        )
    )
    return path


# --- scenario parsing -----------------------------------------------------

def test_bundled_configs_resolve_and_load():
    fig3 = load_scenario(resolve_config("fig3.config"))
    assert fig3.kind == "hom"
    assert fig3.seed == 1203
    assert fig3.eta == 0.5
    assert fig3.source.pair_rate == 740.625
    assert fig3.source.background_rate == 75.0
    assert fig3.measure_background
    assert fig3.background_time_per_side_s == 300.0
    assert fig3.points == 601

    fig4 = load_scenario(resolve_config("fig4.config"))
    assert fig4.kind == "noon"
    assert fig4.calibration.alpha == 0.579
    assert fig4.calibration.resistance == 850.0
    assert fig4.mode_overlap == 0.872


def test_missing_config_name():
    with pytest.raises(ConfigError):
        resolve_config("no_such_thing.config")


def test_unknown_key_is_rejected_with_location(tmp_path):
    path = hom_config(tmp_path, scenario_extra="typo_key = 1\n")
    with pytest.raises(ConfigError) as excinfo:
        load_scenario(path)
    assert "scenario.typo_key" in str(excinfo.value)


def test_unknown_section_is_rejected(tmp_path):
    path = hom_config(tmp_path)
    path.write_text(path.read_text() + "\n[mystery]\nx = 1\n")
    with pytest.raises(ConfigError, match="mystery"):
        load_scenario(path)


def test_missing_required_key(tmp_path):
    path = tmp_path / "bad.config"
    path.write_text(
        "[scenario]\nkind = hom\nseed = 1\n[circuit]\neta = 0.5\n"
        "[scan]\nstart = 0\nstop = 1\npoints = 5\nintegration_time_s = 1\n"
        "[source]\npair_rate_per_s = 10\n"
    )
    with pytest.raises(ConfigError) as excinfo:
        load_scenario(path)
    assert "source.background_rate_per_s" in str(excinfo.value)


def test_kind_validation(tmp_path):
    path = tmp_path / "bad.config"
    path.write_text("[scenario]\nkind = frobnicate\nseed = 1\n")
    with pytest.raises(ConfigError, match="kind"):
        load_scenario(path)
    path.write_text("[nothing]\nx = 1\n")
    with pytest.raises(ConfigError, match="scenario"):
        load_scenario(path)


def test_eta_and_phase_are_mutually_exclusive(tmp_path):
    both = hom_config(tmp_path, circuit="eta = 0.5\nmzi_delta_phi_rad = 1.0")
    with pytest.raises(ConfigError, match="exactly one"):
        load_scenario(both)
    neither = hom_config(tmp_path, circuit="")
    with pytest.raises(ConfigError, match="exactly one"):
        load_scenario(neither)


def test_phase_controlled_splitting(tmp_path):
    path = hom_config(tmp_path, circuit="mzi_delta_phi_rad = 1.0471975511965976")
    cfg = load_scenario(path)
    scan_cfg = cfg.build_scan_config()
    # (1 + cos(pi/3)) / 2 = 0.75
    assert scan_cfg.eta == pytest.approx(0.75, abs=1e-12)


def test_measure_and_table_are_mutually_exclusive(tmp_path):
    path = hom_config(
        tmp_path, background="[background]\nmeasure = true\ntable = bg.csv\n"
    )
    with pytest.raises(ConfigError, match="not both"):
        load_scenario(path)


def test_singles_rejects_background_subtraction(tmp_path):
    path = tmp_path / "s.config"
    path.write_text(
        "[scenario]\nkind = singles\nseed = 1\n"
        "[circuit]\nalpha_deg_per_mw = 0.579\nresistance_ohm = 850\n"
        "[scan]\nstart = 0\nstop = 23\npoints = 21\nintegration_time_s = 1\n"
        "[source]\npair_rate_per_s = 100\nbackground_rate_per_s = 0\n"
        "[background]\nmeasure = true\n"
    )
    with pytest.raises(ConfigError, match="not valid for kind=singles"):
        load_scenario(path)


def test_bool_parsing(tmp_path):
    for token, value in (("yes", True), ("off", False), ("1", True)):
        cfg = load_scenario(hom_config(tmp_path, plot=token))
        assert cfg.plot is value
    with pytest.raises(ConfigError, match="not a boolean"):
        load_scenario(hom_config(tmp_path, plot="maybe"))


def test_numeric_validation(tmp_path):
    with pytest.raises(ConfigError, match="scan.points"):
        load_scenario(hom_config(tmp_path, points=0))
    path = hom_config(tmp_path)
    path.write_text(path.read_text().replace("points = 61", "points = 6.5"))
    with pytest.raises(ConfigError, match="not an integer"):
        load_scenario(path)
    path = hom_config(tmp_path)
    path.write_text(path.read_text().replace("start = -600", "start = fast"))
    with pytest.raises(ConfigError, match="not a number"):
        load_scenario(path)
    path = hom_config(tmp_path)
    path.write_text(path.read_text().replace("stop = 600", "stop = -600"))
    with pytest.raises(ConfigError, match="coincide"):
        load_scenario(path)


def test_negative_heater_voltage_rejected(tmp_path):
    path = tmp_path / "n.config"
    path.write_text(
        "[scenario]\nkind = noon\nseed = 1\n"
        "[circuit]\nalpha_deg_per_mw = 0.579\nresistance_ohm = 850\n"
        "[scan]\nstart = -1\nstop = 23\npoints = 21\nintegration_time_s = 1\n"
        "[source]\npair_rate_per_s = 100\nbackground_rate_per_s = 0\n"
    )
    with pytest.raises(ConfigError, match="non-negative"):
        load_scenario(path)


def test_singles_input_mode_bounds(tmp_path):
    path = tmp_path / "s.config"
    path.write_text(
        "[scenario]\nkind = singles\nseed = 1\n"
        "[circuit]\nalpha_deg_per_mw = 0.579\nresistance_ohm = 850\ninput_mode = 2\n"
        "[scan]\nstart = 0\nstop = 23\npoints = 21\nintegration_time_s = 1\n"
        "[source]\npair_rate_per_s = 100\nbackground_rate_per_s = 0\n"
    )
    with pytest.raises(ConfigError, match="input_mode"):
        load_scenario(path)


# --- scenario execution -----------------------------------------------------

def test_run_scenario_writes_all_artifacts(tmp_path):
    path = hom_config(
        tmp_path,
        background="[background]\nmeasure = true\ntime_per_side_s = 10\n",
    )
    cfg = load_scenario(path)
    report = run_scenario(cfg, tmp_path / "out")
    files = report["files"]
    for key in ("raw_csv", "background_csv", "subtracted_csv", "report"):
        assert (tmp_path / "out" / f"t_{key.split('_')[0]}").parent.exists()
        assert key in files
    raw = read_scan_csv(files["raw_csv"], kind="hom")
    assert len(raw.records) == 61
    sub = read_scan_csv(files["subtracted_csv"], kind="hom")
    assert sub.records[0].bg_rate is not None
    with open(files["report"]) as fh:
        loaded = json.load(fh)
    assert set(loaded) == {"scenario", "background", "fits", "files"}
    assert loaded["fits"]["raw"]["visibility"] == pytest.approx(
        report["fits"]["raw"]["visibility"]
    )
    assert loaded["fits"]["subtracted"] is not None
    assert loaded["background"]["time_per_side_s"] == 10.0


def test_run_scenario_plots(tmp_path):
    path = hom_config(tmp_path, points=21, plot="true")
    cfg = load_scenario(path)
    report = run_scenario(cfg, tmp_path / "out")
    svg = report["files"]["raw_svg"]
    with open(svg) as fh:
        assert "<svg" in fh.read(2000)


def test_background_scenario(tmp_path):
    path = tmp_path / "bg.config"
    path.write_text(
        "[scenario]\nkind = background\nseed = 3\n"
        "[source]\npair_rate_per_s = 0\nbackground_rate_per_s = 80\n"
        "[background]\ntime_per_side_s = 50\n"
    )
    cfg = load_scenario(path)
    report = run_scenario(cfg, tmp_path / "out")
    assert report["background"]["rate_per_s"] == pytest.approx(80.0, rel=0.1)
    scan = read_scan_csv(report["files"]["background_csv"], kind="background")
    assert len(scan.records) == 2


def test_background_table_flow(tmp_path):
    grid = np.linspace(-600.0, 600.0, 61)
    table = ScanResult(
        kind="background",
        records=tuple(
            CountRecord.from_counts(float(x), 500, 10.0) for x in grid
        ),
    )
    table_path = tmp_path / "bg.csv"
    write_scan_csv(table, table_path)
    path = hom_config(tmp_path, background="[background]\ntable = bg.csv\n")
    cfg = load_scenario(path)
    report = run_scenario(cfg, tmp_path / "out")
    raw = read_scan_csv(report["files"]["raw_csv"], kind="hom")
    sub = read_scan_csv(report["files"]["subtracted_csv"], kind="hom")
    for r, s in zip(raw.records, sub.records):
        assert s.rate == pytest.approx(r.rate - 50.0)
        assert s.rate_err == pytest.approx(math.hypot(r.rate_err, 50.0 / 500**0.5))


def test_background_table_must_match_grid(tmp_path):
    table = ScanResult(
        kind="background",
        records=tuple(CountRecord.from_counts(float(i), 500, 10.0) for i in range(5)),
    )
    write_scan_csv(table, tmp_path / "bg.csv")
    path = hom_config(tmp_path, background="[background]\ntable = bg.csv\n")
    cfg = load_scenario(path)
    with pytest.raises(ConfigError, match="rows"):
        run_scenario(cfg, tmp_path / "out")


# --- CSV round trips ----------------------------------------------------------

def test_csv_write_read_write_is_byte_identical(tmp_path):
    path = hom_config(tmp_path, background="[background]\nmeasure = true\n")
    cfg = load_scenario(path)
    report = run_scenario(cfg, tmp_path / "out")
    for key in ("raw_csv", "subtracted_csv"):
        first = report["files"][key]
        scan = read_scan_csv(first, kind="hom")
        second = tmp_path / "copy.csv"
        write_scan_csv(scan, second)
        with open(first, "rb") as fh:
            a = fh.read()
        with open(second, "rb") as fh:
            b = fh.read()
        assert a == b


def test_csv_header_is_validated(tmp_path):
    path = tmp_path / "bad.csv"
    path.write_text("a,b,c\n1,2,3\n")
    with pytest.raises(ValueError, match="header"):
        read_scan_csv(path, kind="hom")


# --- command line ----------------------------------------------------------------

def test_cli_simulate_is_deterministic(tmp_path, capsys):
    path = hom_config(tmp_path)
    assert main(["simulate", str(path), "--out-dir", str(tmp_path / "a")]) == 0
    assert main(["simulate", str(path), "--out-dir", str(tmp_path / "b")]) == 0
    assert main(
        ["simulate", str(path), "--seed", "99", "--out-dir", str(tmp_path / "c")]
    ) == 0
    out = capsys.readouterr().out
    assert "visibility" in out
    a = (tmp_path / "a" / "t_raw.csv").read_bytes()
    b = (tmp_path / "b" / "t_raw.csv").read_bytes()
    c = (tmp_path / "c" / "t_raw.csv").read_bytes()
    assert a == b
    assert a != c


def test_cli_expectation_mode_ignores_seed(tmp_path):
    path = hom_config(tmp_path)
    main(["simulate", str(path), "--expectation-mode", "--out-dir", str(tmp_path / "a")])
    main(["simulate", str(path), "--expectation-mode", "--seed", "99",
          "--out-dir", str(tmp_path / "b")])
    assert (tmp_path / "a" / "t_raw.csv").read_bytes() == (
        tmp_path / "b" / "t_raw.csv"
    ).read_bytes()


def test_cli_out_dir_env(tmp_path, monkeypatch):
    monkeypatch.setenv("MZSIM_OUT_DIR", str(tmp_path / "env_out"))
    path = hom_config(tmp_path)
    assert main(["simulate", str(path)]) == 0
    assert (tmp_path / "env_out" / "t_raw.csv").exists()


def test_cli_fit_roundtrip(tmp_path, capsys):
    path = hom_config(tmp_path)
    main(["simulate", str(path), "--out-dir", str(tmp_path / "out")])
    csv = str(tmp_path / "out" / "t_raw.csv")
    assert main(["fit", csv, "--model", "dip"]) == 0
    fit_json = tmp_path / "out" / "t_raw_fit.json"
    assert fit_json.exists()
    assert "gaussian_dip" in capsys.readouterr().out
    assert main(
        ["plot", csv, "--fit", str(fit_json), "--out", str(tmp_path / "p.svg")]
    ) == 0
    assert (tmp_path / "p.svg").exists()


def test_cli_fringe_needs_full_calibration(tmp_path):
    path = hom_config(tmp_path)
    main(["simulate", str(path), "--out-dir", str(tmp_path / "out")])
    csv = str(tmp_path / "out" / "t_raw.csv")
    assert main(["fit", csv, "--model", "fringe", "--alpha", "0.579"]) == 2


def test_cli_exit_codes(tmp_path):
    assert main(["simulate", "missing.config"]) == 2
    bad = hom_config(tmp_path, points=0)
    assert main(["simulate", str(bad)]) == 2

    short = ScanResult(
        kind="hom",
        records=tuple(
            CountRecord.from_counts(float(i), 100, 1.0) for i in range(4)
        ),
    )
    short_csv = tmp_path / "short.csv"
    write_scan_csv(short, short_csv)
    assert main(["fit", str(short_csv), "--model", "dip"]) == 3

    ok = hom_config(tmp_path)
    main(["simulate", str(ok), "--out-dir", str(tmp_path / "out")])
    csv = str(tmp_path / "out" / "t_raw.csv")
    missing_dir = tmp_path / "not_a_dir" / "fit.json"
    assert main(["fit", csv, "--model", "dip", "--out", str(missing_dir)]) == 4


def test_cli_selftest_bias_hook():
    assert main(["selftest", "--bias", "1e-6"]) == 1


def test_plot_without_fit_warns(tmp_path, caplog):
    from mzsim.plotting import emit_plot

    scan = ScanResult(
        kind="hom",
        records=tuple(
            CountRecord.from_counts(float(i), 100 + i, 1.0) for i in range(6)
        ),
    )
    with caplog.at_level(logging.WARNING, logger="mzsim.plotting"):
        emit_plot(scan, None, str(tmp_path / "x.svg"))
    assert any("no fit" in rec.message for rec in caplog.records)
    assert (tmp_path / "x.svg").exists()
