"""Command-line interface: output schema, determinism, parallel sweeps,
validation modes, and error handling."""

from __future__ import annotations

import csv

import pytest

from makertaker.cli import CSV_COLUMNS, GRID_REBATES, main

RUN_ARGS = [
    "run", "--seed", "1", "--t-end", "2000",
    "--set", "n=20", "--set", "m=2", "--set", "tau_max=300",
    "--set", "t_l=500", "--set", "t_c=400",
]
SWEEP_SETS = [
    "--set", "n=20", "--set", "m=2", "--set", "tau_max=300",
    "--set", "t_l=500", "--set", "t_c=400",
]


def _read(path):
    with open(path, newline="") as stream:
        return list(csv.reader(stream))


def test_csv_schema_is_the_documented_interface():
    assert CSV_COLUMNS == (
        "r_m", "c_t", "theta_m", "seed",
        "volatility", "mi", "m_ie_abs", "m_ie_signed", "total_cost_ratio",
        "excess_kurtosis", "acf_sq_1", "acf_sq_2", "acf_sq_3", "acf_sq_4",
        "acf_sq_5", "n_buy", "trades", "maker_pnl", "exchange_revenue",
    )


def test_standard_rebate_grid_has_twelve_points():
    assert len(GRID_REBATES) == 12
    assert GRID_REBATES[0] == "-0.100%"
    assert GRID_REBATES[-1] == "0.145%"
    assert "0.140%" in GRID_REBATES


# -- run ----------------------------------------------------------------


def test_run_writes_one_row(tmp_path):
    out = tmp_path / "run.csv"
    assert main(RUN_ARGS + ["--rebate", "0.050%", "--out", str(out)]) == 0
    header, row = _read(out)
    assert header == list(CSV_COLUMNS)
    assert row[: 4] == ["0.0005", "0.0015", "0.002", "1"]
    assert float(row[4]) > 0.0  # volatility
    assert int(row[15]) > 0  # n_buy


def test_run_is_deterministic(tmp_path):
    a, b = tmp_path / "a.csv", tmp_path / "b.csv"
    main(RUN_ARGS + ["--rebate", "0.025%", "--out", str(a)])
    main(RUN_ARGS + ["--rebate", "0.025%", "--out", str(b)])
    assert a.read_bytes() == b.read_bytes()


def test_percent_and_fraction_rebates_are_the_same(tmp_path):
    a, b = tmp_path / "a.csv", tmp_path / "b.csv"
    main(RUN_ARGS + ["--rebate", "0.05%", "--out", str(a)])
    main(RUN_ARGS + ["--rebate", "0.0005", "--out", str(b)])
    assert a.read_bytes() == b.read_bytes()


def test_run_prints_to_stdout_by_default(capsys):
    assert main(RUN_ARGS) == 0
    lines = capsys.readouterr().out.strip().splitlines()
    assert lines[0].split(",")[:4] == ["r_m", "c_t", "theta_m", "seed"]
    assert len(lines) == 2
    # Default schedule is zero rebate, not the fee-free baseline.
    assert lines[1].split(",")[:3] == ["0", "0.001", "0.003"]


def test_no_fees_flag_encodes_the_baseline(tmp_path):
    out = tmp_path / "base.csv"
    main(RUN_ARGS + ["--no-fees", "--out", str(out)])
    _, row = _read(out)
    assert row[:3] == ["0", "0", "0.003"]


def test_run_event_and_trade_logs(tmp_path):
    events = tmp_path / "events.csv"
    trades = tmp_path / "trades.csv"
    main(RUN_ARGS + [
        "--rebate", "0.050%", "--out", str(tmp_path / "m.csv"),
        "--log-events", str(events), "--trade-log", str(trades),
    ])
    event_rows = _read(events)
    assert event_rows[0] == ["step", "event", "order_id", "side", "price", "owner"]
    kinds = {row[1] for row in event_rows[1:]}
    assert {"rested", "filled", "canceled", "expired"} <= kinds
    trade_rows = _read(trades)
    assert trade_rows[0] == ["step", "price", "buyer", "seller", "taker_side", "taker_fee"]
    assert len(trade_rows) > 1
    assert all(row[5] == "15.0" for row in trade_rows[1:])  # C_T cash at 0.150%


def test_run_check_mode_passes(tmp_path):
    assert main(RUN_ARGS + ["--check", "--out", str(tmp_path / "c.csv")]) == 0


def test_config_file_with_cli_override(tmp_path):
    cfg = tmp_path / "market.cfg"
    cfg.write_text("n = 20\nm = 2\ntau_max = 300\nt_l = 500\nt_c = 400\nt_end = 9999\n")
    out = tmp_path / "out.csv"
    assert main([
        "run", "--config", str(cfg), "--seed", "2", "--t-end", "1500",
        "--out", str(out),
    ]) == 0
    _, row = _read(out)
    assert row[3] == "2"
    # --t-end overrode the file's 9999.
    trades_col = int(row[16])
    assert trades_col <= 1500


# -- sweep --------------------------------------------------------------


def test_sweep_layout_means_and_baseline(tmp_path):
    out = tmp_path / "sweep.csv"
    assert main([
        "sweep", "--seeds", "2", "--rebates", "0.000%,0.050%",
        "--t-end", "1500", *SWEEP_SETS, "--out", str(out),
    ]) == 0
    rows = _read(out)
    assert rows[0] == list(CSV_COLUMNS)
    body = rows[1:]
    # Two rebates plus the baseline, each with 2 seed rows + mean + sem.
    assert len(body) == 3 * 4
    assert [r[3] for r in body] == ["1", "2", "mean", "sem"] * 3
    assert body[0][:3] == ["0", "0.001", "0.003"]
    assert body[4][:3] == ["0.0005", "0.0015", "0.002"]
    # Baseline block: fees disabled, spread at the full expected return.
    assert body[8][:3] == ["0", "0", "0.003"]
    # The mean row is the arithmetic mean of the seed rows.
    vol_mean = (float(body[0][4]) + float(body[1][4])) / 2
    assert float(body[2][4]) == pytest.approx(vol_mean, rel=1e-12)


def test_sweep_serial_and_parallel_are_bit_identical(tmp_path):
    serial = tmp_path / "serial.csv"
    parallel = tmp_path / "parallel.csv"
    # Equals form: a leading '-' in the value would otherwise read as a flag.
    args = [
        "sweep", "--seeds", "2", "--rebates=-0.100%,0.145%",
        "--t-end", "1200", *SWEEP_SETS,
    ]
    assert main(args + ["--out", str(serial), "--jobs", "1"]) == 0
    assert main(args + ["--out", str(parallel), "--jobs", "2"]) == 0
    assert serial.read_bytes() == parallel.read_bytes()


def test_sweep_no_baseline_and_seed_list(tmp_path):
    out = tmp_path / "sweep.csv"
    main([
        "sweep", "--seeds", "5,9", "--rebates", "0.125%", "--no-baseline",
        "--t-end", "1200", *SWEEP_SETS, "--out", str(out),
    ])
    rows = _read(out)
    assert [r[3] for r in rows[1:]] == ["5", "9", "mean", "sem"]
    assert all(r[:2] == ["0.00125", "0.00225"] for r in rows[1:])


def test_sweep_default_grid_is_the_table(tmp_path):
    out = tmp_path / "sweep.csv"
    main([
        "sweep", "--seeds", "1", "--t-end", "1200", *SWEEP_SETS,
        "--no-baseline", "--out", str(out),
    ])
    rows = _read(out)
    rebate_col = [r[0] for r in rows[1:] if r[3] == "1"]
    assert len(rebate_col) == 12
    assert rebate_col[0] == "-0.001"  # -0.100%
    assert rebate_col[-1] == "0.00145"


# -- validate -----------------------------------------------------------


def test_validate_synthetic_gaussian_is_a_negative_control(capsys):
    rc = main([
        "validate", "--synthetic-gaussian", "--seeds", "2",
        "--t-end", "20000", *SWEEP_SETS,
    ])
    out = capsys.readouterr().out
    assert rc == 1
    assert "FAIL" in out
    assert "17.54" in out  # reference row for comparison


def test_validate_reports_per_seed_rows(capsys):
    main([
        "validate", "--synthetic-gaussian", "--seeds", "3,4",
        "--t-end", "10000", *SWEEP_SETS,
    ])
    out = capsys.readouterr().out
    assert "excess_kurt" in out
    for label in ("3", "4", "reference"):
        assert any(line.strip().startswith(label) for line in out.splitlines())


def test_validate_interval_must_leave_enough_returns():
    rc = main([
        "validate", "--seeds", "1", "--t-end", "500", "--interval", "100",
        *SWEEP_SETS,
    ])
    assert rc == 2  # too few subsampled returns is a usage error


# -- error handling -----------------------------------------------------


@pytest.mark.parametrize(
    "args",
    [
        ["run", "--t-end", "100", "--set", "bogus=1"],
        ["run", "--t-end", "100", "--set", "n"],  # not KEY=VALUE
        ["run", "--t-end", "100", "--rebate", "lots"],
        ["run", "--t-end", "100", "--rebate", "0.150%"],  # spread <= 0
        ["run", "--t-end", "100", "--rebate", "0.05%", "--no-fees"],
        ["run", "--config", "/nonexistent/market.cfg"],
        ["sweep", "--seeds", "x", "--t-end", "100"],
        ["sweep", "--seeds", "0", "--t-end", "100"],  # empty seed list
        ["sweep", "--seeds", "1", "--rebates", "0.9", "--t-end", "100"],
    ],
)
def test_usage_errors_exit_2(args, capsys):
    assert main(args) == 2
    assert "error:" in capsys.readouterr().err
