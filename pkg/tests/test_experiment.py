import json

import pytest

from otfs_outage import cli
from otfs_outage.experiment import (
    CSV_COLUMNS,
    ConfigError,
    ExperimentConfig,
    format_csv,
    parse_snr_range,
    read_csv,
    run_sweep,
    verify_report,
)


def small_config(**kw):
    base = dict(M=4, N=4, P=3, K=1, distortion=(0.05, 0.5), snr_db=(0.0, 5.0, 10.0), trials=40, seed=7)
    base.update(kw)
    return ExperimentConfig(**base)


def test_snr_range_parsing():
    assert parse_snr_range("0:20:2") == tuple(float(x) for x in range(0, 21, 2))
    assert parse_snr_range("5") == (5.0,)
    assert parse_snr_range("0:1:0.5") == (0.0, 0.5, 1.0)
    for bad in ("a:b:c", "0:10", "0:10:0", "10:0:1"):
        with pytest.raises(ConfigError):
            parse_snr_range(bad)


def test_default_config_mirrors_reference_setup():
    cfg = ExperimentConfig().validate()
    assert (cfg.M, cfg.N, cfg.P, cfg.l_max, cfg.k_max, cfg.delta_f) == (16, 16, 5, 8, 8, 15e3)
    assert len(cfg.snr_db) == 11 and cfg.trials == 2000


@pytest.mark.parametrize("kw, needle", [
    (dict(P=200), "P=200"),
    (dict(snr_db=(5.0, 0.0)), "strictly increasing"),
    (dict(distortion=(0.7,)), "distortion"),
    (dict(M=32, N=32), "--heavy"),
    (dict(trials=0), "trials"),
    (dict(seed=-1), "seed"),
])
def test_config_errors_name_the_problem(kw, needle):
    with pytest.raises(ConfigError, match=needle):
        small_config(**kw).validate()


def test_config_file_roundtrip(tmp_path):
    cfg = small_config()
    path = tmp_path / "cfg.json"
    path.write_text(cfg.to_json())
    assert ExperimentConfig.load(path) == cfg
    path.write_text(json.dumps({"M": 4, "bogus": 1}))
    with pytest.raises(ConfigError, match="bogus"):
        ExperimentConfig.load(path)


def test_sweep_rows_and_csv_schema():
    rows = run_sweep(small_config())
    assert [(r.distortion, r.snr_db) for r in rows] == [(d, s) for d in (0.05, 0.5) for s in (0.0, 5.0, 10.0)]
    for r in rows:
        e = r.estimate
        assert e.ci_low <= e.p_hat <= e.ci_high and 0 <= e.lower_bound <= 1
        if r.distortion == 0.5:
            assert e.p_hat == 0 and e.lower_bound == 0
    text = format_csv(rows)
    lines = text.splitlines()
    assert lines[0] == ",".join(CSV_COLUMNS)
    assert len(lines) == 7
    bounds = [float(l.split(",")[7]) for l in lines[1:4]]
    assert bounds == sorted(bounds, reverse=True)


def test_sweep_is_deterministic():
    assert format_csv(run_sweep(small_config())) == format_csv(run_sweep(small_config()))
    assert format_csv(run_sweep(small_config())) != format_csv(run_sweep(small_config(seed=8)))


def test_verify_report_counts():
    report = verify_report(small_config(M=8, N=8, P=4), 30)
    assert report.ok
    assert "prop1: 30/30" in report.text and "prop2: 30/30" in report.text


def test_verify_report_single_path_equalities():
    report = verify_report(small_config(P=1), 10)
    assert report.ok
    assert "prop1: 10/10 (max slack 0.000e+00, equality 10)" in report.text
    assert "equality 10" in report.text.split("prop2")[1]


def test_verify_self_test_detects_corruption():
    report = verify_report(small_config(M=8, N=8, P=4), 5, corrupt=True)
    assert not report.ok
    assert "violation in realization 0" in report.text and "spawn_key" in report.text


def test_cli_sweep_writes_csv(tmp_path, capsys):
    out = tmp_path / "o.csv"
    rc = cli.main(["sweep", "-M", "4", "-N", "4", "-P", "3", "--trials", "20", "--snr", "0:10:5",
                   "--distortion", "0.05,0.1", "--seed", "3", "--out", str(out)])
    assert rc == 0
    rows = read_csv(out)
    assert len(rows) == 6 and list(rows[0]) == list(CSV_COLUMNS)
    assert rows[0]["seed"] == "3"


def test_cli_config_file_with_overrides(tmp_path):
    cfg = tmp_path / "c.json"
    cfg.write_text(json.dumps({"M": 4, "N": 4, "P": 2, "trials": 10, "snr_db": [0, 10], "distortion": 0.1}))
    out = tmp_path / "o.csv"
    assert cli.main(["sweep", "--config", str(cfg), "--trials", "12", "--out", str(out)]) == 0
    rows = read_csv(out)
    assert len(rows) == 2 and rows[0]["trials"] == "12"


def test_cli_verify_exit_codes(capsys):
    assert cli.main(["verify", "-M", "4", "-N", "4", "-P", "3", "--campaigns", "10"]) == 0
    assert "status: OK" in capsys.readouterr().out
    assert cli.main(["verify", "-M", "4", "-N", "4", "-P", "3", "--campaigns", "3", "--self-test"]) == 1
    assert "FAILED" in capsys.readouterr().out


def test_cli_bound(capsys):
    assert cli.main(["bound", "-P", "1", "-K", "1", "--distortion", "0", "--snr", "0"]) == 0
    out = capsys.readouterr().out.splitlines()
    assert out[0] == "snr_db,distortion,P,K,p_out_lower_bound"
    assert float(out[1].split(",")[-1]) == pytest.approx(0.6321205588, abs=1e-9)


def test_cli_config_error(capsys):
    assert cli.main(["sweep", "-P", "500", "--trials", "1"]) == 2
    assert "config error" in capsys.readouterr().err
