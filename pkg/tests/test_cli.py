"""Config parsing, CSV persistence, and exit-code contract of the CLI."""

import subprocess
import sys

import numpy as np
import pytest

from imtsar import cli, engine


def run_cli(args):
    return cli.main(list(args))


# ---------------------------------------------------------------------------
# parse_config

def test_empty_document_is_baseline():
    cfg = cli.parse_config("")
    assert cfg.bla_deg == 50.0
    assert cfg.operators == 4
    assert not cfg.ssl_enabled
    assert cfg.snapshots == 163840
    assert cfg.resolved_noise_bandwidth_mhz == 400.0


def test_comments_blanks_and_quotes():
    doc = """
    # a comment line

    scenario.operators = 1
    scenario.backend = "python"
    scenario.sar_table_path = none
    """
    cfg = cli.parse_config(doc)
    assert cfg.operators == 1
    assert cfg.backend == "python"
    assert cfg.sar_table_path is None


def test_unknown_key_reports_path():
    with pytest.raises(cli.ConfigError) as err:
        cli.parse_config("scenario.oprators = 4")
    assert err.value.path == "scenario.oprators"
    with pytest.raises(cli.ConfigError) as err:
        cli.parse_config("deploymnt.bs_af = 0.5")
    assert err.value.path == "deploymnt.bs_af"


def test_duplicate_key_rejected():
    with pytest.raises(cli.ConfigError, match="duplicate"):
        cli.parse_config("scenario.seed = 1\nscenario.seed = 2")


def test_bad_literals_name_the_line():
    with pytest.raises(cli.ConfigError, match="line 1"):
        cli.parse_config("scenario.operators = 4.5")
    with pytest.raises(cli.ConfigError, match="true or false"):
        cli.parse_config("scenario.ssl_enabled = yes")
    with pytest.raises(cli.ConfigError, match="key = value"):
        cli.parse_config("scenario.operators")


@pytest.mark.parametrize("doc", [
    "scenario.operators = 0",
    "scenario.bla_deg = 30",
    "scenario.backend = fortran",
    "scenario.seed = -1",
    "deployment.bs_af = 1.5",
    "deployment.rayleigh_sigma_m = 0",
    "array.polarizations = 3",
    "array.n_v = 0",
])
def test_out_of_range_values(doc):
    with pytest.raises(cli.ConfigError):
        cli.parse_config(doc)


def test_noise_rule_cross_check():
    # 400 MHz reference with a single operator contradicts the case
    # definitions (100 MHz per co-frequency operator)
    with pytest.raises(cli.ConfigError) as err:
        cli.parse_config("scenario.operators = 1\n"
                         "scenario.noise_bandwidth_mhz = 400")
    assert err.value.path == "scenario.noise_bandwidth_mhz"
    cfg = cli.parse_config("scenario.operators = 1\n"
                           "scenario.noise_bandwidth_mhz = 100")
    assert cfg.resolved_noise_bandwidth_mhz == 100.0


def test_ssl_key_activates_taylor_default():
    cfg = cli.parse_config("scenario.ssl_enabled = true")
    assert cfg.ssl_enabled
    ctx = engine._scenario_context(cfg)
    assert ctx.normalizer is not None
    assert ctx.weights.target_sll_db == -30.0


def test_require_table_needs_a_path(tmp_path):
    with pytest.raises(cli.ConfigError) as err:
        cli.parse_config("sar.require_table = true")
    assert err.value.path == "scenario.sar_table_path"
    doc = (f"sar.require_table = true\n"
           f"scenario.sar_table_path = {tmp_path}/t.csv")
    parsed = cli.parse_document(doc)
    assert parsed.require_table
    assert parsed.scenario.sar_table_path == f"{tmp_path}/t.csv"


def test_deployment_and_array_keys_flow_to_engine():
    cfg = cli.parse_config("deployment.rayleigh_sigma_m = 48\narray.n_v = 4")
    assert cfg.deployment_overrides == (("rayleigh_sigma_m", 48.0),)
    ctx = engine._scenario_context(cfg)
    assert ctx.params.rayleigh_sigma_m == 48.0
    assert len(ctx.kernel.v_taper) == 4


def test_default_equal_overrides_are_dropped():
    # spelling out a default must not change the scenario's identity
    cfg = cli.parse_config("deployment.bs_af = 0.75\narray.n_h = 8")
    assert cfg.deployment_overrides == ()
    assert cfg.array_overrides == ()
    assert cfg == engine.ScenarioConfig()


def test_schema_mirrors_engine_fields():
    assert set(cli._DEPLOYMENT_SCHEMA) == engine.DEPLOYMENT_OVERRIDE_KEYS
    assert set(cli._ARRAY_SCHEMA) == engine.ARRAY_OVERRIDE_KEYS
    scenario_fields = {f.name for f in
                       engine.ScenarioConfig.__dataclass_fields__.values()}
    assert set(cli._SCENARIO_SCHEMA) == scenario_fields - {
        "deployment_overrides", "array_overrides"}


def test_resolved_document_round_trips():
    doc = ("scenario.operators = 1\nscenario.ssl_enabled = true\n"
           "deployment.rayleigh_sigma_m = 48\narray.n_v = 4\n"
           "scenario.seed = 9")
    cfg = cli.parse_config(doc)
    again = cli.parse_config(cli.resolved_document(cfg))
    assert again == cfg
    pinned = cli.resolved_document(cfg, backend="python")
    assert "scenario.backend = python" in pinned


# ---------------------------------------------------------------------------
# formatting

@pytest.mark.parametrize("value,expected", [
    (0.0, "0.00000"),
    (1.0, "1.00000"),
    (-114.9567, "-114.957"),
    (6.103515625e-06, "0.00000610352"),
    (163840.0, "163840"),
    (0.33, "0.330000"),
])
def test_fmt6_decimal_six_significant(value, expected):
    assert cli._fmt6(value) == expected


def test_scenario_labels():
    assert cli.scenario_label(engine.ScenarioConfig()) == "baseline"
    assert cli.scenario_label(engine.case_config("case2", seed=7)) == "case2"
    assert cli.scenario_label(
        engine.ScenarioConfig(operators=2, noise_bandwidth_mhz=200.0)
    ) == "custom"
    # an explicit rule-consistent bandwidth is still the named case
    assert cli.scenario_label(
        engine.ScenarioConfig(noise_bandwidth_mhz=400.0)) == "baseline"


# ---------------------------------------------------------------------------
# run command

SMALL_DOC = "scenario.snapshots = 48\nscenario.seed = 5\n"


def write_cfg(tmp_path, text=SMALL_DOC, name="run.cfg"):
    path = tmp_path / name
    path.write_text(text)
    return path


def test_run_writes_contractual_files(tmp_path, capsys):
    cfg_path = write_cfg(tmp_path)
    out = tmp_path / "out"
    assert run_cli(["run", "--config", str(cfg_path), "--out", str(out)]) == 0
    ccdf_lines = (out / "ccdf.csv").read_text().splitlines()
    assert ccdf_lines[0] == "i_over_n_db,prob_exceeded"
    assert len(ccdf_lines) == 1 + 48
    # decimal formatting, never scientific notation
    assert not any("e" in line or "E" in line for line in ccdf_lines[1:])
    summary_lines = (out / "summary.csv").read_text().splitlines()
    assert summary_lines[0] == "scenario,in_at_1pct_db,margin_db,pass"
    label, level, margin, verdict = summary_lines[1].split(",")
    assert label == "baseline"
    assert verdict in ("true", "false")
    assert float(level) + float(margin) == pytest.approx(-6.0, abs=1e-4)
    # the fallback pattern is called out in the console and the manifest
    err = capsys.readouterr().err
    assert "parametric fallback" in err
    assert "parametric fallback" in (out / "manifest.txt").read_text()
    assert not list(out.glob("*.part"))


def test_run_summary_matches_ccdf_order_statistic(tmp_path):
    cfg_path = write_cfg(tmp_path)
    out = tmp_path / "out"
    run_cli(["run", "--config", str(cfg_path), "--out", str(out)])
    rows = (out / "ccdf.csv").read_text().splitlines()[1:]
    values = np.array([float(r.split(",")[0]) for r in rows])
    stated = float((out / "summary.csv").read_text()
                   .splitlines()[1].split(",")[1])
    table = engine.CcdfTable.from_samples(values)
    assert stated == pytest.approx(table.value_at_exceedance(1.0), abs=5e-5)


def test_rerun_and_manifest_reingest_are_byte_identical(tmp_path):
    cfg_path = write_cfg(tmp_path)
    out1, out2, out3 = (tmp_path / d for d in ("o1", "o2", "o3"))
    run_cli(["run", "--config", str(cfg_path), "--out", str(out1)])
    run_cli(["run", "--config", str(cfg_path), "--out", str(out2)])
    assert (out1 / "ccdf.csv").read_bytes() == (out2 / "ccdf.csv").read_bytes()
    assert (out1 / "summary.csv").read_bytes() == \
        (out2 / "summary.csv").read_bytes()
    # the manifest re-ingests as a config and reproduces every CSV
    run_cli(["run", "--config", str(out1 / "manifest.txt"),
             "--out", str(out3)])
    assert (out1 / "ccdf.csv").read_bytes() == (out3 / "ccdf.csv").read_bytes()
    assert (out1 / "summary.csv").read_bytes() == \
        (out3 / "summary.csv").read_bytes()
    strip = lambda p: [l for l in p.read_text().splitlines()
                       if not l.startswith("#")]
    assert strip(out1 / "manifest.txt") == strip(out3 / "manifest.txt")


def test_manifest_pins_resolved_backend(tmp_path):
    cfg_path = write_cfg(tmp_path)
    out = tmp_path / "out"
    run_cli(["run", "--config", str(cfg_path), "--out", str(out)])
    pinned = [l for l in (out / "manifest.txt").read_text().splitlines()
              if l.startswith("scenario.backend")]
    assert pinned and pinned[0].split(" = ")[1] in ("python", "cython")


def test_flag_overrides_beat_document(tmp_path):
    cfg_path = write_cfg(tmp_path)
    out = tmp_path / "out"
    run_cli(["run", "--config", str(cfg_path), "--out", str(out),
             "--seed", "11", "--snapshots", "16"])
    text = (out / "manifest.txt").read_text()
    assert "scenario.seed = 11" in text
    assert "scenario.snapshots = 16" in text
    assert len((out / "ccdf.csv").read_text().splitlines()) == 17


def test_out_dir_environment_override(tmp_path, monkeypatch):
    cfg_path = write_cfg(tmp_path)
    env_out = tmp_path / "env_out"
    monkeypatch.setenv(cli.OUT_DIR_ENV, str(env_out))
    run_cli(["run", "--config", str(cfg_path), "--out",
             str(tmp_path / "ignored")])
    assert (env_out / "ccdf.csv").exists()
    assert not (tmp_path / "ignored").exists()


def test_export_distributions(tmp_path):
    cfg_path = write_cfg(tmp_path, "scenario.snapshots = 8\n")
    out = tmp_path / "out"
    assert run_cli(["run", "--config", str(cfg_path), "--out", str(out),
                    "--export-distributions"]) == 0
    heads = {
        "clutter_cdf.csv": "prob,clutter_db",
        "steering_hist.csv": "axis,bin_lo_deg,bin_hi_deg,count",
        "gain_ccdf.csv": "gain_dbi,prob_exceeded",
        "tig_hist.csv": "bin_lo_db,bin_hi_db,count",
    }
    for name, header in heads.items():
        lines = (out / name).read_text().splitlines()
        assert lines[0] == header
        assert len(lines) > 2
    # the steering histogram covers the full coverage cone and nothing else
    steering = (out / "steering_hist.csv").read_text().splitlines()[1:]
    vertical = [l for l in steering if l.startswith("vertical")]
    assert sum(int(l.split(",")[3]) for l in vertical) == 50000


# ---------------------------------------------------------------------------
# exit codes

def test_config_error_exit_1(tmp_path, capsys):
    cfg_path = write_cfg(tmp_path, "scenario.oprators = 4\n")
    code = run_cli(["validate", "--config", str(cfg_path)])
    assert code == 1
    assert "scenario.oprators" in capsys.readouterr().err


def test_usage_error_exit_1(capsys):
    assert run_cli([]) == 1
    assert run_cli(["run"]) == 1   # missing --config
    capsys.readouterr()


def test_missing_config_file_exit_1(tmp_path):
    assert run_cli(["validate", "--config", str(tmp_path / "nope.cfg")]) == 1


def test_missing_sar_table_exit_1(tmp_path, capsys):
    cfg_path = write_cfg(
        tmp_path, f"scenario.sar_table_path = {tmp_path}/absent.csv\n")
    assert run_cli(["validate", "--config", str(cfg_path)]) == 1
    assert "scenario.sar_table_path" in capsys.readouterr().err


def test_unwritable_out_exit_2(tmp_path):
    cfg_path = write_cfg(tmp_path)
    blocker = tmp_path / "blocker"
    blocker.write_text("a plain file, not a directory")
    code = run_cli(["run", "--config", str(cfg_path), "--out",
                    str(blocker / "sub")])
    assert code == 2


def test_validate_prints_resolved_config(tmp_path, capsys):
    cfg_path = write_cfg(tmp_path, "scenario.operators = 1\n")
    assert run_cli(["validate", "--config", str(cfg_path)]) == 0
    captured = capsys.readouterr()
    assert "scenario.operators = 1" in captured.out
    assert "scenario.noise_bandwidth_mhz = 100.0" in captured.out
    assert "config ok" in captured.err


def test_module_entry_point_smoke(tmp_path):
    cfg_path = write_cfg(tmp_path, "scenario.snapshots = 4\n")
    proc = subprocess.run(
        [sys.executable, "-m", "imtsar.cli", "validate",
         "--config", str(cfg_path)],
        capture_output=True, text=True)
    assert proc.returncode == 0
    assert "scenario.snapshots = 4" in proc.stdout


# ---------------------------------------------------------------------------
# suite command

def test_suite_writes_comparison_and_passes_check(tmp_path, capsys):
    out = tmp_path / "suite"
    code = run_cli(["suite", "--out", str(out), "--snapshots", "512",
                    "--check"])
    captured = capsys.readouterr()
    assert code == 0
    assert "smoke mode" in captured.err
    assert "check passed" in captured.out
    summary = (out / "summary.csv").read_text().splitlines()
    assert summary[0] == "scenario,in_at_1pct_db,margin_db,pass"
    assert [row.split(",")[0] for row in summary[1:]] == \
        list(engine.CASE_NAMES)
    verdicts = {row.split(",")[0]: row.split(",")[3] for row in summary[1:]}
    assert verdicts == {"baseline": "false", "case1": "false",
                        "case2": "true", "case3": "true"}
    comparison = (out / "comparison.csv").read_text().splitlines()
    assert comparison[0] == ("prob_exceeded_percent,baseline_db,case1_db,"
                             "case2_db,case3_db")
    percents = [float(r.split(",")[0]) for r in comparison[1:]]
    assert percents == sorted(percents, reverse=True)
    assert any(p == 1.0 for p in percents)
    for name in engine.CASE_NAMES:
        assert (out / f"ccdf_{name}.csv").exists()
        assert (out / f"manifest_{name}.txt").exists()


def test_suite_check_mismatch_exits_3(tmp_path, capsys, monkeypatch):
    monkeypatch.setitem(cli.EXPECTED_CASE_PASS, "baseline", True)
    out = tmp_path / "suite"
    code = run_cli(["suite", "--out", str(out), "--snapshots", "8",
                    "--check"])
    assert code == 3
    assert "check failed: baseline" in capsys.readouterr().err


def test_suite_without_check_always_reports_zero(tmp_path, capsys,
                                                 monkeypatch):
    monkeypatch.setitem(cli.EXPECTED_CASE_PASS, "baseline", True)
    out = tmp_path / "suite"
    assert run_cli(["suite", "--out", str(out), "--snapshots", "8"]) == 0
    capsys.readouterr()
