"""Acceptance gate: the headline figures, one test per claim.

Each test prints its measured numbers, so a ``pytest -v -s`` transcript
of this module doubles as the sign-off sheet.  The end-to-end checks
share five full-size Monte Carlo runs (163840 snapshots each) through a
module fixture; budget roughly seven minutes for the whole file on one
core.  Progress lines go straight to the terminal while those runs are
in flight.

The spaceborne receive pattern defaults to the parametric fallback.
Point IMTSAR_ACCEPTANCE_SAR_TABLE at a measured RS.2043 gain table to
run the end-to-end checks against it; the baseline exceedance window
then tightens from +/-3 dB to +/-1.5 dB.
"""

import collections
import math
import os
import sys
import time

import numpy as np
import pytest
from scipy import stats

from imtsar import cli, engine
from imtsar import deployment as dep
from imtsar import geometry as geo
from imtsar import imt_antenna as ant
from imtsar import propagation as prop

FULL_SNAPSHOTS = 163840
SEED = 1
TABLE_ENV = "IMTSAR_ACCEPTANCE_SAR_TABLE"

_FullRun = collections.namedtuple("_FullRun", "samples ccdf report elapsed")


def _full_config(name: str) -> engine.ScenarioConfig:
    bla = 18.0 if name == "baseline18" else 50.0
    case = "baseline" if name == "baseline18" else name
    return engine.case_config(case, bla_deg=bla, snapshots=FULL_SNAPSHOTS,
                              seed=SEED,
                              sar_table_path=os.environ.get(TABLE_ENV))


@pytest.fixture(scope="module")
def full_runs():
    runs = {}
    for name in ("baseline", "baseline18", "case1", "case2", "case3"):
        t0 = time.perf_counter()
        samples = engine.scenario_samples(_full_config(name))
        elapsed = time.perf_counter() - t0
        ccdf = engine.CcdfTable.from_samples(samples)
        report = engine.ExceedanceReport(ccdf.value_at_exceedance())
        # bypass capture so the long fixture shows signs of life
        print(f"acceptance run {name}: i/n at 1% = "
              f"{report.in_at_1pct_db:+.3f} dB ({elapsed:.0f} s)",
              file=sys.__stderr__, flush=True)
        runs[name] = _FullRun(samples, ccdf, report, elapsed)
    return runs


def test_transmit_power_density_and_eirp():
    t0 = time.perf_counter()
    psd = ant.tx_power_spectral_density()
    rep = ant.eirp_report()
    assert psd == pytest.approx(-10.93, abs=0.01)
    assert rep.peak_eirp_dbm == pytest.approx(62.6, abs=0.1)
    assert rep.per_user_eirp_dbm == pytest.approx(57.0, abs=0.1)
    assert rep.trp_dual_dbm == pytest.approx(39.0, abs=0.1)
    assert rep.trp_single_dbm == pytest.approx(36.0, abs=0.1)
    assert time.perf_counter() - t0 < 1.0
    print(f"p_tx {psd:+.4f} dB(W/MHz); eirp peak {rep.peak_eirp_dbm:.2f} / "
          f"per-user {rep.per_user_eirp_dbm:.2f} dBm; trp "
          f"{rep.trp_dual_dbm:.2f} / {rep.trp_single_dbm:.2f} dBm")


def test_boresight_elevation_from_look_angle():
    t0 = time.perf_counter()
    alt = engine.SCENARIO_ALTITUDE_KM
    steep = geo.elevation_from_bla(50.0, alt)
    shallow = geo.elevation_from_bla(18.0, alt)
    assert steep == pytest.approx(34.43, abs=0.05)
    assert shallow == pytest.approx(70.57, abs=0.05)
    # the round-earth approximation note must state its 0.002 deg cost
    assert "0.002" in geo.elevation_from_bla.__doc__
    assert time.perf_counter() - t0 < 1.0
    print(f"elevation {steep:.3f} deg at bla 50, {shallow:.3f} deg at "
          f"bla 18 (altitude {alt:.2f} km)")


def test_zone_station_counts():
    t0 = time.perf_counter()
    plan = dep.ZonePlan(geo.GeodeticPosition(0.0, 0.0))
    counts = dep.active_bs_counts(plan, dep.DeploymentParams())
    assert counts.n1 == 63
    assert counts.n2 == 36
    # the suburban count follows the density formula; the alternate
    # narrative figure of 4 is retained only as a flagged constant
    assert counts.n3 == 18, (
        f"suburban formula count {counts.n3}, alternate narrative "
        f"count {dep.Z3_ALTERNATE_COUNT}")
    assert dep.Z3_ALTERNATE_COUNT == 4
    assert time.perf_counter() - t0 < 1.0
    print(f"active stations per operator {counts.per_zone()} "
          f"(suburban formula 18; flagged alternate "
          f"{dep.Z3_ALTERNATE_COUNT})")


def test_integrated_gain_envelopes():
    t0 = time.perf_counter()
    element = ant.element_integrated_gain_db()
    assert element == pytest.approx(-2.0, abs=0.3)

    rng = np.random.default_rng(7)
    et = rng.uniform(-10.0, 20.0, 200)
    sc = rng.uniform(-60.0, 60.0, 200)

    norm_u = ant.PatternNormalizer(ant.uniform_weights())
    tig_u = np.array([norm_u.total_integrated_gain(e, s)
                      for e, s in zip(et, sc)])
    # the uniform composite sweeps the published -2..0 dB band;
    # reproduce both endpoints rather than clip to them
    assert tig_u.min() == pytest.approx(-2.0, abs=0.5)
    assert tig_u.max() == pytest.approx(0.0, abs=0.5)

    norm_t = ant.PatternNormalizer(ant.taylor_weights())
    tig_t = np.array([norm_t.total_integrated_gain(e, s)
                      for e, s in zip(et, sc)])
    assert tig_t.min() >= -6.0
    assert tig_t.max() <= -3.0

    resid = np.array([norm_t.total_integrated_gain(e, s)
                      - norm_t.denominator_db(e, s)
                      for e, s in zip(et, sc)])
    assert np.all(np.abs(resid) <= 0.1)

    assert time.perf_counter() - t0 < 300.0
    print(f"element tig {element:+.3f} dB; uniform composite "
          f"[{tig_u.min():+.3f}, {tig_u.max():+.3f}]; taylor composite "
          f"[{tig_t.min():+.3f}, {tig_t.max():+.3f}]; normalized "
          f"residual max {np.abs(resid).max():.4f} dB over 200 steers")


def test_taylor_first_sidelobe():
    weights = ant.taylor_weights()
    sll = ant.first_sidelobe_level_db(weights.v_taper)
    assert sll <= -29.5
    print(f"first sidelobe {sll:.2f} dB relative to peak")


def test_baseline_exceedance_full_runs(full_runs):
    run = full_runs["baseline"]
    assert run.elapsed < 1800.0
    excess = run.report.in_at_1pct_db - engine.PROTECTION_CRITERION_DB
    window = 1.5 if os.environ.get(TABLE_ENV) else 3.0
    assert excess == pytest.approx(12.5, abs=window), (
        f"bla 50 baseline exceeds the criterion by {excess:.2f} dB, "
        f"outside 12.5 +/- {window}")

    excess18 = (full_runs["baseline18"].report.in_at_1pct_db
                - engine.PROTECTION_CRITERION_DB)
    assert excess18 >= 6.9 - 1.5
    print(f"criterion exceeded by {excess:.2f} dB at bla 50 and "
          f"{excess18:.2f} dB at bla 18 ({FULL_SNAPSHOTS} snapshots, "
          f"{run.elapsed:.0f} s)")


def test_sensitivity_case_margins(full_runs):
    base = full_runs["baseline"].report
    c1 = full_runs["case1"].report
    c2 = full_runs["case2"].report
    c3 = full_runs["case3"].report
    delta = c1.in_at_1pct_db - base.in_at_1pct_db

    failures = []
    if not 0.1 <= delta <= 0.6:
        failures.append(f"case1 minus baseline = {delta:+.3f} dB, "
                        f"outside [0.1, 0.6]")
    if c2.margin_db < 0.0:
        failures.append(f"case2 margin = {c2.margin_db:+.3f} dB, below 0")
    if c3.margin_db < 0.0:
        failures.append(f"case3 margin = {c3.margin_db:+.3f} dB, below 0")
    if c3.margin_db > 1.5:
        failures.append(f"case3 margin = {c3.margin_db:+.3f} dB, above "
                        f"the 1.5 dB cap")

    detail = (f"i/n at 1%: baseline {base.in_at_1pct_db:+.3f}, case1 "
              f"{c1.in_at_1pct_db:+.3f}, case2 {c2.in_at_1pct_db:+.3f}, "
              f"case3 {c3.in_at_1pct_db:+.3f} dB")
    print(detail + f"; case1 delta {delta:+.3f} dB; margins case2 "
          f"{c2.margin_db:+.3f}, case3 {c3.margin_db:+.3f} dB")
    assert not failures, (
        "; ".join(failures) + ". " + detail + ". These windows track the "
        "shape of the spaceborne receive-gain map: the parametric "
        "fallback concentrates the aggregate in a few near-boresight "
        "entries, which stretches the operator-count delta and the "
        "normalized single-operator margin relative to a measured "
        "RS.2043 gain table.")


def test_sampling_distributions():
    budgets = {}

    t0 = time.perf_counter()
    raw = dep.DeploymentParams(min_ue_ground_m=0.0)
    _, dist = dep.draw_ue_arrays(20000, raw, np.random.default_rng(123))
    ks = stats.kstest(dist, "rayleigh", args=(0.0, raw.rayleigh_sigma_m))
    assert ks.pvalue > 0.01
    budgets["ue distance"] = time.perf_counter() - t0

    t0 = time.perf_counter()
    az, _ = dep.draw_ue_arrays(200000, dep.DeploymentParams(),
                               np.random.default_rng(29))
    assert np.all(np.abs(az) <= 60.0)
    expected_std = 30.0 * stats.truncnorm.std(-2.0, 2.0)
    assert az.std() == pytest.approx(expected_std, abs=0.3)
    budgets["azimuth"] = time.perf_counter() - t0

    t0 = time.perf_counter()
    steer = dep.steering_distribution_report(50000, dep.DeploymentParams(),
                                             np.random.default_rng(5))
    assert np.all(np.abs(steer.scan_deg) <= 60.0)
    assert np.all(steer.vertical_deg >= 90.0)
    assert np.all(steer.vertical_deg <= 120.0)
    budgets["steering cone"] = time.perf_counter() - t0

    t0 = time.perf_counter()
    ps = np.linspace(0.1, 99.9, 300)
    for elev in (0.0, 5.0, 20.0, 34.43, 70.57, 90.0):
        q = prop.clutter_loss_db(10.2, elev, ps)
        assert np.all(np.diff(q) >= 0.0)
    elevations = np.linspace(0.0, 90.0, 181)
    for p in (1.0, 10.0, 50.0, 90.0):
        # near zenith the fit wiggles by a few hundredths of a dB
        losses = prop.clutter_loss_db(10.2, elevations, p)
        assert np.all(np.diff(losses) <= 0.05)
    budgets["clutter quantiles"] = time.perf_counter() - t0

    t0 = time.perf_counter()
    entries = np.random.default_rng(17).uniform(-160.0, -120.0, 500)
    oracle = 10.0 * math.log10(math.fsum(10.0 ** (entries / 10.0)))
    assert abs(engine.aggregate_in(entries) - oracle) <= 1e-9
    budgets["power sum"] = time.perf_counter() - t0

    assert all(b < 60.0 for b in budgets.values()), budgets
    print("; ".join(f"{k} {v:.1f} s" for k, v in budgets.items())
          + f"; ks p-value {ks.pvalue:.3f}")


def test_reproducibility(full_runs):
    cfg = engine.case_config("baseline", snapshots=3089, seed=SEED)
    serial = engine.scenario_samples(cfg)
    parallel = engine.scenario_samples(cfg, workers=3)
    assert np.array_equal(serial, parallel)
    csv_serial = cli.ccdf_csv(engine.CcdfTable.from_samples(serial))
    csv_parallel = cli.ccdf_csv(engine.CcdfTable.from_samples(parallel))
    assert csv_serial == csv_parallel

    half = FULL_SNAPSHOTS // 2
    samples = full_runs["baseline"].samples
    first = engine.CcdfTable.from_samples(samples[:half])
    second = engine.CcdfTable.from_samples(samples[half:])
    gap = abs(first.value_at_exceedance() - second.value_at_exceedance())
    assert gap <= 0.2
    print(f"serial and 3-worker csv byte-identical; disjoint {half}"
          f"-snapshot halves differ by {gap:.3f} dB at 1%")
