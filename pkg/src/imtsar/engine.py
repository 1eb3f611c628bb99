"""Monte Carlo engine: snapshot-level aggregate I/N, the simulation loop,
CCDF accumulation, and the exceedance margin against the protection
criterion of I/N = -6 dB at 1% of time.

A snapshot drops the active stations of every operator, serves one user
per station (fixing each panel's electrical steering), draws one clutter
location percentage per station, and power-sums the per-station I/N
entries at the fixed satellite geometry.  Scenario randomness is keyed
counter-mode: snapshot k of seed s uses Philox(key=[s, k]), so snapshots
are independent work units and serial and parallel runs are identical
byte for byte.

The satellite is static per scenario (the study is a worst-case static
analysis): one position for each of the two beam look angles, both
chosen so the footprint lands on the same metropolitan center.  The
altitude is back-derived from the published look-angle/elevation pair
rather than taken from any table.
"""

from __future__ import annotations

import math
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass, fields
from functools import lru_cache

import numpy as np
from scipy.special import ndtri

from imtsar import _kernels
from imtsar import deployment as dep
from imtsar import imt_antenna as ant
from imtsar import propagation as prop
from imtsar import sar_antenna as sar
from imtsar.geometry import (
    BeamPointing,
    GeodeticPosition,
    SatelliteState,
    altitude_for_elevation,
    ecef_from_geodetic,
    gcs_to_lcs,
    slant_range_and_look,
)

PROTECTION_CRITERION_DB = -6.0
EXCEEDANCE_PERCENT = 1.0
IN_FLOOR_DB = -400.0          # linear-domain underflow guard, never at 1%

FREQUENCY_GHZ = 10.2
IMT_BAND_MHZ = (10000.0, 10400.0)
IMT_CHANNEL_MHZ = 100.0

# fixed scenario positions (lon east, lat north) per beam look angle,
# both footprints centered on the same city
SAT_POSITIONS = {50.0: (-52.8908, -23.4922), 18.0: (-48.0187, -23.6060)}

# the study never states the platform altitude; it follows from the
# published look-angle/elevation pair (50 deg, 34.43 deg), about 489 km
SCENARIO_ALTITUDE_KM = altitude_for_elevation(50.0, 34.43)

CASE_NAMES = ("baseline", "case1", "case2", "case3")
# (operators, ssl_enabled); noise bandwidth follows as 100 MHz/operator
_CASE_PARAMS = {
    "baseline": (4, False),
    "case1": (1, False),
    "case2": (4, True),
    "case3": (1, True),
}

_CHUNK = 1024
_MIN_UNIFORM = 2.0 ** -53     # keeps the clutter quantile off exactly 0

# field names a scenario may override on the drop model and on the array;
# operators and z3_count_override stay scenario-level, the element pattern
# is not a scalar knob
DEPLOYMENT_OVERRIDE_KEYS = frozenset(
    f.name for f in fields(dep.DeploymentParams)) - {
        "operators", "z3_count_override"}
ARRAY_OVERRIDE_KEYS = frozenset(
    f.name for f in fields(ant.ArrayConfig)) - {"element"}


def _normalized_overrides(pairs, allowed: frozenset, label: str,
                          defaults) -> tuple:
    out = []
    seen = set()
    for name, value in pairs:
        name = str(name)
        if name not in allowed:
            raise ValueError(f"unknown {label} override {name!r}")
        if name in seen:
            raise ValueError(f"duplicate {label} override {name!r}")
        seen.add(name)
        # a pair restating the default changes nothing; dropping it keeps
        # config equality (and the context cache) semantic
        if value != getattr(defaults, name):
            out.append((name, value))
    return tuple(sorted(out))


@dataclass(frozen=True)
class ScenarioConfig:
    """One simulation scenario; hashable and safe to ship to workers.

    ``noise_bandwidth_mhz`` may be left None to follow the 100 MHz per
    operator rule; setting it to anything else is rejected, because every
    studied case scales the receiver reference bandwidth with the number
    of co-frequency operators.
    """

    bla_deg: float = 50.0
    operators: int = 4
    ssl_enabled: bool = False
    noise_bandwidth_mhz: float | None = None
    snapshots: int = 163840
    seed: int = 1
    backend: str = "auto"
    sar_table_path: str | None = None
    z3_count_override: int | None = None
    frequency_ghz: float = FREQUENCY_GHZ
    clutter_enabled: bool = True
    fixed_tx_gain_dbi: float | None = None
    fixed_rx_gain_dbi: float | None = None
    # (name, value) pairs overriding DeploymentParams / ArrayConfig fields;
    # tuples so the config stays hashable for the context cache
    deployment_overrides: tuple = ()
    array_overrides: tuple = ()

    def __post_init__(self):
        object.__setattr__(self, "deployment_overrides", _normalized_overrides(
            self.deployment_overrides, DEPLOYMENT_OVERRIDE_KEYS, "deployment",
            dep.DeploymentParams()))
        object.__setattr__(self, "array_overrides", _normalized_overrides(
            self.array_overrides, ARRAY_OVERRIDE_KEYS, "array",
            ant.ArrayConfig()))
        if self.bla_deg not in SAT_POSITIONS:
            raise ValueError(f"no satellite position for bla_deg="
                             f"{self.bla_deg}; known: "
                             f"{sorted(SAT_POSITIONS)}")
        if self.operators < 1:
            raise ValueError("operators must be at least 1")
        if self.snapshots < 1:
            raise ValueError("snapshots must be at least 1")
        if not 0 <= self.seed < 2 ** 64:
            raise ValueError("seed must fit in 64 bits")
        if self.backend not in ("auto", "python", "cython"):
            raise ValueError(f"unknown backend {self.backend!r}")
        if self.frequency_ghz <= 0.0:
            raise ValueError("frequency must be positive")
        expected = IMT_CHANNEL_MHZ * self.operators
        if (self.noise_bandwidth_mhz is not None
                and self.noise_bandwidth_mhz != expected):
            raise ValueError(
                f"noise_bandwidth_mhz={self.noise_bandwidth_mhz} breaks the "
                f"100 MHz per operator rule (expected {expected})")
        # an accepted explicit value always equals the rule value, so store
        # the rule form; spelling the default out never changes identity
        object.__setattr__(self, "noise_bandwidth_mhz", None)

    @property
    def resolved_noise_bandwidth_mhz(self) -> float:
        if self.noise_bandwidth_mhz is not None:
            return float(self.noise_bandwidth_mhz)
        return IMT_CHANNEL_MHZ * self.operators

    @property
    def has_overrides(self) -> bool:
        """True when a diagnostic override forces the NumPy path."""
        return (not self.clutter_enabled
                or self.fixed_tx_gain_dbi is not None
                or self.fixed_rx_gain_dbi is not None)


@dataclass(frozen=True)
class SnapshotResult:
    i_agg_over_n_db: float
    entries_db: np.ndarray | None = None

    def __post_init__(self):
        if not math.isfinite(self.i_agg_over_n_db):
            raise ValueError("aggregate I/N must be finite")


@dataclass(frozen=True)
class CcdfTable:
    """Empirical exceedance curve over the snapshot ensemble."""

    values_db: np.ndarray      # sorted ascending

    @classmethod
    def from_samples(cls, samples) -> "CcdfTable":
        s = np.asarray(samples, dtype=float)
        if s.size == 0:
            raise ValueError("no samples")
        if not np.all(np.isfinite(s)):
            raise ValueError("samples must be finite")
        return cls(np.sort(s))

    @property
    def prob_exceeded(self) -> np.ndarray:
        """P(X >= value) per sorted value; starts at 1, ends at 1/n."""
        n = self.values_db.size
        return (n - np.arange(n, dtype=float)) / n

    def value_at_exceedance(self, percent: float = EXCEEDANCE_PERCENT) -> float:
        """Nearest-rank order statistic; no interpolation."""
        if not 0.0 < percent < 100.0:
            raise ValueError("exceedance percentage must lie in (0, 100)")
        n = self.values_db.size
        idx = math.ceil((100.0 - percent) / 100.0 * n) - 1
        return float(self.values_db[max(0, min(idx, n - 1))])


@dataclass(frozen=True)
class ExceedanceReport:
    in_at_1pct_db: float
    criterion_db: float = PROTECTION_CRITERION_DB

    @property
    def margin_db(self) -> float:
        return self.criterion_db - self.in_at_1pct_db

    @property
    def passed(self) -> bool:
        return self.margin_db >= 0.0


def entry_in_db(p_tx_total_dbw: float, g_tx_dbi: float, g_rx_dbi: float,
                pl_db: float, cl_db: float, n_rx_dbw: float,
                l_p_db: float) -> float:
    """One interferer's I/N from its link-budget terms, dB."""
    return p_tx_total_dbw + g_tx_dbi + g_rx_dbi - pl_db - cl_db - n_rx_dbw - l_p_db


def aggregate_in(entries) -> float:
    """Power sum of per-interferer I/N entries, dB."""
    arr = np.asarray(entries, dtype=float)
    if arr.size == 0:
        raise ValueError("cannot aggregate an empty entry list")
    return _kernels.aggregate_entries_db(arr, IN_FLOOR_DB)


def satellite_state(bla_deg: float) -> SatelliteState:
    """The fixed scenario platform for one beam look angle."""
    lon, lat = SAT_POSITIONS[bla_deg]
    geodetic = GeodeticPosition(lon, lat, SCENARIO_ALTITUDE_KM)
    return SatelliteState(position_km=ecef_from_geodetic(geodetic),
                          velocity_km_s=None, geodetic=geodetic)


def channel_overlap_mhz(channel_lo_mhz: float,
                        sensor: sar.SarSensor = sar.DEFAULT_SENSOR) -> float:
    """Portion of one IMT channel inside the SAR receive band, MHz."""
    sar_lo = sensor.center_freq_mhz - sensor.rf_bandwidth_mhz / 2.0
    sar_hi = sensor.center_freq_mhz + sensor.rf_bandwidth_mhz / 2.0
    return max(0.0, min(channel_lo_mhz + IMT_CHANNEL_MHZ, sar_hi)
               - max(channel_lo_mhz, sar_lo))


@dataclass(frozen=True)
class _ScenarioContext:
    kernel: _kernels.KernelContext
    backend: str
    plan: dep.ZonePlan
    params: dep.DeploymentParams
    drop_counts: tuple[int, int, int]   # per zone, already times operators
    sat: SatelliteState
    pointing: BeamPointing
    view: sar.SarViewGeometry
    weights: ant.WeightMatrix
    normalizer: ant.PatternNormalizer | None
    table: sar.SarGainTable | None
    array: ant.ArrayConfig


@lru_cache(maxsize=8)
def _scenario_context(cfg: ScenarioConfig) -> _ScenarioContext:
    sat = satellite_state(cfg.bla_deg)
    pointing = BeamPointing(cfg.bla_deg, azimuth_deg=90.0)
    sensor = sar.DEFAULT_SENSOR
    view = sar.SarViewGeometry(sat, pointing, sensor)
    plan = dep.ZonePlan(center=view.center)
    params = dep.DeploymentParams(operators=cfg.operators,
                                  z3_count_override=cfg.z3_count_override,
                                  **dict(cfg.deployment_overrides))
    acfg = ant.ArrayConfig(**dict(cfg.array_overrides))
    counts = dep.active_bs_counts(plan, params)
    drop_counts = tuple(n * cfg.operators for n in counts.per_zone())

    table = (sar.SarGainTable.from_csv(cfg.sar_table_path)
             if cfg.sar_table_path else None)
    # sidelobe suppression swaps the uniform excitation for the Taylor
    # vertical taper; the tapered pattern radiates less than it is fed, so
    # a per-steering denominator restores unit total integrated gain
    if cfg.ssl_enabled:
        weights = ant.taylor_weights(n=acfg.n_v, cfg=acfg)
        normalizer = ant.PatternNormalizer(weights, cfg=acfg)
    else:
        weights = ant.uniform_weights(acfg)
        normalizer = None
    if normalizer is not None:
        et, sc, tbl = normalizer.denominator_table()
        denom, et0, sc0 = tbl, float(et[0]), float(sc[0])
    else:
        denom, et0, sc0 = None, 0.0, 0.0

    # every operator channel sits inside the 1200 MHz receive band, so an
    # entry carries the full channel power against the widened noise floor
    in_band = min(channel_overlap_mhz(lo) for lo in np.arange(
        IMT_BAND_MHZ[0], IMT_BAND_MHZ[1], IMT_CHANNEL_MHZ))
    entry_power = (ant.tx_power_spectral_density(acfg,
                                                 bandwidth_mhz=IMT_CHANNEL_MHZ)
                   + 10.0 * math.log10(in_band))
    noise = sar.sar_noise_power(cfg.resolved_noise_bandwidth_mhz,
                                sensor.noise_figure_db)

    kernel = _kernels.KernelContext(
        sat_pos_km=sat.position_km,
        boresight=view.boresight,
        v_axis=view.v_axis,
        h_axis=view.h_axis,
        half_elev_bw_deg=sensor.elev_bw_deg / 2.0,
        half_az_bw_deg=sensor.az_bw_deg / 2.0,
        zone_correction_db=sensor.zone_correction_db,
        bs_alt_km=params.bs_height_m / 1000.0,
        mech_downtilt_deg=params.mech_downtilt_deg,
        frequency_ghz=cfg.frequency_ghz,
        entry_power_dbw=entry_power,
        noise_dbw=noise,
        polarization_db=prop.POLARIZATION_LOSS_DB,
        in_floor_db=IN_FLOOR_DB,
        v_taper=np.asarray(weights.v_taper, dtype=float),
        h_taper=np.asarray(weights.h_taper, dtype=float),
        denominator_db=denom,
        denom_etilt0_deg=et0,
        denom_scan0_deg=sc0,
        sar_table_v=table.v_deg if table else None,
        sar_table_h=table.h_deg if table else None,
        sar_table_g=table.gain_dbi if table else None,
        sar_peak_dbi=sensor.peak_gain_dbi,
        sar_elev_bw_deg=sensor.elev_bw_deg,
        sar_az_bw_deg=sensor.az_bw_deg,
        sar_floor_dbi=sar.PARAMETRIC_FLOOR_DBI,
    )
    backend = _kernels.resolve_backend(cfg.backend)
    if cfg.has_overrides:
        backend = "python"      # diagnostic paths live in NumPy only
    return _ScenarioContext(kernel, backend, plan, params, drop_counts,
                            sat, pointing, view, weights, normalizer, table,
                            acfg)


def snapshot_rng(seed: int, snapshot_index: int) -> np.random.Generator:
    """Counter-keyed generator: one independent stream per snapshot."""
    return np.random.Generator(np.random.Philox(key=[seed, snapshot_index]))


def _snapshot_draws(ctx: _ScenarioContext, seed: int,
                    k: int) -> _kernels.SnapshotDraws:
    """All randomness of snapshot ``k`` in the documented fixed order:
    station drops, then user offsets, then clutter percentages."""
    rng = snapshot_rng(seed, k)
    st = dep.drop_station_arrays(ctx.plan, ctx.drop_counts, ctx.params, rng)
    az, dist = dep.draw_ue_arrays(len(st), ctx.params, rng)
    etilt, scan, _ = dep.steering_from_ue(dist, az, ctx.params)
    q = np.maximum(rng.uniform(size=len(st)), _MIN_UNIFORM)
    return _kernels.SnapshotDraws(
        lon_deg=st.lon_deg, lat_deg=st.lat_deg, bearing_deg=st.bearing_deg,
        etilt_deg=etilt, scan_deg=scan,
        clutter_gauss=ndtri(1.0 - q), clutter_q=q)


def run_snapshot(cfg: ScenarioConfig, snapshot_index: int,
                 keep_entries: bool = False) -> SnapshotResult:
    """One Monte Carlo realization; deterministic in (seed, index)."""
    if not 0 <= snapshot_index:
        raise ValueError("snapshot index must be non-negative")
    ctx = _scenario_context(cfg)
    draws = _snapshot_draws(ctx, cfg.seed, snapshot_index)
    if ctx.backend == "cython" and not keep_entries:
        agg = _kernels.snapshot_cython(ctx.kernel, draws)
        return SnapshotResult(float(agg))
    entries = _kernels.entries_python(
        ctx.kernel, draws,
        fixed_tx_gain_dbi=cfg.fixed_tx_gain_dbi,
        fixed_rx_gain_dbi=cfg.fixed_rx_gain_dbi,
        clutter_enabled=cfg.clutter_enabled)
    agg = _kernels.aggregate_entries_db(entries, IN_FLOOR_DB)
    return SnapshotResult(float(agg), entries if keep_entries else None)


def _run_block(cfg: ScenarioConfig, start: int, stop: int) -> np.ndarray:
    ctx = _scenario_context(cfg)
    fn = _kernels.SNAPSHOT_FNS[ctx.backend]
    out = np.empty(stop - start)
    if cfg.has_overrides:
        for k in range(start, stop):
            out[k - start] = run_snapshot(cfg, k).i_agg_over_n_db
        return out
    for k in range(start, stop):
        out[k - start] = fn(ctx.kernel, _snapshot_draws(ctx, cfg.seed, k))
    return out


def scenario_samples(cfg: ScenarioConfig,
                     workers: int | None = None) -> np.ndarray:
    """Aggregate I/N of every snapshot, ordered by snapshot index.

    ``workers`` > 1 fans blocks of snapshots out to processes; results
    land by index, so the output is bit-identical to a serial run.
    """
    n = cfg.snapshots
    if workers is None or workers <= 1:
        return _run_block(cfg, 0, n)
    out = np.empty(n)
    spans = [(s, min(s + _CHUNK, n)) for s in range(0, n, _CHUNK)]
    with ProcessPoolExecutor(max_workers=workers) as pool:
        futures = {pool.submit(_run_block, cfg, a, b): (a, b)
                   for a, b in spans}
        for fut, (a, b) in futures.items():
            out[a:b] = fut.result()
    return out


def run_scenario(cfg: ScenarioConfig, workers: int | None = None
                 ) -> tuple[CcdfTable, ExceedanceReport]:
    """Full Monte Carlo: CCDF plus the margin against the criterion."""
    samples = scenario_samples(cfg, workers)
    ccdf = CcdfTable.from_samples(samples)
    report = ExceedanceReport(ccdf.value_at_exceedance(EXCEEDANCE_PERCENT))
    return ccdf, report


def case_config(name: str, bla_deg: float = 50.0, snapshots: int = 163840,
                seed: int = 1, backend: str = "auto",
                sar_table_path: str | None = None) -> ScenarioConfig:
    """Scenario for one of the four studied sharing cases.

    baseline: four operators, no normalization, 400 MHz noise reference;
    case1: one operator, 100 MHz; case2: four operators with the pattern
    normalization active; case3: one operator with normalization.
    """
    if name not in _CASE_PARAMS:
        raise ValueError(f"unknown case {name!r}; expected one of "
                         f"{CASE_NAMES}")
    operators, ssl = _CASE_PARAMS[name]
    return ScenarioConfig(bla_deg=bla_deg, operators=operators,
                          ssl_enabled=ssl, snapshots=snapshots, seed=seed,
                          backend=backend, sar_table_path=sar_table_path)


def run_case_suite(bla_deg: float = 50.0, snapshots: int = 163840,
                   seed: int = 1, backend: str = "auto",
                   sar_table_path: str | None = None,
                   workers: int | None = None
                   ) -> dict[str, ExceedanceReport]:
    """The four studied cases under one seed, for paired comparisons."""
    reports = {}
    for name in CASE_NAMES:
        cfg = case_config(name, bla_deg, snapshots, seed, backend,
                          sar_table_path)
        reports[name] = run_scenario(cfg, workers)[1]
    return reports


def single_entry_in(bs: dep.BaseStation, ue_drop: dep.UeDrop,
                    sat: SatelliteState | None = None,
                    pointing: BeamPointing | None = None,
                    clutter_pct: float = 50.0,
                    cfg: ScenarioConfig = ScenarioConfig()) -> float:
    """One interferer's I/N via the object interfaces, dB.

    The readable scalar composition of the same terms the array kernels
    evaluate; used for audits and spot checks, not in the hot loop.
    """
    ctx = _scenario_context(cfg)
    sat = sat if sat is not None else ctx.sat
    pointing = pointing if pointing is not None else ctx.pointing
    view = (ctx.view if sat is ctx.sat and pointing is ctx.pointing
            else sar.SarViewGeometry(sat, pointing))

    dist_km, elev, az = slant_range_and_look(bs.position, sat)
    local = gcs_to_lcs(elev, az, bs.panel)
    if cfg.fixed_tx_gain_dbi is not None:
        g_tx = cfg.fixed_tx_gain_dbi
    else:
        g_tx = ant.composite_gain(local.theta_deg, local.phi_deg,
                                  ue_drop.steering.etilt_deg,
                                  ue_drop.steering.scan_deg,
                                  weights=ctx.weights, cfg=ctx.array,
                                  normalizer=ctx.normalizer)
    if cfg.fixed_rx_gain_dbi is not None:
        g_rx = cfg.fixed_rx_gain_dbi
    else:
        h, v, zone = view.off_axis_of_bs(bs.position)
        g_rx = sar.sar_gain(h, v, zone, table=ctx.table)
    pl = prop.fspl_db(dist_km, cfg.frequency_ghz)
    cl = (prop.clutter_loss_db(cfg.frequency_ghz, elev, clutter_pct)
          if cfg.clutter_enabled else 0.0)
    return entry_in_db(ctx.kernel.entry_power_dbw, g_tx, g_rx, pl, cl,
                       ctx.kernel.noise_dbw, ctx.kernel.polarization_db)
