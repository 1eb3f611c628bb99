"""Snapshot computation backends.

The engine pre-draws every random number for a snapshot with NumPy, then
hands plain arrays to one of two interchangeable kernels:

- the NumPy kernel below (always available, the reference), and
- a compiled Cython kernel (:mod:`imtsar._core`) doing the same arithmetic
  in a single C loop, built at install time when a C compiler is present.

Both consume identical inputs, so backend choice never changes the random
stream; remaining differences are floating-point rounding at the 1e-9 dB
level.  Selection is a config value (``engine.backend`` / the
``ScenarioConfig.backend`` field): "python", "cython", or "auto".
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from imtsar import geometry as geo
from imtsar import imt_antenna as ant
from imtsar import propagation as prop
from imtsar.sar_antenna import SINC_3DB_SCALE as _SINC_SCALE

try:
    from imtsar import _core
except ImportError:
    _core = None


def cython_available() -> bool:
    return _core is not None


def resolve_backend(requested: str) -> str:
    """Map a backend request onto what this installation can run."""
    if requested == "auto":
        return "cython" if cython_available() else "python"
    if requested == "cython":
        if not cython_available():
            raise RuntimeError("the compiled kernel is not installed; "
                               "rebuild with a C compiler or use backend "
                               "'python' or 'auto'")
        return "cython"
    if requested == "python":
        return "python"
    raise ValueError(f"unknown backend {requested!r}")


@dataclass(frozen=True)
class KernelContext:
    """Immutable per-scenario constants shared by every snapshot."""

    sat_pos_km: np.ndarray          # (3,)
    boresight: np.ndarray           # (3,)
    v_axis: np.ndarray              # (3,)
    h_axis: np.ndarray              # (3,)
    half_elev_bw_deg: float
    half_az_bw_deg: float
    zone_correction_db: float
    bs_alt_km: float
    mech_downtilt_deg: float
    frequency_ghz: float
    entry_power_dbw: float          # radiated in-band power per entry, dBW
    noise_dbw: float
    polarization_db: float
    in_floor_db: float
    v_taper: np.ndarray             # (n_v,)
    h_taper: np.ndarray             # (n_h,)
    denominator_db: np.ndarray | None   # (n_etilt, n_scan), 1 deg grid
    denom_etilt0_deg: float
    denom_scan0_deg: float
    sar_table_v: np.ndarray | None
    sar_table_h: np.ndarray | None
    sar_table_g: np.ndarray | None
    sar_peak_dbi: float
    sar_elev_bw_deg: float
    sar_az_bw_deg: float
    sar_floor_dbi: float


@dataclass(frozen=True)
class SnapshotDraws:
    """One snapshot's pre-drawn randomness, already mapped to model units."""

    lon_deg: np.ndarray
    lat_deg: np.ndarray
    bearing_deg: np.ndarray
    etilt_deg: np.ndarray
    scan_deg: np.ndarray
    clutter_gauss: np.ndarray   # standard-normal inverse of the location draw
    clutter_q: np.ndarray       # the uniform (0,1) location draw itself


def entries_python(ctx: KernelContext, d: SnapshotDraws, *,
                   fixed_tx_gain_dbi: float | None = None,
                   fixed_rx_gain_dbi: float | None = None,
                   clutter_enabled: bool = True) -> np.ndarray:
    """Per-station I/N entries in dB; the NumPy reference kernel.

    The keyword overrides support degenerate diagnostic configurations
    (fixed gains, clutter off); the compiled kernel does not offer them.
    """
    bs = geo.ecef_arrays(d.lon_deg, d.lat_deg, ctx.bs_alt_km)
    dist_km, elev, az = geo.look_arrays(bs, ctx.sat_pos_km)

    if fixed_tx_gain_dbi is not None:
        g_tx = np.full(dist_km.shape, fixed_tx_gain_dbi)
    else:
        theta_p, phi_p = geo.gcs_to_lcs_arrays(elev, az, d.bearing_deg,
                                               ctx.mech_downtilt_deg)
        psi_v = np.cos(np.radians(theta_p)) + np.sin(np.radians(d.etilt_deg))
        psi_h = (np.sin(np.radians(theta_p)) * np.sin(np.radians(phi_p))
                 - np.cos(np.radians(d.etilt_deg))
                 * np.sin(np.radians(d.scan_deg)))
        kv = np.arange(ctx.v_taper.size)
        kh = np.arange(ctx.h_taper.size)
        fv = np.abs(np.exp(1j * np.pi * np.outer(psi_v, kv))
                    @ ctx.v_taper.astype(complex))
        fh = np.abs(np.exp(1j * np.pi * np.outer(psi_h, kh))
                    @ ctx.h_taper.astype(complex))
        af = (fv * fh) ** 2 / (ctx.v_taper.size * ctx.h_taper.size)
        g_tx = ant.element_gain(theta_p, phi_p) + 10.0 * np.log10(
            np.maximum(af, 1e-300))
        if ctx.denominator_db is not None:
            ei = np.clip(np.rint(d.etilt_deg) - ctx.denom_etilt0_deg, 0,
                         ctx.denominator_db.shape[0] - 1).astype(int)
            si = np.clip(np.rint(d.scan_deg) - ctx.denom_scan0_deg, 0,
                         ctx.denominator_db.shape[1] - 1).astype(int)
            g_tx = g_tx - ctx.denominator_db[ei, si]

    if fixed_rx_gain_dbi is not None:
        g_rx = np.full(dist_km.shape, fixed_rx_gain_dbi)
    else:
        rel = bs - ctx.sat_pos_km
        rel = rel / np.linalg.norm(rel, axis=1, keepdims=True)
        along = rel @ ctx.boresight
        v_off = np.degrees(np.arctan2(rel @ ctx.v_axis, along))
        h_off = np.degrees(np.arctan2(rel @ ctx.h_axis, along))
        in_beam = ((v_off / ctx.half_elev_bw_deg) ** 2
                   + (h_off / ctx.half_az_bw_deg) ** 2) <= 1.0
        if ctx.sar_table_g is not None:
            g_rx = _bilinear(ctx.sar_table_v, ctx.sar_table_h,
                             ctx.sar_table_g, v_off, h_off)
        else:
            cut_v = np.abs(np.sinc(_SINC_SCALE * v_off / ctx.sar_elev_bw_deg))
            cut_h = np.abs(np.sinc(_SINC_SCALE * h_off / ctx.sar_az_bw_deg))
            g_rx = np.maximum(
                ctx.sar_peak_dbi
                + 20.0 * np.log10(np.maximum(cut_v, 1e-30))
                + 20.0 * np.log10(np.maximum(cut_h, 1e-30)),
                ctx.sar_floor_dbi)
        g_rx = g_rx + np.where(in_beam, 0.0, ctx.zone_correction_db)

    pl = prop.fspl_db(dist_km, ctx.frequency_ghz)
    if clutter_enabled:
        cl = _clutter_db(ctx.frequency_ghz, elev, d.clutter_q, d.clutter_gauss)
    else:
        cl = 0.0

    entries = (ctx.entry_power_dbw + g_tx + g_rx - pl - cl
               - ctx.noise_dbw - ctx.polarization_db)
    return np.maximum(entries, ctx.in_floor_db)


def _bilinear(v_ax, h_ax, grid, v, h):
    v = np.clip(v, v_ax[0], v_ax[-1])
    h = np.clip(h, h_ax[0], h_ax[-1])
    vi = np.clip(np.searchsorted(v_ax, v) - 1, 0, v_ax.size - 2)
    hi = np.clip(np.searchsorted(h_ax, h) - 1, 0, h_ax.size - 2)
    fv = (v - v_ax[vi]) / (v_ax[vi + 1] - v_ax[vi])
    fh = (h - h_ax[hi]) / (h_ax[hi + 1] - h_ax[hi])
    return ((1 - fv) * (1 - fh) * grid[vi, hi]
            + fv * (1 - fh) * grid[vi + 1, hi]
            + (1 - fv) * fh * grid[vi, hi + 1]
            + fv * fh * grid[vi + 1, hi + 1])


def _clutter_db(f_ghz, elev_deg, q, gauss):
    """Statistical clutter loss with the normal deviate supplied by the
    caller (so compiled and NumPy kernels share the exact quantile)."""
    k1 = 93.0 * f_ghz ** 0.175
    angle = 0.05 * (1.0 - elev_deg / 90.0) + np.pi * elev_deg / 180.0
    cot = np.cos(angle) / np.sin(angle)
    base = -k1 * np.log1p(-q) * cot
    expo = 0.5 * (90.0 - elev_deg) / 90.0
    return base ** expo - 1.0 - 0.6 * gauss


def aggregate_entries_db(entries: np.ndarray, floor_db: float) -> float:
    """Linear power sum of dB entries, floored against underflow."""
    lin = float(np.sum(10.0 ** (np.asarray(entries, dtype=float) / 10.0)))
    if lin <= 10.0 ** (floor_db / 10.0):
        return floor_db
    return 10.0 * np.log10(lin)


def snapshot_python(ctx: KernelContext, d: SnapshotDraws) -> float:
    return aggregate_entries_db(entries_python(ctx, d), ctx.in_floor_db)


def snapshot_cython(ctx: KernelContext, d: SnapshotDraws) -> float:
    return _core.snapshot_aggregate(
        ctx.sat_pos_km, ctx.boresight, ctx.v_axis, ctx.h_axis,
        ctx.half_elev_bw_deg, ctx.half_az_bw_deg,
        ctx.zone_correction_db, ctx.bs_alt_km, ctx.mech_downtilt_deg,
        ctx.frequency_ghz, ctx.entry_power_dbw, ctx.noise_dbw,
        ctx.polarization_db, ctx.in_floor_db,
        ctx.v_taper, ctx.h_taper,
        ctx.denominator_db if ctx.denominator_db is not None else np.empty((0, 0)),
        ctx.denom_etilt0_deg, ctx.denom_scan0_deg,
        ctx.sar_table_v if ctx.sar_table_v is not None else np.empty(0),
        ctx.sar_table_h if ctx.sar_table_h is not None else np.empty(0),
        ctx.sar_table_g if ctx.sar_table_g is not None else np.empty((0, 0)),
        ctx.sar_peak_dbi, ctx.sar_elev_bw_deg, ctx.sar_az_bw_deg,
        ctx.sar_floor_dbi,
        d.lon_deg, d.lat_deg, d.bearing_deg, d.etilt_deg, d.scan_deg,
        d.clutter_gauss, d.clutter_q)


SNAPSHOT_FNS = {"python": snapshot_python, "cython": snapshot_cython}
